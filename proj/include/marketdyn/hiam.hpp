#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "marketdyn/dynamics.hpp"
#include "marketdyn/errors.hpp"
#include "marketdyn/parallel.hpp"
#include "marketdyn/params.hpp"
#include "marketdyn/rng.hpp"

namespace marketdyn {

// Finite-population stochastic market: K agents issue +/-1 buy/sell
// decisions each step; the first round(alpha*K) of them are speculators
// (their rule includes the trend term J*dbar), the rest are
// fundamentalists. The population average feeds back into the price.
struct HiamConfig {
    MarketParams params;
    std::size_t K;
    double p0;
    double dbar0;  // initial excess demand, in [-1, 1]
    std::size_t horizon;
    std::uint64_t seed;

    HiamConfig(MarketParams params_, std::size_t K_, double p0_, double dbar0_,
               std::size_t horizon_, std::uint64_t seed_)
        : params(std::move(params_)), K(K_), p0(p0_), dbar0(dbar0_), horizon(horizon_),
          seed(seed_) {
        if (K < 1) throw invalid_parameter("HiamConfig: K must be >= 1");
        if (!(std::abs(dbar0) <= 1.0))
            throw invalid_parameter("HiamConfig: |dbar0| must be <= 1");
        if (!std::isfinite(p0)) throw invalid_parameter("HiamConfig: p0 must be finite");
    }
};

// Stochastic trajectory. Prices are stored relative to the fundamental
// value; the shifted sequence obeys q[n+1] = q[n] + lambda*dbar[n] exactly,
// and price(n) = q[n] + V recovers the absolute price. Runs that differ
// only by a common shift of V and p0 therefore produce bit-identical
// shifted sequences under a shared seed.
struct HiamTrajectory {
    std::vector<double> shifted_prices;  // q_n = p_n - V
    std::vector<double> demands;         // dbar_n
    double V = 0.0;
    std::uint64_t seed = 0;

    std::size_t size() const { return demands.size(); }
    double price(std::size_t n) const { return shifted_prices[n] + V; }
};

inline std::size_t speculator_count(double alpha, std::size_t K) {
    return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(K)));
}

inline HiamTrajectory run_hiam(const HiamConfig& cfg) {
    const MarketParams& mp = cfg.params;
    const std::size_t S = speculator_count(mp.alpha, cfg.K);
    const CounterRng rng(cfg.seed);

    HiamTrajectory traj;
    traj.V = mp.V;
    traj.seed = cfg.seed;
    traj.shifted_prices.reserve(cfg.horizon + 1);
    traj.demands.reserve(cfg.horizon + 1);
    traj.shifted_prices.push_back(cfg.p0 - mp.V);
    traj.demands.push_back(cfg.dbar0);

    double q = traj.shifted_prices[0];
    double dbar = cfg.dbar0;
    for (std::size_t n = 1; n <= cfg.horizon; ++n) {
        q += mp.lambda * dbar;  // price update from the previous excess demand
        const double trend = mp.J * dbar;
        long long sum = 0;
        for (std::size_t k = 1; k <= cfg.K; ++k) {
            // v_n(k): the agent's deviation from the fundamental value,
            // drawn through the inverse cdf so the model and the analysis
            // share one distribution object. Ties sell.
            const double v = mp.dist.quantile(rng.uniform_open(n, k));
            const bool buy = (k <= S) ? (trend - (q - v) > 0.0) : (v - q > 0.0);
            sum += buy ? 1 : -1;
        }
        dbar = static_cast<double>(sum) / static_cast<double>(cfg.K);
        traj.shifted_prices.push_back(q);
        traj.demands.push_back(dbar);
    }
    return traj;
}

// Sup-distance over the horizon between the stochastic trajectory and the
// deterministic orbit started from the same initial pair.
inline double compare_to_deterministic(const HiamConfig& cfg) {
    const HiamTrajectory traj = run_hiam(cfg);
    const MarketParams& mp = cfg.params;
    double q = cfg.p0 - mp.V;
    double d = cfg.dbar0;
    double sup = 0.0;
    for (std::size_t n = 0; n <= cfg.horizon; ++n) {
        if (n > 0) {
            q += mp.lambda * d;
            d = g(mp, q, d);
        }
        sup = std::max(sup, std::abs(traj.demands[n] - d));
        sup = std::max(sup, std::abs(traj.shifted_prices[n] - q));
    }
    return sup;
}

struct ReplicaStats {
    double median = 0.0;
    double q1 = 0.0;  // lower quartile
    double q3 = 0.0;  // upper quartile
    std::vector<double> sup_errors;
};

// Runs compare_to_deterministic with seeds base_seed, base_seed+1, ... and
// returns order statistics of the sup-errors. Replicas are independent, so
// they run in parallel without affecting the result.
inline ReplicaStats replicate(const HiamConfig& cfg, std::size_t n_replicas,
                              std::uint64_t base_seed) {
    if (n_replicas < 1) throw invalid_parameter("replicate: n_replicas must be >= 1");
    ReplicaStats stats;
    stats.sup_errors.resize(n_replicas);
    parallel_for(n_replicas, [&](std::size_t i) {
        HiamConfig c = cfg;
        c.seed = base_seed + i;
        stats.sup_errors[i] = compare_to_deterministic(c);
    });
    std::vector<double> sorted = stats.sup_errors;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double prob) {
        const double pos = prob * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    };
    stats.q1 = quantile(0.25);
    stats.median = quantile(0.5);
    stats.q3 = quantile(0.75);
    return stats;
}

}  // namespace marketdyn
