#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "marketdyn/errors.hpp"
#include "marketdyn/params.hpp"

namespace marketdyn {

inline constexpr double kPi = 3.14159265358979323846;

// One-parameter demand-update map: the demand response when the price
// argument is held fixed at p (fundamental value already folded into p by
// the caller). Strictly increasing in d, strictly decreasing in p, and a
// contraction in d with modulus 2*alpha*J*pdf(0).
inline double g(const MarketParams& mp, double p, double d) {
    return mp.alpha * (1.0 - 2.0 * mp.dist.cdf(p - mp.J * d)) +
           (1.0 - mp.alpha) * (1.0 - 2.0 * mp.dist.cdf(p));
}

// One application of the planar market map. The price updates first; the
// updated price then drives the demand response.
inline State step(const MarketParams& mp, State s) {
    if (!std::isfinite(s.p) || !std::isfinite(s.d))
        throw numeric_error("step: non-finite state");
    const double q = s.p - mp.V;  // price relative to the fundamental value
    const double q_next = q + mp.lambda * s.d;
    const double d_next = g(mp, q_next, s.d);
    return State{q_next + mp.V, d_next};
}

// Iterates the map for n_steps steps. The recurrence runs on the shifted
// price q = p - V, so runs that differ only by a common shift of V and p0
// produce bit-identical shifted trajectories (the reported absolute prices
// then differ by exactly V).
inline Orbit simulate(const MarketParams& mp, State s0, std::size_t n_steps) {
    if (n_steps < 1) throw invalid_parameter("simulate: n_steps must be >= 1");
    if (!std::isfinite(s0.p) || !std::isfinite(s0.d))
        throw numeric_error("simulate: non-finite initial state");
    Orbit orbit{{}, mp, false};
    orbit.states.reserve(n_steps + 1);
    orbit.states.push_back(s0);
    double q = s0.p - mp.V;
    double d = s0.d;
    for (std::size_t n = 0; n < n_steps; ++n) {
        q += mp.lambda * d;
        d = g(mp, q, d);
        if (!std::isfinite(q) || !std::isfinite(d)) {
            orbit.truncated = true;
            break;
        }
        orbit.states.push_back(State{q + mp.V, d});
    }
    return orbit;
}

enum class OmegaKind { ConvergesToOrigin, LimitCycle, Diverges, Undetermined };

struct OmegaConfig {
    double transient_fraction = 0.2;  // discarded head of the orbit
    std::size_t min_window = 64;      // post-transient points required
    double tol_origin = 1e-8;
    double tol_cycle = 1e-4;
    double cycle_rel_tol = 0.05;  // rel. std of per-revolution max radius
    double escape_radius = 1e6;
};

struct OmegaLimitVerdict {
    OmegaKind kind = OmegaKind::Undetermined;
    double radius_estimate = 0.0;
    std::size_t transient_steps = 0;
    std::map<std::string, double> diagnostics;
};

// Classifies the tail behavior of an orbit: settles to the equilibrium,
// wraps around a closed invariant curve, escapes, or none of those. All
// geometry is measured in the shifted plane (p - V, d) where the
// equilibrium sits at the origin.
inline OmegaLimitVerdict detect_omega_limit(const Orbit& orbit, const OmegaConfig& cfg = {}) {
    const std::size_t n = orbit.size();
    const std::size_t transient =
        static_cast<std::size_t>(cfg.transient_fraction * static_cast<double>(n));
    if (n < transient + cfg.min_window)
        throw insufficient_data("detect_omega_limit: orbit shorter than transient + window");

    const double V = orbit.params.V;
    OmegaLimitVerdict v;
    v.transient_steps = transient;

    if (orbit.truncated) {
        v.kind = OmegaKind::Diverges;
        return v;
    }
    double max_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::hypot(orbit.states[i].p - V, orbit.states[i].d);
        if (r > max_norm) max_norm = r;
        if (r > cfg.escape_radius) {
            v.kind = OmegaKind::Diverges;
            v.diagnostics["escape_index"] = static_cast<double>(i);
            v.diagnostics["max_norm"] = max_norm;
            return v;
        }
    }

    const double final_norm =
        std::hypot(orbit.states[n - 1].p - V, orbit.states[n - 1].d);
    v.diagnostics["final_norm"] = final_norm;
    v.diagnostics["max_norm"] = max_norm;
    if (final_norm < cfg.tol_origin) {
        v.kind = OmegaKind::ConvergesToOrigin;
        return v;
    }

    // Post-transient radius statistics plus a revolution split driven by the
    // accumulated winding angle.
    double sum_r = 0.0;
    std::vector<double> rev_max;
    double cum_angle = 0.0;
    double prev_theta = 0.0;
    double cur_max = 0.0;
    bool have_prev = false;
    for (std::size_t i = transient; i < n; ++i) {
        const double x = orbit.states[i].p - V;
        const double y = orbit.states[i].d;
        const double r = std::hypot(x, y);
        sum_r += r;
        const double theta = std::atan2(y, x);
        if (have_prev) {
            double dth = theta - prev_theta;
            if (dth > kPi) dth -= 2.0 * kPi;
            if (dth < -kPi) dth += 2.0 * kPi;
            cum_angle += std::abs(dth);
            if (cum_angle >= 2.0 * kPi) {
                rev_max.push_back(cur_max);
                cur_max = 0.0;
                cum_angle -= 2.0 * kPi;
            }
        }
        if (r > cur_max) cur_max = r;
        prev_theta = theta;
        have_prev = true;
    }
    const double mean_r = sum_r / static_cast<double>(n - transient);
    v.diagnostics["mean_radius"] = mean_r;
    v.diagnostics["revolutions"] = static_cast<double>(rev_max.size());

    if (mean_r > cfg.tol_cycle && rev_max.size() >= 3) {
        double m = 0.0;
        for (double x : rev_max) m += x;
        m /= static_cast<double>(rev_max.size());
        double var = 0.0;
        for (double x : rev_max) var += (x - m) * (x - m);
        var /= static_cast<double>(rev_max.size());
        const double rel_std = std::sqrt(var) / m;
        v.diagnostics["max_radius_rel_std"] = rel_std;
        if (rel_std < cfg.cycle_rel_tol) {
            v.kind = OmegaKind::LimitCycle;
            v.radius_estimate = m;
            return v;
        }
    }
    v.kind = OmegaKind::Undetermined;
    return v;
}

}  // namespace marketdyn
