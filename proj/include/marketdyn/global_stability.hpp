#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "marketdyn/dynamics.hpp"
#include "marketdyn/errors.hpp"
#include "marketdyn/parallel.hpp"
#include "marketdyn/params.hpp"
#include "marketdyn/roots.hpp"

namespace marketdyn {

// Constants behind the global-stability feedback threshold. All of them are
// functions of (alpha, J, Phi) alone; lambda_c is the largest feedback that
// still guarantees global convergence to the equilibrium.
struct GlobalStabilityConstants {
    double b;       // contraction modulus 2*alpha*J*pdf(0), must be < 1
    double a;       // b/2
    double x_ell;   // negative solution of 2*alpha*J*pdf(x) = a
    double x_r;     // positive solution of the same equation
    double h;       // price window where the steep-slope bound applies
    int k;          // minimal k with b^k <= (J*alpha*(1-b))/(2b)
    double lambda_c;
    std::string binding_constraint;  // which of the three bounds attains the min
};

inline GlobalStabilityConstants constants(const MarketParams& mp) {
    const double pdf0 = mp.dist.pdf(0.0);
    GlobalStabilityConstants c;
    c.b = 2.0 * mp.alpha * mp.J * pdf0;
    if (!(c.b < 1.0))
        throw invalid_parameter(
            "global stability requires 2*alpha*J*pdf(0) < 1 (hypothesis violated)");
    c.a = c.b / 2.0;

    // 2*alpha*J*pdf(x) - a is positive at 0 and falls below zero on both
    // sides; the crossings are unique because the density is one-sided
    // monotone away from 0.
    auto excess = [&](double x) { return 2.0 * mp.alpha * mp.J * mp.dist.pdf(x) - c.a; };
    auto positive_root = [&](auto&& f) {
        const double hi = detail::expand_until([&](double x) { return f(x) < 0.0; }, 1.0,
                                               "constants: root bracket not found");
        const double lo = (hi == 1.0) ? 0.0 : hi / 2.0;
        return detail::bisect(f, lo, hi, f(lo), 1e-14);
    };
    c.x_r = positive_root(excess);
    c.x_ell = -positive_root([&](double x) { return excess(-x); });

    c.h = std::min(mp.alpha / (1.0 - mp.alpha) * (c.a / c.b), 1.0) *
          std::min(std::abs(c.x_ell), c.x_r);

    const double budget = 0.5 * mp.J * mp.alpha * (1.0 - c.b) / c.b;
    int k = 1;
    double bk = c.b;
    while (bk > budget) {
        bk *= c.b;
        if (++k > 1000000) throw numeric_error("constants: k search did not terminate");
    }
    c.k = k;

    const double bound_k = budget / static_cast<double>(k);
    const double bound_slope = mp.alpha * mp.J * (c.a / c.b);
    const double bound_window = c.h;
    c.lambda_c = bound_k;
    c.binding_constraint = "k_budget";
    if (bound_slope < c.lambda_c) {
        c.lambda_c = bound_slope;
        c.binding_constraint = "slope";
    }
    if (bound_window < c.lambda_c) {
        c.lambda_c = bound_window;
        c.binding_constraint = "window";
    }
    return c;
}

// Real line extended with the two infinities; the zero of the demand-update
// map can escape to either end.
struct ExtendedReal {
    enum class Kind { Finite, PosInf, NegInf };
    Kind kind = Kind::Finite;
    double value = 0.0;

    static ExtendedReal finite(double v) { return {Kind::Finite, v}; }
    static ExtendedReal pos_inf() { return {Kind::PosInf, 0.0}; }
    static ExtendedReal neg_inf() { return {Kind::NegInf, 0.0}; }
    bool is_finite() const { return kind == Kind::Finite; }
};

// Fixed point of d -> g(p, d). Unique because g(p, .) is a contraction when
// 2*alpha*J*pdf(0) < 1; found by plain fixed-point iteration from 0.
inline double D_of(const MarketParams& mp, double p) {
    const double b = 2.0 * mp.alpha * mp.J * mp.dist.pdf(0.0);
    if (!(b < 1.0))
        throw invalid_parameter("D_of requires 2*alpha*J*pdf(0) < 1");
    double d = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double next = g(mp, p, d);
        if (std::abs(next - d) < 1e-12) return next;
        d = next;
    }
    throw numeric_error("D_of: fixed-point iteration did not converge");
}

// Zero of d -> g(p, d), or the appropriate infinity when the map keeps one
// sign. The sign at |d| = 1e6 decides the infinite cases: the distribution
// tails are settled there, so the sign cannot change further out.
inline ExtendedReal R_of(const MarketParams& mp, double p) {
    const double big = 1e6;
    const double g_lo = g(mp, p, -big);
    const double g_hi = g(mp, p, big);
    if (g_lo > 0.0) return ExtendedReal::neg_inf();   // g positive everywhere
    if (g_hi < 0.0) return ExtendedReal::pos_inf();   // g negative everywhere
    const double root = detail::bisect([&](double d) { return g(mp, p, d); }, -big, big,
                                       g_lo, 1e-12, 0.0);
    return ExtendedReal::finite(root);
}

struct ConvergenceEntry {
    State s0;
    bool converged = false;
    std::size_t first_step = 0;  // first n with ||(p - V, d)|| < tol
};

struct ConvergenceReport {
    std::vector<ConvergenceEntry> entries;
    bool all_converged = true;
    std::size_t max_first_step = 0;
};

// Runs each initial state until it enters the tol-ball around the
// equilibrium or the step budget runs out. Non-convergence is reported,
// not thrown. States are independent and verified in parallel.
inline ConvergenceReport verify_global_convergence(const MarketParams& mp,
                                                   const std::vector<State>& initial_states,
                                                   std::size_t n_max, double tol) {
    if (!(tol > 0.0)) throw invalid_parameter("verify_global_convergence: tol must be > 0");
    const GlobalStabilityConstants c = constants(mp);
    if (mp.lambda > c.lambda_c * (1.0 + 1e-12))
        throw invalid_parameter("verify_global_convergence requires lambda <= lambda_c");

    ConvergenceReport report;
    report.entries.resize(initial_states.size());
    parallel_for(initial_states.size(), [&](std::size_t i) {
        ConvergenceEntry e;
        e.s0 = initial_states[i];
        double q = e.s0.p - mp.V;
        double d = e.s0.d;
        for (std::size_t n = 0; n <= n_max; ++n) {
            if (std::hypot(q, d) < tol) {
                e.converged = true;
                e.first_step = n;
                break;
            }
            q += mp.lambda * d;
            d = g(mp, q, d);
        }
        report.entries[i] = e;
    });
    for (const ConvergenceEntry& e : report.entries) {
        if (!e.converged) report.all_converged = false;
        if (e.converged && e.first_step > report.max_first_step)
            report.max_first_step = e.first_step;
    }
    return report;
}

}  // namespace marketdyn
