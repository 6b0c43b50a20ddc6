#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "marketdyn/dynamics.hpp"
#include "marketdyn/errors.hpp"
#include "marketdyn/parallel.hpp"
#include "marketdyn/params.hpp"
#include "marketdyn/roots.hpp"
#include "marketdyn/stability.hpp"

namespace marketdyn {

// Smooth one-parameter family of market configurations. The family is the
// object the bifurcation machinery works on: as eta grows, u(eta) crosses 1
// and the equilibrium loses stability.
struct ParamFamily {
    double eta_min;
    double eta_max;
    std::function<MarketParams(double)> at;
};

// Family with the speculator proportion as the moving parameter: alpha = eta,
// everything else held fixed.
inline ParamFamily alpha_family(double J, double lambda, EvaluationDistribution dist,
                                double eta_min, double eta_max, double V = 0.0) {
    if (!(eta_min < eta_max))
        throw invalid_parameter("alpha_family: eta range must be nonempty");
    return ParamFamily{
        eta_min, eta_max,
        [=](double eta) { return MarketParams(eta, J, lambda, dist, V); }};
}

inline double family_u(const ParamFamily& fam, double eta) {
    const MarketParams mp = fam.at(eta);
    return 2.0 * mp.alpha * mp.J * mp.dist.pdf(0.0);
}

// Locates the critical parameter eta0 where u(eta) = 1 by bracketing
// bisection (u is monotone along admissible families).
inline double find_eta0(const ParamFamily& fam) {
    double lo = fam.eta_min;
    double hi = fam.eta_max;
    double flo = family_u(fam, lo) - 1.0;
    const double fhi = family_u(fam, hi) - 1.0;
    if (!(flo < 0.0) || !(fhi > 0.0))
        throw invalid_parameter(
            "find_eta0: u - 1 does not change sign over the family range");
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        const double fm = family_u(fam, mid) - 1.0;
        if (std::abs(fm) <= 1e-12) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(mid)) break;
    }
    if (std::abs(family_u(fam, mid) - 1.0) > 1e-12)
        throw numeric_error("find_eta0: bisection did not reach |u - 1| <= 1e-12");
    return mid;
}

// The four hypotheses of the bifurcation theorem, checked numerically.
struct HopfConditions {
    bool origin_fixed = false;        // (i)  the origin stays an equilibrium
    bool complex_unit_pair = false;   // (ii) non-real pair, |mu(eta0)| = 1
    bool transversality = false;      // (iii) d|mu|/deta > 0 at eta0
    bool no_low_resonance = false;    // (iv) mu(eta0)^k != 1 for k = 1..4

    bool all() const {
        return origin_fixed && complex_unit_pair && transversality && no_low_resonance;
    }
};

inline HopfConditions check_conditions(const ParamFamily& fam, double eta0) {
    HopfConditions c;
    const double range = fam.eta_max - fam.eta_min;
    const double delta_eta = 0.05 * range;

    // sample the family at eta0 and a few offsets inside the range
    std::vector<double> etas{eta0};
    for (double f : {0.25, 0.5, 1.0}) {
        const double lo = eta0 - f * delta_eta;
        const double hi = eta0 + f * delta_eta;
        if (lo > fam.eta_min) etas.push_back(lo);
        if (hi < fam.eta_max) etas.push_back(hi);
    }

    c.origin_fixed = true;
    c.complex_unit_pair = true;
    for (double eta : etas) {
        const MarketParams mp = fam.at(eta);
        const State im = step(mp, State{mp.V, 0.0});
        if (std::abs(im.p - mp.V) > 1e-12 || std::abs(im.d) > 1e-12) c.origin_fixed = false;
        if (!(eigen_at_origin(mp).delta < 0.0)) c.complex_unit_pair = false;
    }
    const EigenData e0 = eigen_at_origin(fam.at(eta0));
    if (std::abs(std::abs(e0.mu1) - 1.0) > 1e-10) c.complex_unit_pair = false;

    // transversality through a centered difference of the eigenvalue modulus
    const double h = 1e-6 * range;
    const double mod_plus = std::abs(eigen_at_origin(fam.at(eta0 + h)).mu1);
    const double mod_minus = std::abs(eigen_at_origin(fam.at(eta0 - h)).mu1);
    c.transversality = (mod_plus - mod_minus) / (2.0 * h) > 0.0;

    std::complex<double> mu_pow = e0.mu1;
    double min_gap = std::abs(mu_pow - 1.0);
    for (int k = 2; k <= 4; ++k) {
        mu_pow *= e0.mu1;
        min_gap = std::min(min_gap, std::abs(mu_pow - 1.0));
    }
    c.no_low_resonance = min_gap > 1e-8;
    return c;
}

enum class HopfVerdict { Supercritical, Subcritical, Inconclusive };

struct HopfReport {
    double eta0 = 0.0;
    std::complex<double> mu0;         // critical eigenvalue (upper half-plane)
    double epsilon = 0.0;             // 1 - lambda*pdf(0) at eta0
    std::array<double, 4> k_coeffs{};  // K1..K4 of the transformed map
    std::complex<double> xi20, xi11, xi02, xi21;
    double A = 0.0;
    HopfConditions conditions;
    HopfVerdict verdict = HopfVerdict::Inconclusive;
};

namespace detail {

// Geometry of the similarity transform that puts the critical linearization
// into planar rotation form. Valid where u(eta0) = 1.
struct HopfFrame {
    double alpha, J, lambda;
    double pdf0, eps, s;  // s = sqrt(1 - eps^2)
    double K1, K2, K3, K4;
};

inline HopfFrame hopf_frame(const MarketParams& mp) {
    HopfFrame f;
    f.alpha = mp.alpha;
    f.J = mp.J;
    f.lambda = mp.lambda;
    f.pdf0 = mp.dist.pdf(0.0);
    f.eps = 1.0 - mp.lambda * f.pdf0;
    const double one_minus_eps2 = 1.0 - f.eps * f.eps;
    if (!(one_minus_eps2 > 0.0))
        throw numeric_error(
            "hopf: transform degenerate, 1 - eps^2 must be positive (requires 0 < "
            "lambda*pdf(0) < 2)");
    f.s = std::sqrt(one_minus_eps2);
    f.K1 = 1.0 - (mp.lambda - mp.J) * f.pdf0;
    f.K2 = f.s * (mp.lambda - mp.J) / mp.lambda;
    f.K3 = 1.0 - mp.lambda * f.pdf0;
    f.K4 = f.s;
    return f;
}

// Nonlinear part of the transformed map, second component (the first is
// identically zero). Built from distribution evaluations only, so it can be
// differentiated both analytically and by finite differences.
inline double transformed_residual(const HopfFrame& f, const EvaluationDistribution& dist,
                                   double x1, double x2) {
    const double z1 = f.K1 * x1 + f.K2 * x2;
    const double z2 = f.K3 * x1 + f.K4 * x2;
    const double lin = f.pdf0 * (3.0 - 2.0 * f.lambda * f.pdf0) * x1 -
                       (1.0 - 2.0 * f.lambda * f.pdf0) * f.s * x2 / f.lambda;
    return (f.lambda / f.s) * (f.alpha * (1.0 - 2.0 * dist.cdf(z1)) +
                               (1.0 - f.alpha) * (1.0 - 2.0 * dist.cdf(z2)) + lin);
}

struct ResidualPartials {
    double d20, d11, d02;       // second order
    double d30, d21, d12, d03;  // third order
};

// Assembles the cubic coefficient from the residual's partials. The
// similarity transform produces the planar rotation [[eps, s], [-s, eps]],
// whose complexification multiplies by eps - i*s; the coefficient formula
// must be evaluated with that eigenvalue (its conjugate flips the sign of A).
inline HopfReport assemble_report(const HopfFrame& f, const ResidualPartials& d) {
    HopfReport r;
    r.epsilon = f.eps;
    r.k_coeffs = {f.K1, f.K2, f.K3, f.K4};

    const std::complex<double> i_unit(0.0, 1.0);
    r.xi20 = (2.0 * d.d11 + i_unit * (d.d20 - d.d02)) / 8.0;
    r.xi11 = (i_unit * (d.d20 + d.d02)) / 4.0;
    r.xi02 = (-2.0 * d.d11 + i_unit * (d.d20 - d.d02)) / 8.0;
    r.xi21 = ((d.d21 + d.d03) + i_unit * (d.d30 + d.d12)) / 16.0;

    const std::complex<double> mu_form(f.eps, -f.s);
    const std::complex<double> mu_conj = std::conj(mu_form);
    r.A = std::real((1.0 - 2.0 * mu_form) * mu_conj * mu_conj / (1.0 - mu_form) * r.xi11 *
                    r.xi20) +
          0.5 * std::norm(r.xi11) + std::norm(r.xi02) - std::real(mu_conj * r.xi21);
    return r;
}

}  // namespace detail

// Critical eigenvalue from the closed-form root expression (upper half-plane
// branch). Kept separate from eigen_at_origin so the two routes can be
// cross-checked against each other.
inline std::complex<double> critical_eigenvalue(const MarketParams& mp) {
    const double pdf0 = mp.dist.pdf(0.0);
    const double tr = 1.0 + 2.0 * (mp.alpha * mp.J - mp.lambda) * pdf0;
    const double disc = 8.0 * mp.alpha * mp.J * pdf0 - tr * tr;
    if (!(disc > 0.0))
        throw numeric_error("critical_eigenvalue: eigenvalues are not a complex pair");
    return {0.5 * tr, 0.5 * std::sqrt(disc)};
}

// Cubic normal-form coefficient with all residual partials in closed form
// (they are linear combinations of pdf1(0) at second order and pdf2(0) at
// third order).
inline HopfReport coefficient_A(const ParamFamily& fam, double eta0) {
    const MarketParams mp = fam.at(eta0);
    const detail::HopfFrame f = detail::hopf_frame(mp);
    const double pdf1_0 = mp.dist.pdf1(0.0);
    const double pdf2_0 = mp.dist.pdf2(0.0);

    const double c2 = -2.0 * f.lambda * pdf1_0 / f.s;
    const double c3 = -2.0 * f.lambda * pdf2_0 / f.s;
    const double a = f.alpha;
    detail::ResidualPartials d;
    d.d20 = c2 * (a * f.K1 * f.K1 + (1.0 - a) * f.K3 * f.K3);
    d.d11 = c2 * (a * f.K1 * f.K2 + (1.0 - a) * f.K3 * f.K4);
    d.d02 = c2 * (a * f.K2 * f.K2 + (1.0 - a) * f.K4 * f.K4);
    d.d30 = c3 * (a * f.K1 * f.K1 * f.K1 + (1.0 - a) * f.K3 * f.K3 * f.K3);
    d.d21 = c3 * (a * f.K1 * f.K1 * f.K2 + (1.0 - a) * f.K3 * f.K3 * f.K4);
    d.d12 = c3 * (a * f.K1 * f.K2 * f.K2 + (1.0 - a) * f.K3 * f.K4 * f.K4);
    d.d03 = c3 * (a * f.K2 * f.K2 * f.K2 + (1.0 - a) * f.K4 * f.K4 * f.K4);

    HopfReport r = detail::assemble_report(f, d);
    r.eta0 = eta0;
    r.mu0 = critical_eigenvalue(mp);
    r.conditions = check_conditions(fam, eta0);
    if (r.conditions.all() && r.A > 0.0)
        r.verdict = HopfVerdict::Supercritical;
    else if (r.conditions.all() && r.A < 0.0)
        r.verdict = HopfVerdict::Subcritical;
    else
        r.verdict = HopfVerdict::Inconclusive;
    return r;
}

// Same pipeline with every partial of the transformed residual taken by
// central finite differences of the residual itself. Third-order quotients
// get one Richardson step; plain quotients at fd_step lose too many digits.
inline HopfReport hopf_report_numeric(const ParamFamily& fam, double eta0,
                                      double fd_step = 1e-4) {
    if (!(fd_step > 0.0)) throw invalid_parameter("hopf_report_numeric: fd_step must be > 0");
    const MarketParams mp = fam.at(eta0);
    const detail::HopfFrame f = detail::hopf_frame(mp);
    const auto& dist = mp.dist;
    auto G = [&](double x1, double x2) {
        return detail::transformed_residual(f, dist, x1, x2);
    };

    const double h = fd_step;
    detail::ResidualPartials d;
    d.d20 = (G(h, 0) - 2.0 * G(0, 0) + G(-h, 0)) / (h * h);
    d.d02 = (G(0, h) - 2.0 * G(0, 0) + G(0, -h)) / (h * h);
    d.d11 = (G(h, h) - G(h, -h) - G(-h, h) + G(-h, -h)) / (4.0 * h * h);

    auto third = [&](double hh, double* out) {
        const double h3 = 2.0 * hh * hh * hh;
        out[0] = (G(2 * hh, 0) - 2.0 * G(hh, 0) + 2.0 * G(-hh, 0) - G(-2 * hh, 0)) / h3;
        out[1] = ((G(hh, hh) - 2.0 * G(0, hh) + G(-hh, hh)) -
                  (G(hh, -hh) - 2.0 * G(0, -hh) + G(-hh, -hh))) / h3;
        out[2] = ((G(hh, hh) - 2.0 * G(hh, 0) + G(hh, -hh)) -
                  (G(-hh, hh) - 2.0 * G(-hh, 0) + G(-hh, -hh))) / h3;
        out[3] = (G(0, 2 * hh) - 2.0 * G(0, hh) + 2.0 * G(0, -hh) - G(0, -2 * hh)) / h3;
    };
    double coarse[4], fine[4];
    third(h, coarse);
    third(h / 2.0, fine);
    d.d30 = (4.0 * fine[0] - coarse[0]) / 3.0;
    d.d21 = (4.0 * fine[1] - coarse[1]) / 3.0;
    d.d12 = (4.0 * fine[2] - coarse[2]) / 3.0;
    d.d03 = (4.0 * fine[3] - coarse[3]) / 3.0;

    HopfReport r = detail::assemble_report(f, d);
    r.eta0 = eta0;
    r.mu0 = critical_eigenvalue(mp);
    r.conditions = check_conditions(fam, eta0);
    if (r.conditions.all() && r.A > 0.0)
        r.verdict = HopfVerdict::Supercritical;
    else if (r.conditions.all() && r.A < 0.0)
        r.verdict = HopfVerdict::Subcritical;
    else
        r.verdict = HopfVerdict::Inconclusive;
    return r;
}

inline double coefficient_A_numeric(const ParamFamily& fam, double eta0,
                                    double fd_step = 1e-4) {
    return hopf_report_numeric(fam, eta0, fd_step).A;
}

// Behavioral confirmation: simulate the family at each eta and classify the
// tail of the orbit. Scan points are independent and run in parallel; the
// output keeps the input order.
inline std::vector<std::pair<double, OmegaLimitVerdict>> hopf_scan(
    const ParamFamily& fam, const std::vector<double>& etas, State s0, std::size_t n_steps,
    const OmegaConfig& cfg = {}) {
    for (double eta : etas)
        if (eta < fam.eta_min || eta > fam.eta_max)
            throw invalid_parameter("hopf_scan: eta outside the family range");
    std::vector<std::pair<double, OmegaLimitVerdict>> out(etas.size());
    parallel_for(etas.size(), [&](std::size_t i) {
        const Orbit orbit = simulate(fam.at(etas[i]), s0, n_steps);
        out[i] = {etas[i], detect_omega_limit(orbit, cfg)};
    });
    return out;
}

inline std::string to_string(HopfVerdict v) {
    switch (v) {
        case HopfVerdict::Supercritical: return "supercritical";
        case HopfVerdict::Subcritical: return "subcritical";
        case HopfVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

inline std::string to_string(OmegaKind k) {
    switch (k) {
        case OmegaKind::ConvergesToOrigin: return "converges_to_origin";
        case OmegaKind::LimitCycle: return "limit_cycle";
        case OmegaKind::Diverges: return "diverges";
        case OmegaKind::Undetermined: return "undetermined";
    }
    return "?";
}

}  // namespace marketdyn
