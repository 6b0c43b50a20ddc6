// Acceptance suite: runs every contract criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "marketdyn/distribution.hpp"
#include "marketdyn/dynamics.hpp"
#include "marketdyn/global_stability.hpp"
#include "marketdyn/hiam.hpp"
#include "marketdyn/hopf.hpp"
#include "marketdyn/params.hpp"
#include "marketdyn/rng.hpp"
#include "marketdyn/stability.hpp"

namespace md = marketdyn;
namespace fs = std::filesystem;

namespace {

constexpr double kUnitPeakSigma = 0.3989422804014327;  // 1/sqrt(2 pi)

int g_failures = 0;

struct Criterion {
    int id;
    std::string label;
    double limit_seconds;
    std::function<bool(std::ostringstream&)> body;
};

void run_criterion(const Criterion& c) {
    std::ostringstream detail;
    bool ok = false;
    double elapsed = 0.0;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        ok = c.body(detail);
        elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_seconds > 0.0 && elapsed > c.limit_seconds) {
            ok = false;
            detail << " [exceeded " << c.limit_seconds << " s budget]";
        }
    } catch (const std::exception& e) {
        ok = false;
        detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s  criterion %2d: %s (%s; %.2f s)\n", ok ? "PASS" : "FAIL", c.id,
                c.label.c_str(), detail.str().c_str(), elapsed);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

// ---------------------------------------------------------------- criterion 1
bool classifier_oracle_equivalence(std::ostringstream& out) {
    std::size_t checked = 0, mismatches = 0;
    for (int i = 1; i <= 200; ++i) {
        for (int j = 1; j <= 200; ++j) {
            const double u = 3.0 * i / 200.0;
            const double w = 6.0 * j / 200.0;
            const double su = std::sqrt(u);
            const md::EigenData e = md::eigen_from_uw({u, w});
            const bool excluded = std::abs(e.delta) <= 1e-9 || std::abs(u - 1.0) <= 1e-6 ||
                                  std::abs(w - (1.0 - su) * (1.0 - su)) <= 1e-6 ||
                                  std::abs(w - (1.0 + su) * (1.0 + su)) <= 1e-6 ||
                                  std::abs(w - (2.0 + 2.0 * u)) <= 1e-6 ||
                                  std::abs(w - (1.0 + u)) <= 1e-6;
            if (excluded) continue;
            ++checked;
            const md::StabilityReport r = md::classify(md::UWCoordinates{u, w});
            if (r.region == md::Region::Boundary) {
                ++mismatches;
                continue;
            }
            const bool stable_oracle = e.spectral_radius < 1.0;
            const bool stable_verdict =
                r.verdict == md::StabilityVerdict::LocallyAsymptoticallyStable;
            if (stable_oracle != stable_verdict) ++mismatches;
        }
    }
    out << checked << " grid points, " << mismatches << " mismatches";
    return mismatches == 0 && checked > 35000;
}

md::ParamFamily canonical_family() {
    return md::alpha_family(1.0, 0.5,
                            md::EvaluationDistribution::normal_zero_mean(kUnitPeakSigma), 0.3,
                            0.7);
}

// ---------------------------------------------------------------- criterion 2
bool critical_eigenvalue(std::ostringstream& out) {
    const md::ParamFamily fam = canonical_family();
    const double eta0 = md::find_eta0(fam);
    const std::complex<double> mu0 = md::critical_eigenvalue(fam.at(eta0));
    const std::complex<double> expected(0.5, 0.86602540378443865);
    const double eta_err = std::abs(eta0 - 0.5);
    const double mu_err = std::abs(mu0 - expected);
    out << "eta0 = " << eta0 << " (|err| = " << eta_err << "), |mu0 - (1/2 + i sqrt(3)/2)| = "
        << mu_err;
    return eta_err <= 1e-12 && mu_err < 1e-12;
}

// ---------------------------------------------------------------- criterion 3
bool hopf_coefficient(std::ostringstream& out) {
    const md::ParamFamily fam = canonical_family();
    const double eta0 = md::find_eta0(fam);
    const md::HopfReport analytic = md::coefficient_A(fam, eta0);
    const double numeric = md::coefficient_A_numeric(fam, eta0);
    const double rel = std::abs(numeric - analytic.A) / std::abs(analytic.A);
    out << "A_analytic = " << analytic.A << ", A_numeric = " << numeric
        << ", rel diff = " << rel;
    return rel <= 1e-3 && analytic.A > 0.0 && numeric > 0.0 &&
           analytic.verdict == md::HopfVerdict::Supercritical;
}

// ---------------------------------------------------------------- criterion 4
bool hopf_behavior(std::ostringstream& out) {
    const md::ParamFamily fam = canonical_family();
    const md::State s0{0.01, 0.01};
    const std::size_t steps = 100000;

    const md::Orbit below = md::simulate(fam.at(0.48), s0, steps);
    const md::OmegaLimitVerdict vb = md::detect_omega_limit(below);
    const double final_norm = vb.diagnostics.at("final_norm");
    if (vb.kind != md::OmegaKind::ConvergesToOrigin || final_norm >= 1e-6) {
        out << "eta = 0.48 did not converge (final norm " << final_norm << ")";
        return false;
    }

    const md::Orbit above = md::simulate(fam.at(0.52), s0, steps);
    const md::OmegaLimitVerdict va = md::detect_omega_limit(above);
    if (va.kind != md::OmegaKind::LimitCycle || va.radius_estimate <= 1e-3 ||
        va.diagnostics.at("max_radius_rel_std") >= 0.05) {
        out << "eta = 0.52 cycle check failed";
        return false;
    }

    double radii[3];
    const double etas[3] = {0.55, 0.52, 0.51};
    for (int i = 0; i < 3; ++i) {
        const md::Orbit orbit = md::simulate(fam.at(etas[i]), s0, steps);
        const md::OmegaLimitVerdict v = md::detect_omega_limit(orbit);
        if (v.kind != md::OmegaKind::LimitCycle) {
            out << "eta = " << etas[i] << " is not a cycle";
            return false;
        }
        radii[i] = v.radius_estimate;
    }
    out << "final norm(0.48) = " << final_norm << "; radius(0.52) = " << va.radius_estimate
        << ", rel std = " << va.diagnostics.at("max_radius_rel_std") << "; radii "
        << radii[0] << " > " << radii[1] << " > " << radii[2];
    return radii[0] > radii[1] && radii[1] > radii[2];
}

// ---------------------------------------------------------------- criterion 5
bool lambda_c_reproduction(std::ostringstream& out) {
    const md::MarketParams mp(0.5, 0.8, 0.1,
                              md::EvaluationDistribution::normal_zero_mean(1.0));
    const md::GlobalStabilityConstants c = md::constants(mp);
    const bool ok = std::abs(c.b - 0.319154) <= 1e-6 && std::abs(c.a - 0.159577) <= 1e-6 &&
                    std::abs(c.x_r - 1.177410) <= 1e-6 && std::abs(c.h - 0.588705) <= 1e-6 &&
                    c.k == 1 && std::abs(c.lambda_c - 0.2) <= 1e-6;
    out << "b = " << c.b << ", a = " << c.a << ", x_r = " << c.x_r << ", h = " << c.h
        << ", k = " << c.k << ", lambda_c = " << c.lambda_c << " (" << c.binding_constraint
        << " binds)";
    return ok;
}

// ---------------------------------------------------------------- criterion 6
bool global_convergence(std::ostringstream& out) {
    const md::MarketParams mp(0.5, 0.8, 0.15,
                              md::EvaluationDistribution::normal_zero_mean(1.0));
    std::vector<md::State> states;
    const md::CounterRng rng(20250810);
    for (std::uint64_t i = 0; i < 100; ++i)
        states.push_back(md::State{-10.0 + 20.0 * rng.uniform_open(i, 0),
                                   -1.0 + 2.0 * rng.uniform_open(i, 1)});
    const md::ConvergenceReport report =
        md::verify_global_convergence(mp, states, 1000000, 1e-8);
    std::size_t failures = 0;
    for (const auto& e : report.entries)
        if (!e.converged) ++failures;
    out << states.size() << " states, " << failures
        << " failures, slowest first passage = " << report.max_first_step << " steps";
    return report.all_converged;
}

// ---------------------------------------------------------------- criterion 7
bool bound_lemmas(std::ostringstream& out) {
    const md::MarketParams mp(0.5, 0.8, 0.1,
                              md::EvaluationDistribution::normal_zero_mean(1.0));
    const md::GlobalStabilityConstants c = md::constants(mp);
    const double slack = 1e-10;  // root-finding residual allowance

    std::size_t violations = 0;
    // fixed-point bound on both sides
    const double d_slope = c.b / (mp.J * mp.alpha * (1.0 - c.b));
    for (int i = 1; i <= 200; ++i) {
        const double p = 5.0 * i / 200.0;
        if (md::D_of(mp, p) < -d_slope * p - slack) ++violations;
        if (md::D_of(mp, -p) > d_slope * p + slack) ++violations;
    }
    // zero-crossing lower bound (finite everywhere for alpha = 1/2)
    for (int i = 1; i <= 200; ++i) {
        const double p = 5.0 * i / 200.0;
        const md::ExtendedReal r = md::R_of(mp, p);
        if (!r.is_finite() || r.value < (c.a / c.b) * p / (mp.alpha * mp.J) - slack)
            ++violations;
    }
    // zero-crossing upper bound inside the window [0, h]
    for (int i = 1; i <= 200; ++i) {
        const double p = c.h * i / 200.0;
        const md::ExtendedReal r = md::R_of(mp, p);
        if (!r.is_finite() || r.value > (c.b / c.a) * p / (mp.alpha * mp.J) + slack)
            ++violations;
    }
    out << "600 sampled inequalities, " << violations << " violations";
    return violations == 0;
}

// ---------------------------------------------------------------- criterion 8
bool hiam_convergence(std::ostringstream& out) {
    const md::MarketParams mp(0.5, 0.8, 0.1,
                              md::EvaluationDistribution::normal_zero_mean(1.0), 10.0);
    double medians[3];
    const std::size_t Ks[3] = {1000, 10000, 100000};
    for (int i = 0; i < 3; ++i) {
        const md::HiamConfig cfg(mp, Ks[i], 10.5, 0.0, 50, 0);
        medians[i] = md::replicate(cfg, 20, 1000).median;
    }
    const double lo = std::sqrt(10.0) / 2.0;
    const double hi = 2.0 * std::sqrt(10.0);
    const double r01 = medians[0] / medians[1];
    const double r12 = medians[1] / medians[2];
    out << "medians = {" << medians[0] << ", " << medians[1] << ", " << medians[2]
        << "}, ratios = {" << r01 << ", " << r12 << "}";
    return medians[0] > medians[1] && medians[1] > medians[2] && r01 >= lo && r01 <= hi &&
           r12 >= lo && r12 <= hi;
}

// ---------------------------------------------------------------- criterion 9
bool hiam_shift_equivalence(std::ostringstream& out) {
    const std::uint64_t seed = 7;
    const md::MarketParams shifted(0.5, 0.8, 0.1,
                                   md::EvaluationDistribution::normal_zero_mean(1.0), 10.0);
    const md::MarketParams base(0.5, 0.8, 0.1,
                                md::EvaluationDistribution::normal_zero_mean(1.0), 0.0);
    const md::HiamTrajectory a =
        md::run_hiam(md::HiamConfig(shifted, 1000, 10.5, 0.0, 50, seed));
    const md::HiamTrajectory b = md::run_hiam(md::HiamConfig(base, 1000, 0.5, 0.0, 50, seed));
    for (std::size_t n = 0; n <= 50; ++n) {
        if (a.demands[n] != b.demands[n] || a.price(n) != b.price(n) + 10.0) {
            out << "first discrepancy at step " << n;
            return false;
        }
    }
    out << "51 steps bit-exact";
    return true;
}

// --------------------------------------------------------------- criterion 10
std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool reproducibility(std::ostringstream& out) {
    const std::string cli = MARKETDYN_CLI_PATH;
    const fs::path dir = fs::temp_directory_path() / "marketdyn_acceptance";
    fs::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate",
         "simulate --alpha 0.52 --J 1 --lambda 0.5 --sigma 0.3989422804014327 --p0 0.01 "
         "--d0 0.01 --steps 2000"},
        {"phase-diagram",
         "phase-diagram --u-min 0.1 --u-max 2.9 --w-min 0.1 --w-max 5.9 --nu 30 --nw 30"},
        {"lambda-c", "lambda-c --alpha 0.5 --J 0.8 --sigma 1"},
        {"hopf-scan",
         "hopf-scan --J 1 --lambda 0.5 --sigma 0.3989422804014327 --eta-min 0.3 --eta-max "
         "0.7 --eta 0.48 --eta 0.52 --steps 5000"},
        {"hiam-compare",
         "hiam-compare --alpha 0.5 --J 0.8 --lambda 0.1 --sigma 1 --V 10 --K 1000 --p0 10.5 "
         "--d0 0 --horizon 50 --seed 7"},
    };
    for (const auto& [name, args] : commands) {
        const fs::path f1 = dir / (name + "_1.out");
        const fs::path f2 = dir / (name + "_2.out");
        const std::string c1 = cli + " " + args + " --out " + f1.string() + " > /dev/null";
        const std::string c2 = cli + " " + args + " --out " + f2.string() + " > /dev/null";
        if (WEXITSTATUS(std::system(c1.c_str())) != 0 ||
            WEXITSTATUS(std::system(c2.c_str())) != 0) {
            out << name << " exited nonzero";
            return false;
        }
        if (slurp(f1) != slurp(f2)) {
            out << name << " produced differing bytes";
            return false;
        }
    }
    out << commands.size() << " commands byte-identical on repeat";
    return true;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "classifier matches the spectral-radius oracle on the 200x200 grid", 5.0,
         classifier_oracle_equivalence},
        {2, "critical parameter and eigenvalue 1/2 + i sqrt(3)/2", 0.0, critical_eigenvalue},
        {3, "cubic coefficient: analytic vs finite differences, both positive", 0.0,
         hopf_coefficient},
        {4, "convergence below the crossing, stable cycle above, radius shrinks toward it",
         10.0, hopf_behavior},
        {5, "threshold constants match the hand-derived oracle", 0.0, lambda_c_reproduction},
        {6, "100 random states converge globally below the threshold", 60.0,
         global_convergence},
        {7, "fixed-point and zero-crossing bounds hold at 200 samples each", 0.0,
         bound_lemmas},
        {8, "stochastic-deterministic gap shrinks at the CLT rate in K", 120.0,
         hiam_convergence},
        {9, "fundamental-value shift is bit-exact under a shared seed", 0.0,
         hiam_shift_equivalence},
        {10, "repeated CLI invocations emit byte-identical files", 0.0, reproducibility},
    };
    for (const auto& c : criteria) run_criterion(c);
    if (g_failures == 0) {
        std::printf("all %zu criteria passed\n", criteria.size());
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
}
