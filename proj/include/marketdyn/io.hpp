#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "marketdyn/distribution.hpp"
#include "marketdyn/dynamics.hpp"
#include "marketdyn/errors.hpp"
#include "marketdyn/global_stability.hpp"
#include "marketdyn/hiam.hpp"
#include "marketdyn/hopf.hpp"
#include "marketdyn/params.hpp"
#include "marketdyn/stability.hpp"

namespace marketdyn {

// 17 significant digits: round-trips every finite double exactly, which is
// what makes repeated runs byte-identical.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline nlohmann::json dist_to_json(const EvaluationDistribution& dist) {
    if (dist.kind() != EvaluationDistribution::Kind::NormalZeroMean)
        throw invalid_parameter("custom distributions have no JSON form");
    return {{"kind", "normal"}, {"sigma", dist.sigma()}};
}

inline EvaluationDistribution dist_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind != "normal")
        throw invalid_parameter("dist JSON: only kind \"normal\" is supported");
    return EvaluationDistribution::normal_zero_mean(j.at("sigma").get<double>());
}

inline nlohmann::json params_to_json(const MarketParams& mp) {
    return {{"alpha", mp.alpha},
            {"J", mp.J},
            {"lambda", mp.lambda},
            {"V", mp.V},
            {"dist", dist_to_json(mp.dist)}};
}

inline MarketParams params_from_json(const nlohmann::json& j) {
    return MarketParams(j.at("alpha").get<double>(), j.at("J").get<double>(),
                        j.at("lambda").get<double>(), dist_from_json(j.at("dist")),
                        j.value("V", 0.0));
}

inline void write_orbit_csv(std::ostream& os, const Orbit& orbit) {
    os << "n,p,d\n";
    for (std::size_t n = 0; n < orbit.size(); ++n)
        os << n << ',' << format_double(orbit.states[n].p) << ','
           << format_double(orbit.states[n].d) << '\n';
}

inline void write_phase_diagram_csv(std::ostream& os, const PhaseDiagram& pd) {
    os << "u,w,delta,region,verdict,spectral_radius\n";
    for (const StabilityReport& r : pd.cells)
        os << format_double(r.uw.u) << ',' << format_double(r.uw.w) << ','
           << format_double(r.eigen.delta) << ',' << to_string(r.region) << ','
           << to_string(r.verdict) << ',' << format_double(r.eigen.spectral_radius)
           << '\n';
}

inline nlohmann::json stability_report_to_json(const StabilityReport& r) {
    return {{"u", r.uw.u},
            {"w", r.uw.w},
            {"delta", r.eigen.delta},
            {"mu1", {r.eigen.mu1.real(), r.eigen.mu1.imag()}},
            {"mu2", {r.eigen.mu2.real(), r.eigen.mu2.imag()}},
            {"spectral_radius", r.eigen.spectral_radius},
            {"region", to_string(r.region)},
            {"verdict", to_string(r.verdict)}};
}

inline nlohmann::json constants_to_json(const GlobalStabilityConstants& c) {
    return {{"b", c.b},           {"a", c.a},
            {"x_ell", c.x_ell},   {"x_r", c.x_r},
            {"h", c.h},           {"k", c.k},
            {"lambda_c", c.lambda_c}, {"binding_constraint", c.binding_constraint}};
}

struct HopfScanRow {
    double eta;
    double u;
    double w;
    OmegaLimitVerdict omega;
};

// Scan CSV carries the per-eta simulation outcome next to the family-level
// coefficient verdict (A and verdict are properties of the family at eta0,
// repeated on every row).
inline void write_hopf_scan_csv(std::ostream& os, const std::vector<HopfScanRow>& rows,
                                double A, HopfVerdict verdict) {
    os << "eta,u,w,A,verdict,omega_kind,radius\n";
    for (const HopfScanRow& r : rows)
        os << format_double(r.eta) << ',' << format_double(r.u) << ','
           << format_double(r.w) << ',' << format_double(A) << ',' << to_string(verdict)
           << ',' << to_string(r.omega.kind) << ',' << format_double(r.omega.radius_estimate)
           << '\n';
}

// Side-by-side stochastic vs deterministic trajectory.
inline void write_hiam_comparison_csv(std::ostream& os, const HiamTrajectory& traj,
                                      const HiamConfig& cfg) {
    const MarketParams& mp = cfg.params;
    os << "n,p_st,dbar_st,p_det,d_det,abs_err_p,abs_err_d\n";
    double q = cfg.p0 - mp.V;
    double d = cfg.dbar0;
    for (std::size_t n = 0; n < traj.size(); ++n) {
        if (n > 0) {
            q += mp.lambda * d;
            d = g(mp, q, d);
        }
        os << n << ',' << format_double(traj.price(n)) << ','
           << format_double(traj.demands[n]) << ',' << format_double(q + mp.V) << ','
           << format_double(d) << ','
           << format_double(std::abs(traj.shifted_prices[n] - q)) << ','
           << format_double(std::abs(traj.demands[n] - d)) << '\n';
    }
}

inline nlohmann::json hiam_config_to_json(const HiamConfig& cfg) {
    nlohmann::json j = params_to_json(cfg.params);
    j["K"] = cfg.K;
    j["p0"] = cfg.p0;
    j["dbar0"] = cfg.dbar0;
    j["horizon"] = cfg.horizon;
    j["seed"] = cfg.seed;
    return j;
}

inline HiamConfig hiam_config_from_json(const nlohmann::json& j) {
    return HiamConfig(params_from_json(j), j.at("K").get<std::size_t>(),
                      j.at("p0").get<double>(), j.at("dbar0").get<double>(),
                      j.at("horizon").get<std::size_t>(), j.at("seed").get<std::uint64_t>());
}

}  // namespace marketdyn
