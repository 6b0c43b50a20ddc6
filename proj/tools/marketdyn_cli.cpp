// Command-line surface for the market dynamics laboratory: orbit simulation,
// stability classification, phase-diagram sweeps, Hopf scans, the global
// feedback threshold, and stochastic-vs-deterministic comparison runs.
//
// Exit codes: 0 success, 2 invalid input, 3 numeric failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "marketdyn/distribution.hpp"
#include "marketdyn/dynamics.hpp"
#include "marketdyn/global_stability.hpp"
#include "marketdyn/hiam.hpp"
#include "marketdyn/hopf.hpp"
#include "marketdyn/io.hpp"
#include "marketdyn/params.hpp"
#include "marketdyn/stability.hpp"

namespace md = marketdyn;
using nlohmann::json;

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

bool is_set(double x) { return !std::isnan(x); }

// Writes to the file at `path`, or to stdout when path is "-" or empty.
void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw md::invalid_parameter("cannot open output file: " + path);
    os << content;
}

json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw md::invalid_parameter("cannot open config file: " + path);
    json j;
    is >> j;
    return j;
}

// Tracks scalar options so a JSON config can fill everything the command
// line left out, and so --dump-config can emit the resolved run back.
struct ConfigBinder {
    struct Entry {
        CLI::Option* opt;
        std::function<void(const json&)> load;
        std::function<void(json&)> save;
    };
    std::vector<Entry> entries;

    template <class T>
    void bind(const std::string& key, CLI::Option* opt, T* v) {
        entries.push_back(Entry{
            opt,
            [key, v](const json& j) {
                if (j.contains(key)) *v = j.at(key).get<T>();
            },
            [key, v](json& j) {
                if constexpr (std::is_same_v<T, double>) {
                    if (!is_set(*v)) return;
                }
                j[key] = *v;
            }});
    }

    void merge_from(const json& j) {
        for (auto& e : entries)
            if (e.opt->count() == 0) e.load(j);
    }

    json dump() const {
        json j;
        for (const auto& e : entries) e.save(j);
        return j;
    }
};

// Shared market-parameter options (--alpha, --J, --lambda, --sigma or
// --dist-json, --V).
struct ParamOptions {
    double alpha = kUnset, J = kUnset, lambda = kUnset, sigma = kUnset, V = 0.0;
    std::string dist_json;
    CLI::Option* dist_json_opt = nullptr;

    void add(CLI::App& app, ConfigBinder& binder, bool with_lambda = true) {
        binder.bind("alpha", app.add_option("--alpha", alpha, "proportion of speculators, in (0,1)"),
                    &alpha);
        binder.bind("J", app.add_option("--J", J, "speculative trend, positive"), &J);
        if (with_lambda)
            binder.bind("lambda", app.add_option("--lambda", lambda, "price feedback, positive"),
                        &lambda);
        binder.bind("sigma", app.add_option("--sigma", sigma, "zero-mean Normal sigma"), &sigma);
        dist_json_opt = app.add_option("--dist-json", dist_json,
                                       R"(distribution JSON, e.g. {"kind":"normal","sigma":1})");
        binder.bind("V", app.add_option("--V", V, "market fundamental value"), &V);
    }

    void merge_dist(const json& cfg) {
        if (dist_json_opt->count() == 0 && cfg.contains("dist") && !is_set(sigma))
            dist_json = cfg.at("dist").dump();
    }

    md::EvaluationDistribution dist() const {
        if (!dist_json.empty()) return md::dist_from_json(json::parse(dist_json));
        if (!is_set(sigma))
            throw md::invalid_parameter("no distribution given: pass --sigma or --dist-json");
        return md::EvaluationDistribution::normal_zero_mean(sigma);
    }

    md::MarketParams params(double fallback_lambda = kUnset) const {
        const double lam = is_set(lambda) ? lambda : fallback_lambda;
        return md::MarketParams(alpha, J, lam, dist(), V);
    }
};

struct CommonFlags {
    std::string out = "-";
    std::string config_path;
    bool dump_config = false;

    void add(CLI::App& app) {
        app.add_option("--out", out, "output file, or - for stdout");
        app.add_option("--config", config_path, "JSON config; flags override it");
        app.add_flag("--dump-config", dump_config, "print the resolved config JSON and exit");
    }
};

int run_simulate(const ParamOptions& po, const CommonFlags& cf, double p0, double d0,
                 std::size_t steps, const ConfigBinder& binder) {
    if (cf.dump_config) {
        json j = binder.dump();
        j["dist"] = md::dist_to_json(po.dist());
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    const md::Orbit orbit = md::simulate(po.params(), md::State{p0, d0}, steps);
    std::ostringstream os;
    md::write_orbit_csv(os, orbit);
    write_output(cf.out, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"market dynamics laboratory"};
    app.require_subcommand(1);

    try {
        // ------------------------------------------------------------ simulate
        auto* sim = app.add_subcommand("simulate", "iterate the market map and write an orbit CSV");
        ConfigBinder sim_binder;
        ParamOptions sim_po;
        CommonFlags sim_cf;
        double sim_p0 = 0.0, sim_d0 = 0.0;
        std::size_t sim_steps = 1000;
        sim_po.add(*sim, sim_binder);
        sim_binder.bind("p0", sim->add_option("--p0", sim_p0, "initial price"), &sim_p0);
        sim_binder.bind("d0", sim->add_option("--d0", sim_d0, "initial excess demand"), &sim_d0);
        sim_binder.bind("steps", sim->add_option("--steps", sim_steps, "number of map steps"),
                        &sim_steps);
        sim_cf.add(*sim);

        // ------------------------------------------------------------ classify
        auto* cls = app.add_subcommand("classify", "closed-form local stability at the equilibrium");
        ConfigBinder cls_binder;
        ParamOptions cls_po;
        CommonFlags cls_cf;
        double cls_margin = 1e-9;
        cls_po.add(*cls, cls_binder);
        cls_binder.bind("margin", cls->add_option("--margin", cls_margin, "boundary margin"),
                        &cls_margin);
        cls_cf.add(*cls);

        // -------------------------------------------------------- phase-diagram
        auto* pd = app.add_subcommand("phase-diagram", "classify a (u,w) grid and write CSV");
        ConfigBinder pd_binder;
        CommonFlags pd_cf;
        double u_min = 0.015, u_max = 3.0, w_min = 0.03, w_max = 6.0, pd_margin = 1e-9;
        std::size_t nu = 200, nw = 200;
        pd_binder.bind("u_min", pd->add_option("--u-min", u_min, "grid start in u"), &u_min);
        pd_binder.bind("u_max", pd->add_option("--u-max", u_max, "grid end in u"), &u_max);
        pd_binder.bind("w_min", pd->add_option("--w-min", w_min, "grid start in w"), &w_min);
        pd_binder.bind("w_max", pd->add_option("--w-max", w_max, "grid end in w"), &w_max);
        pd_binder.bind("nu", pd->add_option("--nu", nu, "grid points in u"), &nu);
        pd_binder.bind("nw", pd->add_option("--nw", nw, "grid points in w"), &nw);
        pd_binder.bind("margin", pd->add_option("--margin", pd_margin, "boundary margin"),
                       &pd_margin);
        pd_cf.add(*pd);

        // ------------------------------------------------------------ lambda-c
        auto* lc = app.add_subcommand("lambda-c", "global-stability feedback threshold");
        ConfigBinder lc_binder;
        ParamOptions lc_po;
        CommonFlags lc_cf;
        lc_po.add(*lc, lc_binder, /*with_lambda=*/false);
        lc_cf.add(*lc);

        // ------------------------------------------------------------ hopf-scan
        auto* hs = app.add_subcommand(
            "hopf-scan", "scan the speculator-proportion family across the critical point");
        ConfigBinder hs_binder;
        ParamOptions hs_po;
        CommonFlags hs_cf;
        double hs_eta_min = kUnset, hs_eta_max = kUnset, hs_p0 = 0.01, hs_d0 = 0.01;
        std::size_t hs_steps = 100000, hs_n_etas = 11;
        std::vector<double> hs_etas;
        hs_po.add(*hs, hs_binder);
        hs_binder.bind("eta_min", hs->add_option("--eta-min", hs_eta_min, "family range start"),
                       &hs_eta_min);
        hs_binder.bind("eta_max", hs->add_option("--eta-max", hs_eta_max, "family range end"),
                       &hs_eta_max);
        hs->add_option("--eta", hs_etas, "explicit scan values (repeatable)");
        hs_binder.bind("n_etas", hs->add_option("--n-etas", hs_n_etas,
                                                "evenly spaced scan points when --eta is absent"),
                       &hs_n_etas);
        hs_binder.bind("p0", hs->add_option("--p0", hs_p0, "initial price"), &hs_p0);
        hs_binder.bind("d0", hs->add_option("--d0", hs_d0, "initial excess demand"), &hs_d0);
        hs_binder.bind("steps", hs->add_option("--steps", hs_steps, "steps per scan point"),
                       &hs_steps);
        hs_cf.add(*hs);

        // --------------------------------------------------------- hiam-compare
        auto* hc = app.add_subcommand(
            "hiam-compare", "finite-agent stochastic run against the deterministic orbit");
        ConfigBinder hc_binder;
        ParamOptions hc_po;
        CommonFlags hc_cf;
        double hc_p0 = 0.0, hc_d0 = 0.0;
        std::size_t hc_K = 1000, hc_horizon = 50, hc_replicas = 1;
        std::uint64_t hc_seed = 1;
        hc_po.add(*hc, hc_binder);
        hc_binder.bind("K", hc->add_option("--K", hc_K, "number of agents"), &hc_K);
        hc_binder.bind("p0", hc->add_option("--p0", hc_p0, "initial price"), &hc_p0);
        hc_binder.bind("dbar0", hc->add_option("--d0", hc_d0, "initial excess demand"), &hc_d0);
        hc_binder.bind("horizon", hc->add_option("--horizon", hc_horizon, "time horizon"),
                       &hc_horizon);
        hc_binder.bind("seed", hc->add_option("--seed", hc_seed, "base RNG seed"), &hc_seed);
        hc_binder.bind("replicas",
                       hc->add_option("--replicas", hc_replicas, "replica count for statistics"),
                       &hc_replicas);
        hc_cf.add(*hc);

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 2;
        }

        auto apply_config = [](const CommonFlags& cf, ConfigBinder& binder, ParamOptions* po) {
            if (cf.config_path.empty()) return;
            const json cfg = load_config(cf.config_path);
            binder.merge_from(cfg);
            if (po) po->merge_dist(cfg);
        };

        if (sim->parsed()) {
            apply_config(sim_cf, sim_binder, &sim_po);
            return run_simulate(sim_po, sim_cf, sim_p0, sim_d0, sim_steps, sim_binder);
        }

        if (cls->parsed()) {
            apply_config(cls_cf, cls_binder, &cls_po);
            if (cls_cf.dump_config) {
                json j = cls_binder.dump();
                j["dist"] = md::dist_to_json(cls_po.dist());
                std::cout << j.dump(2) << '\n';
                return 0;
            }
            const md::StabilityReport report = md::classify(cls_po.params(), cls_margin);
            write_output(cls_cf.out, md::stability_report_to_json(report).dump(2) + "\n");
            return 0;
        }

        if (pd->parsed()) {
            apply_config(pd_cf, pd_binder, nullptr);
            if (pd_cf.dump_config) {
                std::cout << pd_binder.dump().dump(2) << '\n';
                return 0;
            }
            const md::PhaseDiagram diagram =
                md::phase_diagram(u_min, u_max, nu, w_min, w_max, nw, pd_margin);
            std::ostringstream os;
            md::write_phase_diagram_csv(os, diagram);
            write_output(pd_cf.out, os.str());
            std::map<std::string, std::size_t> counts;
            for (const auto& cell : diagram.cells) ++counts[md::to_string(cell.region)];
            json jc;
            for (const auto& [name, count] : counts) jc[name] = count;
            std::cout << jc.dump() << '\n';
            return 0;
        }

        if (lc->parsed()) {
            apply_config(lc_cf, lc_binder, &lc_po);
            if (lc_cf.dump_config) {
                json j = lc_binder.dump();
                j["dist"] = md::dist_to_json(lc_po.dist());
                std::cout << j.dump(2) << '\n';
                return 0;
            }
            // lambda plays no role in the threshold constants; a positive
            // placeholder satisfies the parameter constraints.
            const md::MarketParams mp = lc_po.params(/*fallback_lambda=*/1.0);
            write_output(lc_cf.out, md::constants_to_json(md::constants(mp)).dump(2) + "\n");
            return 0;
        }

        if (hs->parsed()) {
            apply_config(hs_cf, hs_binder, &hs_po);
            if (hs_cf.dump_config) {
                json j = hs_binder.dump();
                j["dist"] = md::dist_to_json(hs_po.dist());
                std::cout << j.dump(2) << '\n';
                return 0;
            }
            if (!is_set(hs_eta_min) || !is_set(hs_eta_max))
                throw md::invalid_parameter("hopf-scan requires --eta-min and --eta-max");
            const md::ParamFamily family = md::alpha_family(
                hs_po.J, hs_po.lambda, hs_po.dist(), hs_eta_min, hs_eta_max, hs_po.V);
            if (hs_etas.empty()) {
                if (hs_n_etas < 2)
                    throw md::invalid_parameter("hopf-scan: --n-etas must be >= 2");
                for (std::size_t i = 0; i < hs_n_etas; ++i)
                    hs_etas.push_back(hs_eta_min + (hs_eta_max - hs_eta_min) *
                                                       static_cast<double>(i) /
                                                       static_cast<double>(hs_n_etas - 1));
            }
            double A = std::numeric_limits<double>::quiet_NaN();
            md::HopfVerdict verdict = md::HopfVerdict::Inconclusive;
            try {
                const double eta0 = md::find_eta0(family);
                const md::HopfReport report = md::coefficient_A(family, eta0);
                A = report.A;
                verdict = report.verdict;
            } catch (const md::invalid_parameter&) {
                // no critical crossing inside the range: scan rows still make sense
            } catch (const md::numeric_error&) {
                // degenerate transform at the crossing: report inconclusive
            }
            const auto scan =
                md::hopf_scan(family, hs_etas, md::State{hs_p0, hs_d0}, hs_steps);
            std::vector<md::HopfScanRow> rows;
            rows.reserve(scan.size());
            for (const auto& [eta, omega] : scan) {
                const md::UWCoordinates uw = md::uw_of(family.at(eta));
                rows.push_back({eta, uw.u, uw.w, omega});
            }
            std::ostringstream os;
            md::write_hopf_scan_csv(os, rows, A, verdict);
            write_output(hs_cf.out, os.str());
            return 0;
        }

        if (hc->parsed()) {
            apply_config(hc_cf, hc_binder, &hc_po);
            const md::HiamConfig cfg(hc_po.params(), hc_K, hc_p0, hc_d0, hc_horizon, hc_seed);
            if (hc_cf.dump_config) {
                std::cout << md::hiam_config_to_json(cfg).dump(2) << '\n';
                return 0;
            }
            const md::HiamTrajectory traj = md::run_hiam(cfg);
            std::ostringstream os;
            md::write_hiam_comparison_csv(os, traj, cfg);
            write_output(hc_cf.out, os.str());
            json summary;
            if (hc_replicas > 1) {
                const md::ReplicaStats stats = md::replicate(cfg, hc_replicas, hc_seed);
                summary = {{"replicas", hc_replicas},
                           {"median", stats.median},
                           {"q1", stats.q1},
                           {"q3", stats.q3}};
            } else {
                summary = {{"sup_error", md::compare_to_deterministic(cfg)}};
            }
            std::cout << summary.dump() << '\n';
            return 0;
        }
        return 2;
    } catch (const md::invalid_parameter& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const md::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
