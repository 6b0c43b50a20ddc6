#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = MARKETDYN_CLI_PATH;

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() / "marketdyn_cli_test";
    fs::create_directories(dir);
    const fs::path out = dir / ("out" + std::to_string(counter) + ".txt");
    const fs::path err = dir / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd =
        kCli + " " + args + " > " + out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WEXITSTATUS(raw);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("simulate writes one row per state") {
    const CliResult r = run_cli(
        "simulate --alpha 0.5 --J 0.8 --lambda 0.1 --sigma 1 --p0 1 --d0 0 --steps 1000");
    REQUIRE(r.exit_code == 0);
    CHECK(line_count(r.out) == 1002);  // header + 1001 states
    CHECK(r.out.rfind("n,p,d\n", 0) == 0);
}

TEST_CASE("simulate at the fixed point emits zeros") {
    const CliResult r = run_cli(
        "simulate --alpha 0.5 --J 0.8 --lambda 0.1 --sigma 1 --p0 0 --d0 0 --steps 5");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "n,p,d\n0,0,0\n1,0,0\n2,0,0\n3,0,0\n4,0,0\n5,0,0\n");
}

TEST_CASE("constraint violations exit with code 2 and name the constraint") {
    const CliResult r = run_cli("simulate --alpha 1.2 --J 1 --lambda 0.1 --sigma 1");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("alpha") != std::string::npos);
    CHECK(r.err.find("(0,1)") != std::string::npos);

    const CliResult r2 = run_cli("simulate --alpha 0.5 --J 1 --lambda 0.1 --sigma -1");
    CHECK(r2.exit_code == 2);

    const CliResult r3 = run_cli("simulate --alpha 0.5 --J 1 --lambda 0.1 --sigma 1 --bogus 3");
    CHECK(r3.exit_code == 2);
}

TEST_CASE("repeated runs are byte-identical") {
    const std::string args =
        "simulate --alpha 0.52 --J 1.1 --lambda 0.4 --sigma 0.9 --p0 0.3 --d0 -0.2 --steps 500";
    const CliResult a = run_cli(args);
    const CliResult b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);

    const std::string hiam =
        "hiam-compare --alpha 0.5 --J 0.8 --lambda 0.1 --sigma 1 --V 10 --K 1000 --p0 10.5 "
        "--d0 0 --horizon 50 --seed 7";
    const CliResult ha = run_cli(hiam);
    const CliResult hb = run_cli(hiam);
    REQUIRE(ha.exit_code == 0);
    CHECK(ha.out == hb.out);
}

TEST_CASE("lambda-c reports the threshold as JSON") {
    const CliResult r = run_cli("lambda-c --alpha 0.5 --J 0.8 --sigma 1");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("lambda_c").get<double>() == Catch::Approx(0.2).margin(1e-12));
    CHECK(j.at("k").get<int>() == 1);
    CHECK(j.at("binding_constraint").get<std::string>() == "slope");
    CHECK(j.at("b").get<double>() == Catch::Approx(0.31915382432114614).epsilon(1e-12));
}

TEST_CASE("classify lands on the boundary when u is within the margin of 1") {
    const CliResult r = run_cli("classify --alpha 0.5 --J 1 --lambda 0.5 --sigma 0.3989422804");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("region").get<std::string>() == "Boundary");
    CHECK(j.at("verdict").get<std::string>() == "indeterminate");
}

TEST_CASE("phase-diagram emits region counts and a full grid") {
    const fs::path dir = fs::temp_directory_path() / "marketdyn_cli_test";
    fs::create_directories(dir);
    const fs::path csv = dir / "pd.csv";
    const CliResult r = run_cli(
        "phase-diagram --u-min 0.1 --u-max 2.9 --w-min 0.1 --w-max 5.9 --nu 24 --nw 24 --out " +
        csv.string());
    REQUIRE(r.exit_code == 0);
    const auto counts = nlohmann::json::parse(r.out);
    std::size_t total = 0;
    for (const auto& [key, value] : counts.items()) total += value.get<std::size_t>();
    CHECK(total == 24 * 24);
    CHECK(line_count(slurp(csv)) == 24 * 24 + 1);
}

TEST_CASE("dump-config round trips to an identical run") {
    const fs::path dir = fs::temp_directory_path() / "marketdyn_cli_test";
    fs::create_directories(dir);
    const fs::path cfg = dir / "sim.json";
    const std::string flags =
        "--alpha 0.5 --J 0.8 --lambda 0.1 --sigma 1 --p0 1 --d0 0.3 --steps 200";
    const CliResult dumped = run_cli("simulate " + flags + " --dump-config");
    REQUIRE(dumped.exit_code == 0);
    {
        std::ofstream os(cfg);
        os << dumped.out;
    }
    const CliResult direct = run_cli("simulate " + flags);
    const CliResult from_config = run_cli("simulate --config " + cfg.string());
    REQUIRE(direct.exit_code == 0);
    REQUIRE(from_config.exit_code == 0);
    CHECK(direct.out == from_config.out);
}

TEST_CASE("hopf-scan produces one row per eta") {
    const CliResult r = run_cli(
        "hopf-scan --J 1 --lambda 0.5 --sigma 0.3989422804014327 --eta-min 0.3 --eta-max 0.7 "
        "--eta 0.47 --eta 0.53 --steps 20000");
    REQUIRE(r.exit_code == 0);
    REQUIRE(line_count(r.out) == 3);
    CHECK(r.out.rfind("eta,u,w,A,verdict,omega_kind,radius\n", 0) == 0);
    CHECK(r.out.find("supercritical") != std::string::npos);
    CHECK(r.out.find("converges_to_origin") != std::string::npos);
    CHECK(r.out.find("limit_cycle") != std::string::npos);
}

TEST_CASE("hiam-compare emits trajectory and summary") {
    const CliResult r = run_cli(
        "hiam-compare --alpha 0.5 --J 0.8 --lambda 0.1 --sigma 1 --V 10 --K 500 --p0 10.5 "
        "--d0 0 --horizon 20 --seed 3 --out -");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("n,p_st,dbar_st,p_det,d_det,abs_err_p,abs_err_d\n", 0) == 0);
    // the summary JSON goes to stdout after the CSV
    CHECK(r.out.find("sup_error") != std::string::npos);
}
