#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

#include "ebind/cli.hpp"

using namespace ebind;
using namespace ebind::cli;
namespace fs = std::filesystem;

namespace {

const char* unit_ini = R"(
; reference configuration
[potential]
family = indicator-well
depth = 1
radius = 1

[cutoff]
variant = sharp
support = 1

[run]
alphas = 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 2e-2
seed = 3
)";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "ebind_test_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const char* exe = std::getenv("EBIND_CLI");
    REQUIRE(exe != nullptr);
    const std::string cmd = std::string(exe) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig c = parse_config_text(unit_ini);
    CHECK(c.potential.family == "indicator-well");
    CHECK(c.alphas.size() == 6);
    CHECK(c.alphas[1] == 5e-4);
    CHECK(c.seed == 3);
    CHECK_FALSE(c.gamma_reg.has_value());

    const RunConfig d = parse_config_text("[run]\nalpha = 0.01\ngamma_reg = 0.001\nspinor = 0, 0, 1, 0\n");
    CHECK(d.alphas == std::vector<double>{0.01});
    CHECK(d.gamma_for(0.5) == 0.001);
    CHECK(d.spinor.b == cplx(1.0));
    CHECK(d.potential.family == "indicator-well");
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config_text("[run]\nalpah = 1e-3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[extras]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("alpha = 1e-3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\nalpha = 1e-3x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\nalphas = 1e-3, 1e-3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\nalphas = 1e-3, -1e-3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\ntolerance = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\nspinor = 1, 0, 1, 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\nalpha = 1e-3\nalpha = 2e-3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[potential]\nfamily = coulomb\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[potential]\nfamily = file\nfile = /nonexistent/profile.txt\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[cutoff]\nvariant = smooth-bump\nwidth = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\ngamma_floor = 0.5\ngamma_ceiling = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("profile files resolve relative to the config file") {
    const fs::path dir = scratch("relative");
    fs::create_directories(dir);
    std::ofstream(dir / "w.txt") << "0 -1\n1 -1\n";
    std::ofstream(dir / "run.ini") << "[potential]\nfamily = file\nfile = w.txt\n";
    const RunConfig c = parse_config_file(dir / "run.ini");
    CHECK(c.potential.file == dir / "w.txt");
    CHECK(c.make_potential()(0.5) == -1.0);
}

TEST_CASE("overrides and resolved config") {
    RunConfig c = parse_config_text(unit_ini);
    apply_overrides(c, {4u, 99u, 1e-9});
    CHECK(c.threads == 4);
    CHECK(c.seed == 99);
    CHECK(c.tolerance == 1e-9);
    const auto j = nlohmann::json::parse(config_json(c));
    CHECK(j["run"]["seed"] == 99);
    CHECK(j["potential"]["family"] == "indicator-well");
    CHECK(j["run"]["gamma_policy"]["power"] == 2.0);
    CHECK_THROWS_AS(apply_overrides(c, {std::nullopt, std::nullopt, -1.0}), ConfigError);
}

TEST_CASE("closed-form eta^2 for sharp cutoffs") {
    for (double c : {0.0, 0.1, 0.25, 1.0, std::pow(oracle::pi, 4) / 32.0})
        for (double L : {0.5, 1.0, 2.0})
            CHECK(eta_squared_sharp_closed_form(L, c) == doctest::Approx(oracle::eta_squared_sharp(L, c)).epsilon(1e-13));
}

TEST_CASE("lambda0 and eta2 reports") {
    const RunConfig c = parse_config_text(unit_ini);
    std::ostringstream log;
    const fs::path out = scratch("reports");
    REQUIRE(run_command("lambda0", c, out, log) == exit_code::ok);
    const auto l = nlohmann::json::parse(slurp(out / "lambda0.json"));
    CHECK(l["command"] == "lambda0");
    CHECK(l["config"] == nlohmann::json::parse(config_json(c)));
    CHECK(l["results"]["lambda0"].get<double>() == doctest::Approx(2.4674011).epsilon(1e-6 / 2.4674011));

    REQUIRE(run_command("eta2", c, out, log) == exit_code::ok);
    const auto e = nlohmann::json::parse(slurp(out / "eta2.json"));
    const auto& r = e["results"];
    CHECK(r["eta2_cw_zero"].get<double>() == doctest::Approx(2.0 / (3.0 * oracle::pi) * std::log(2.0)).epsilon(1e-8));
    CHECK(r["eta2"].get<double>() == doctest::Approx(r["closed_form"]["eta2"].get<double>()).epsilon(1e-8));
    CHECK(r["c_w"].get<double>() == doctest::Approx(std::pow(oracle::pi, 4) / 32.0).epsilon(1e-10));
    CHECK(r["d_w_plus"]["value"] == 0.0);
    CHECK(r["d_abs_w"]["quadrature"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("sigma0 and certify reports") {
    RunConfig c = parse_config_text(unit_ini);
    c.alphas = {1e-3, 1e-2};
    c.lambda_probes = {1.0};
    std::ostringstream log;
    const fs::path out = scratch("certify");
    REQUIRE(run_command("sigma0", c, out, log) == exit_code::ok);
    const auto s = nlohmann::json::parse(slurp(out / "sigma0.json"));
    CHECK(s["results"]["points"].size() == 2);
    CHECK(s["results"]["points"][0]["gap"].get<double>() > 0.0);

    CHECK(run_command("certify", c, out, log) == exit_code::ok);
    c.lambda_probes = {1.0, 0.5};
    CHECK(run_command("certify", c, out, log) == exit_code::check_failed);
    const auto j = nlohmann::json::parse(slurp(out / "certify.json"));
    CHECK(j["results"]["certificates"].size() == 4);
    CHECK(j["results"]["all_bind"] == false);
}

TEST_CASE("sweep CSV is deterministic and thread independent") {
    RunConfig c = parse_config_text(unit_ini);
    std::ostringstream log;
    const fs::path a = scratch("sweep_a");
    const fs::path b = scratch("sweep_b");
    REQUIRE(run_command("sweep", c, a, log) == exit_code::ok);
    c.threads = 3;
    REQUIRE(run_command("sweep", c, b, log) == exit_code::ok);
    const std::string csv = slurp(a / "sweep.csv");
    CHECK(csv == slurp(b / "sweep.csv"));
    CHECK(csv.rfind("alpha,lambda_c,predicted_bound\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    const auto j = nlohmann::json::parse(slurp(a / "sweep.json"));
    CHECK(j["results"]["all_below_lambda0"] == true);
    CHECK(j["results"]["points"].size() == 6);
}

TEST_CASE("unknown command and invalid config give exit 2 without outputs") {
    std::ostringstream log;
    const fs::path out = scratch("nothing");
    CHECK(run_command("frobnicate", RunConfig{}, out, log) == exit_code::parse_error);
    RunConfig bad;
    bad.tolerance = -1.0;
    CHECK(run_command("lambda0", bad, out, log) == exit_code::parse_error);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("executable exit codes") {
    const fs::path dir = scratch("exe");
    fs::create_directories(dir);
    std::ofstream(dir / "good.ini") << unit_ini;
    std::ofstream(dir / "malformed.ini") << "[potential]\nfamily = indicator-well\ndepth = deep\n";
    std::ofstream(dir / "broken.ini") << "[potential\nfamily = x\n";
    std::ofstream(dir / "repulsive.txt") << "0 1\n1 1\n";
    std::ofstream(dir / "repulsive.ini") << "[potential]\nfamily = file\nfile = repulsive.txt\n";

    const std::string out = (dir / "out").string();
    CHECK(run_cli("lambda0 --config " + (dir / "malformed.ini").string() + " --out " + out) == 2);
    CHECK(run_cli("lambda0 --config " + (dir / "broken.ini").string() + " --out " + out) == 2);
    CHECK(run_cli("lambda0 --config " + (dir / "good.ini").string() + " --out " + out + " --tol -3") == 2);
    CHECK(run_cli("lambda0 --bogus") == 2);
    CHECK(run_cli("") == 2);
    CHECK_FALSE(fs::exists(out));

    CHECK(run_cli("lambda0 --config " + (dir / "repulsive.ini").string() + " --out " + out) == 3);
    CHECK_FALSE(fs::exists(fs::path(out) / "lambda0.json"));

    CHECK(run_cli("lambda0 --config " + (dir / "good.ini").string() + " --out " + out + " --threads 2 --seed 5") == 0);
    const auto j = nlohmann::json::parse(slurp(fs::path(out) / "lambda0.json"));
    CHECK(j["config"]["run"]["seed"] == 5);
    CHECK(j["config"]["run"]["threads"] == 2);
}
