#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgolab/config.hpp"

using namespace cgolab;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::string& text) {
    try {
        parse_config(text, "cfg.json");
    } catch (const FormatError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
    const RunConfig c = parse_config(R"({"experiment": "eikonal-check"})");
    CHECK(c.experiment == "eikonal-check");
    CHECK(c.exp.domain.n == 3);
    CHECK(c.exp.domain.lo == Vec3{0.0, 0.0, 0.0});
    CHECK(c.exp.domain.hi == Vec3{1.0, 1.0, 1.0});
    CHECK(c.exp.nx == 17);
    CHECK(c.exp.nt == 32);
    CHECK(c.exp.h_list == std::vector<double>{0.4, 0.3, 0.2, 0.15, 0.1});
    CHECK(c.exp.seed == 2024);
    CHECK(c.output == "out");
    CHECK(c.exp.warnings.empty());
    CHECK_FALSE(c.hash.empty());
}

TEST_CASE("negative h is rejected") {
    const std::string m = message_of(R"({"experiment": "cgo-scan",
  "weight": {"h_list": [0.4, -0.2, 0.1]}})");
    CHECK(m.find("cfg.json:2:") != std::string::npos);
    CHECK(m.find("weight.h_list") != std::string::npos);
    CHECK(message_of(R"({"experiment": "cgo-build", "weight": {"h": 0}})").find("weight.h") != std::string::npos);
}

TEST_CASE("omega is normalized with a warning") {
    const RunConfig c = parse_config(R"({"experiment": "eikonal-check", "weight": {"omega": [0, 0, 2]}})");
    CHECK(c.exp.omega == Vec3{0.0, 0.0, 1.0});
    REQUIRE(c.exp.warnings.size() == 1);
    CHECK(c.exp.warnings[0].find("omega normalized") != std::string::npos);
    const ScanReport r = run_experiment(c, false);
    CHECK(r.to_json()["warnings"].size() == 1);
    CHECK(message_of(R"({"experiment": "eikonal-check", "weight": {"omega": [0, 0, 0]}})").find("omega") !=
          std::string::npos);
}

TEST_CASE("every problem is reported with its line") {
    const std::string m = message_of(R"({
  "experiment": "carleman-scan",
  "grid": {"nx": 3, "nt": 0},
  "colour": "blue",
  "side": "sideways"
})");
    CHECK(m.find("cfg.json:3: grid.nx") != std::string::npos);
    CHECK(m.find("grid.nt") != std::string::npos);
    CHECK(m.find("cfg.json:4: colour: unknown key") != std::string::npos);
    CHECK(m.find("cfg.json:5: side") != std::string::npos);
}

TEST_CASE("malformed JSON is anchored") {
    const std::string m = message_of("{\n  \"experiment\": \"dn\",\n  \"seed\": ,\n}");
    CHECK(m.find("cfg.json:3:") != std::string::npos);
    CHECK(message_of(R"({"experiment": "jump"})").find("experiment") != std::string::npos);
    CHECK(message_of(R"({"experiment": "dn", "coefficients": {"base": "rough"}})").find("coefficients.base") !=
          std::string::npos);
}

TEST_CASE("config hash") {
    const RunConfig a = parse_config(R"({"experiment": "dn", "seed": 5})");
    const RunConfig b = parse_config(R"({"seed": 5, "experiment": "dn", "output": "elsewhere"})");
    const RunConfig c = parse_config(R"({"experiment": "dn", "seed": 6})");
    CHECK(a.hash == b.hash);
    CHECK(a.hash != c.hash);
    CHECK(a.hash.size() == 16);
}

TEST_CASE("flag overrides are validated") {
    RunConfig c = parse_config(R"({"experiment": "cgo-scan"})");
    c.exp.h_list = {0.3, -1.0};
    c.exp.nx = 2;
    const auto problems = validate(c);
    CHECK(problems.size() >= 2);
}

TEST_CASE("two-dimensional domain") {
    const RunConfig c = parse_config(R"({"experiment": "eikonal-check", "domain": {"n": 2}})");
    CHECK(c.exp.domain.n == 2);
    CHECK(c.exp.grid().spatial_size() == 17 * 17);
    CHECK(run_experiment(c, false).pass());
}

TEST_CASE("reports are reproducible") {
    const fs::path dir = fs::temp_directory_path() / "cgolab_test_reports";
    fs::remove_all(dir);
    RunConfig c = parse_config(R"({"experiment": "eikonal-check", "grid": {"nx": 9, "nt": 8}})");
    c.output = dir.string();
    const ScanReport r = run_experiment(c);
    CHECK(r.pass());
    CHECK(r.experiment == "eikonal-check");
    write_reports(r, c, false);
    const std::string first = slurp(dir / "eikonal-check.json");
    write_reports(run_experiment(c), c, false);
    CHECK(slurp(dir / "eikonal-check.json") == first);
    CHECK(first.find("timestamp") == std::string::npos);
    CHECK(fs::exists(dir / "eikonal-check.csv"));
    CHECK(fs::exists(dir / "eikonal-check.dat"));
    write_reports(r, c, true);
    const json j = json::parse(slurp(dir / "eikonal-check.json"));
    CHECK(j.contains("timestamp"));
    CHECK(j["config_hash"] == c.hash);
    fs::remove_all(dir);
}

TEST_CASE("coefficient files") {
    const fs::path dir = fs::temp_directory_path() / "cgolab_test_coeffs";
    fs::create_directories(dir);
    RunConfig c = parse_config(R"({"experiment": "forward", "grid": {"nx": 7, "nt": 8}})");
    const CoefficientPair fx = c.coefficients();
    write_cdf1((dir / "A.cdf1").string(), fx.A);
    write_cdf1((dir / "q.cdf1").string(), fx.q);
    c.a_file = (dir / "A.cdf1").string();
    c.q_file = (dir / "q.cdf1").string();
    const CoefficientPair rd = c.coefficients();
    CHECK(rd.A.data() == fx.A.data());
    CHECK(rd.q.data() == fx.q.data());
    c.experiment = "cgo-scan";
    CHECK_THROWS_AS(run_experiment(c, false), PreconditionError);
    fs::remove_all(dir);
}

TEST_CASE("experiment names") {
    CHECK(experiment_names().size() == 13);
}
