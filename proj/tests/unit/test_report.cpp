#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cgolab/report.hpp"

using namespace cgolab;

TEST_CASE("log-log fit of a power law") {
    const std::vector<double> h{0.4, 0.3, 0.2, 0.15, 0.1};
    std::vector<double> v;
    for (double x : h) v.push_back(3.0 * std::pow(x, 1.4));
    const LogLogFit f = fit_loglog(h, v);
    CHECK(f.slope == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0));
    v[2] = 0.0;
    CHECK_THROWS_AS(fit_loglog(h, v), PreconditionError);
}

TEST_CASE("windowed fit drops a pre-asymptotic largest h") {
    const std::vector<double> h{0.4, 0.3, 0.2, 0.15, 0.1};
    std::vector<double> v;
    for (double x : h) v.push_back(std::pow(x, 2.0));
    CHECK(fit_loglog_windowed(h, v).h.size() == 5);
    v[0] *= 5.0;
    const LogLogFit f = fit_loglog_windowed(h, v);
    CHECK(f.h.size() == 4);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("Richardson extrapolation") {
    const std::vector<double> h{0.4, 0.3, 0.2};
    std::vector<double> v;
    for (double x : h) v.push_back(2.0 + 0.7 * std::pow(x, 0.8));
    CHECK(richardson(h, v, 0.8).value == doctest::Approx(2.0).epsilon(1e-12));
    std::vector<Complex> z;
    for (double x : h) z.push_back(Complex(1.0, -1.0) + Complex(0.5, 0.2) * std::pow(x, 2.0));
    const auto r = richardson(h, z, 2.0);
    CHECK(std::abs(r.value - Complex(1.0, -1.0)) < 1e-12);
    CHECK_THROWS_AS(richardson(std::vector<double>{0.1}, std::vector<double>{1.0}, 1.0), PreconditionError);
}

TEST_CASE("config hash ignores key order") {
    const json a = json::parse(R"({"b": 1, "a": [1, 2], "c": {"y": 1, "x": 2}})");
    const json b = json::parse(R"({"c": {"x": 2, "y": 1}, "a": [1, 2], "b": 1})");
    const json c = json::parse(R"({"c": {"x": 2, "y": 1}, "a": [2, 1], "b": 1})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(json::object()) == "08f44b07b5901a25");
    CHECK(config_hash(json("a")) == "d4272417d7c77eea");
}

TEST_CASE("report verdicts and files") {
    ScanReport r;
    r.experiment = "demo";
    r.per_h = {{0.2, 0.5, {{"extra_key", 1.5}}}, {0.1, 0.25, {{"extra_key", 2.5}}}};
    r.add("small", true, 0.1, 1.0, "<=");
    CHECK(r.pass());
    r.add("large", false, 3.0, 1.0, "<=");
    CHECK_FALSE(r.pass());
    const json j = r.to_json();
    CHECK(j["verdicts"].size() == 2);
    CHECK(j["per_h"].size() == 2);

    const auto dir = std::filesystem::temp_directory_path() / "cgolab_test_report";
    std::filesystem::create_directories(dir);
    r.write_csv((dir / "r.csv").string());
    r.write_dat((dir / "r.dat").string());
    std::ifstream csv(dir / "r.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "h,value,extra_key");
    std::ifstream dat(dir / "r.dat");
    std::string line;
    int rows = 0;
    while (std::getline(dat, line)) {
        if (!line.empty() && line[0] != '#') ++rows;
    }
    CHECK(rows == 2);
    std::filesystem::remove_all(dir);
}
