#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cgolab/experiments.hpp"

using namespace cgolab;

namespace {

ExperimentConfig small() {
    ExperimentConfig c;
    c.nx = 9;
    c.nt = 16;
    c.trials = 6;
    c.h_list = {0.4, 0.3, 0.2};
    return c;
}

Jet zero_jet(double, const Vec3&) { return Jet{}; }

const Verdict* find(const ScanReport& r, const std::string& name) {
    for (const auto& v : r.verdicts) {
        if (v.name == name) return &v;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("Carleman ratio contract") {
    const ExperimentConfig cfg = small();
    const Grid g = cfg.grid();
    const CoefficientModel c = base_model(cfg);
    const CarlemanWeight w = cfg.weight(0.2);
    CHECK_THROWS_AS(carleman_ratio(c, g, w, CarlemanSide::interior, 1.0, zero_jet), PreconditionError);
    CHECK_THROWS_AS(carleman_ratio(c, g, w, CarlemanSide::boundary, 1.0, zero_jet), PreconditionError);

    // nonzero on the lateral boundary
    const JetFn bad = [](double t, const Vec3&) {
        Jet j;
        j.v = t * t;
        j.dt = 2.0 * t;
        return j;
    };
    CHECK_THROWS_AS(carleman_ratio(c, g, w, CarlemanSide::boundary, 1.0, bad), PreconditionError);

    const JetFn bump = carleman_trial(g, CarlemanSide::interior, 2024, 0);
    const CarlemanValue v = carleman_ratio(c, g, w, CarlemanSide::interior, 1.0, bump);
    CHECK(std::isfinite(v.ratio));
    CHECK(v.ratio > 0.0);
    CHECK(v.ratio == doctest::Approx(v.lhs / v.rhs));

    const JetFn edge = carleman_trial(g, CarlemanSide::boundary, 2024, 0);
    const CarlemanValue b = carleman_ratio(c, g, w, CarlemanSide::boundary, 1.0, edge);
    CHECK(std::isfinite(b.ratio));
    CHECK(b.boundary_plus > 0.0);
    CHECK(b.boundary_minus > 0.0);
}

TEST_CASE("Carleman trials are seeded") {
    const Grid g = small().grid();
    const Vec3 x{0.3, 0.6, 0.4};
    const auto a = carleman_trial(g, CarlemanSide::interior, 7, 3)(0.4, x);
    const auto b = carleman_trial(g, CarlemanSide::interior, 7, 3)(0.4, x);
    const auto c = carleman_trial(g, CarlemanSide::interior, 8, 3)(0.4, x);
    CHECK(a.v == b.v);
    CHECK(a.lap == b.lap);
    CHECK(a.v != c.v);
}

TEST_CASE("minus-sign variants mirror the plus-sign ones") {
    for (const char* side : {"interior", "boundary"}) {
        ExperimentConfig plus = small();
        plus.side = side;
        ExperimentConfig minus = plus;
        minus.sign = "minus";
        const ScanReport rp = carleman_scan(plus);
        const ScanReport rm = carleman_scan(minus);
        REQUIRE(rp.per_h.size() == rm.per_h.size());
        for (std::size_t i = 0; i < rp.per_h.size(); ++i) {
            CHECK(rm.per_h[i].value == doctest::Approx(rp.per_h[i].value).epsilon(0.1));
            CHECK(rm.per_h[i].extra["median_ratio"].get<double>() ==
                  doctest::Approx(rp.per_h[i].extra["median_ratio"].get<double>()).epsilon(0.1));
        }
    }
}

TEST_CASE("scans are deterministic") {
    const ExperimentConfig cfg = small();
    CHECK(carleman_scan(cfg).to_json().dump() == carleman_scan(cfg).to_json().dump());
}

TEST_CASE("eikonal and conjugation checks") {
    const ExperimentConfig cfg = small();
    const ScanReport e = eikonal_check(cfg);
    CHECK(e.pass());
    REQUIRE(find(e, "eikonal") != nullptr);
    CHECK(find(e, "eikonal")->value < 1e-10);
    const ScanReport c = conjugation_check(cfg);
    CHECK(c.pass());
}

TEST_CASE("theorem1 with the identity gauge gives null verdicts") {
    ExperimentConfig cfg = small();
    cfg.gauge = "zero";
    const ScanReport r = scenario("theorem1", cfg);
    for (const auto& v : r.verdicts) {
        INFO(v.name);
        CHECK(v.pass);
    }
    REQUIRE(find(r, "dn_agree_on_front") != nullptr);
    CHECK(find(r, "dn_agree_on_front")->value == 0.0);
}

TEST_CASE("scenario contracts") {
    ExperimentConfig cfg = small();
    CHECK_THROWS_AS(scenario("lemma4", cfg), PreconditionError);
    cfg.gauge = "ramp";
    CHECK_THROWS_AS(scenario("corollary3", cfg), PreconditionError);
}

TEST_CASE("corollary3 with equal divergences") {
    ExperimentConfig cfg = small();
    cfg.gauge = "zero";
    const ScanReport r = scenario("corollary3", cfg);
    REQUIRE(find(r, "harmonic_gauge_zero") != nullptr);
    CHECK(find(r, "harmonic_gauge_zero")->value < 1e-10);
    CHECK(r.pass());
}

TEST_CASE("model pairs") {
    ExperimentConfig cfg = small();
    const Grid g = cfg.grid();
    const auto c1 = base_model(cfg).sample(g);
    const auto c2 = gauge_pair_model(cfg).sample(g);
    const auto c3 = partner_model(cfg).sample(g);
    CHECK(c1.boundary_mismatch(c2) < 1e-12);
    CHECK(c1.boundary_mismatch(c3) < 1e-12);
    CHECK(c1.a_mismatch(c2) > 0.0);
    cfg.partner = "knot";
    CHECK_THROWS_AS(partner_model(cfg), PreconditionError);
}

TEST_CASE("recover-q check") {
    const ExperimentConfig cfg = small();
    const ScanReport r = recover_q_check(cfg);
    CHECK(r.pass());
    REQUIRE(find(r, "null_pair_H_zero") != nullptr);
    CHECK(find(r, "null_pair_H_zero")->value == 0.0);
}

TEST_CASE("solver check") {
    const ScanReport r = solver_check(small());
    CHECK(r.pass());
    REQUIRE(r.fit.has_value());
    CHECK(r.fit->slope >= 1.9);
}
