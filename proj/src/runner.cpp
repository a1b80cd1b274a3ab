#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cgolab/config.hpp"

namespace cgolab {

namespace {

namespace fs = std::filesystem;

void merge(ScanReport& into, const ScanReport& part, const std::string& key) {
    for (const auto& v : part.verdicts) into.verdicts.push_back(v);
    json sub = part.extra;
    json rows = json::array();
    for (const auto& m : part.per_h) {
        json e = m.extra;
        e["h"] = m.h;
        e["value"] = m.value;
        rows.push_back(e);
    }
    into.extra[key] = {{"extra", sub}, {"per_h", rows}};
    for (const auto& w : part.warnings) {
        if (std::find(into.warnings.begin(), into.warnings.end(), w) == into.warnings.end()) into.warnings.push_back(w);
    }
}

ScanReport base_report(const RunConfig& cfg) {
    ScanReport r;
    r.experiment = cfg.experiment;
    r.params = cfg.exp.to_json();
    r.warnings = cfg.exp.warnings;
    return r;
}

std::string out_path(const RunConfig& cfg, const std::string& file) {
    fs::create_directories(cfg.output);
    return (fs::path(cfg.output) / file).string();
}

// Bank datum t^2 (T - t) g(x) turned into a terminal datum t (T - t)^2 g(x).
ComplexField terminal_datum(const ComplexField& f) {
    const Grid& g = f.grid();
    ComplexField out = f;
    for (int k = 0; k < g.levels(); ++k) {
        const double t = g.t(k);
        const double factor = t > 0.0 ? (g.T() - t) / t : 0.0;
        for (auto& v : out.slice(k)) v *= factor;
    }
    return out;
}

ScanReport run_solve(const RunConfig& cfg, Direction dir, bool write) {
    ScanReport rep = base_report(cfg);
    const Grid g = cfg.exp.grid();
    const CoefficientPair c = cfg.coefficients();
    c.validate();
    ComplexField data = f_bank(g, cfg.exp.seed, cfg.exp.bank_size)[cfg.data_index];
    if (dir == Direction::adjoint) data = terminal_datum(data);
    ParabolicProblem<Complex> p{c, data, {}, {}, dir};
    SolveStats stats;
    const ComplexField u = solve(p, cfg.exp.scheme, &stats);
    rep.per_h.push_back({g.dx(0), norm(u, NormKind::l2), {{"max_abs", u.max_abs()}, {"nx", g.nx(0)}, {"nt", g.nt()}}});
    rep.extra = {{"steps", stats.steps},
                 {"iterations", stats.iterations},
                 {"max_residual", stats.max_residual},
                 {"data_index", cfg.data_index}};
    rep.add("solver_converged", stats.max_residual <= 1e-8, stats.max_residual, 1e-8, "<=");
    if (write) {
        const std::string name = dir == Direction::forward ? "u.cdf1" : "v.cdf1";
        write_cdf1(out_path(cfg, name), u);
        rep.extra["field"] = name;
    }
    return rep;
}

ScanReport run_dn(const RunConfig& cfg, bool write) {
    ScanReport rep = base_report(cfg);
    const Grid g = cfg.exp.grid();
    const CoefficientPair c = cfg.coefficients();
    c.validate();
    const BoundaryPartition part = cfg.exp.partition(g);
    const ComplexField f = f_bank(g, cfg.exp.seed, cfg.exp.bank_size)[cfg.data_index];
    ComplexField u;
    const DNTrace tr = dn_strong(c, f, part, cfg.subset, cfg.exp.scheme, &u);
    const DNTrace full = dn_trace_of(c, u, part, Subset::full);
    // strong trace against the volume form, test function vanishing at t = T; reported only
    const int n = g.dim();
    const ComplexField v = ComplexField::sample(g, [&](double t, const Vec3& x) {
        return (g.T() - t) * std::exp(Complex(0.3 * x[0] - 0.2 * x[1], 0.4 * x[n - 1]));
    });
    const Complex strong = dn_pair(g, part, full, v);
    const Complex weak = dn_weak_of(c, u, v);
    const double rel = std::abs(strong - weak) / std::max(std::abs(weak), 1e-300);
    double scale = 0.0;
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t i = 0; i < part.facets.size(); ++i) {
            scale += g.time_weight(k) * part.facets[i].weight * std::abs(full.values.at(k, i)) *
                     std::abs(v(k, part.facets[i].node));
        }
    }
    const double norm_subset = trace_norm(g, part, tr.values, tr.mask);
    rep.per_h.push_back({g.dx(0), norm_subset, {{"nx", g.nx(0)}, {"nt", g.nt()}}});
    rep.extra = {{"subset", to_string(cfg.subset)},
                 {"facets", std::count(tr.mask.begin(), tr.mask.end(), 1)},
                 {"trace_norm", norm_subset},
                 {"strong_pairing", {strong.real(), strong.imag()}},
                 {"weak_pairing", {weak.real(), weak.imag()}},
                 {"strong_weak_difference", rel},
                 {"strong_weak_difference_scaled", std::abs(strong - weak) / std::max(scale, 1e-300)}};
    rep.add("trace_finite", std::isfinite(norm_subset), norm_subset, 0.0, "finite");
    if (write) {
        write_trace_csv(out_path(cfg, "trace.csv"), g, part, tr);
        write_trace_cdf1(out_path(cfg, "trace.cdf1"), g, tr);
    }
    return rep;
}

ScanReport run_cgo_build(const RunConfig& cfg, bool write) {
    ScanReport rep = base_report(cfg);
    const CoefficientPair c = cfg.coefficients();
    const CarlemanWeight w = cfg.exp.weight(cfg.exp.h);
    const CGOSolution s = build_cgo(w, c, profile_from_name(cfg.exp.m2), cfg.exp.kind);
    const CGOMetrics& m = s.metrics;
    rep.per_h.push_back({w.h,
                         m.amplitude_residual_nocut,
                         {{"amplitude_residual_cutoff", m.amplitude_residual},
                          {"remainder_h1", m.remainder_h1},
                          {"remainder_l2", m.remainder_l2},
                          {"full_residual", m.full_residual},
                          {"transport_residual", m.transport_residual},
                          {"end_value", m.end_value}}});
    rep.extra = {{"kind", to_string(cfg.exp.kind)}, {"profile", cfg.exp.m2}, {"unstable_h", m.unstable_h}};
    if (m.unstable_h) rep.warnings.push_back("h violates the eta monotonicity bound");
    if (write) {
        export_cgo(out_path(cfg, "cgo"), s);
        rep.extra["field"] = "cgo.cdf1";
    }
    return rep;
}

void require_fixtures(const RunConfig& cfg) {
    if (!cfg.a_file.empty()) {
        throw PreconditionError(cfg.experiment + " needs closed-form fixtures; coefficient files are accepted by "
                                                 "forward, adjoint, dn and cgo-build");
    }
}

}  // namespace

ScanReport run_experiment(const RunConfig& cfg, bool write) {
    const std::string& e = cfg.experiment;
    ScanReport rep;
    if (e == "forward") {
        if (cfg.mms) {
            require_fixtures(cfg);
            rep = solver_check(cfg.exp);
        } else {
            rep = run_solve(cfg, Direction::forward, write);
        }
    } else if (e == "adjoint") {
        rep = run_solve(cfg, Direction::adjoint, write);
    } else if (e == "dn") {
        rep = run_dn(cfg, write);
    } else if (e == "cgo-build") {
        rep = run_cgo_build(cfg, write);
    } else {
        require_fixtures(cfg);
        if (e == "gauge-check") {
            rep = gauge_check(cfg.exp);
        } else if (e == "eikonal-check") {
            rep = eikonal_check(cfg.exp);
            merge(rep, conjugation_check(cfg.exp), "conjugation");
        } else if (e == "cgo-scan") {
            rep = cgo_scan(cfg.exp);
        } else if (e == "carleman-scan") {
            rep = carleman_scan(cfg.exp);
        } else if (e == "identity-check") {
            rep = identity_check(cfg.exp);
        } else if (e == "boundary-scan") {
            rep = boundary_scan(cfg.exp);
        } else if (e == "recover-a") {
            rep = recover_a(cfg.exp);
            merge(rep, moment_check(cfg.exp), "moments");
        } else if (e == "recover-q") {
            rep = recover_q_check(cfg.exp);
        } else if (e == "scenario") {
            rep = scenario(cfg.scenario, cfg.exp);
        } else {
            throw PreconditionError("unknown experiment '" + e + "'");
        }
    }
    rep.experiment = e == "scenario" ? "scenario-" + cfg.scenario : e;
    rep.params = cfg.to_json();
    rep.config_hash = cfg.hash;
    return rep;
}

void write_reports(const ScanReport& rep, const RunConfig& cfg, bool stamp) {
    fs::create_directories(cfg.output);
    const fs::path base = fs::path(cfg.output) / rep.experiment;
    json j = rep.to_json();
    if (stamp) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::ostringstream ts;
        ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        j["timestamp"] = ts.str();
    }
    std::ofstream out(base.string() + ".json");
    if (!out) throw Error("cannot write '" + base.string() + ".json'");
    out << j.dump(2) << "\n";
    rep.write_csv(base.string() + ".csv");
    rep.write_dat(base.string() + ".dat");
}

}  // namespace cgolab
