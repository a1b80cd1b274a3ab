#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cgolab/config.hpp"

using namespace cgolab;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out, base, psi, partner, side, sign, kind, scheme, subset, m2, m1;
    std::optional<std::string> a_file, q_file;
    std::optional<std::string> h;
    std::optional<int> nx, nt, dim, trials, data_index;
    std::optional<std::uint64_t> seed;
    std::optional<double> eps, eps_factor, epsilon0, gauge_amplitude, partner_amplitude;
    std::optional<std::string> omega;
    bool no_refine = false, no_separation = false, mms = false, no_timestamp = false, quiet = false;
};

std::vector<double> parse_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw FormatError(flag + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw FormatError(flag + ": empty list");
    return out;
}

void add_common(CLI::App* sub, Overrides& o) {
    sub->set_help_flag("--help", "print this help and exit");
    sub->add_option("--config,-c", o.config, "JSON run configuration");
    sub->add_option("--out,-o", o.out, "output directory");
    sub->add_option("--nx", o.nx, "nodes per spatial axis");
    sub->add_option("--nt", o.nt, "time steps");
    sub->add_option("--dim", o.dim, "spatial dimension (2 or 3) with the default box");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--h", o.h, "semiclassical parameter, or a comma-separated h list for scans");
    sub->add_option("--eps", o.eps, "convexification of the weight");
    sub->add_option("--eps-factor", o.eps_factor, "Carleman scans use eps = factor * h");
    sub->add_option("--epsilon0", o.epsilon0, "threshold of the outgoing boundary part");
    sub->add_option("--omega", o.omega, "direction omega as a comma-separated vector");
    sub->add_option("--base", o.base, "base coefficient fixture");
    sub->add_option("--psi", o.psi, "gauge fixture (zero, bump, ramp, static)");
    sub->add_option("--gauge-amplitude", o.gauge_amplitude, "gauge amplitude");
    sub->add_option("--partner", o.partner, "curl-distinct partner (curl, rotation)");
    sub->add_option("--partner-amplitude", o.partner_amplitude, "partner amplitude");
    sub->add_option("--A-file", o.a_file, "CDF1 convection field");
    sub->add_option("--q-file", o.q_file, "CDF1 density field");
    sub->add_option("--scheme", o.scheme, "crank_nicolson or backward_euler");
    sub->add_option("--subset", o.subset, "boundary subset (full, front, back, plus, minus)");
    sub->add_option("--m2", o.m2, "time profile of the growing solution");
    sub->add_option("--m1", o.m1, "time profile of the decaying solution");
    sub->add_option("--data-index", o.data_index, "element of the Dirichlet bank");
    sub->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp field from the JSON report");
    sub->add_flag("--quiet,-q", o.quiet, "print only the verdict line");
}

void apply(const Overrides& o, RunConfig& cfg) {
    ExperimentConfig& e = cfg.exp;
    if (o.dim) {
        if (*o.dim == 2) {
            e.domain = Domain::unit_square();
            e.omega = {0.0, 1.0, 0.0};
        } else if (*o.dim == 3) {
            e.domain = Domain::unit_cube();
        } else {
            throw FormatError("--dim: dimension must be 2 or 3");
        }
    }
    if (o.out) cfg.output = *o.out;
    if (o.nx) e.nx = *o.nx;
    if (o.nt) e.nt = *o.nt;
    if (o.seed) e.seed = *o.seed;
    if (o.h) {
        const auto v = parse_list(*o.h, "--h");
        if (v.size() == 1) {
            e.h = v[0];
        } else {
            e.h_list = v;
        }
    }
    if (o.eps) e.eps = *o.eps;
    if (o.eps_factor) e.eps_factor = *o.eps_factor;
    if (o.epsilon0) e.epsilon0 = *o.epsilon0;
    if (o.omega) {
        const auto v = parse_list(*o.omega, "--omega");
        if (v.size() < 2 || v.size() > 3) throw FormatError("--omega: expected 2 or 3 components");
        e.omega = {0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < v.size(); ++i) e.omega[i] = v[i];
    }
    if (o.base) e.base = *o.base;
    if (o.psi) e.gauge = *o.psi;
    if (o.gauge_amplitude) e.gauge_amplitude = *o.gauge_amplitude;
    if (o.partner) e.partner = *o.partner;
    if (o.partner_amplitude) e.partner_amplitude = *o.partner_amplitude;
    if (o.a_file) cfg.a_file = *o.a_file;
    if (o.q_file) cfg.q_file = *o.q_file;
    if (o.scheme) e.scheme = scheme_from_string(*o.scheme);
    if (o.subset) cfg.subset = subset_from_string(*o.subset);
    if (o.side) e.side = *o.side;
    if (o.sign) e.sign = *o.sign;
    if (o.kind) {
        if (*o.kind == "growing") {
            e.kind = CGOKind::growing;
        } else if (*o.kind == "decaying") {
            e.kind = CGOKind::decaying;
        } else {
            throw FormatError("--kind: growing or decaying");
        }
    }
    if (o.trials) e.trials = *o.trials;
    if (o.m2) e.m2 = *o.m2;
    if (o.m1) e.m1 = *o.m1;
    if (o.data_index) cfg.data_index = *o.data_index;
    if (o.no_refine) e.refine = false;
    if (o.no_separation) e.separation = false;
    if (o.mms) cfg.mms = true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cgolab: numerical lab for the inverse convection-diffusion problem"};
    app.require_subcommand(1);
    Overrides o;
    std::string scenario_name;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> help{
        {"forward", "solve the forward initial-boundary value problem"},
        {"adjoint", "solve the adjoint terminal-value problem"},
        {"dn", "Dirichlet-to-Neumann trace on a boundary subset"},
        {"gauge-check", "DN traces of a gauge pair, refinement and curl separation"},
        {"eikonal-check", "eikonal identity and conjugation algebra"},
        {"cgo-build", "build and export one CGO solution"},
        {"cgo-scan", "CGO residual scaling over an h list"},
        {"carleman-scan", "Carleman estimate ratios over seeded trials"},
        {"identity-check", "integral and Green identities"},
        {"boundary-scan", "boundary-term growth over an h list"},
        {"recover-a", "curl moments and gauge recovery"},
        {"recover-q", "recovery of the density difference"},
        {"scenario", "theorem1, corollary2 or corollary3"}};
    for (const auto& name : experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        add_common(sub, o);
        subs[name] = sub;
    }
    subs["carleman-scan"]->add_option("--side", o.side, "interior or boundary");
    subs["carleman-scan"]->add_option("--sign", o.sign, "plus or minus");
    subs["carleman-scan"]->add_option("--trials", o.trials, "number of seeded trials");
    for (const char* n : {"cgo-build", "cgo-scan"}) subs[n]->add_option("--kind", o.kind, "growing or decaying");
    for (const char* n : {"gauge-check", "identity-check"}) {
        subs[n]->add_flag("--no-refine", o.no_refine, "skip the refined-grid comparison");
    }
    subs["gauge-check"]->add_flag("--no-separation", o.no_separation, "skip the curl-distinct comparison");
    subs["forward"]->add_flag("--mms", o.mms, "manufactured-solution convergence check");
    subs["scenario"]->add_option("name", scenario_name, "theorem1, corollary2 or corollary3");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        std::string name;
        for (const auto& [n, sub] : subs) {
            if (sub->parsed()) name = n;
        }
        RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
        if (!cfg.experiment.empty() && cfg.experiment != name) {
            std::cerr << "note: config names experiment '" << cfg.experiment << "', running '" << name << "'\n";
        }
        cfg.experiment = name;
        if (!scenario_name.empty()) cfg.scenario = scenario_name;
        apply(o, cfg);
        const auto problems = validate(cfg);
        if (!problems.empty()) {
            std::string msg;
            for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
            throw FormatError(msg);
        }
        cfg.rehash();
        const ScanReport rep = run_experiment(cfg);
        write_reports(rep, cfg, !o.no_timestamp);
        if (!o.quiet) {
            for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
            for (const auto& v : rep.verdicts) {
                std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.value << " " << v.rule << " "
                          << v.tolerance << "\n";
            }
        }
        std::cout << rep.experiment << ": " << (rep.pass() ? "pass" : "fail") << " (" << cfg.output << "/"
                  << rep.experiment << ".json)\n";
        return rep.pass() ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
