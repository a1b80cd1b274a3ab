#include "cgolab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cgolab {

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"forward",       "adjoint",        "dn",           "gauge-check",
                                                "eikonal-check", "cgo-build",      "cgo-scan",     "carleman-scan",
                                                "identity-check", "boundary-scan", "recover-a",    "recover-q",
                                                "scenario"};
    return names;
}

namespace {

const std::vector<std::string> scenario_names{"theorem1", "corollary2", "corollary3"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out;
}

class Reader {
public:
    Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    std::vector<std::string> errors;

    int line_of(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        for (const auto& key : path) {
            const std::size_t p = text_.find("\"" + key + "\"", pos);
            if (p == std::string::npos) break;
            pos = p + 1;
        }
        if (path.empty()) return 1;
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
    }

    void fail(const std::vector<std::string>& path, const std::string& msg) {
        std::string dotted;
        for (const auto& k : path) dotted += (dotted.empty() ? "" : ".") + k;
        errors.push_back(source_ + ":" + std::to_string(line_of(path)) + ": " + (dotted.empty() ? "" : dotted + ": ") +
                         msg);
    }

    bool object(const json& j, const std::vector<std::string>& path, const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!allowed.count(it.key())) {
                auto p = path;
                p.push_back(it.key());
                fail(p, "unknown key");
            }
        }
        return true;
    }

    void number(const json& j, const std::string& key, std::vector<std::string> path, double& out) {
        if (!j.contains(key)) return;
        path.push_back(key);
        if (!j[key].is_number()) return fail(path, "expected a number");
        out = j[key].get<double>();
        if (!std::isfinite(out)) fail(path, "must be finite");
    }

    void integer(const json& j, const std::string& key, std::vector<std::string> path, long long& out) {
        if (!j.contains(key)) return;
        path.push_back(key);
        if (!j[key].is_number_integer()) return fail(path, "expected an integer");
        out = j[key].get<long long>();
    }

    void boolean(const json& j, const std::string& key, std::vector<std::string> path, bool& out) {
        if (!j.contains(key)) return;
        path.push_back(key);
        if (!j[key].is_boolean()) return fail(path, "expected true or false");
        out = j[key].get<bool>();
    }

    void string(const json& j, const std::string& key, std::vector<std::string> path, std::string& out) {
        if (!j.contains(key)) return;
        path.push_back(key);
        if (!j[key].is_string()) return fail(path, "expected a string");
        out = j[key].get<std::string>();
    }

    void numbers(const json& j, const std::string& key, std::vector<std::string> path, std::vector<double>& out) {
        if (!j.contains(key)) return;
        path.push_back(key);
        if (!j[key].is_array()) return fail(path, "expected an array of numbers");
        std::vector<double> v;
        for (const auto& e : j[key]) {
            if (!e.is_number()) return fail(path, "expected an array of numbers");
            v.push_back(e.get<double>());
        }
        out = v;
    }

    void vec(const json& j, const std::string& key, const std::vector<std::string>& path, Vec3& out, bool* given = nullptr) {
        std::vector<double> v;
        numbers(j, key, path, v);
        if (v.empty()) return;
        if (v.size() < 2 || v.size() > 3) {
            auto p = path;
            p.push_back(key);
            return fail(p, "expected 2 or 3 components");
        }
        out = {0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
        if (given) *given = true;
    }

private:
    const std::string& text_;
    std::string source_;
};

std::vector<std::string> validate_into(RunConfig& cfg, Reader* r) {
    std::vector<std::string> out;
    auto err = [&](const std::vector<std::string>& path, const std::string& msg) {
        if (r) {
            r->fail(path, msg);
        } else {
            std::string dotted;
            for (const auto& k : path) dotted += (dotted.empty() ? "" : ".") + k;
            out.push_back(dotted + ": " + msg);
        }
    };
    ExperimentConfig& e = cfg.exp;
    if (!cfg.experiment.empty() && !contains(experiment_names(), cfg.experiment)) {
        err({"experiment"}, "unknown experiment '" + cfg.experiment + "' (" + join(experiment_names()) + ")");
    }
    try {
        e.domain.validate();
    } catch (const Error& ex) {
        err({"domain"}, ex.what());
    }
    if (e.nx < 5) err({"grid", "nx"}, "need at least 5 nodes per axis");
    if (e.nt < 1) err({"grid", "nt"}, "need at least one time step");
    if (!(e.h > 0.0)) err({"weight", "h"}, "h must be positive");
    if (e.h_list.empty()) err({"weight", "h_list"}, "h list must not be empty");
    for (double h : e.h_list) {
        if (!(h > 0.0)) {
            err({"weight", "h_list"}, "h values must be positive, got " + std::to_string(h));
            break;
        }
    }
    if (e.eps < 0.0) err({"weight", "eps"}, "eps must be non-negative");
    if (!(e.eps_factor >= 0.0)) err({"weight", "eps_factor"}, "eps_factor must be non-negative");
    if (!(e.eta_power > 0.0)) err({"weight", "eta_power"}, "eta_power must be positive");
    const double on = std::sqrt(dot(e.omega, e.omega));
    if (!(on > 0.0)) {
        err({"weight", "omega"}, "omega must be non-zero");
    } else if (std::abs(on - 1.0) > 1e-12) {
        for (auto& c : e.omega) c /= on;
        e.warnings.push_back("omega normalized from length " + std::to_string(on));
    }
    if (e.domain.n == 2 && e.omega[2] != 0.0) err({"weight", "omega"}, "omega must lie in the plane for n = 2");
    if (!contains(coefficient_fixture_names(), e.base)) {
        err({"coefficients", "base"}, "unknown fixture '" + e.base + "' (" + join(coefficient_fixture_names()) + ")");
    }
    if (!contains(gauge_fixture_names(), e.gauge)) {
        err({"coefficients", "gauge"}, "unknown gauge '" + e.gauge + "' (" + join(gauge_fixture_names()) + ")");
    }
    if (e.partner != "curl" && e.partner != "rotation") {
        err({"coefficients", "partner"}, "unknown partner '" + e.partner + "' (curl, rotation)");
    }
    if (cfg.a_file.empty() != cfg.q_file.empty()) {
        err({"coefficients"}, "A_file and q_file must be given together");
    }
    if (e.side != "interior" && e.side != "boundary") err({"side"}, "side must be interior or boundary");
    if (e.sign != "plus" && e.sign != "minus") err({"sign"}, "sign must be plus or minus");
    for (const auto* p : {&e.m2, &e.m1}) {
        try {
            profile_from_name(*p);
        } catch (const Error& ex) {
            err({"profiles"}, ex.what());
        }
    }
    if (e.trials < 1) err({"trials"}, "need at least one trial");
    if (e.bank_size < 1) err({"bank_size"}, "need at least one Dirichlet datum");
    if (cfg.data_index < 0 || cfg.data_index >= e.bank_size) err({"data_index"}, "must index the Dirichlet bank");
    if (!contains(scenario_names, cfg.scenario)) {
        err({"scenario"}, "unknown scenario '" + cfg.scenario + "' (" + join(scenario_names) + ")");
    }
    if (cfg.output.empty()) err({"output"}, "output directory must not be empty");
    return out;
}

}  // namespace

std::vector<std::string> validate(RunConfig& cfg) { return validate_into(cfg, nullptr); }

RunConfig parse_config(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        const std::size_t at = std::min<std::size_t>(ex.byte, text.size());
        const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(at > 0 ? at - 1 : 0), '\n');
        throw FormatError(source + ":" + std::to_string(line) + ": malformed JSON: " + ex.what());
    }
    Reader r(text, source);
    RunConfig cfg;
    ExperimentConfig& e = cfg.exp;
    if (!r.object(j, {}, {"experiment", "domain", "grid", "coefficients", "weight", "scheme", "seed", "trials",
                          "bank_size", "side", "sign", "kind", "profiles", "refine", "separation", "tolerances",
                          "output", "scenario", "subset", "data_index", "mms"})) {
        throw FormatError(r.errors.front());
    }
    r.string(j, "experiment", {}, cfg.experiment);

    if (j.contains("domain") && r.object(j["domain"], {"domain"}, {"n", "lo", "hi", "x0", "T"})) {
        const json& d = j["domain"];
        long long n = 3;
        r.integer(d, "n", {"domain"}, n);
        if (n != 2 && n != 3) {
            r.fail({"domain", "n"}, "dimension must be 2 or 3");
        } else if (n == 2) {
            e.domain = Domain::unit_square();
        }
        r.vec(d, "lo", {"domain"}, e.domain.lo);
        r.vec(d, "hi", {"domain"}, e.domain.hi);
        r.vec(d, "x0", {"domain"}, e.domain.x0);
        r.number(d, "T", {"domain"}, e.domain.T);
        if (n == 2) e.omega = {0.0, 1.0, 0.0};
    }
    if (j.contains("grid") && r.object(j["grid"], {"grid"}, {"nx", "nt"})) {
        long long nx = e.nx, nt = e.nt;
        r.integer(j["grid"], "nx", {"grid"}, nx);
        r.integer(j["grid"], "nt", {"grid"}, nt);
        e.nx = static_cast<int>(nx);
        e.nt = static_cast<int>(nt);
    }
    if (j.contains("coefficients") &&
        r.object(j["coefficients"], {"coefficients"},
                 {"base", "gauge", "gauge_amplitude", "partner", "partner_amplitude", "A_file", "q_file"})) {
        const json& c = j["coefficients"];
        r.string(c, "base", {"coefficients"}, e.base);
        r.string(c, "gauge", {"coefficients"}, e.gauge);
        r.number(c, "gauge_amplitude", {"coefficients"}, e.gauge_amplitude);
        r.string(c, "partner", {"coefficients"}, e.partner);
        r.number(c, "partner_amplitude", {"coefficients"}, e.partner_amplitude);
        r.string(c, "A_file", {"coefficients"}, cfg.a_file);
        r.string(c, "q_file", {"coefficients"}, cfg.q_file);
    }
    if (j.contains("weight") && r.object(j["weight"], {"weight"},
                                         {"omega", "h", "h_list", "eps", "eps_factor", "eta_power", "epsilon0"})) {
        const json& w = j["weight"];
        r.vec(w, "omega", {"weight"}, e.omega);
        r.number(w, "h", {"weight"}, e.h);
        r.numbers(w, "h_list", {"weight"}, e.h_list);
        r.number(w, "eps", {"weight"}, e.eps);
        r.number(w, "eps_factor", {"weight"}, e.eps_factor);
        r.number(w, "eta_power", {"weight"}, e.eta_power);
        r.number(w, "epsilon0", {"weight"}, e.epsilon0);
    }
    std::string s;
    r.string(j, "scheme", {}, s);
    if (!s.empty()) {
        try {
            e.scheme = scheme_from_string(s);
        } catch (const Error& ex) {
            r.fail({"scheme"}, ex.what());
        }
    }
    long long seed = static_cast<long long>(e.seed), trials = e.trials, bank = e.bank_size, idx = cfg.data_index;
    if (j.contains("seed") && j["seed"].is_number_integer() && j["seed"].get<long long>() < 0) {
        r.fail({"seed"}, "seed must be non-negative");
    }
    r.integer(j, "seed", {}, seed);
    r.integer(j, "trials", {}, trials);
    r.integer(j, "bank_size", {}, bank);
    r.integer(j, "data_index", {}, idx);
    e.seed = static_cast<std::uint64_t>(std::max(0LL, seed));
    e.trials = static_cast<int>(trials);
    e.bank_size = static_cast<int>(bank);
    cfg.data_index = static_cast<int>(idx);
    r.string(j, "side", {}, e.side);
    r.string(j, "sign", {}, e.sign);
    s.clear();
    r.string(j, "kind", {}, s);
    if (!s.empty()) {
        if (s == "growing") {
            e.kind = CGOKind::growing;
        } else if (s == "decaying") {
            e.kind = CGOKind::decaying;
        } else {
            r.fail({"kind"}, "kind must be growing or decaying");
        }
    }
    if (j.contains("profiles") && r.object(j["profiles"], {"profiles"}, {"m2", "m1"})) {
        r.string(j["profiles"], "m2", {"profiles"}, e.m2);
        r.string(j["profiles"], "m1", {"profiles"}, e.m1);
    }
    r.boolean(j, "refine", {}, e.refine);
    r.boolean(j, "separation", {}, e.separation);
    r.boolean(j, "mms", {}, cfg.mms);
    if (j.contains("tolerances")) {
        Tolerances& t = e.tol;
        const std::vector<std::pair<std::string, double*>> fields{
            {"eikonal", &t.eikonal},       {"conjugation", &t.conjugation},
            {"dn", &t.dn},                 {"refinement_factor", &t.refinement_factor},
            {"separation", &t.separation}, {"slope_lo", &t.slope_lo},
            {"slope_hi", &t.slope_hi},     {"carleman_growth", &t.carleman_growth},
            {"identity", &t.identity},     {"front_share", &t.front_share},
            {"boundary_slope", &t.boundary_slope}, {"moment", &t.moment},
            {"moment_curl", &t.moment_curl}, {"h_recovery", &t.h_recovery},
            {"psi", &t.psi},               {"gauge_recovery", &t.gauge_recovery},
            {"mms_order", &t.mms_order}};
        std::set<std::string> keys;
        for (const auto& f : fields) keys.insert(f.first);
        if (r.object(j["tolerances"], {"tolerances"}, keys)) {
            for (const auto& f : fields) r.number(j["tolerances"], f.first, {"tolerances"}, *f.second);
        }
    }
    r.string(j, "output", {}, cfg.output);
    r.string(j, "scenario", {}, cfg.scenario);
    s.clear();
    r.string(j, "subset", {}, s);
    if (!s.empty()) {
        try {
            cfg.subset = subset_from_string(s);
        } catch (const Error& ex) {
            r.fail({"subset"}, ex.what());
        }
    }
    validate_into(cfg, &r);
    if (!r.errors.empty()) {
        std::string msg;
        for (const auto& m : r.errors) msg += (msg.empty() ? "" : "\n") + m;
        throw FormatError(msg);
    }
    cfg.rehash();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path + ": cannot open config");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

json RunConfig::to_json() const {
    json j = exp.to_json();
    j["experiment"] = experiment;
    j["output"] = output;
    j["scenario"] = scenario;
    j["subset"] = cgolab::to_string(subset);
    j["data_index"] = data_index;
    j["mms"] = mms;
    if (!a_file.empty()) j["fixture"]["A_file"] = a_file;
    if (!q_file.empty()) j["fixture"]["q_file"] = q_file;
    return j;
}

void RunConfig::rehash() {
    json j = to_json();
    j.erase("output");
    hash = config_hash(j);
}

CoefficientPair RunConfig::coefficients() const {
    const Grid g = exp.grid();
    if (a_file.empty()) return base_model(exp).sample(g);
    RealField A = read_cdf1_real(a_file);
    RealField q = read_cdf1_real(q_file);
    if (!A.grid().same_shape(g) || !q.grid().same_shape(g)) {
        throw FormatError("coefficient files do not match the configured grid");
    }
    if (A.arity() != g.dim() || q.arity() != 1) throw FormatError("A must have arity n and q arity 1");
    return CoefficientPair(std::move(A), std::move(q));
}

}  // namespace cgolab
