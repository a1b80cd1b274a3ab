#include "cgolab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>

namespace cgolab {

LogLogFit fit_loglog(const std::vector<double>& h, const std::vector<double>& value) {
    if (h.size() != value.size() || h.size() < 2) throw PreconditionError("fit needs at least two points");
    const double n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> x(h.size()), y(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(value[i] > 0.0)) throw PreconditionError("log-log fit needs positive data");
        x[i] = std::log(h[i]);
        y[i] = std::log(value[i]);
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LogLogFit f;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw PreconditionError("fit needs distinct h values");
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    f.h = h;
    return f;
}

LogLogFit fit_loglog_windowed(const std::vector<double>& h, const std::vector<double>& value) {
    if (h.size() < 4) return fit_loglog(h, value);
    std::size_t big = 0;
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (h[i] > h[big]) big = i;
    }
    std::vector<double> hh, vv;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i == big) continue;
        hh.push_back(h[i]);
        vv.push_back(value[i]);
    }
    const LogLogFit rest = fit_loglog(hh, vv);
    const double predicted = std::exp(rest.intercept + rest.slope * std::log(h[big]));
    const double ratio = value[big] / predicted;
    if (ratio > 2.0 || ratio < 0.5) return rest;
    return fit_loglog(h, value);
}

template <class T>
RichardsonResult<T> richardson(const std::vector<double>& h, const std::vector<T>& values, double p) {
    if (h.size() != values.size() || h.size() < 2) throw PreconditionError("richardson needs at least two points");
    std::vector<std::size_t> order(h.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return h[a] < h[b]; });
    auto step = [&](std::size_t fine, std::size_t coarse) {
        const double r = std::pow(h[coarse] / h[fine], p);
        return (r * values[fine] - values[coarse]) / (r - 1.0);
    };
    RichardsonResult<T> out;
    out.value = step(order[0], order[1]);
    if (h.size() >= 3) {
        const T other = step(order[1], order[2]);
        out.error = std::abs(out.value - other);
    } else {
        out.error = std::abs(out.value - values[order[0]]);
    }
    return out;
}

template RichardsonResult<double> richardson<double>(const std::vector<double>&, const std::vector<double>&, double);
template RichardsonResult<Complex> richardson<Complex>(const std::vector<double>&, const std::vector<Complex>&, double);

bool ScanReport::pass() const {
    for (const auto& v : verdicts) {
        if (!v.pass) return false;
    }
    return true;
}

void ScanReport::add(const std::string& name, bool ok, double value, double tolerance, const std::string& rule) {
    verdicts.push_back({name, ok, value, tolerance, rule});
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json ScanReport::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["params"] = params;
    j["per_h"] = json::array();
    for (const auto& m : per_h) {
        json e = {{"h", m.h}, {"value", finite_or_null(m.value)}};
        for (auto it = m.extra.begin(); it != m.extra.end(); ++it) e[it.key()] = it.value();
        j["per_h"].push_back(e);
    }
    if (fit) {
        j["fit"] = {{"slope", fit->slope}, {"intercept", fit->intercept}, {"r2", fit->r2}, {"h", fit->h}};
    } else {
        j["fit"] = nullptr;
    }
    j["verdict"] = pass() ? "pass" : "fail";
    j["verdicts"] = json::array();
    for (const auto& v : verdicts) {
        j["verdicts"].push_back({{"name", v.name},
                                 {"pass", v.pass},
                                 {"value", finite_or_null(v.value)},
                                 {"tolerance", v.tolerance},
                                 {"rule", v.rule}});
    }
    j["extra"] = extra;
    j["warnings"] = warnings;
    j["config_hash"] = config_hash;
    return j;
}

void ScanReport::write_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << to_json().dump(2) << "\n";
}

void ScanReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    std::vector<std::string> keys;
    if (!per_h.empty()) {
        for (auto it = per_h.front().extra.begin(); it != per_h.front().extra.end(); ++it) {
            if (it.value().is_number()) keys.push_back(it.key());
        }
    }
    out << "h,value";
    for (const auto& k : keys) out << "," << k;
    out << "\n";
    char buf[64];
    for (const auto& m : per_h) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", m.h, m.value);
        out << buf;
        for (const auto& k : keys) {
            std::snprintf(buf, sizeof buf, ",%.17g", m.extra.value(k, 0.0));
            out << buf;
        }
        out << "\n";
    }
}

void ScanReport::write_dat(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "# log(h) log(value)\n";
    char buf[64];
    for (const auto& m : per_h) {
        if (!(m.h > 0.0) || !(m.value > 0.0)) continue;
        std::snprintf(buf, sizeof buf, "%.12e %.12e\n", std::log(m.h), std::log(m.value));
        out << buf;
    }
}

std::string config_hash(const json& j) {
    const std::string text = j.dump();
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace cgolab
