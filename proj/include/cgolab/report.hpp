#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgolab/io.hpp"

namespace cgolab {

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<double> h;  // points used
};

/// Least-squares line through (log h, log value). Non-positive values are rejected.
LogLogFit fit_loglog(const std::vector<double>& h, const std::vector<double>& value);

/// Fit over the h-list, dropping the largest h when it is pre-asymptotic: its value deviates
/// from the trend of the remaining points by more than a factor of two.
LogLogFit fit_loglog_windowed(const std::vector<double>& h, const std::vector<double>& value);

/// Richardson extrapolation of values(h) -> value(0) assuming value(h) = v0 + c h^p + ...
/// Uses the two or three smallest h.
template <class T>
struct RichardsonResult {
    T value{};
    double error = 0.0;
};
template <class T>
RichardsonResult<T> richardson(const std::vector<double>& h, const std::vector<T>& values, double p);

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string rule;  // e.g. "<=", ">=", "in [a, b]"
};

struct Measurement {
    double h = 0.0;
    double value = 0.0;
    json extra = json::object();
};

/// Per-h measurements, fits and verdicts of one experiment.
struct ScanReport {
    std::string experiment;
    json params = json::object();
    std::vector<Measurement> per_h;
    std::optional<LogLogFit> fit;
    std::vector<Verdict> verdicts;
    json extra = json::object();
    std::vector<std::string> warnings;
    std::string config_hash;

    bool pass() const;
    void add(const std::string& name, bool pass, double value, double tolerance, const std::string& rule);
    json to_json() const;
    void write_json(const std::string& path) const;
    /// h,value[,extra keys...] rows.
    void write_csv(const std::string& path) const;
    /// Two columns: log h, log value.
    void write_dat(const std::string& path) const;
};

/// FNV-1a over the canonical (sorted-key) JSON dump, as 16 hex digits.
std::string config_hash(const json& j);

}  // namespace cgolab
