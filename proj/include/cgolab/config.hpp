#pragma once

#include <string>
#include <vector>

#include "cgolab/experiments.hpp"

namespace cgolab {

/// Fully resolved run configuration: experiment parameters plus front-end options.
struct RunConfig {
    std::string experiment;
    ExperimentConfig exp;
    std::string output = "out";
    std::string scenario = "theorem1";
    Subset subset = Subset::front;
    std::string a_file;  // CDF1 convection field; overrides the base fixture when set
    std::string q_file;  // CDF1 density field
    int data_index = 0;  // element of the seeded Dirichlet bank used by forward/adjoint/dn
    bool mms = false;    // forward: run the manufactured-solution check instead of a single solve
    std::string hash;

    json to_json() const;
    /// Recomputes the hash over to_json().
    void rehash();
    /// (A, q) on the configured grid: CDF1 files when given, else the base fixture.
    CoefficientPair coefficients() const;
};

/// Parses a JSON config. Every schema violation is collected; the thrown FormatError lists
/// them all, one per line, each prefixed by "<source>:<line>:".
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Post-override checks shared by the file and flag paths (h > 0, unit omega, known names).
/// Returns the collected problems; omega normalization is recorded as a warning instead.
std::vector<std::string> validate(RunConfig& cfg);

/// Runs cfg.experiment. With write_artifacts the experiment's fields and traces go to cfg.output.
ScanReport run_experiment(const RunConfig& cfg, bool write_artifacts = true);

/// <output>/<name>.json (with an isolated "timestamp" field when stamp is set), .csv and .dat.
void write_reports(const ScanReport& rep, const RunConfig& cfg, bool stamp = true);

/// Names of the CLI subcommands.
const std::vector<std::string>& experiment_names();

}  // namespace cgolab
