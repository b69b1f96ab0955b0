#pragma once

#include <string>

#include "branchtail/config.hpp"
#include "branchtail/tailstats.hpp"

namespace branchtail {

// Closed-form report: rho, qbar, M, rbar, tail constants when the model has
// a regularly varying component, and the full mean-level reduction chain.
std::string analyze_report(const RunConfig& cfg);

struct SimulateSummary {
    std::uint64_t replications = 0;
    std::uint64_t truncated = 0;
    std::string samples_path;
    std::string sidecar_path;
};

// Runs the configured simulation and writes one decimal per line plus a
// JSON sidecar (seed, model hash, truncation count). Deterministic per
// (seed, replications), independent of the worker count.
SimulateSummary simulate_to_files(const RunConfig& cfg, const std::string& out_path);

struct ValidateOutcome {
    TailReport report;
    bool band_ok = false;
    std::string summary;
};

// Simulates, computes predicted tails at the sample quantile grid, writes
// the report CSV when report_path is nonempty.
ValidateOutcome run_validation(const RunConfig& cfg, const std::string& report_path);

struct ReduceSummary {
    std::size_t parent_types = 0;
    std::string out_path;
};

ReduceSummary reduce_to_file(const RunConfig& cfg, const std::string& out_path);

} // namespace branchtail
