#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "branchtail/models.hpp"
#include "branchtail/simulate.hpp"

namespace branchtail {

struct ValidateConfig {
    std::vector<double> grid = {0.99, 0.999};
    double band_lo = 0.8;
    double band_hi = 1.2;
    std::optional<std::uint64_t> prediction_seed;  // derived from sim seed when absent
    std::uint64_t prediction_samples = 1000000;
    std::optional<double> rbar_override;  // diagnostic knob, single-class only
};

// A fully validated run description: the model plus simulation and
// validation settings. Schema violations and criticality failures are
// rejected at load time.
struct RunConfig {
    std::shared_ptr<const MulticlassModel> model;
    SimConfig sim;
    SimTask task;
    ValidateConfig validate;
    std::optional<std::vector<std::size_t>> reduce_permutation;

    std::string model_json;   // canonical dump of the model section
    std::string model_hash;   // fnv1a-64 of model_json, hex
    std::string config_hash;  // fnv1a-64 of the whole canonical config

    std::uint64_t prediction_seed() const;
};

RunConfig load_config_text(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

// Emits the (K-1)-class reduced config: the parent model is embedded, the
// reduced classes are simulation-backed, and the declared means carry the
// reduce_means output. Provenance records the parent config hash.
std::string reduced_config_json(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& s);

} // namespace branchtail
