#pragma once

#include "anett/network.hpp"
#include "anett/noise.hpp"
#include "anett/operators.hpp"
#include "anett/regularizer.hpp"
#include "anett/train.hpp"

#include <map>
#include <string>

namespace anett {

/// Everything a CLI run needs, parsed from a key = value file.
///
/// Lines are "key = value"; '#' starts a comment. Unknown keys are rejected.
/// The optional key "preset" (sparse_view, low_dose, universality) is applied
/// before all other keys regardless of its position.
struct ExperimentConfig {
    AnettConfig anett = AnettConfig::sparse_view();
    int image_size = 64;
    ScanGeometry geometry{20, 96};
    FbpFilter filter = FbpFilter::ramlak;
    NoiseModel noise;
    std::uint64_t seed = 0;

    TrainConfig train;
    int n_phantoms = 32;
    AutoencoderArch autoencoder;
    TaskNetArch task;

    double window_min = 0.0;
    double window_max = 1.0;
    std::map<std::string, std::string> paths;

    void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Keys accepted by parse_experiment_config, for documentation and error messages.
const std::vector<std::string>& experiment_config_keys();

} // namespace anett
