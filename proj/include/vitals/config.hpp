#pragma once

#include <string>

#include "vitals/train.hpp"

namespace vitals {

// Flat key=value run configuration. Blank lines and '#' comments allowed.
// Unknown keys are rejected; required keys are dataset, task, arch, loss,
// model_out, history_out, manifest_out, and dataset_dir for on-disk datasets.
struct RunConfig {
    TrainingConfig train;
    std::string dataset_dir;    // unused for dataset=synth
    std::string model_out;
    std::string history_out;
    std::string manifest_out;
    std::size_t synth_n = 2000;
    double synth_noise = 0.1;
};

RunConfig parse_run_config(const std::string& path);  // throws ConfigError/ParseError
void write_run_config(const RunConfig& cfg, const std::string& path);

}  // namespace vitals
