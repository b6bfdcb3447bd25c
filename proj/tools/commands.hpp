#pragma once

#include "anett/config.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace anett::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_usage = 2,
    exit_missing_file = 3,
    exit_shape_mismatch = 4,
    exit_diverged = 5,
};

/// A required input path does not exist.
class MissingFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimulateArgs {
    std::string config;
    std::string out_dir;
    std::string phantom = "shepp_logan";
    std::uint64_t phantom_seed = 0;
    std::optional<int> n_angles;
};

struct TrainArgs {
    std::string config;
    std::string out;
    std::string autoencoder;
    std::string loss_csv;
};

struct ReconstructArgs {
    std::string config;
    std::string method = "anett";
    std::string sinogram;
    std::string out;
    std::string png;
    std::string trace;
    std::string autoencoder;
    std::string task;
    std::optional<int> n_angles;
};

struct EvaluateArgs {
    std::string reference;
    std::string recon_dir;
    std::string out;
};

struct VerifyArgs {
    std::string suite = "all";
    std::string out_dir;
    std::string config;
    std::string autoencoder;
    double alpha = 1.0;
};

int run_simulate(const SimulateArgs& args);
int run_train_ae(const TrainArgs& args);
int run_train_task(const TrainArgs& args);
int run_reconstruct(const ReconstructArgs& args);
int run_evaluate(const EvaluateArgs& args);
int run_verify(const VerifyArgs& args);

} // namespace anett::cli
