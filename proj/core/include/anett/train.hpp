#pragma once

#include "anett/network.hpp"
#include "anett/noise.hpp"
#include "anett/operators.hpp"
#include "anett/phantom.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace anett {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 4;
    double learning_rate = 1e-3;
    /// Weight of the phi penalty on clean samples.
    double nu = 1e-3;
    /// Weight decay on all parameters (beta for E/D, gamma for U).
    double weight_decay = 1e-6;
    /// Corruption std as a multiple of the sample mean.
    double noise_factor = 0.05;
    double corruption_probability = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainReport {
    /// Training objective on the whole train split before any update.
    double initial_loss = 0.0;
    /// Training objective on the whole train split after each epoch.
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    int best_epoch = -1;
    double best_validation_loss = 0.0;
    /// Fraction of samples drawn with corruption (autoencoder) or artifact input (task network).
    double artifact_fraction = 0.0;
};

/// Called after every epoch with (epoch, train loss, validation loss).
using EpochCallback = std::function<void(int, double, double)>;

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<Vector> m;
    std::vector<Vector> v;
};

/// One Adam update of every parameter block in place.
void adam_step(AdamState& state, const std::vector<Vector*>& params, const std::vector<const Vector*>& grads,
               double lr);

/// eta_t = eta0/2 (1 + cos(pi t / T)).
double cosine_learning_rate(double eta0, int t, int total);

struct SampleLoss {
    double reconstruction = 0.0;
    double penalty = 0.0;
    double total() const { return reconstruction + penalty; }
};

/// ||N(x + a eps) - x||^2 + nu (1 - a) phi(E(x)); accumulates parameter gradients when grads is non-null.
SampleLoss autoencoder_sample_loss(const Autoencoder& ae, const Image& x, bool corrupted, const Vector& eps,
                                   double nu, const PhiSpec& phi, ModelGrads* grads = nullptr);

Autoencoder train_autoencoder(const Dataset& data, const TrainConfig& cfg, const PhiSpec& phi,
                              const AutoencoderArch& arch, TrainReport* report = nullptr,
                              const EpochCallback& on_epoch = {});

/// z = N(x) (clean branch) or z = N(K^\ddagger(K x + noise)) (artifact branch).
Tensor task_network_input(const Autoencoder& ae, const LinearOperator& op, const NoiseModel& noise, const Image& x,
                          bool artifact, std::uint64_t seed);

TaskNet train_task_network(const Dataset& data, const Autoencoder& ae, const LinearOperator& op,
                           const NoiseModel& noise, const TrainConfig& cfg, const TaskNetArch& arch,
                           TrainReport* report = nullptr, const EpochCallback& on_epoch = {});

} // namespace anett
