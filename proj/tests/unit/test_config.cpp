#include "anett/config.hpp"
#include "anett/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace anett;

TEST(Config, DefaultsAreSparseView) {
    const ExperimentConfig cfg = parse_experiment_config("");
    EXPECT_DOUBLE_EQ(cfg.anett.alpha, 1e-4);
    EXPECT_DOUBLE_EQ(cfg.anett.c, 1e2);
    EXPECT_DOUBLE_EQ(cfg.anett.gamma, 0.5);
    EXPECT_EQ(cfg.anett.n_iter, 50);
    EXPECT_EQ(cfg.image_size, 64);
    EXPECT_EQ(cfg.geometry.n_angles, 20);
    EXPECT_EQ(cfg.noise.kind, NoiseKind::gaussian);
    EXPECT_DOUBLE_EQ(cfg.noise.level, 0.02);
}

TEST(Config, ParsesKeysCommentsAndWhitespace) {
    const ExperimentConfig cfg = parse_experiment_config(R"(
# comment line
alpha = 2e-3   # trailing comment
  n_iter=7
similarity = kl
phi.q = 2
image_size = 32
n_angles = 80
filter = hann
ae.channels = 4, 8,16
ae.activation = softplus
train.epochs = 3
paths.autoencoder = /tmp/ae.bin
seed = 12
)");
    EXPECT_DOUBLE_EQ(cfg.anett.alpha, 2e-3);
    EXPECT_EQ(cfg.anett.n_iter, 7);
    EXPECT_EQ(cfg.anett.similarity.kind, SimilarityKind::kl);
    EXPECT_DOUBLE_EQ(cfg.anett.phi.q, 2.0);
    EXPECT_EQ(cfg.image_size, 32);
    EXPECT_EQ(cfg.geometry.n_angles, 80);
    EXPECT_EQ(cfg.filter, FbpFilter::hann);
    EXPECT_EQ(cfg.autoencoder.channels, (std::array<int, 3>{4, 8, 16}));
    EXPECT_EQ(cfg.autoencoder.activation, ActivationKind::softplus);
    EXPECT_EQ(cfg.train.epochs, 3);
    EXPECT_EQ(cfg.paths.at("autoencoder"), "/tmp/ae.bin");
    EXPECT_EQ(cfg.seed, 12U);
}

TEST(Config, PresetAppliesBeforeOtherKeys) {
    const ExperimentConfig cfg = parse_experiment_config("alpha = 1e-2\npreset = low_dose\n");
    EXPECT_DOUBLE_EQ(cfg.anett.alpha, 1e-2);
    EXPECT_EQ(cfg.anett.similarity.kind, SimilarityKind::kl);
    EXPECT_EQ(cfg.noise.kind, NoiseKind::poisson);
    EXPECT_DOUBLE_EQ(cfg.noise.level, 1e4);
    EXPECT_EQ(cfg.anett.n_iter, 20);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_experiment_config("bogus = 1"), ConfigError);
    EXPECT_THROW(parse_experiment_config("alpha 1"), ConfigError);
    EXPECT_THROW(parse_experiment_config("alpha = abc"), ConfigError);
    EXPECT_THROW(parse_experiment_config("n_iter = 2.5"), ConfigError);
    EXPECT_THROW(parse_experiment_config("alpha = -1"), ConfigError);
    EXPECT_THROW(parse_experiment_config("image_size = 30"), ConfigError);
    EXPECT_THROW(parse_experiment_config("ae.channels = 1,2"), ConfigError);
    EXPECT_THROW(parse_experiment_config("ae.activation = tanh"), ConfigError);
    EXPECT_THROW(parse_experiment_config("preset = other"), ConfigError);
    EXPECT_THROW(parse_experiment_config("similarity = l1"), ConfigError);
    EXPECT_THROW(parse_experiment_config("phi.q = 3"), ConfigError);
    EXPECT_THROW(parse_experiment_config("window.min = 1\nwindow.max = 0"), ConfigError);
    EXPECT_THROW(load_experiment_config("/nonexistent/config.cfg"), IoError);
}

TEST(Config, KeyListIsComplete) {
    const auto& keys = experiment_config_keys();
    for (const char* k : {"preset", "alpha", "c", "rho", "gamma", "n_iter", "noise.kind", "paths.task"}) {
        EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
    }
}
