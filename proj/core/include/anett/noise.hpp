#pragma once

#include "anett/grid.hpp"

#include <cstdint>
#include <string_view>

namespace anett {

/// y + eta with eta ~ N(0, (rel_std * mean(y))^2), i.i.d.
Vector add_gaussian_noise(const Vector& y, double rel_std, std::uint64_t seed);
Sinogram add_gaussian_noise(const Sinogram& y, double rel_std, std::uint64_t seed);

/// Transmission model: n_i ~ Poisson(p exp(-y_i)), y_i' = -log(max(n_i, 1) / p).
Vector add_poisson_noise(const Vector& y, double photons, std::uint64_t seed);
Sinogram add_poisson_noise(const Sinogram& y, double photons, std::uint64_t seed);

enum class NoiseKind { none, gaussian, poisson };

/// Measurement noise: level is rel_std for Gaussian noise and the photon count for Poisson noise.
struct NoiseModel {
    NoiseKind kind = NoiseKind::gaussian;
    double level = 0.02;

    Vector apply(const Vector& y, std::uint64_t seed) const;
};

NoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(NoiseKind kind);

} // namespace anett
