#include "anett/noise.hpp"

#include "anett/error.hpp"

#include <cmath>
#include <random>

namespace anett {

Vector add_gaussian_noise(const Vector& y, double rel_std, std::uint64_t seed) {
    if (!(rel_std >= 0.0)) throw DomainError("add_gaussian_noise: rel_std must be nonnegative");
    if (rel_std == 0.0 || y.size() == 0) return y;
    const double sigma = rel_std * y.mean();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector out = y;
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sigma * normal(rng);
    return out;
}

Sinogram add_gaussian_noise(const Sinogram& y, double rel_std, std::uint64_t seed) {
    return Sinogram(y.geometry, add_gaussian_noise(y.values, rel_std, seed));
}

Vector add_poisson_noise(const Vector& y, double photons, std::uint64_t seed) {
    if (!(photons > 0.0)) throw DomainError("add_poisson_noise: photon count must be positive");
    if ((y.array() < 0.0).any()) throw DomainError("add_poisson_noise: negative sinogram entry");
    std::mt19937_64 rng(seed);
    Vector out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        std::poisson_distribution<long long> poisson(photons * std::exp(-y[i]));
        const double counts = static_cast<double>(poisson(rng));
        out[i] = -std::log(std::max(counts, 1.0) / photons);
    }
    return out;
}

Sinogram add_poisson_noise(const Sinogram& y, double photons, std::uint64_t seed) {
    return Sinogram(y.geometry, add_poisson_noise(y.values, photons, seed));
}

Vector NoiseModel::apply(const Vector& y, std::uint64_t seed) const {
    switch (kind) {
    case NoiseKind::none: return y;
    case NoiseKind::gaussian: return add_gaussian_noise(y, level, seed);
    case NoiseKind::poisson: return add_poisson_noise(y, level, seed);
    }
    return y;
}

NoiseKind parse_noise_kind(std::string_view name) {
    if (name == "none") return NoiseKind::none;
    if (name == "gaussian") return NoiseKind::gaussian;
    if (name == "poisson") return NoiseKind::poisson;
    throw ConfigError("unknown noise kind '" + std::string(name) + "'");
}

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::poisson: return "poisson";
    }
    return "none";
}

} // namespace anett
