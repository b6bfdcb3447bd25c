#pragma once

#include "anett/grid.hpp"

#include <functional>
#include <random>

namespace anett::testing {

inline Vector random_vector(Eigen::Index n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uni(rng);
    return v;
}

/// Central-difference directional derivative of f at x along d.
inline double directional_fd(const std::function<double(const Vector&)>& f, const Vector& x, const Vector& d,
                             double step) {
    return (f(x + step * d) - f(x - step * d)) / (2.0 * step);
}

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Full central-difference gradient.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double step) {
    Vector g(x.size());
    Vector e = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        e[i] = step;
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step);
        e[i] = 0.0;
    }
    return g;
}

} // namespace anett::testing
