#include "anett/grid.hpp"

#include "anett/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace anett {

Image::Image(int n) : Image(n, Vector::Zero(static_cast<Eigen::Index>(n) * n)) {}

Image::Image(int n, Vector values) : size(n), pixels(std::move(values)) {
    if (n < 2) {
        throw DimensionError("Image: size must be at least 2, got " + std::to_string(n));
    }
    detail::require_same_size(pixels.size(), static_cast<long>(n) * n, "Image");
}

ScanGeometry::ScanGeometry(int angles, int detectors) : n_angles(angles), n_detectors(detectors) {
    if (angles < 1 || detectors < 2) {
        throw DimensionError("ScanGeometry: need n_angles >= 1 and n_detectors >= 2");
    }
}

double ScanGeometry::angle(int k) const {
    return k * std::numbers::pi / n_angles;
}

Sinogram::Sinogram(const ScanGeometry& geom) : geometry(geom), values(Vector::Zero(geom.size())) {}

Sinogram::Sinogram(const ScanGeometry& geom, Vector data) : geometry(geom), values(std::move(data)) {
    detail::require_same_size(values.size(), geom.size(), "Sinogram");
}

bool all_finite(const Vector& v) {
    return v.allFinite();
}

} // namespace anett
