#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace anett {

/// Flat real vector; every image, sinogram and coefficient array is stored as one.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Square N x N pixel grid, row-major, covering the physical square [-1,1]^2.
///
/// Row 0 is the top of the image (y = +1), column 0 the left edge (x = -1).
/// Pixel (i, j) has its center at x = -1 + (j + 1/2) h, y = 1 - (i + 1/2) h
/// with h = 2 / N.
struct Image {
    int size = 0;
    Vector pixels;

    Image() = default;
    explicit Image(int n);
    Image(int n, Vector values);

    static Image zeros(int n) { return Image(n); }

    double pixel_width() const { return 2.0 / size; }
    double& operator()(int row, int col) { return pixels[static_cast<Eigen::Index>(row) * size + col]; }
    double operator()(int row, int col) const { return pixels[static_cast<Eigen::Index>(row) * size + col]; }

    double x_center(int col) const { return -1.0 + (col + 0.5) * pixel_width(); }
    double y_center(int row) const { return 1.0 - (row + 0.5) * pixel_width(); }
};

/// Parallel-beam geometry: angles k*pi/n_angles, detector cell centers on [-1.5, 1.5].
struct ScanGeometry {
    int n_angles = 0;
    int n_detectors = 0;

    static constexpr double detector_half_width = 1.5;

    ScanGeometry() = default;
    ScanGeometry(int angles, int detectors);

    double angle(int k) const;
    double detector_spacing() const { return 2.0 * detector_half_width / n_detectors; }
    double offset(int j) const { return -detector_half_width + (j + 0.5) * detector_spacing(); }
    Eigen::Index size() const { return static_cast<Eigen::Index>(n_angles) * n_detectors; }

    bool operator==(const ScanGeometry&) const = default;
};

/// Radon data, row-major over (angle, detector).
struct Sinogram {
    ScanGeometry geometry;
    Vector values;

    Sinogram() = default;
    explicit Sinogram(const ScanGeometry& geom);
    Sinogram(const ScanGeometry& geom, Vector data);

    double& operator()(int angle, int det) {
        return values[static_cast<Eigen::Index>(angle) * geometry.n_detectors + det];
    }
    double operator()(int angle, int det) const {
        return values[static_cast<Eigen::Index>(angle) * geometry.n_detectors + det];
    }
};

bool all_finite(const Vector& v);

} // namespace anett
