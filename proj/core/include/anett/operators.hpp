#pragma once

#include "anett/grid.hpp"

#include <cstdint>
#include <memory>

namespace anett {

/// A linear map K: X -> Y given by a pair of procedures.
///
/// Implementations must make apply_adjoint the exact transpose of apply;
/// adjoint_test() checks that contract. Instances are immutable once built
/// and safe to share between threads.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual Eigen::Index domain_dim() const = 0;
    virtual Eigen::Index range_dim() const = 0;

    virtual Vector apply(const Vector& x) const = 0;
    virtual Vector apply_adjoint(const Vector& y) const = 0;

    /// Approximate right inverse K^\ddagger, used to initialize reconstructions.
    virtual Vector approximate_inverse(const Vector& y) const { return apply_adjoint(y); }
};

enum class FbpFilter { ramlak, hann };

/// Discretized parallel-beam Radon transform on an N x N image.
///
/// Ray-driven: every ray (angle k, offset s_j) is sampled with step h/2 and
/// the image is read through its bilinear interpolant, zero outside the grid.
/// The adjoint scatters along the same stencil, so it is the literal transpose.
class RadonOperator final : public LinearOperator {
public:
    RadonOperator(int image_size, ScanGeometry geometry, FbpFilter filter = FbpFilter::ramlak);

    Eigen::Index domain_dim() const override { return static_cast<Eigen::Index>(size_) * size_; }
    Eigen::Index range_dim() const override { return geometry_.size(); }

    Vector apply(const Vector& x) const override;
    Vector apply_adjoint(const Vector& y) const override;
    /// Filtered backprojection.
    Vector approximate_inverse(const Vector& y) const override;

    int image_size() const { return size_; }
    const ScanGeometry& geometry() const { return geometry_; }
    FbpFilter filter() const { return filter_; }

private:
    int size_;
    ScanGeometry geometry_;
    FbpFilter filter_;
};

/// Explicit matrix m x n; used for finite-rank toy problems and oracles.
class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(Matrix matrix);

    static DenseOperator identity(Eigen::Index n);

    Eigen::Index domain_dim() const override { return matrix_.cols(); }
    Eigen::Index range_dim() const override { return matrix_.rows(); }

    Vector apply(const Vector& x) const override { return matrix_ * x; }
    Vector apply_adjoint(const Vector& y) const override { return matrix_.transpose() * y; }
    /// Moore-Penrose pseudo-inverse applied to y.
    Vector approximate_inverse(const Vector& y) const override { return pseudo_inverse_ * y; }

    const Matrix& matrix() const { return matrix_; }

private:
    Matrix matrix_;
    Matrix pseudo_inverse_;
};

Sinogram radon_forward(const Image& img, const ScanGeometry& geom);
Image radon_adjoint(const Sinogram& sino, int image_size);
Image fbp(const Sinogram& sino, int image_size, FbpFilter filter = FbpFilter::ramlak);

/// Ramp-filter every detector row of y (FFT, zero padded to a power of two >= 2 N_s).
Vector ramp_filter_rows(const Vector& y, const ScanGeometry& geom, FbpFilter filter);

/// Dot-product test: max over trials of |<Kx,y> - <x,K^T y>| / (|<Kx,y>| + |<x,K^T y>| + eps)
/// for standard normal x, y.
double adjoint_test(const LinearOperator& op, int trials, std::uint64_t seed);

/// Dense matrix of an operator, one column per basis vector. Intended for small sizes.
Matrix assemble_matrix(const LinearOperator& op);

/// Power-iteration estimate of the spectral norm ||K||.
double operator_norm_estimate(const LinearOperator& op, int iterations = 50, std::uint64_t seed = 0);

} // namespace anett
