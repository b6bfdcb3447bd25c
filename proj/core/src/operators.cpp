#include "anett/operators.hpp"

#include "anett/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace anett {

namespace {

// Visits every (pixel index, weight) pair of the ray with angle index k and
// detector index j. The weight already includes the quadrature step dt.
class RayStencil {
public:
    RayStencil(int image_size, const ScanGeometry& geom)
        : n_(image_size), geom_(geom), h_(2.0 / image_size), dt_(h_ / 2.0) {
        // Half length of the sample window covering the interpolant support.
        const double reach = std::numbers::sqrt2 * (1.0 + h_);
        samples_ = static_cast<int>(std::ceil(2.0 * reach / dt_));
        t0_ = -0.5 * samples_ * dt_;
        cos_.resize(geom.n_angles);
        sin_.resize(geom.n_angles);
        for (int k = 0; k < geom.n_angles; ++k) {
            cos_[k] = std::cos(geom.angle(k));
            sin_[k] = std::sin(geom.angle(k));
        }
    }

    template <typename Visit>
    void for_each(int k, int j, Visit&& visit) const {
        const double c = cos_[k];
        const double s = sin_[k];
        const double offset = geom_.offset(j);
        // Point on the ray: (offset c - t s, offset s + t c). In fractional
        // pixel coordinates u (column) and v (row) both are affine in t.
        const double u0 = (offset * c + 1.0) / h_ - 0.5;
        const double du = -s / h_;
        const double v0 = (1.0 - offset * s) / h_ - 0.5;
        const double dv = -c / h_;

        // Restrict t to where -1 < u < n and -1 < v < n; outside all weights vanish.
        double lo = t0_;
        double hi = t0_ + samples_ * dt_;
        if (!clip(u0, du, lo, hi) || !clip(v0, dv, lo, hi)) {
            return;
        }
        const int m_begin = std::max(0, static_cast<int>(std::floor((lo - t0_) / dt_ - 0.5)));
        const int m_end = std::min(samples_, static_cast<int>(std::ceil((hi - t0_) / dt_ - 0.5)) + 1);

        for (int m = m_begin; m < m_end; ++m) {
            const double t = t0_ + (m + 0.5) * dt_;
            const double u = u0 + du * t;
            const double v = v0 + dv * t;
            const double uf = std::floor(u);
            const double vf = std::floor(v);
            const int col = static_cast<int>(uf);
            const int row = static_cast<int>(vf);
            const double fu = u - uf;
            const double fv = v - vf;
            if (col < -1 || col >= n_ || row < -1 || row >= n_) {
                continue;
            }
            const bool c0 = col >= 0;
            const bool c1 = col + 1 < n_;
            const bool r0 = row >= 0;
            const bool r1 = row + 1 < n_;
            const Eigen::Index base = static_cast<Eigen::Index>(row) * n_ + col;
            if (r0 && c0) visit(base, (1.0 - fu) * (1.0 - fv) * dt_);
            if (r0 && c1) visit(base + 1, fu * (1.0 - fv) * dt_);
            if (r1 && c0) visit(base + n_, (1.0 - fu) * fv * dt_);
            if (r1 && c1) visit(base + n_ + 1, fu * fv * dt_);
        }
    }

private:
    // Intersects [lo, hi] with {t : -1 < a + b t < n}.
    bool clip(double a, double b, double& lo, double& hi) const {
        constexpr double eps = 1e-12;
        if (std::abs(b) < eps) {
            return a > -1.0 && a < n_;
        }
        double t1 = (-1.0 - a) / b;
        double t2 = (n_ - a) / b;
        if (t1 > t2) std::swap(t1, t2);
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
        return lo < hi;
    }

    int n_;
    ScanGeometry geom_;
    double h_;
    double dt_;
    int samples_ = 0;
    double t0_ = 0.0;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

} // namespace

RadonOperator::RadonOperator(int image_size, ScanGeometry geometry, FbpFilter filter)
    : size_(image_size), geometry_(geometry), filter_(filter) {
    if (image_size < 2) {
        throw DimensionError("RadonOperator: image size must be at least 2");
    }
}

Vector RadonOperator::apply(const Vector& x) const {
    detail::require_same_size(x.size(), domain_dim(), "RadonOperator::apply");
    const RayStencil stencil(size_, geometry_);
    Vector y(range_dim());
    for (int k = 0; k < geometry_.n_angles; ++k) {
        for (int j = 0; j < geometry_.n_detectors; ++j) {
            double acc = 0.0;
            stencil.for_each(k, j, [&](Eigen::Index p, double w) { acc += w * x[p]; });
            y[static_cast<Eigen::Index>(k) * geometry_.n_detectors + j] = acc;
        }
    }
    return y;
}

Vector RadonOperator::apply_adjoint(const Vector& y) const {
    detail::require_same_size(y.size(), range_dim(), "RadonOperator::apply_adjoint");
    const RayStencil stencil(size_, geometry_);
    Vector x = Vector::Zero(domain_dim());
    for (int k = 0; k < geometry_.n_angles; ++k) {
        for (int j = 0; j < geometry_.n_detectors; ++j) {
            const double value = y[static_cast<Eigen::Index>(k) * geometry_.n_detectors + j];
            if (value == 0.0) {
                continue;
            }
            stencil.for_each(k, j, [&](Eigen::Index p, double w) { x[p] += w * value; });
        }
    }
    return x;
}

Vector RadonOperator::approximate_inverse(const Vector& y) const {
    return fbp(Sinogram(geometry_, y), size_, filter_).pixels;
}

DenseOperator::DenseOperator(Matrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.size() == 0) {
        throw DimensionError("DenseOperator: empty matrix");
    }
    pseudo_inverse_ = matrix_.completeOrthogonalDecomposition().pseudoInverse();
}

DenseOperator DenseOperator::identity(Eigen::Index n) {
    return DenseOperator(Matrix::Identity(n, n));
}

Sinogram radon_forward(const Image& img, const ScanGeometry& geom) {
    const RadonOperator op(img.size, geom);
    return Sinogram(geom, op.apply(img.pixels));
}

Image radon_adjoint(const Sinogram& sino, int image_size) {
    const RadonOperator op(image_size, sino.geometry);
    return Image(image_size, op.apply_adjoint(sino.values));
}

double adjoint_test(const LinearOperator& op, int trials, std::uint64_t seed) {
    if (trials < 1) {
        throw DomainError("adjoint_test: trials must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
        return v;
    };
    constexpr double eps = std::numeric_limits<double>::min();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Vector x = draw(op.domain_dim());
        const Vector y = draw(op.range_dim());
        const double forward = op.apply(x).dot(y);
        const double backward = x.dot(op.apply_adjoint(y));
        const double discrepancy = std::abs(forward - backward) / (std::abs(forward) + std::abs(backward) + eps);
        worst = std::max(worst, discrepancy);
    }
    return worst;
}

Matrix assemble_matrix(const LinearOperator& op) {
    const Eigen::Index n = op.domain_dim();
    Matrix a(op.range_dim(), n);
    Vector e = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        e[i] = 1.0;
        a.col(i) = op.apply(e);
        e[i] = 0.0;
    }
    return a;
}

double operator_norm_estimate(const LinearOperator& op, int iterations, std::uint64_t seed) {
    if (iterations < 1) throw DomainError("operator_norm_estimate: need at least one iteration");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x(op.domain_dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
    double lambda = 0.0;
    for (int k = 0; k < iterations; ++k) {
        x /= x.norm();
        const Vector z = op.apply_adjoint(op.apply(x));
        lambda = x.dot(z);
        x = z;
        if (x.norm() == 0.0) return 0.0;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

} // namespace anett
