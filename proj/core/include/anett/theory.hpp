#pragma once

#include "anett/regularizer.hpp"
#include "anett/solver.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace anett {

/// 20 log10(max x / ||x - x_rec||_2), without pixel-count normalization.
/// Returns +infinity for identical images.
double psnr(const Image& x, const Image& x_rec);
double psnr(const Vector& x, const Vector& x_rec);
/// 20 log10(max x / RMSE), the per-pixel normalized variant.
double psnr_normalized(const Vector& x, const Vector& x_rec);

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
/// Least-squares fit of log y against log x.
LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Golden-section minimization of a unimodal function on [lo, hi].
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12);

// ---------------------------------------------------------------- coercivity

struct CoercivityRow {
    int direction = 0;
    double scale = 0.0;
    double regularizer = 0.0;
    double norm_sq = 0.0;
    /// (4/c) R(x) + 2 ||N(x)||^2.
    double bound = 0.0;
    bool holds = false;
};

/// Probes x = t d for random unit directions d; holds is checked with relative slack 1e-9.
std::vector<CoercivityRow> coercivity_probe(const AnettRegularizer& reg, int n_dirs, const std::vector<double>& scales,
                                            std::uint64_t seed);

// ---------------------------------------------------------------- counterexample

struct CounterexampleReport {
    double alpha = 0.0;
    std::vector<double> deltas;
    /// ||x_n|| = (1 + delta_n) / (1 + alpha / 2), closed form.
    std::vector<double> perturbed_norms;
    /// Numerical minimizers of D(x, y_n) + alpha ||x||^2 along y.
    std::vector<double> numerical_perturbed_norms;
    double perturbed_limit = 0.0;
    double unperturbed_norm = 0.0;
    double numerical_unperturbed_norm = 0.0;
    double gap = 0.0;
    /// Largest deviation between numerical and closed-form minimizers.
    double max_numerical_error = 0.0;
};

/// Minimizers of D_unstable(x, y_n) + alpha ||x||^2 with y_n = (1 + delta_n) y, ||y|| = 1.
CounterexampleReport counterexample_demo(double alpha, const std::vector<double>& deltas);

// ---------------------------------------------------------------- stability

struct StabilityReport {
    std::vector<double> levels;
    std::vector<double> distances;
    std::vector<double> regularizer_gaps;
    /// Distances of an exact minimizer (dense linear solve) when available.
    std::vector<double> oracle_distances;
    double spearman = 0.0;
};

/// Reconstructs from y + eps u for a fixed-seed unit vector u and compares with the reconstruction from y.
StabilityReport stability_experiment(const LinearOperator& op, const AnettRegularizer& reg, const AnettConfig& config,
                                     const Vector& y, const std::vector<double>& levels, std::uint64_t seed);

/// Convex reference problem on a 16 x 16 grid: sparse-angle Radon data of a Shepp-Logan
/// phantom, linear codec E = [I; Dx; Dy], D = [S 0 0] with S a 3 x 3 box blur, q = 2 penalty.
struct ConvexSuite {
    std::shared_ptr<const LinearOperator> op;
    std::shared_ptr<const AnettRegularizer> reg;
    AnettConfig config;
    Image truth;
    Vector y;
};
ConvexSuite make_convex_suite();

/// Exact minimizer of ||Kx - y||^2 + alpha R(x) for a linear codec and q = 2, mu = 0 penalty.
Vector quadratic_minimizer(const Matrix& k, const LinearCodec& codec, const PhiSpec& phi, double c, double alpha,
                           const Vector& y);
/// Hessian of R(x) for a linear codec and q = 2, mu = 0 penalty.
Matrix quadratic_regularizer_hessian(const LinearCodec& codec, const PhiSpec& phi, double c);

// ---------------------------------------------------------------- convergence rate

struct RateInstance {
    Matrix k;
    std::shared_ptr<const LinearCodec> codec;
    PhiSpec phi;
    double c = 1.0;
    /// R-minimizing solution of K x = y.
    Vector x_dagger;
    Vector y;
    /// Unit-norm noise direction.
    Vector noise;
};

/// Finite-rank instance: K is rank x n with singular values decaying geometrically from 1 to
/// min_singular_value, random linear E (code_dim x n) and D, q = 2 penalty. The exact
/// data come from a solution satisfying the source condition grad R(x) = K^T w, ||w|| = 1.
RateInstance make_rate_instance(int n, int rank, int code_dim, double min_singular_value, std::uint64_t seed);

/// R-minimizing solution of K x = y for a quadratic regularizer (equality-constrained KKT solve).
Vector r_minimizing_solution(const Matrix& k, const Matrix& hessian, const Vector& y);

struct RateRow {
    double delta = 0.0;
    double alpha = 0.0;
    double bregman = 0.0;
    double bound = 0.0;
    bool converged = true;
};

struct RateReport {
    std::vector<RateRow> rows;
    LineFit fit;
    /// Constant of the calibrated bound delta^2/alpha - sqrt(2) C delta + C^2 alpha / 2.
    double bound_constant = 0.0;
    bool bound_holds = false;
};

/// Sets alpha = kappa delta, solves each regularized problem exactly and fits log Delta_R against log delta.
RateReport rate_experiment(const RateInstance& instance, const std::vector<double>& deltas, double kappa = 1.0);

/// Log-spaced grid from hi down to lo with count points.
std::vector<double> log_grid(double hi, double lo, int count);

/// Regression instance: n = 16, rank 12, |Lambda| = 24, singular values 1 .. 1e-2, seed 0.
RateInstance default_rate_instance();
/// Eight log-spaced noise levels from 1e-1 to 1e-4.
std::vector<double> default_rate_deltas();
/// Perturbation levels 1e-1, 1e-2, 1e-3, 1e-4 of the convex stability suite.
std::vector<double> default_stability_levels();

} // namespace anett
