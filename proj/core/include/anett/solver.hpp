#pragma once

#include "anett/regularizer.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace anett {

/// ADMM iterate: image x, coefficients xi and scaled dual eta.
struct AdmmState {
    Vector x;
    Vector xi;
    Vector eta;
    int iteration = 0;
};

struct TraceRecord {
    int iter = 0;
    double objective = 0.0;
    double similarity = 0.0;
    double regularizer = 0.0;
    /// ||E(x_k) - xi_k||.
    double primal_residual = 0.0;
    int inner_iters = 0;
};

struct SolverTrace {
    std::vector<TraceRecord> records;

    std::string to_csv() const;
    void write_csv(const std::string& path) const;
};

/// A non-finite value appeared during the iteration; carries the trace so far.
class DivergedError : public std::runtime_error {
public:
    DivergedError(const std::string& what, SolverTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
    const SolverTrace& trace() const { return trace_; }

private:
    SolverTrace trace_;
};

struct AdmmResult {
    Vector x;
    AdmmState state;
    SolverTrace trace;
};

/// x0 = K^\ddagger y, xi0 = E(x0), eta0 = 0.
AdmmState admm_initialize(const LinearOperator& op, const Vector& y, const AnettRegularizer& reg);

/// Objective of the x-subproblem:
/// D(Kx, y) + (alpha c / 2) ||x - N(x)||^2 + (rho / 2) ||E(x) - xi + eta||^2.
double x_subproblem_objective(const AdmmState& state, const LinearOperator& op, const Vector& y,
                              const AnettRegularizer& reg, const AnettConfig& config, const Vector& x);
Vector x_subproblem_gradient(const AdmmState& state, const LinearOperator& op, const Vector& y,
                             const AnettRegularizer& reg, const AnettConfig& config, const Vector& x);

/// (S1) Gradient descent from state.x with step gamma, accepting only steps that lower the
/// subproblem objective and halving the step otherwise.
Vector x_update(const AdmmState& state, const LinearOperator& op, const Vector& y, const AnettRegularizer& reg,
                const AnettConfig& config, int* inner_iters = nullptr);
/// (S2) prox of (alpha / rho) phi at E(x) + eta, with encoded = E(x).
Vector xi_update(const Vector& encoded, const Vector& eta, const AnettConfig& config);
/// (S3) eta + E(x) - xi.
Vector dual_update(const Vector& eta, const Vector& encoded, const Vector& xi);

/// Runs exactly config.n_iter outer iterations of (S1)-(S3).
AdmmResult admm_solve(const LinearOperator& op, const Vector& y, const AnettRegularizer& reg,
                      const AnettConfig& config);
AdmmResult admm_solve(const LinearOperator& op, const Vector& y, const AnettRegularizer& reg,
                      const AnettConfig& config, AdmmState initial);

} // namespace anett
