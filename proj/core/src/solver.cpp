#include "anett/solver.hpp"

#include "anett/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace anett {

namespace {

// Value of the x-subproblem with the passes needed for its gradient.
struct Evaluation {
    double value = 0.0;
    Vector x;
    Vector kx;
    EncoderDecoder::EncodePass enc;
    EncoderDecoder::DecodePass dec;
};

Evaluation evaluate(const AdmmState& state, const LinearOperator& op, const Vector& y, const AnettRegularizer& reg,
                    const AnettConfig& config, const Vector& x) {
    Evaluation e;
    e.x = x;
    e.kx = op.apply(x);
    e.enc = reg.codec().encode_pass(x);
    e.dec = reg.codec().decode_pass(e.enc.value.values);
    const double rho = config.effective_rho();
    const double augmented = (x - e.dec.value).squaredNorm();
    const double coupling = (e.enc.value.values - state.xi + state.eta).squaredNorm();
    e.value = sim_eval(config.similarity, e.kx, y) + 0.5 * config.alpha * reg.c() * augmented + 0.5 * rho * coupling;
    return e;
}

Vector gradient_of(const Evaluation& e, const AdmmState& state, const LinearOperator& op, const Vector& y,
                   const AnettRegularizer& reg, const AnettConfig& config) {
    const double rho = config.effective_rho();
    const double ac = config.alpha * reg.c();
    const Vector residual = e.x - e.dec.value;
    // J_E^T (rho (E(x) - xi + eta) - alpha c J_D^T r)
    const Vector upstream = rho * (e.enc.value.values - state.xi + state.eta) - ac * e.dec.pullback(residual);
    return op.apply_adjoint(sim_grad(config.similarity, e.kx, y)) + ac * residual + e.enc.pullback(upstream);
}

void check_state(const AdmmState& state, const LinearOperator& op, const AnettRegularizer& reg) {
    detail::require_same_size(state.x.size(), op.domain_dim(), "ADMM state x");
    detail::require_same_size(state.xi.size(), reg.codec().code_dim(), "ADMM state xi");
    detail::require_same_size(state.eta.size(), reg.codec().code_dim(), "ADMM state eta");
}

} // namespace

std::string SolverTrace::to_csv() const {
    std::ostringstream out;
    out << "iter,objective,similarity,regularizer,primal_residual,inner_iters\n";
    out << std::setprecision(17);
    for (const auto& r : records) {
        out << r.iter << ',' << r.objective << ',' << r.similarity << ',' << r.regularizer << ','
            << r.primal_residual << ',' << r.inner_iters << '\n';
    }
    return out.str();
}

void SolverTrace::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << to_csv();
}

AdmmState admm_initialize(const LinearOperator& op, const Vector& y, const AnettRegularizer& reg) {
    detail::require_same_size(y.size(), op.range_dim(), "admm_initialize (data)");
    AdmmState state;
    state.x = op.approximate_inverse(y);
    state.xi = reg.codec().encode(state.x).values;
    state.eta = Vector::Zero(state.xi.size());
    return state;
}

double x_subproblem_objective(const AdmmState& state, const LinearOperator& op, const Vector& y,
                              const AnettRegularizer& reg, const AnettConfig& config, const Vector& x) {
    return evaluate(state, op, y, reg, config, x).value;
}

Vector x_subproblem_gradient(const AdmmState& state, const LinearOperator& op, const Vector& y,
                             const AnettRegularizer& reg, const AnettConfig& config, const Vector& x) {
    return gradient_of(evaluate(state, op, y, reg, config, x), state, op, y, reg, config);
}

Vector x_update(const AdmmState& state, const LinearOperator& op, const Vector& y, const AnettRegularizer& reg,
                const AnettConfig& config, int* inner_iters) {
    check_state(state, op, reg);
    Evaluation current = evaluate(state, op, y, reg, config, state.x);
    double step = config.gamma;
    int iters = 0;
    while (iters < config.inner_max_iters) {
        const Vector g = gradient_of(current, state, op, y, reg, config);
        if (!all_finite(g)) {
            throw DivergedError("x-update: non-finite gradient", {});
        }
        if (g.squaredNorm() == 0.0) break;
        ++iters;
        Evaluation trial = evaluate(state, op, y, reg, config, current.x - step * g);
        if (std::isfinite(trial.value) && trial.value < current.value) {
            const double decrease = current.value - trial.value;
            current = std::move(trial);
            if (decrease < config.inner_tol) break;
        } else {
            step *= 0.5;
        }
    }
    if (inner_iters) *inner_iters = iters;
    return current.x;
}

Vector xi_update(const Vector& encoded, const Vector& eta, const AnettConfig& config) {
    detail::require_same_size(encoded.size(), eta.size(), "xi_update");
    return prox_phi(config.phi, encoded + eta, config.alpha / config.effective_rho());
}

Vector dual_update(const Vector& eta, const Vector& encoded, const Vector& xi) {
    detail::require_same_size(eta.size(), encoded.size(), "dual_update");
    detail::require_same_size(eta.size(), xi.size(), "dual_update");
    return eta + encoded - xi;
}

AdmmResult admm_solve(const LinearOperator& op, const Vector& y, const AnettRegularizer& reg,
                      const AnettConfig& config) {
    return admm_solve(op, y, reg, config, admm_initialize(op, y, reg));
}

AdmmResult admm_solve(const LinearOperator& op, const Vector& y, const AnettRegularizer& reg,
                      const AnettConfig& config, AdmmState state) {
    config.validate();
    detail::require_same_size(y.size(), op.range_dim(), "admm_solve (data)");
    check_state(state, op, reg);
    SolverTrace trace;
    for (int k = 0; k < config.n_iter; ++k) {
        TraceRecord rec;
        try {
            state.x = x_update(state, op, y, reg, config, &rec.inner_iters);
        } catch (const DivergedError& e) {
            throw DivergedError(e.what(), trace);
        }
        const Vector encoded = reg.codec().encode(state.x).values;
        state.xi = xi_update(encoded, state.eta, config);
        state.eta = dual_update(state.eta, encoded, state.xi);
        state.iteration = k + 1;

        const ObjectiveTerms terms = anett_objective(op, config, reg, y, state.x);
        rec.iter = k + 1;
        rec.objective = terms.total;
        rec.similarity = terms.similarity;
        rec.regularizer = terms.regularizer;
        rec.primal_residual = (encoded - state.xi).norm();
        trace.records.push_back(rec);
        if (!std::isfinite(terms.total) || !all_finite(state.x)) {
            throw DivergedError("ADMM diverged at iteration " + std::to_string(k + 1), trace);
        }
    }
    return {state.x, state, std::move(trace)};
}

} // namespace anett
