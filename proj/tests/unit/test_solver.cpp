#include "anett/error.hpp"
#include "anett/solver.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace anett;
using anett::testing::random_vector;

namespace {

Vector soft_threshold(const Vector& y, double t) {
    Vector z(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double a = std::abs(y[i]) - t;
        z[i] = a > 0.0 ? std::copysign(a, y[i]) : 0.0;
    }
    return z;
}

struct IdentitySetup {
    DenseOperator op = DenseOperator::identity(20);
    AnettConfig config;
    std::shared_ptr<AnettRegularizer> reg;
    Vector y = random_vector(20, 1, -1.0, 1.0);

    IdentitySetup() {
        config.alpha = 0.3;
        config.c = 1.0;
        config.rho = 1.0;
        config.gamma = 0.2;
        config.n_iter = 300;
        config.inner_max_iters = 20;
        config.inner_tol = 0.0;
        config.phi = PhiSpec{1.0, {}, 0.0};
        reg = std::make_shared<AnettRegularizer>(std::make_shared<IdentityCodec>(20), config.phi, config.c);
    }
};

std::shared_ptr<LinearCodec> random_codec(int n, int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix e(m, n), d(n, m);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = g(rng) / std::sqrt(n);
    for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = g(rng) / std::sqrt(m);
    return std::make_shared<LinearCodec>(e, d);
}

} // namespace

TEST(Admm, IdentitySetupGivesSoftThreshold) {
    IdentitySetup s;
    const AdmmResult res = admm_solve(s.op, s.y, *s.reg, s.config);
    const Vector expected = soft_threshold(s.y, s.config.alpha / 2.0);
    EXPECT_LT((res.x - expected).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Admm, ObjectiveWithinOnePercentOfOracle) {
    IdentitySetup s;
    const AdmmResult res = admm_solve(s.op, s.y, *s.reg, s.config);
    const double best = anett_objective(s.op, s.config, *s.reg, s.y, soft_threshold(s.y, s.config.alpha / 2.0)).total;
    const double got = res.trace.records.back().objective;
    EXPECT_LE(std::abs(got - best), 0.01 * best);
}

TEST(Admm, QuadraticProblemReachesStationaryPoint) {
    const int n = 12;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    Matrix k(9, n);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = g(rng) / std::sqrt(n);
    const DenseOperator op(k);
    AnettConfig cfg;
    cfg.alpha = 0.1;
    cfg.c = 1.0;
    cfg.rho = 0.5;
    cfg.gamma = 0.2;
    cfg.n_iter = 400;
    cfg.inner_max_iters = 10;
    cfg.inner_tol = 0.0;
    cfg.phi = PhiSpec{2.0, {}, 0.0};
    const AnettRegularizer reg(random_codec(n, 18, 3), cfg.phi, cfg.c);
    const Vector y = random_vector(9, 4);
    const AdmmResult res = admm_solve(op, y, reg, cfg);
    const Vector grad = op.apply_adjoint(2.0 * (op.apply(res.x) - y)) + cfg.alpha * reg.gradient(res.x);
    EXPECT_LT(grad.norm(), 1e-6);
    EXPECT_LT(res.trace.records.back().primal_residual, 1e-6);
}

TEST(Admm, InnerUpdateNeverIncreasesSubproblemObjective) {
    IdentitySetup s;
    AdmmState state = admm_initialize(s.op, s.y, *s.reg);
    state.x = random_vector(20, 5);
    state.eta = random_vector(20, 6, -0.1, 0.1);
    for (double gamma : {1e-3, 0.2, 5.0, 100.0}) {
        s.config.gamma = gamma;
        const double before = x_subproblem_objective(state, s.op, s.y, *s.reg, s.config, state.x);
        int iters = 0;
        const Vector x = x_update(state, s.op, s.y, *s.reg, s.config, &iters);
        EXPECT_LE(x_subproblem_objective(state, s.op, s.y, *s.reg, s.config, x), before) << "gamma " << gamma;
        EXPECT_GE(iters, 1);
        EXPECT_LE(iters, s.config.inner_max_iters);
    }
}

TEST(Admm, SubproblemGradientMatchesFiniteDifferences) {
    const int n = 10;
    const DenseOperator op(Matrix::Random(7, n));
    AnettConfig cfg;
    cfg.alpha = 0.2;
    cfg.c = 3.0;
    cfg.phi = PhiSpec{1.0, {}, 0.0};
    const AnettRegularizer reg(random_codec(n, 15, 7), cfg.phi, cfg.c);
    const Vector y = random_vector(7, 8);
    AdmmState state = admm_initialize(op, y, reg);
    state.xi = random_vector(15, 9);
    state.eta = random_vector(15, 10);
    const Vector x = random_vector(n, 11);
    const Vector fd = anett::testing::fd_gradient(
        [&](const Vector& v) { return x_subproblem_objective(state, op, y, reg, cfg, v); }, x, 1e-6);
    const Vector g = x_subproblem_gradient(state, op, y, reg, cfg, x);
    EXPECT_LT((fd - g).norm(), 1e-6 * g.norm());
}

TEST(Admm, DualVariableAccumulatesResiduals) {
    IdentitySetup s;
    s.config.n_iter = 1;
    AdmmState state = admm_initialize(s.op, s.y, *s.reg);
    Vector sum = Vector::Zero(20);
    for (int k = 0; k < 15; ++k) {
        state.x = x_update(state, s.op, s.y, *s.reg, s.config);
        const Vector encoded = s.reg->codec().encode(state.x).values;
        state.xi = xi_update(encoded, state.eta, s.config);
        sum += encoded - state.xi;
        state.eta = dual_update(state.eta, encoded, state.xi);
    }
    EXPECT_LT((state.eta - sum).norm(), 1e-12);
}

TEST(Admm, XiUpdateIsProxOfScaledPhi) {
    AnettConfig cfg;
    cfg.alpha = 0.4;
    cfg.rho = 0.8;
    cfg.phi = PhiSpec{1.0, {}, 0.0};
    Vector enc(3), eta(3);
    enc << 1.0, -0.2, 0.0;
    eta << 0.0, 0.0, -2.0;
    const Vector xi = xi_update(enc, eta, cfg);
    EXPECT_DOUBLE_EQ(xi[0], 0.5);
    EXPECT_DOUBLE_EQ(xi[1], 0.0);
    EXPECT_DOUBLE_EQ(xi[2], -1.5);
}

TEST(Admm, TraceHasOneRecordPerIteration) {
    IdentitySetup s;
    s.config.n_iter = 17;
    const AdmmResult res = admm_solve(s.op, s.y, *s.reg, s.config);
    ASSERT_EQ(res.trace.records.size(), 17U);
    EXPECT_EQ(res.state.iteration, 17);
    for (std::size_t i = 0; i < res.trace.records.size(); ++i) {
        const TraceRecord& r = res.trace.records[i];
        EXPECT_EQ(r.iter, static_cast<int>(i) + 1);
        EXPECT_NEAR(r.objective, r.similarity + s.config.alpha * r.regularizer, 1e-12);
    }
    const std::string csv = res.trace.to_csv();
    EXPECT_EQ(csv.rfind("iter,objective,similarity,regularizer,primal_residual,inner_iters\n", 0), 0U);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 18);
}

TEST(Admm, WarmStartContinuesIteration) {
    IdentitySetup s;
    s.config.n_iter = 10;
    const AdmmResult a = admm_solve(s.op, s.y, *s.reg, s.config);
    const AdmmResult b = admm_solve(s.op, s.y, *s.reg, s.config, a.state);
    s.config.n_iter = 20;
    const AdmmResult c = admm_solve(s.op, s.y, *s.reg, s.config);
    EXPECT_LT((b.x - c.x).norm(), 1e-14);
}

TEST(Admm, NonFiniteDataRaisesDiverged) {
    IdentitySetup s;
    s.y[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(admm_solve(s.op, s.y, *s.reg, s.config), DivergedError);
}

TEST(Admm, ShapeErrors) {
    IdentitySetup s;
    EXPECT_THROW(admm_solve(s.op, Vector::Zero(5), *s.reg, s.config), DimensionError);
    AdmmState bad = admm_initialize(s.op, s.y, *s.reg);
    bad.eta = Vector::Zero(3);
    EXPECT_THROW(admm_solve(s.op, s.y, *s.reg, s.config, bad), DimensionError);
    EXPECT_THROW(dual_update(Vector::Zero(2), Vector::Zero(3), Vector::Zero(2)), DimensionError);
}
