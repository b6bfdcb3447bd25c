#include "anett/theory.hpp"

#include "anett/error.hpp"
#include "anett/phantom.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace anett {

namespace {

Vector random_unit(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v / v.norm();
}

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
}

Matrix random_orthonormal_columns(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_gaussian(rows, cols, rng));
    return qr.householderQ() * Matrix::Identity(rows, cols);
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double average = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = average;
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

void require_quadratic(const PhiSpec& phi) {
    if (phi.q != 2.0 || phi.mu != 0.0) {
        throw UnsupportedError("quadratic solve requires q = 2 and mu = 0");
    }
}

} // namespace

double psnr(const Vector& x, const Vector& x_rec) {
    detail::require_same_size(x.size(), x_rec.size(), "psnr");
    const double peak = x.maxCoeff();
    if (!(peak > 0.0)) throw DomainError("psnr: reference maximum must be positive");
    const double err = (x - x_rec).norm();
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak / err);
}

double psnr(const Image& x, const Image& x_rec) {
    return psnr(x.pixels, x_rec.pixels);
}

double psnr_normalized(const Vector& x, const Vector& x_rec) {
    detail::require_same_size(x.size(), x_rec.size(), "psnr_normalized");
    const double peak = x.maxCoeff();
    if (!(peak > 0.0)) throw DomainError("psnr: reference maximum must be positive");
    const double rmse = (x - x_rec).norm() / std::sqrt(static_cast<double>(x.size()));
    if (rmse == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak / rmse);
}

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw DimensionError("spearman_correlation: need two equally long samples of size >= 2");
    }
    return pearson(ranks(a), ranks(b));
}

LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DimensionError("loglog_fit: need at least two points");
    const auto n = static_cast<Eigen::Index>(x.size());
    Matrix a(n, 2);
    Vector b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_fit: values must be positive");
        a(i, 0) = std::log(x[i]);
        a(i, 1) = 1.0;
        b[i] = std::log(y[i]);
    }
    const Vector coef = a.colPivHouseholderQr().solve(b);
    const Vector residual = b - a * coef;
    const double total = (b.array() - b.mean()).square().sum();
    LineFit fit;
    fit.slope = coef[0];
    fit.intercept = coef[1];
    fit.r_squared = total > 0.0 ? 1.0 - residual.squaredNorm() / total : 1.0;
    return fit;
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

std::vector<CoercivityRow> coercivity_probe(const AnettRegularizer& reg, int n_dirs, const std::vector<double>& scales,
                                            std::uint64_t seed) {
    if (n_dirs < 1) throw DomainError("coercivity_probe: need at least one direction");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0) || (i > 0 && !(scales[i] > scales[i - 1]))) {
            throw DomainError("coercivity_probe: scales must be positive and increasing");
        }
    }
    std::mt19937_64 rng(seed);
    std::vector<CoercivityRow> rows;
    for (int d = 0; d < n_dirs; ++d) {
        const Vector dir = random_unit(reg.codec().signal_dim(), rng);
        for (double t : scales) {
            const Vector x = t * dir;
            const CoefficientVector xi = reg.codec().encode(x);
            const Vector nx = reg.codec().decode(xi.values);
            CoercivityRow row;
            row.direction = d;
            row.scale = t;
            row.regularizer = phi_eval(reg.phi(), xi.values) + 0.5 * reg.c() * (x - nx).squaredNorm();
            row.norm_sq = x.squaredNorm();
            row.bound = 4.0 / reg.c() * row.regularizer + 2.0 * nx.squaredNorm();
            row.holds = row.norm_sq <= row.bound * (1.0 + 1e-9);
            rows.push_back(row);
        }
    }
    return rows;
}

CounterexampleReport counterexample_demo(double alpha, const std::vector<double>& deltas) {
    if (!(alpha > 0.0)) throw DomainError("counterexample_demo: alpha must be positive");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0) || (i > 0 && !(deltas[i] < deltas[i - 1]))) {
            throw DomainError("counterexample_demo: deltas must be positive and strictly decreasing");
        }
    }
    const SimilaritySpec unstable = SimilaritySpec::unstable();
    // Any unit vector serves as y; the minimizers lie on its span.
    Vector y(3);
    y << 2.0, -1.0, 2.0;
    y /= y.norm();

    auto numerical_norm = [&](const Vector& data) {
        auto f = [&](double t) {
            const Vector x = t * y;
            return sim_eval(unstable, x, data) + alpha * x.squaredNorm();
        };
        return golden_section_minimize(f, 0.0, 2.0 * data.norm());
    };

    CounterexampleReport rep;
    rep.alpha = alpha;
    rep.deltas = deltas;
    rep.perturbed_limit = 1.0 / (1.0 + alpha / 2.0);
    rep.unperturbed_norm = 1.0 / (1.0 + alpha);
    rep.gap = std::abs(rep.perturbed_limit - rep.unperturbed_norm);
    rep.numerical_unperturbed_norm = numerical_norm(y);
    rep.max_numerical_error = std::abs(rep.numerical_unperturbed_norm - rep.unperturbed_norm);
    for (double delta : deltas) {
        const double closed = (1.0 + delta) * rep.perturbed_limit;
        const double numeric = numerical_norm((1.0 + delta) * y);
        rep.perturbed_norms.push_back(closed);
        rep.numerical_perturbed_norms.push_back(numeric);
        rep.max_numerical_error = std::max(rep.max_numerical_error, std::abs(numeric - closed));
    }
    return rep;
}

Matrix quadratic_regularizer_hessian(const LinearCodec& codec, const PhiSpec& phi, double c) {
    require_quadratic(phi);
    const Matrix& e = codec.encoder();
    Vector w = Vector::Ones(e.rows());
    if (phi.weights.size() != 0) {
        detail::require_same_size(phi.weights.size(), e.rows(), "quadratic_regularizer_hessian");
        w = phi.weights;
    }
    const Matrix residual_map = Matrix::Identity(e.cols(), e.cols()) - codec.decoder() * e;
    return 2.0 * e.transpose() * w.asDiagonal() * e + c * residual_map.transpose() * residual_map;
}

Vector quadratic_minimizer(const Matrix& k, const LinearCodec& codec, const PhiSpec& phi, double c, double alpha,
                           const Vector& y) {
    const Matrix h = 2.0 * k.transpose() * k + alpha * quadratic_regularizer_hessian(codec, phi, c);
    return h.ldlt().solve(2.0 * k.transpose() * y);
}

ConvexSuite make_convex_suite() {
    constexpr int n = 16;
    constexpr Eigen::Index pixels = n * n;
    auto index = [](int r, int c) { return static_cast<Eigen::Index>(r) * n + c; };

    // Forward differences with zero boundary rows.
    Matrix dx = Matrix::Zero(pixels, pixels);
    Matrix dy = Matrix::Zero(pixels, pixels);
    Matrix blur = Matrix::Zero(pixels, pixels);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (c + 1 < n) {
                dx(index(r, c), index(r, c + 1)) = 1.0;
                dx(index(r, c), index(r, c)) = -1.0;
            }
            if (r + 1 < n) {
                dy(index(r, c), index(r + 1, c)) = 1.0;
                dy(index(r, c), index(r, c)) = -1.0;
            }
            int count = 0;
            for (int a = std::max(0, r - 1); a <= std::min(n - 1, r + 1); ++a) {
                for (int b = std::max(0, c - 1); b <= std::min(n - 1, c + 1); ++b) ++count;
            }
            for (int a = std::max(0, r - 1); a <= std::min(n - 1, r + 1); ++a) {
                for (int b = std::max(0, c - 1); b <= std::min(n - 1, c + 1); ++b) {
                    blur(index(r, c), index(a, b)) = 1.0 / count;
                }
            }
        }
    }
    Matrix encoder(3 * pixels, pixels);
    encoder << Matrix::Identity(pixels, pixels), dx, dy;
    Matrix decoder = Matrix::Zero(pixels, 3 * pixels);
    decoder.leftCols(pixels) = blur;

    ConvexSuite suite;
    auto op = std::make_shared<RadonOperator>(n, ScanGeometry(8, 24));
    suite.op = op;
    PhiSpec phi;
    phi.q = 2.0;
    suite.reg = std::make_shared<AnettRegularizer>(std::make_shared<LinearCodec>(std::move(encoder), std::move(decoder)),
                                                   phi, 1.0);
    suite.config.alpha = 1e-2;
    suite.config.c = 1.0;
    suite.config.similarity = SimilaritySpec::l2sq();
    suite.config.phi = phi;
    suite.config.n_iter = 200;
    suite.config.inner_tol = 0.0;
    // Step below 1 / L for the x-subproblem: L <= 2 ||K||^2 + alpha c ||I - N||^2 + rho ||E||^2.
    const double k_norm = operator_norm_estimate(*op, 100, 1);
    const double e_norm_sq = 1.0 + 8.0 + 1.0;
    const double rho = suite.config.effective_rho();
    suite.config.gamma = 0.9 / (2.0 * k_norm * k_norm + 4.0 * suite.config.alpha + rho * e_norm_sq);
    suite.truth = shepp_logan(n);
    suite.y = op->apply(suite.truth.pixels);
    return suite;
}

StabilityReport stability_experiment(const LinearOperator& op, const AnettRegularizer& reg, const AnettConfig& config,
                                     const Vector& y, const std::vector<double>& levels, std::uint64_t seed) {
    if (levels.size() < 2) throw DomainError("stability_experiment: need at least two levels");
    std::mt19937_64 rng(seed);
    const Vector direction = random_unit(y.size(), rng);

    const auto* linear = dynamic_cast<const LinearCodec*>(&reg.codec());
    const bool have_oracle = linear && reg.phi().q == 2.0 && reg.phi().mu == 0.0;
    Matrix k;
    Vector oracle_reference;
    if (have_oracle) {
        k = assemble_matrix(op);
        oracle_reference = quadratic_minimizer(k, *linear, reg.phi(), reg.c(), config.alpha, y);
    }

    const Vector reference = admm_solve(op, y, reg, config).x;
    const double r_reference = reg.value(reference);

    StabilityReport rep;
    rep.levels = levels;
    for (double eps : levels) {
        const Vector y_eps = y + eps * direction;
        const Vector x = eps == 0.0 ? reference : admm_solve(op, y_eps, reg, config).x;
        rep.distances.push_back((x - reference).norm());
        rep.regularizer_gaps.push_back(std::abs(reg.value(x) - r_reference));
        if (have_oracle) {
            const Vector xo = quadratic_minimizer(k, *linear, reg.phi(), reg.c(), config.alpha, y_eps);
            rep.oracle_distances.push_back((xo - oracle_reference).norm());
        }
    }
    rep.spearman = spearman_correlation(rep.levels, rep.distances);
    return rep;
}

RateInstance make_rate_instance(int n, int rank, int code_dim, double min_singular_value, std::uint64_t seed) {
    if (rank < 1 || rank > n || code_dim < n) {
        throw DimensionError("make_rate_instance: need 1 <= rank <= n <= code_dim");
    }
    if (!(min_singular_value > 0.0 && min_singular_value <= 1.0)) {
        throw DomainError("make_rate_instance: smallest singular value must lie in (0, 1]");
    }
    std::mt19937_64 rng(seed);
    const Matrix u = random_orthonormal_columns(rank, rank, rng);
    const Matrix v = random_orthonormal_columns(n, rank, rng);
    Vector sigma(rank);
    for (int i = 0; i < rank; ++i) {
        const double t = rank == 1 ? 0.0 : static_cast<double>(i) / (rank - 1);
        sigma[i] = std::pow(min_singular_value, t);
    }

    RateInstance inst;
    inst.k = u * sigma.asDiagonal() * v.transpose();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    inst.codec = std::make_shared<LinearCodec>(scale * random_gaussian(code_dim, n, rng),
                                               scale * random_gaussian(n, code_dim, rng));
    inst.phi.q = 2.0;
    inst.c = 1.0;
    const Matrix hessian = quadratic_regularizer_hessian(*inst.codec, inst.phi, inst.c);
    // Source condition grad R(x) = K^T w fixes a ground truth with a unit source element.
    const Vector w = random_unit(rank, rng);
    const Vector x_source = hessian.ldlt().solve(inst.k.transpose() * w);
    inst.y = inst.k * x_source;
    inst.x_dagger = r_minimizing_solution(inst.k, hessian, inst.y);
    inst.noise = random_unit(rank, rng);
    return inst;
}

Vector r_minimizing_solution(const Matrix& k, const Matrix& hessian, const Vector& y) {
    const Eigen::Index n = k.cols();
    const Eigen::Index m = k.rows();
    detail::require_same_size(y.size(), m, "r_minimizing_solution");
    // [H K^T; K 0] [x; lambda] = [0; y]
    Matrix kkt = Matrix::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = hessian;
    kkt.topRightCorner(n, m) = k.transpose();
    kkt.bottomLeftCorner(m, n) = k;
    Vector rhs = Vector::Zero(n + m);
    rhs.tail(m) = y;
    const Vector sol = kkt.fullPivLu().solve(rhs);
    return sol.head(n);
}

std::vector<double> log_grid(double hi, double lo, int count) {
    if (count < 2 || !(hi > lo) || !(lo > 0.0)) throw DomainError("log_grid: need count >= 2 and hi > lo > 0");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        out.push_back(std::exp(std::log(hi) + t * (std::log(lo) - std::log(hi))));
    }
    return out;
}

RateInstance default_rate_instance() {
    return make_rate_instance(16, 12, 24, 1e-2, 0);
}

std::vector<double> default_rate_deltas() {
    return log_grid(1e-1, 1e-4, 8);
}

std::vector<double> default_stability_levels() {
    return {1e-1, 1e-2, 1e-3, 1e-4};
}

RateReport rate_experiment(const RateInstance& inst, const std::vector<double>& deltas, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("rate_experiment: kappa must be positive");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] >= 0.0) || (i > 0 && !(deltas[i] < deltas[i - 1]))) {
            throw DomainError("rate_experiment: deltas must be nonnegative and strictly decreasing");
        }
    }
    const AnettRegularizer reg(inst.codec, inst.phi, inst.c);
    const Matrix hessian = quadratic_regularizer_hessian(*inst.codec, inst.phi, inst.c);

    RateReport rep;
    std::vector<double> fit_delta, fit_bregman;
    for (double delta : deltas) {
        RateRow row;
        row.delta = delta;
        row.alpha = kappa * delta;
        Vector x;
        if (delta == 0.0) {
            // alpha -> 0 limit with exact data.
            x = r_minimizing_solution(inst.k, hessian, inst.y);
        } else {
            x = quadratic_minimizer(inst.k, *inst.codec, inst.phi, inst.c, row.alpha, inst.y + delta * inst.noise);
        }
        row.converged = all_finite(x);
        row.bregman = row.converged ? bregman_distance(reg, x, inst.x_dagger) : 0.0;
        if (row.converged && delta > 0.0 && row.bregman > 0.0) {
            fit_delta.push_back(delta);
            fit_bregman.push_back(row.bregman);
        }
        rep.rows.push_back(row);
    }
    if (fit_delta.size() >= 2) rep.fit = loglog_fit(fit_delta, fit_bregman);

    // Calibrate C on the largest positive delta: bound(delta_max) = Delta_R(delta_max), larger root.
    const auto first = std::find_if(rep.rows.begin(), rep.rows.end(), [](const RateRow& r) { return r.delta > 0.0; });
    if (first != rep.rows.end()) {
        const double d = first->delta, a = first->alpha;
        rep.bound_constant = (std::sqrt(2.0) * d + std::sqrt(2.0 * a * first->bregman)) / a;
        const double cst = rep.bound_constant;
        rep.bound_holds = true;
        for (auto& row : rep.rows) {
            if (row.delta == 0.0) continue;
            row.bound = row.delta * row.delta / row.alpha - std::sqrt(2.0) * cst * row.delta +
                        cst * cst * row.alpha / 2.0;
            if (row.bregman > row.bound * (1.0 + 1e-9)) rep.bound_holds = false;
        }
    }
    return rep;
}

} // namespace anett
