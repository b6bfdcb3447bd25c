#include "anett/config.hpp"
#include "anett/io.hpp"
#include "anett/network.hpp"
#include "anett/noise.hpp"
#include "anett/phantom.hpp"
#include "anett/solver.hpp"
#include "anett/theory.hpp"
#include "anett/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace anett;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Runner {
public:
    explicit Runner(fs::path artifacts) : artifacts_(std::move(artifacts)) { fs::create_directories(artifacts_); }

    // Runs one criterion; the time limit is part of the verdict.
    void run(const std::string& name, double limit_seconds, const std::function<Outcome()>& body,
             double extra_seconds = 0.0) {
        const auto t0 = Clock::now();
        Outcome out;
        try {
            out = body();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count() + extra_seconds;
        const bool in_time = secs < limit_seconds;
        const bool pass = out.pass && in_time;
        std::ostringstream line;
        line << (pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(16) << name << std::right << std::fixed
             << std::setprecision(2) << std::setw(9) << secs << " s  (limit " << std::setprecision(0) << limit_seconds
             << " s)  " << out.detail;
        if (!in_time) line << "  [time limit exceeded]";
        std::cout << line.str() << std::endl;
        summary_ << line.str() << '\n';
        failures_ += pass ? 0 : 1;
    }

    fs::path file(const std::string& name) const { return artifacts_ / name; }
    int failures() const { return failures_; }

    void write_summary() const { std::ofstream(file("summary.txt")) << summary_.str(); }

private:
    fs::path artifacts_;
    std::ostringstream summary_;
    int failures_ = 0;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Relative error of <grad, d> against a central difference of f along d.
double probe(const std::function<double(const Vector&)>& f, const Vector& x, const Vector& grad, const Vector& d) {
    const double h = 1e-5;
    const double fd = (f(x + h * d) - f(x - h * d)) / (2.0 * h);
    return relative_error(fd, grad.dot(d));
}

// Same for a function of all parameter blocks of a model.
template <typename Model>
double parameter_probe(const Model& model, const std::function<double(const Model&)>& loss,
                       const std::vector<const Vector*>& grads, std::mt19937_64& rng) {
    Model copy = model;
    std::vector<Vector> dirs;
    double analytic = 0.0;
    const auto params = copy.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        dirs.push_back(random_vector(params[i]->size(), rng));
        analytic += grads[i]->dot(dirs.back());
    }
    const double h = 1e-6;
    auto shifted = [&](double s) {
        Model m = model;
        auto p = m.parameters();
        for (std::size_t i = 0; i < p.size(); ++i) *p[i] += s * dirs[i];
        return loss(m);
    };
    return relative_error((shifted(h) - shifted(-h)) / (2.0 * h), analytic);
}

Vector soft_threshold(const Vector& y, double t) {
    Vector z(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double a = std::abs(y[i]) - t;
        z[i] = a > 0.0 ? std::copysign(a, y[i]) : 0.0;
    }
    return z;
}

Outcome counterexample() {
    const CounterexampleReport rep = counterexample_demo(1.0, log_grid(1e-1, 1e-6, 6));
    const double e_limit = std::abs(rep.perturbed_limit - 2.0 / 3.0);
    const double e_unperturbed = std::abs(rep.unperturbed_norm - 0.5);
    const bool pass = e_limit < 1e-6 && e_unperturbed < 1e-6 && rep.max_numerical_error < 1e-6;
    return {pass, "limit " + fmt(rep.perturbed_limit, 10) + ", unperturbed " + fmt(rep.unperturbed_norm, 10) +
                      ", gap " + fmt(rep.gap, 10) + ", numerical error " + fmt(rep.max_numerical_error, 3)};
}

Outcome convergence_rate(const Runner& runner) {
    const RateReport rep = rate_experiment(default_rate_instance(), default_rate_deltas());
    std::ofstream f(runner.file("rate.csv"));
    f << std::setprecision(17) << "delta,alpha,bregman,bound\n";
    for (const auto& r : rep.rows) f << r.delta << ',' << r.alpha << ',' << r.bregman << ',' << r.bound << '\n';
    const bool pass = rep.fit.slope >= 0.85 && rep.fit.slope <= 1.15;
    return {pass, "slope " + fmt(rep.fit.slope) + " (R^2 " + fmt(rep.fit.r_squared) + ") over " +
                      std::to_string(rep.rows.size()) + " noise levels"};
}

Outcome adjoint() {
    const RadonOperator op(32, ScanGeometry(20, 48));
    const double err = adjoint_test(op, 20, 2024);
    return {err < 1e-10, "max relative discrepancy " + fmt(err, 3)};
}

Outcome prox_oracle() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> entry(-3.0, 3.0), tau_dist(0.05, 1.5);
    double worst = 0.0;
    const int grid = 1000000;
    for (int trial = 0; trial < 100; ++trial) {
        const double xi = entry(rng), tau = tau_dist(rng);
        Vector v(1);
        v << xi;
        const double closed = prox_phi(PhiSpec{1.0, {}, 0.0}, v, tau)[0];
        const double lo = -std::abs(xi) - 1.0, hi = std::abs(xi) + 1.0;
        double best = 0.0, best_val = 0.5 * xi * xi;
        for (int i = 0; i <= grid; ++i) {
            const double z = lo + (hi - lo) * i / grid;
            const double val = tau * std::abs(z) + 0.5 * (z - xi) * (z - xi);
            if (val < best_val) {
                best_val = val;
                best = z;
            }
        }
        worst = std::max(worst, std::abs(closed - best));
    }
    return {worst < 1e-5, "max deviation " + fmt(worst, 3) + " over 100 entries"};
}

Outcome admm_identity() {
    const Eigen::Index n = 64;
    std::mt19937_64 rng(3);
    const Vector y = random_vector(n, rng);
    const DenseOperator op = DenseOperator::identity(n);
    AnettConfig cfg;
    cfg.alpha = 0.5;
    cfg.c = 1.0;
    cfg.rho = 1.0;
    cfg.gamma = 0.2;
    cfg.n_iter = 50;
    cfg.inner_max_iters = 20;
    cfg.inner_tol = 0.0;
    cfg.phi = PhiSpec{1.0, {}, 0.0};
    const AnettRegularizer reg(std::make_shared<IdentityCodec>(n), cfg.phi, cfg.c);
    const AdmmResult res = admm_solve(op, y, reg, cfg);
    const double optimum = anett_objective(op, cfg, reg, y, soft_threshold(y, cfg.alpha / 2.0)).total;
    const double got = res.trace.records.back().objective;
    const double rel = std::abs(got - optimum) / optimum;
    return {rel <= 0.01, "objective " + fmt(got, 8) + " vs optimum " + fmt(optimum, 8) + " (relative gap " +
                             fmt(rel, 3) + ")"};
}

Outcome gradient_checks() {
    const int n = 16;
    std::mt19937_64 rng(11);
    auto ae = std::make_shared<Autoencoder>(AutoencoderArch{{4, 6, 8}, ActivationKind::softplus}, n, 1);
    auto task = std::make_shared<TaskNet>(TaskNetArch{4, ActivationKind::softplus}, n, 2);
    // Nonzero biases and a nonzero task tail.
    std::normal_distribution<double> small(0.0, 0.05);
    for (auto* p : ae->parameters()) {
        for (Eigen::Index i = 0; i < p->size(); ++i) (*p)[i] += small(rng);
    }
    for (auto* p : task->parameters()) {
        for (Eigen::Index i = 0; i < p->size(); ++i) (*p)[i] += small(rng);
    }
    const Eigen::Index pixels = static_cast<Eigen::Index>(n) * n;

    double worst = 0.0;
    const int probes = 10;
    for (int k = 0; k < probes; ++k) {
        const Vector x = random_vector(pixels, rng);
        const Tensor xt(1, n, n, x);

        // Encoder input gradient.
        const Vector wc = random_vector(ae->code_dim(), rng);
        Autoencoder::EncodeTape etape;
        ae->encode(xt, &etape);
        const Vector ge = ae->encode_backward(etape, wc, nullptr).data;
        worst = std::max(worst, probe([&](const Vector& v) { return wc.dot(ae->encode(Tensor(1, n, n, v)).values); },
                                      x, ge, random_vector(pixels, rng)));

        // Decoder input gradient.
        const Vector xi = ae->encode(xt).values;
        const Vector wi = random_vector(pixels, rng);
        Autoencoder::DecodeTape dtape;
        ae->decode(xi, &dtape);
        const Vector gd = ae->decode_backward(dtape, Tensor(1, n, n, wi), nullptr);
        worst = std::max(worst, probe([&](const Vector& v) { return wi.dot(ae->decode(v).data); }, xi, gd,
                                      random_vector(xi.size(), rng)));

        // Autoencoder parameter gradient of the training loss.
        const Image img(n, x);
        const PhiSpec phi{1.0, {}, 1e-2};
        ModelGrads ag = ae->zero_grads();
        autoencoder_sample_loss(*ae, img, false, Vector(), 0.1, phi, &ag);
        worst = std::max(worst, parameter_probe<Autoencoder>(
                                    *ae,
                                    [&](const Autoencoder& m) {
                                        return autoencoder_sample_loss(m, img, false, Vector(), 0.1, phi).total();
                                    },
                                    gradient_refs(ag), rng));

        // Task network input and parameter gradients.
        TaskNet::Tape ttape;
        const Tensor out = task->forward(xt, &ttape);
        const Vector target = random_vector(pixels, rng);
        ModelGrads tg = task->zero_grads();
        const Vector gt = task->backward(ttape, Tensor(1, n, n, out.data - target), &tg).data;
        auto task_loss = [&](const Vector& v) { return 0.5 * (task->forward(Tensor(1, n, n, v)).data - target).squaredNorm(); };
        worst = std::max(worst, probe(task_loss, x, gt, random_vector(pixels, rng)));
        worst = std::max(worst, parameter_probe<TaskNet>(
                                    *task,
                                    [&](const TaskNet& m) {
                                        return 0.5 * (m.forward(xt).data - target).squaredNorm();
                                    },
                                    gradient_refs(tg), rng));
    }

    // Full x-subproblem gradient through U o D and E.
    const RadonOperator op(n, ScanGeometry(8, 24));
    AnettConfig cfg = AnettConfig::sparse_view();
    cfg.alpha = 1e-2;
    cfg.c = 10.0;
    cfg.rho = 0.5;
    const AnettRegularizer reg(std::make_shared<NetworkCodec>(ae, task), cfg.phi, cfg.c);
    const Vector y = op.apply(shepp_logan(n).pixels);
    AdmmState state = admm_initialize(op, y, reg);
    state.xi = random_vector(state.xi.size(), rng);
    state.eta = 0.1 * random_vector(state.eta.size(), rng);
    double worst_s1 = 0.0;
    for (int k = 0; k < probes; ++k) {
        const Vector x = random_vector(pixels, rng);
        const Vector g = x_subproblem_gradient(state, op, y, reg, cfg, x);
        worst_s1 = std::max(worst_s1, probe([&](const Vector& v) { return x_subproblem_objective(state, op, y, reg, cfg, v); },
                                            x, g, random_vector(pixels, rng)));
    }
    worst = std::max(worst, worst_s1);
    return {worst < 1e-4, "max relative error " + fmt(worst, 3) + " (x-subproblem " + fmt(worst_s1, 3) + ")"};
}

struct TrainedModels {
    std::shared_ptr<const Autoencoder> autoencoder;
    std::shared_ptr<const TaskNet> task;
    double autoencoder_seconds = 0.0;
    double task_seconds = 0.0;
};

Outcome train_autoencoder_sanity(const ExperimentConfig& cfg, const Dataset& data, TrainedModels& models,
                                 const Runner& runner) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    TrainReport rep;
    const auto t0 = Clock::now();
    Autoencoder ae = train_autoencoder(data, tc, cfg.anett.phi, cfg.autoencoder, &rep);
    models.autoencoder_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    save_checkpoint(ae.to_params(), runner.file("autoencoder.bin").string());
    models.autoencoder = std::make_shared<const Autoencoder>(std::move(ae));

    std::ofstream f(runner.file("autoencoder_loss.csv"));
    f << std::setprecision(17) << "epoch,train_loss,validation_loss\n0," << rep.initial_loss << ",\n";
    for (std::size_t e = 0; e < rep.train_loss.size(); ++e) {
        f << e + 1 << ',' << rep.train_loss[e] << ',' << rep.validation_loss[e] << '\n';
    }
    int halved_at = -1;
    for (std::size_t e = 0; e < rep.train_loss.size(); ++e) {
        if (rep.train_loss[e] <= 0.5 * rep.initial_loss) {
            halved_at = static_cast<int>(e) + 1;
            break;
        }
    }
    return {halved_at > 0 && halved_at <= 100,
            "loss " + fmt(rep.initial_loss) + " -> " + fmt(rep.train_loss.back()) + ", halved at epoch " +
                std::to_string(halved_at) + " of " + std::to_string(tc.epochs)};
}

Outcome coercivity(const ExperimentConfig& cfg, const TrainedModels& models, const Runner& runner) {
    const AnettRegularizer reg(std::make_shared<NetworkCodec>(models.autoencoder), cfg.anett.phi, cfg.anett.c);
    const auto rows = coercivity_probe(reg, 20, {1.0, 10.0, 100.0, 1000.0}, 5);
    std::ofstream f(runner.file("coercivity.csv"));
    f << std::setprecision(17) << "direction,scale,regularizer,norm_sq,bound,holds\n";
    for (const auto& r : rows) {
        f << r.direction << ',' << r.scale << ',' << r.regularizer << ',' << r.norm_sq << ',' << r.bound << ','
          << (r.holds ? 1 : 0) << '\n';
    }
    const auto held = std::count_if(rows.begin(), rows.end(), [](const CoercivityRow& r) { return r.holds; });
    return {held == static_cast<long>(rows.size()) && rows.size() == 80,
            std::to_string(held) + "/" + std::to_string(rows.size()) + " probes satisfy the bound (trained autoencoder)"};
}

struct CtResult {
    double fbp = 0.0;
    double anett = 0.0;
    double anett_normalized = 0.0;
    double fbp_normalized = 0.0;
};

CtResult reconstruct_phantom(const ExperimentConfig& cfg, const TrainedModels& models, int n_angles,
                             const Runner& runner, const std::string& tag) {
    const Image truth = shepp_logan(cfg.image_size);
    const ScanGeometry geom(n_angles, cfg.geometry.n_detectors);
    const RadonOperator op(cfg.image_size, geom, cfg.filter);
    const Vector y = cfg.noise.apply(op.apply(truth.pixels), cfg.seed + 11);
    const Vector fbp = op.approximate_inverse(y);
    const AnettRegularizer reg(std::make_shared<NetworkCodec>(models.autoencoder, models.task), cfg.anett.phi,
                               cfg.anett.c);
    const AdmmResult res = admm_solve(op, y, reg, cfg.anett);
    res.trace.write_csv(runner.file("trace_" + tag + ".csv").string());
    write_png(Image(cfg.image_size, fbp), runner.file("fbp_" + tag + ".png").string(), cfg.window_min, cfg.window_max);
    write_png(Image(cfg.image_size, res.x), runner.file("anett_" + tag + ".png").string(), cfg.window_min,
              cfg.window_max);
    write_grid(GridFile::from_image(Image(cfg.image_size, res.x)), runner.file("anett_" + tag + ".grd").string());
    return {psnr(truth.pixels, fbp), psnr(truth.pixels, res.x), psnr_normalized(truth.pixels, res.x),
            psnr_normalized(truth.pixels, fbp)};
}

Outcome ct_quality(const ExperimentConfig& cfg, const Dataset& data, TrainedModels& models, const Runner& runner,
                   CtResult& result) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    const RadonOperator op(cfg.image_size, cfg.geometry, cfg.filter);
    const auto t0 = Clock::now();
    TaskNet task = train_task_network(data, *models.autoencoder, op, cfg.noise, tc, cfg.task);
    models.task_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    save_checkpoint(task.to_params(), runner.file("task.bin").string());
    models.task = std::make_shared<const TaskNet>(std::move(task));

    result = reconstruct_phantom(cfg, models, cfg.geometry.n_angles, runner, "20");
    return {result.anett >= result.fbp + 2.0,
            "PSNR FBP " + fmt(result.fbp) + " dB, aNETT " + fmt(result.anett) + " dB (normalized " +
                fmt(result.fbp_normalized) + " / " + fmt(result.anett_normalized) + " dB), training " +
                fmt(models.autoencoder_seconds + models.task_seconds, 4) + " s"};
}

Outcome universality(const ExperimentConfig& cfg, const TrainedModels& models, const Runner& runner,
                     const CtResult& sparse) {
    const CtResult dense = reconstruct_phantom(cfg, models, 80, runner, "80");
    return {dense.anett >= sparse.anett + 1.0, "aNETT PSNR at 80 angles " + fmt(dense.anett) + " dB vs " +
                                                   fmt(sparse.anett) + " dB at " +
                                                   std::to_string(cfg.geometry.n_angles) + " (FBP " +
                                                   fmt(dense.fbp) + " dB)"};
}

Outcome stability(const Runner& runner) {
    const ConvexSuite suite = make_convex_suite();
    const StabilityReport rep =
        stability_experiment(*suite.op, *suite.reg, suite.config, suite.y, default_stability_levels(), 1);
    std::ofstream f(runner.file("stability.csv"));
    f << std::setprecision(17) << "level,distance,regularizer_gap,oracle_distance\n";
    double oracle_gap = 0.0;
    for (std::size_t i = 0; i < rep.levels.size(); ++i) {
        f << rep.levels[i] << ',' << rep.distances[i] << ',' << rep.regularizer_gaps[i] << ','
          << rep.oracle_distances[i] << '\n';
        oracle_gap = std::max(oracle_gap, std::abs(rep.distances[i] - rep.oracle_distances[i]));
    }
    return {rep.spearman > 0.9 && rep.distances.back() < 1e-3,
            "spearman " + fmt(rep.spearman) + ", endpoint distance " + fmt(rep.distances.back(), 3) +
                ", max deviation from exact minimizers " + fmt(oracle_gap, 3)};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"aNETT acceptance suite"};
    std::string artifacts = "acceptance_artifacts";
    app.add_option("--artifacts", artifacts, "Directory for CSV reports, checkpoints and images");
    CLI11_PARSE(app, argc, argv);

    Runner runner(artifacts);
    runner.run("counterexample", 1.0, counterexample);
    runner.run("rate", 30.0, [&] { return convergence_rate(runner); });
    runner.run("adjoint", 5.0, adjoint);
    runner.run("prox-oracle", 10.0, prox_oracle);
    runner.run("admm-convex", 10.0, admm_identity);
    runner.run("gradients", 60.0, gradient_checks);

    const ExperimentConfig cfg = parse_experiment_config("");
    const Dataset data = make_phantom_dataset(cfg.image_size, cfg.n_phantoms, cfg.seed);
    TrainedModels models;
    runner.run("training", 20.0 * 60.0, [&] { return train_autoencoder_sanity(cfg, data, models, runner); });
    if (models.autoencoder) {
        runner.run("coercivity", 30.0, [&] { return coercivity(cfg, models, runner); });
        CtResult sparse;
        // The autoencoder training time counts toward the CT budget as well.
        runner.run("ct-quality", 30.0 * 60.0, [&] { return ct_quality(cfg, data, models, runner, sparse); },
                   models.autoencoder_seconds);
        if (models.task) {
            runner.run("universality", 10.0 * 60.0, [&] { return universality(cfg, models, runner, sparse); });
        } else {
            runner.run("universality", 10.0 * 60.0, [] { return Outcome{false, "no task network"}; });
        }
    } else {
        for (const char* name : {"coercivity", "ct-quality", "universality"}) {
            runner.run(name, 1.0, [] { return Outcome{false, "autoencoder training failed"}; });
        }
    }
    runner.run("stability", 60.0, [&] { return stability(runner); });

    runner.write_summary();
    std::cout << (runner.failures() == 0 ? "all criteria passed" : std::to_string(runner.failures()) + " failed")
              << std::endl;
    return runner.failures() == 0 ? 0 : 1;
}
