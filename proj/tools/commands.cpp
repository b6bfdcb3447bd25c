#include "commands.hpp"

#include "anett/error.hpp"
#include "anett/io.hpp"
#include "anett/network.hpp"
#include "anett/noise.hpp"
#include "anett/phantom.hpp"
#include "anett/solver.hpp"
#include "anett/theory.hpp"
#include "anett/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;

namespace anett::cli {

namespace {

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("no ") + what + " given");
    if (!fs::is_regular_file(path)) throw MissingFileError(std::string(what) + " '" + path + "' does not exist");
}

ExperimentConfig load_config(const std::string& path) {
    require_file(path, "config file");
    return load_experiment_config(path);
}

void ensure_directory(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << std::setprecision(17);
    return f;
}

void write_loss_csv(const std::string& path, const TrainReport& rep) {
    if (path.empty()) return;
    auto f = open_csv(path);
    f << "epoch,train_loss,validation_loss\n";
    f << 0 << ',' << rep.initial_loss << ",\n";
    for (std::size_t e = 0; e < rep.train_loss.size(); ++e) {
        f << e + 1 << ',' << rep.train_loss[e] << ',' << rep.validation_loss[e] << '\n';
    }
}

void print_epoch(const char* tag, int epoch, double train, double val) {
    std::cout << tag << " epoch " << epoch + 1 << " train " << train << " validation " << val << '\n';
}

std::shared_ptr<const Autoencoder> load_autoencoder(const std::string& path, int image_size) {
    require_file(path, "autoencoder checkpoint");
    auto ae = std::make_shared<const Autoencoder>(Autoencoder::from_params(load_checkpoint(path)));
    if (ae->image_size() != image_size) {
        throw DimensionError("autoencoder was trained for " + std::to_string(ae->image_size()) +
                             " pixels per side, config asks for " + std::to_string(image_size));
    }
    return ae;
}

std::shared_ptr<const TaskNet> load_task(const std::string& path, int image_size) {
    require_file(path, "task network checkpoint");
    auto net = std::make_shared<const TaskNet>(TaskNet::from_params(load_checkpoint(path)));
    if (net->image_size() != image_size) {
        throw DimensionError("task network image size does not match the config");
    }
    return net;
}

std::string path_or(const std::string& given, const ExperimentConfig& cfg, const std::string& key) {
    if (!given.empty()) return given;
    const auto it = cfg.paths.find(key);
    return it == cfg.paths.end() ? std::string{} : it->second;
}

bool report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << name << ": " << (ok ? "ok" : "FAILED") << "  " << detail << '\n';
    return ok;
}

} // namespace

int run_simulate(const SimulateArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    if (args.n_angles) cfg.geometry.n_angles = *args.n_angles;
    cfg.validate();
    ensure_directory(args.out_dir);

    const Image phantom =
        args.phantom == "random" ? random_phantom(cfg.image_size, args.phantom_seed) : shepp_logan(cfg.image_size);
    const RadonOperator op(cfg.image_size, cfg.geometry, cfg.filter);
    const Sinogram clean(cfg.geometry, op.apply(phantom.pixels));
    const Sinogram noisy(cfg.geometry, cfg.noise.apply(clean.values, cfg.seed));

    write_grid(GridFile::from_image(phantom), join(args.out_dir, "phantom.grd"));
    write_grid(GridFile::from_sinogram(clean), join(args.out_dir, "sinogram_clean.grd"));
    write_grid(GridFile::from_sinogram(noisy), join(args.out_dir, "sinogram.grd"));
    write_png(phantom, join(args.out_dir, "phantom.png"), cfg.window_min, cfg.window_max);

    const Vector eta = noisy.values - clean.values;
    const double n = static_cast<double>(eta.size());
    const double std_dev = std::sqrt((eta.array() - eta.mean()).square().sum() / (n - 1.0));
    std::cout << "phantom " << cfg.image_size << "x" << cfg.image_size << ", sinogram " << cfg.geometry.n_angles << "x"
              << cfg.geometry.n_detectors << ", noise " << to_string(cfg.noise.kind) << " level " << cfg.noise.level
              << ", empirical noise std " << std_dev << ", mean(Kx) " << clean.values.mean() << '\n';
    return exit_ok;
}

int run_train_ae(const TrainArgs& args) {
    const ExperimentConfig cfg = load_config(args.config);
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    const Dataset data = make_phantom_dataset(cfg.image_size, cfg.n_phantoms, cfg.seed);
    TrainReport rep;
    const Autoencoder ae = train_autoencoder(data, tc, cfg.anett.phi, cfg.autoencoder, &rep,
                                             [](int e, double t, double v) { print_epoch("autoencoder", e, t, v); });
    save_checkpoint(ae.to_params(), args.out);
    write_loss_csv(args.loss_csv, rep);
    std::cout << "initial loss " << rep.initial_loss << ", best validation loss " << rep.best_validation_loss
              << " at epoch " << rep.best_epoch + 1 << ", corrupted fraction " << rep.artifact_fraction << '\n';
    return exit_ok;
}

int run_train_task(const TrainArgs& args) {
    const ExperimentConfig cfg = load_config(args.config);
    const auto ae = load_autoencoder(args.autoencoder, cfg.image_size);
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    const Dataset data = make_phantom_dataset(cfg.image_size, cfg.n_phantoms, cfg.seed);
    const RadonOperator op(cfg.image_size, cfg.geometry, cfg.filter);
    TrainReport rep;
    const TaskNet net = train_task_network(data, *ae, op, cfg.noise, tc, cfg.task, &rep,
                                           [](int e, double t, double v) { print_epoch("task", e, t, v); });
    save_checkpoint(net.to_params(), args.out);
    write_loss_csv(args.loss_csv, rep);
    std::cout << "initial loss " << rep.initial_loss << ", best validation loss " << rep.best_validation_loss
              << " at epoch " << rep.best_epoch + 1 << ", artifact fraction " << rep.artifact_fraction << '\n';
    return exit_ok;
}

int run_reconstruct(const ReconstructArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    if (args.n_angles) cfg.geometry.n_angles = *args.n_angles;
    cfg.validate();
    require_file(args.sinogram, "sinogram");
    const Sinogram sino = read_grid(args.sinogram).to_sinogram();
    if (!(sino.geometry == cfg.geometry)) {
        throw DimensionError("sinogram is " + std::to_string(sino.geometry.n_angles) + "x" +
                             std::to_string(sino.geometry.n_detectors) + ", config expects " +
                             std::to_string(cfg.geometry.n_angles) + "x" + std::to_string(cfg.geometry.n_detectors));
    }
    const RadonOperator op(cfg.image_size, cfg.geometry, cfg.filter);

    Image result;
    if (args.method == "fbp") {
        result = Image(cfg.image_size, op.approximate_inverse(sino.values));
    } else {
        const auto ae = load_autoencoder(path_or(args.autoencoder, cfg, "autoencoder"), cfg.image_size);
        const std::string task_path = path_or(args.task, cfg, "task");
        const auto task = task_path.empty() ? nullptr : load_task(task_path, cfg.image_size);
        const AnettRegularizer reg(std::make_shared<NetworkCodec>(ae, task), cfg.anett.phi, cfg.anett.c);
        const AdmmResult res = admm_solve(op, sino.values, reg, cfg.anett);
        if (!args.trace.empty()) res.trace.write_csv(args.trace);
        const TraceRecord& last = res.trace.records.back();
        std::cout << "objective " << last.objective << ", primal residual " << last.primal_residual << '\n';
        result = Image(cfg.image_size, res.x);
    }
    write_grid(GridFile::from_image(result), args.out);
    if (!args.png.empty()) write_png(result, args.png, cfg.window_min, cfg.window_max);
    return exit_ok;
}

int run_evaluate(const EvaluateArgs& args) {
    if (!fs::exists(args.reference)) throw MissingFileError("reference '" + args.reference + "' does not exist");
    if (!fs::is_directory(args.recon_dir)) {
        throw MissingFileError("reconstruction directory '" + args.recon_dir + "' does not exist");
    }
    const bool per_file_reference = fs::is_directory(args.reference);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.recon_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".grd") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw MissingFileError("no .grd files in '" + args.recon_dir + "'");

    auto out = open_csv(args.out);
    out << "name,psnr,psnr_normalized\n";
    std::vector<double> values, normalized;
    for (const auto& file : files) {
        const std::string ref_path = per_file_reference ? join(args.reference, file.filename().string()) : args.reference;
        require_file(ref_path, "reference");
        const Image ref = read_grid(ref_path).to_image();
        const Image rec = read_grid(file.string()).to_image();
        if (ref.size != rec.size) throw DimensionError("image sizes differ for " + file.filename().string());
        values.push_back(psnr(ref, rec));
        normalized.push_back(psnr_normalized(ref.pixels, rec.pixels));
        out << file.filename().string() << ',' << values.back() << ',' << normalized.back() << '\n';
    }
    auto mean_std = [](const std::vector<double>& v) {
        const double n = static_cast<double>(v.size());
        double mean = 0.0;
        for (double x : v) mean += x / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::pair{mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
    };
    const auto [m, s] = mean_std(values);
    const auto [mn, sn] = mean_std(normalized);
    out << "mean," << m << ',' << mn << '\n';
    out << "std," << s << ',' << sn << '\n';
    std::cout << std::fixed << std::setprecision(2) << "PSNR " << m << " +- " << s << " dB (normalized " << mn
              << " +- " << sn << " dB) over " << values.size() << " images\n";
    return exit_ok;
}

int run_verify(const VerifyArgs& args) {
    const bool all = args.suite == "all";
    const bool csv = !args.out_dir.empty();
    ensure_directory(args.out_dir);
    bool ok = true;

    if (all || args.suite == "counterexample") {
        const CounterexampleReport rep = counterexample_demo(args.alpha, log_grid(1e-1, 1e-6, 6));
        if (csv) {
            auto f = open_csv(join(args.out_dir, "counterexample.csv"));
            f << "delta,closed_form_norm,numerical_norm\n";
            for (std::size_t i = 0; i < rep.deltas.size(); ++i) {
                f << rep.deltas[i] << ',' << rep.perturbed_norms[i] << ',' << rep.numerical_perturbed_norms[i] << '\n';
            }
        }
        std::ostringstream detail;
        detail << std::setprecision(10) << "alpha " << rep.alpha << ", perturbed limit " << rep.perturbed_limit
               << ", unperturbed minimizer " << rep.unperturbed_norm << ", gap " << rep.gap
               << ", numerical error " << rep.max_numerical_error;
        ok &= report("counterexample", rep.max_numerical_error < 1e-6, detail.str());
    }

    if (all || args.suite == "rate") {
        const RateReport rep = rate_experiment(default_rate_instance(), default_rate_deltas());
        if (csv) {
            auto f = open_csv(join(args.out_dir, "rate.csv"));
            f << "delta,alpha,bregman,bound\n";
            for (const auto& r : rep.rows) f << r.delta << ',' << r.alpha << ',' << r.bregman << ',' << r.bound << '\n';
        }
        std::ostringstream detail;
        detail << "slope " << rep.fit.slope << ", intercept " << rep.fit.intercept << ", R^2 " << rep.fit.r_squared;
        ok &= report("rate", rep.fit.slope >= 0.85 && rep.fit.slope <= 1.15, detail.str());
    }

    if (all || args.suite == "stability") {
        const ConvexSuite suite = make_convex_suite();
        const StabilityReport rep =
            stability_experiment(*suite.op, *suite.reg, suite.config, suite.y, default_stability_levels(), 1);
        if (csv) {
            auto f = open_csv(join(args.out_dir, "stability.csv"));
            f << "level,distance,regularizer_gap,oracle_distance\n";
            for (std::size_t i = 0; i < rep.levels.size(); ++i) {
                f << rep.levels[i] << ',' << rep.distances[i] << ',' << rep.regularizer_gaps[i] << ','
                  << (rep.oracle_distances.empty() ? 0.0 : rep.oracle_distances[i]) << '\n';
            }
        }
        std::ostringstream detail;
        detail << "spearman " << rep.spearman << ", endpoint distance " << rep.distances.back();
        ok &= report("stability", rep.spearman > 0.9 && rep.distances.back() < 1e-3, detail.str());
    }

    if (all || args.suite == "coercivity") {
        PhiSpec phi;
        double c = AnettConfig::sparse_view().c;
        int image_size = 64;
        if (!args.config.empty()) {
            const ExperimentConfig cfg = load_config(args.config);
            phi = cfg.anett.phi;
            c = cfg.anett.c;
            image_size = cfg.image_size;
        }
        std::shared_ptr<const EncoderDecoder> codec;
        if (args.autoencoder.empty()) {
            codec = std::make_shared<IdentityCodec>(static_cast<Eigen::Index>(image_size) * image_size);
        } else {
            codec = std::make_shared<NetworkCodec>(load_autoencoder(args.autoencoder, image_size));
        }
        const AnettRegularizer reg(codec, phi, c);
        const auto rows = coercivity_probe(reg, 20, {1.0, 10.0, 100.0, 1000.0}, 1);
        if (csv) {
            auto f = open_csv(join(args.out_dir, "coercivity.csv"));
            f << "direction,scale,regularizer,norm_sq,bound,holds\n";
            for (const auto& r : rows) {
                f << r.direction << ',' << r.scale << ',' << r.regularizer << ',' << r.norm_sq << ',' << r.bound << ','
                  << (r.holds ? 1 : 0) << '\n';
            }
        }
        const auto held = std::count_if(rows.begin(), rows.end(), [](const CoercivityRow& r) { return r.holds; });
        ok &= report("coercivity", held == static_cast<long>(rows.size()),
                     std::to_string(held) + "/" + std::to_string(rows.size()) + " probes satisfy the bound");
    }
    return ok ? exit_ok : exit_failure;
}

} // namespace anett::cli
