#include "commands.hpp"

#include "anett/error.hpp"
#include "anett/solver.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace anett;
using namespace anett::cli;

int main(int argc, char** argv) {
    CLI::App app{"aNETT: augmented network Tikhonov regularization for tomography"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Write a phantom and its (noisy) sinogram as grid files");
    simulate->add_option("--config", sim.config, "Experiment config file")->required();
    simulate->add_option("--out-dir", sim.out_dir, "Output directory")->required();
    simulate->add_option("--phantom", sim.phantom, "shepp_logan or random")->check(CLI::IsMember({"shepp_logan", "random"}));
    simulate->add_option("--phantom-seed", sim.phantom_seed, "Seed of the random phantom");
    simulate->add_option("--n-angles", sim.n_angles, "Override the number of projection angles");

    TrainArgs ae_args;
    auto* train_ae = app.add_subcommand("train-ae", "Train the phi-regularized autoencoder");
    train_ae->add_option("--config", ae_args.config, "Experiment config file")->required();
    train_ae->add_option("--out", ae_args.out, "Checkpoint to write")->required();
    train_ae->add_option("--loss-csv", ae_args.loss_csv, "Per-epoch loss table");

    TrainArgs task_args;
    auto* train_task = app.add_subcommand("train-task", "Train the task-specific network on top of an autoencoder");
    train_task->add_option("--config", task_args.config, "Experiment config file")->required();
    train_task->add_option("--autoencoder", task_args.autoencoder, "Autoencoder checkpoint")->required();
    train_task->add_option("--out", task_args.out, "Checkpoint to write")->required();
    train_task->add_option("--loss-csv", task_args.loss_csv, "Per-epoch loss table");

    ReconstructArgs rec;
    auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct an image from a sinogram");
    reconstruct->add_option("--config", rec.config, "Experiment config file")->required();
    reconstruct->add_option("--method", rec.method, "fbp or anett")->check(CLI::IsMember({"fbp", "anett"}));
    reconstruct->add_option("--sinogram", rec.sinogram, "Sinogram grid file")->required();
    reconstruct->add_option("--out", rec.out, "Image grid file to write")->required();
    reconstruct->add_option("--png", rec.png, "Windowed 8-bit PNG to write");
    reconstruct->add_option("--trace", rec.trace, "Solver trace CSV (anett only)");
    reconstruct->add_option("--autoencoder", rec.autoencoder, "Autoencoder checkpoint (overrides paths.autoencoder)");
    reconstruct->add_option("--task", rec.task, "Task network checkpoint (overrides paths.task)");
    reconstruct->add_option("--n-angles", rec.n_angles, "Override the number of projection angles");

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "PSNR table of reconstructions against references");
    evaluate->add_option("--reference", eval.reference, "Reference grid file, or a directory of same-named files")->required();
    evaluate->add_option("--recon-dir", eval.recon_dir, "Directory of reconstructed grid files")->required();
    evaluate->add_option("--out", eval.out, "Metrics CSV to write")->required();

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "Run the theory verification suites");
    verify->add_option("--suite", ver.suite, "coercivity, counterexample, stability, rate or all")
        ->check(CLI::IsMember({"coercivity", "counterexample", "stability", "rate", "all"}));
    verify->add_option("--out-dir", ver.out_dir, "Directory for CSV reports");
    verify->add_option("--config", ver.config, "Experiment config (coercivity suite)");
    verify->add_option("--autoencoder", ver.autoencoder, "Autoencoder checkpoint (coercivity suite)");
    verify->add_option("--alpha", ver.alpha, "Regularization weight of the counterexample");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*train_ae) return run_train_ae(ae_args);
        if (*train_task) return run_train_task(task_args);
        if (*reconstruct) return run_reconstruct(rec);
        if (*evaluate) return run_evaluate(eval);
        if (*verify) return run_verify(ver);
    } catch (const MissingFileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_missing_file;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DimensionError& e) {
        std::cerr << "shape mismatch: " << e.what() << '\n';
        return exit_shape_mismatch;
    } catch (const DivergedError& e) {
        std::cerr << "diverged: " << e.what() << " after " << e.trace().records.size() << " iterations\n";
        return exit_diverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_failure;
}
