// tnn: train, evaluate and inspect tensor neural networks.
//
// Exit status: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "tnn/commands.hpp"
#include "tnn/config.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kRuntime = 2;

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Tensor neural networks over the t-product and M-product algebras.\n"
                 "Relative dataset paths resolve against $TNN_DATA_ROOT (default ./data)."};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, dataset_path, csv_path;

    auto* train = app.add_subcommand("train", "Train a network and write metrics.csv and model.tnn");
    train->add_option("--config", config_path, "Run configuration")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split of a dataset directory");
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
    eval->add_option("--dataset", dataset_path, "Dataset directory")->required();

    auto* spheres = app.add_subcommand("spheres", "Run the spheres stability experiment");
    spheres->add_option("--config", config_path, "Run configuration")->required();

    auto* diag = app.add_subcommand("diagnose", "Report weight spectra of a checkpoint");
    diag->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
    diag->add_option("--csv", csv_path, "CSV output (default: <checkpoint>.spectrum.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (train->parsed()) {
            tnn::cmd_train(tnn::load_config(config_path), std::cout);
        } else if (eval->parsed()) {
            tnn::cmd_eval(checkpoint_path, tnn::resolve_data_dir(dataset_path), std::cout);
        } else if (spheres->parsed()) {
            tnn::cmd_spheres(tnn::load_config(config_path), std::cout);
        } else if (diag->parsed()) {
            if (csv_path.empty())
                csv_path = checkpoint_path + ".spectrum.csv";
            tnn::cmd_diagnose(checkpoint_path, csv_path, std::cout);
        }
    } catch (const tnn::ConfigError& e) {
        std::cerr << "tnn: config error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "tnn: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
