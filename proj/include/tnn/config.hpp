#pragma once

// Run configuration files.
//
// Plain text, one `key = value` per line, grouped under `[section]`
// headers. `#` starts a comment. Unknown sections or keys are errors so a
// typo never silently falls back to a default.
//
//   [run]      seed, output (directory for metrics and checkpoint)
//   [data]     dataset (mnist | cifar10 | spheres), root (directory, resolved
//              against the data root when relative), orientation, train_limit,
//              test_limit, mnist_std
//   [model]    transform (dct | circulant | identity), product (direct | fourier),
//              blocks, h, activation, shared, classifier_bias,
//              init (gaussian | normalized), init_scale
//   [optim]    lr, momentum, smoothness, batch_size, eval_batch_size, epochs,
//              reduction (sum | mean), loss (cross_entropy | least_squares)
//   [spheres]  counts, depth, activation, variants, snapshots
//
// `blocks` is a comma-separated list of kind[:count][@width], e.g.
// `leapfrog:4` or `tlinear@64, residual:3`. A t-linear entry needs a width;
// count means leapfrog steps or consecutive residual layers.
//
// `variants` lists spheres runs as kind:h, e.g. `leapfrog:1, residual:0.5`.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnn/data.hpp"
#include "tnn/loss.hpp"
#include "tnn/network.hpp"

namespace tnn {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using IniSections = std::map<std::string, std::map<std::string, std::string>>;
IniSections parse_ini(std::string_view text);

enum class DatasetKind { Mnist, Cifar10, Spheres };
DatasetKind parse_dataset_kind(std::string_view s);
std::string to_string(DatasetKind k);

enum class LossKind { CrossEntropy, LeastSquares };

struct DataConfig {
    DatasetKind dataset = DatasetKind::Mnist;
    std::filesystem::path root;
    Orientation orientation = Orientation::Lateral;
    std::optional<Index> train_limit;
    std::optional<Index> test_limit;
    double mnist_std = 0.3081;
};

struct OptimConfig {
    double lr = 0.1;
    double momentum = 0.9;
    double smoothness = 0.0;
    Index batch_size = 100;
    Index eval_batch_size = 1000;
    Index epochs = 5;
    Reduction reduction = Reduction::Sum;
    LossKind loss = LossKind::CrossEntropy;
};

struct SpheresVariant {
    BlockKind kind = BlockKind::Leapfrog;
    double h = 1.0;
};

struct SpheresConfig {
    SphereCounts counts;
    Index depth = 32;
    Activation activation = Activation::Tanh;
    std::vector<SpheresVariant> variants = {{BlockKind::Leapfrog, 1.0}, {BlockKind::Residual, 0.5},
                                            {BlockKind::Residual, 0.25}};
    std::vector<Index> snapshots = {0, 12, 24, 32};
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::filesystem::path output = "run";
    DataConfig data;
    NetworkSpec model;
    OptimConfig optim;
    SpheresConfig spheres;
};

// Parses and validates; input_width, n and classes of the model are
// derived from the dataset and orientation.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Input geometry implied by a dataset and orientation: {ell, n}.
std::pair<Index, Index> input_shape(DatasetKind d, Orientation o);

std::vector<BlockSpec> parse_blocks(std::string_view text, double h, Activation act, bool shared);

// Directory a relative dataset root is resolved against: $TNN_DATA_ROOT,
// else "data".
std::filesystem::path data_root();
std::filesystem::path resolve_data_dir(const std::filesystem::path& p);

}  // namespace tnn
