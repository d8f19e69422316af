#pragma once

// Training, evaluation, the spheres experiment and spectral diagnostics.
// Each command writes its files under the configured output directory
// and reports progress to `log`. Failures throw.
//
// train    <output>/metrics.csv, <output>/model.tnn
// spheres  <output>/<variant>/metrics.csv, <output>/<variant>/snapshots.csv,
//          <output>/summary.csv
//
// snapshots.csv columns: layer,point,label,x1,x2,x3 where layer 0 is the
// input, layer j the state after block step j, and x1..x3 the tube entries
// of the point. summary.csv columns:
// variant,kind,h,train_accuracy,max_norm_ratio,seconds.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnn/config.hpp"
#include "tnn/data.hpp"
#include "tnn/metrics.hpp"
#include "tnn/network.hpp"
#include "tnn/optim.hpp"

namespace tnn {

struct EvalResult {
    double loss = 0.0;  // per sample
    double accuracy = 0.0;
    double safeguard_residual = 0.0;
    Index correct = 0;
    Index total = 0;
};

EvalResult evaluate(Network& net, const Dataset& d, Index batch_size, LossKind loss = LossKind::CrossEntropy);

// max ||W_j - W_{j-1}||_F over every weight chain of the network.
double max_weight_step(const Network& net);

struct Splits {
    Dataset train;
    Dataset test;
};
Splits load_splits(const DataConfig& c);
Dataset load_test_split(const DataConfig& c, const std::filesystem::path& dir);

// One shuffled pass over the data with SGD. Returns the train metrics of the
// epoch: loss and accuracy are measured on each batch before its update.
EvalResult train_epoch(Network& net, Sgd& sgd, const Dataset& d, const OptimConfig& o, std::uint64_t shuffle_seed);

struct TrainSummary {
    std::vector<MetricsRow> rows;
    std::filesystem::path metrics;
    std::filesystem::path checkpoint;
};

TrainSummary cmd_train(const RunConfig& c, std::ostream& log);
EvalResult cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset, std::ostream& log);

struct SpheresResult {
    std::string name;
    SpheresVariant variant;
    double train_accuracy = 0.0;
    double max_norm_ratio = 0.0;
    double seconds = 0.0;
    std::vector<MetricsRow> rows;
};

NetworkSpec spheres_spec(const RunConfig& c, const SpheresVariant& v);
// ||a_N|| / ||a_0|| per point, a_N the last block state.
std::vector<double> norm_ratios(const Tensor3& a0, const Tensor3& aN);
SpheresResult run_spheres_variant(const RunConfig& c, const SpheresVariant& v, const Dataset& data,
                                  const std::optional<std::filesystem::path>& dir, std::ostream& log);
std::vector<SpheresResult> cmd_spheres(const RunConfig& c, std::ostream& log);

struct SpectrumRow {
    std::string parameter;
    std::string system;  // bcirc or antisymmetric
    double max_real = 0.0;
    double max_abs_real = 0.0;
    bool skipped = false;
};

std::vector<SpectrumRow> diagnose(const Network& net);
std::vector<SpectrumRow> cmd_diagnose(const std::filesystem::path& checkpoint, const std::filesystem::path& csv,
                                      std::ostream& log);

}  // namespace tnn
