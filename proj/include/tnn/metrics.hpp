#pragma once

// Per-epoch metrics CSV.
//
//   epoch,split,loss,accuracy,seconds,max_weight_step,safeguard_residual
//
// epoch               1-based epoch index
// split               train or test
// loss                mean cross-entropy (or least-squares loss) per sample
// accuracy            fraction of correct predictions, 0..1
// seconds             wall-clock time since the run started
// max_weight_step     max ||W_j - W_{j-1}||_F over every weight chain
// safeguard_residual  max |column sum - 1| of the probabilities before
//                     the safeguard, over the split
//
// Reals are printed with 17 significant digits so a row parses back to
// the same doubles.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tnn {

struct MetricsRow {
    long epoch = 0;
    std::string split;
    double loss = 0.0;
    double accuracy = 0.0;
    double seconds = 0.0;
    double max_weight_step = 0.0;
    double safeguard_residual = 0.0;
    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader =
    "epoch,split,loss,accuracy,seconds,max_weight_step,safeguard_residual";

std::string format_row(const MetricsRow& r);
MetricsRow parse_row(const std::string& line);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

// Appends complete rows; the header is written on construction.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& path);
    void append(const MetricsRow& r);

private:
    std::filesystem::path path_;
};

}  // namespace tnn
