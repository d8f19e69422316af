#pragma once

// Dataset loaders and the synthetic spheres generator.
//
// Every sample is one lateral slice of the samples tensor. Labels are
// 1-based class indices; the loaders convert the 0-based file encodings.
//
// MNIST (IDX format, all integers big-endian):
//   images  u32 magic 0x00000803, u32 count, u32 rows, u32 cols, then
//           count*rows*cols unsigned bytes, row-major per image
//   labels  u32 magic 0x00000801, u32 count, then count bytes 0..9
//
// CIFAR-10 binary: a file is a sequence of 3073-byte records, one label
// byte 0..9 followed by 3072 pixel bytes: the 32x32 red plane, then green,
// then blue, each row-major.
//
// Orientation of an image with r rows and c columns per channel:
//   Lateral     (channels*r) x m x c, image rows along mode 1 with the
//               channel planes stacked on top of each other, columns
//               along mode 3
//   Transposed  (channels*c) x m x r
//   Vector      (channels*r*c) x m x 1, row-major within each plane

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnn/tensor3.hpp"

namespace tnn {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class BadMagic : public DataError {
public:
    using DataError::DataError;
};
class TruncatedFile : public DataError {
public:
    using DataError::DataError;
};
class CountMismatch : public DataError {
public:
    using DataError::DataError;
};
class TruncatedRecord : public DataError {
public:
    using DataError::DataError;
};
class LabelOutOfRange : public DataError {
public:
    using DataError::DataError;
};

enum class Orientation { Lateral, Transposed, Vector };
Orientation parse_orientation(std::string_view s);
std::string to_string(Orientation o);

struct NormalizationSpec {
    std::vector<double> means;
    std::vector<double> stds;
};

NormalizationSpec mnist_normalization(double std = 0.3081);
NormalizationSpec cifar10_normalization();

struct Dataset {
    Tensor3 samples;
    std::vector<int> labels;
    int classes = 0;
    std::string split;
    Index size() const { return static_cast<Index>(labels.size()); }
};

struct ImageOptions {
    Orientation orientation = Orientation::Lateral;
    // Keep only the first `limit` samples.
    std::optional<Index> limit;
    // Pixels are scaled to [0, 1], then standardized per channel; unset
    // means the dataset's usual statistics.
    std::optional<NormalizationSpec> normalization;
};

Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                   const ImageOptions& options = {});
Dataset load_cifar10(const std::vector<std::filesystem::path>& batches, const ImageOptions& options = {});

// Inverse of the loader's pixel mapping: byte values 0..255 as doubles,
// one image per row in file order.
std::vector<std::vector<double>> denormalize(const Dataset& d, Index channels, Index rows, Index cols,
                                             const ImageOptions& options);

// Standard file locations inside a dataset directory.
struct MnistFiles {
    std::filesystem::path images, labels;
};
MnistFiles mnist_files(const std::filesystem::path& dir, bool train);
std::vector<std::filesystem::path> cifar10_files(const std::filesystem::path& dir, bool train);

// Spheres: points in R^3 with independent N(0, 3^2) coordinates.
// Class 1 for radius < 3.5, class 2 for radius < 5.5, class 3 otherwise.
// Samples are 1 x m x 3, each point stored as a tube.
int sphere_class(double x, double y, double z);

struct SphereCounts {
    Index inner = 317;
    Index middle = 466;
    Index outer = 417;
};

// Draws points in order and rejects any whose class is already full,
// until every class holds its requested count.
Dataset gen_spheres(std::uint64_t seed, SphereCounts counts = {});
// m points with no rejection.
Dataset gen_spheres_raw(std::uint64_t seed, Index m);

struct Batch {
    Tensor3 samples;
    std::vector<int> labels;
};

// Shuffled partition of 0..m-1 into consecutive groups of `size`; the
// last group may be short.
std::vector<std::vector<Index>> batch_indices(Index m, Index size, std::uint64_t seed);
Batch make_batch(const Dataset& d, std::span<const Index> indices);
std::vector<Batch> batches(const Dataset& d, Index size, std::uint64_t seed);

}  // namespace tnn
