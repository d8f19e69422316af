#pragma once

// Checkpoint files: a flat list of named tensors, all integers and reals
// little-endian.
//
//   4 bytes   magic "TNN1"
//   u32       tensor count
//   per tensor:
//     u32     name length, then the name bytes (no terminator)
//     u64 x3  ell, m, n
//     f64     ell*m*n values in storage order, offset (i*m + j)*n + k
//
// A network checkpoint holds every entry of Network::parameters() under
// its parameter name plus two 1 x 1 x k descriptor tensors:
//
//   meta.spec  version 1, input_width, n, classes, transform
//              (0 circulant, 1 dct, 2 identity), product path (0 direct,
//              1 fourier), classifier_bias, init (0 gaussian, 1 normalized),
//              block count, then per block: kind (0 tlinear, 1 residual,
//              2 leapfrog), width, steps, h, activation (0 tanh, 1 relu,
//              2 identity), shared
//   meta.data  dataset (0 mnist, 1 cifar10, 2 spheres), orientation
//              (0 lateral, 1 transposed, 2 vector), test_limit (-1 for all),
//              mnist_std, eval_batch_size

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnn/config.hpp"
#include "tnn/network.hpp"

namespace tnn {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NamedTensor {
    std::string name;
    Tensor3 value;
};

void write_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensors(const std::filesystem::path& path);

Tensor3 encode_spec(const NetworkSpec& spec);
NetworkSpec decode_spec(const Tensor3& t);

void save_checkpoint(const std::filesystem::path& path, const Network& net, const DataConfig& data,
                     Index eval_batch_size);

struct LoadedCheckpoint {
    Network network;
    DataConfig data;
    Index eval_batch_size = 1000;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tnn
