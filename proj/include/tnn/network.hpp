#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tnn/layers.hpp"
#include "tnn/loss.hpp"
#include "tnn/transform.hpp"

namespace tnn {

enum class BlockKind { TLinear, Residual, Leapfrog };

// Weight initialization.
//  TransformGaussian  every transform-domain slice is dense Gaussian with
//                     std 1/sqrt(ell_in), mapped back to the spatial domain.
//                     For the circulant algebra the transform domain is the
//                     unnormalized DFT (eigenvalues of bcirc), so spatial
//                     entries get std 1/sqrt(ell_in * n).
//  NormalizedTube     standard normal entries scaled to unit Frobenius norm.
// Biases start at zero in both schemes.
enum class InitScheme { TransformGaussian, NormalizedTube };

struct BlockSpec {
    BlockKind kind = BlockKind::Leapfrog;
    // Output width of a t-linear block; residual and leapfrog keep their width.
    Index width = 0;
    // Leapfrog: steps in the block. Residual: consecutive residual layers.
    Index steps = 1;
    double h = 0.1;
    Activation activation = Activation::Tanh;
    bool shared = false;
};

struct NetworkSpec {
    Index input_width = 1;
    Index n = 1;
    Index classes = 2;
    TransformKind transform = TransformKind::Orthogonal;
    ProductPath path = ProductPath::Direct;
    std::vector<BlockSpec> blocks;
    bool classifier_bias = false;
    InitScheme init = InitScheme::TransformGaussian;
    // Multiplies the TransformGaussian standard deviation.
    double init_scale = 1.0;
};

// Orthogonal kind means the orthonormal DCT.
Transform make_transform(TransformKind kind, Index n, ProductPath path = ProductPath::Direct);
Transform make_transform(const NetworkSpec& spec);

// Learnable scalars: every weight and bias, plus the classifier.
Index param_count(const NetworkSpec& spec);
// Weights only, classifier included.
Index weight_count(const NetworkSpec& spec);
// Width after the last block.
Index feature_width(const NetworkSpec& spec);

std::string to_string(BlockKind k);
BlockKind parse_block_kind(std::string_view name);

using Block = std::variant<TLinearLayer, ResidualLayer, LeapfrogBlock>;

struct ParameterRef {
    std::string name;
    Tensor3* tensor;
};

// W_N * features (+ b_N), the classifier pre-softmax output.
Tensor3 classifier_output(const Tensor3& classifier, const std::optional<Tensor3>& bias, const Tensor3& features,
                          const Transform& t);

// Parameter indices of weights that form a layer-to-layer sequence: the
// steps of an unshared leapfrog block, or a run of residual layers with a
// common step size h.
struct WeightChain {
    std::vector<std::size_t> params;
    double h = 0.0;
};

class Network {
public:
    Network(NetworkSpec spec, std::vector<Block> blocks, Tensor3 classifier, std::optional<Tensor3> classifier_bias);
    static Network initialize(const NetworkSpec& spec, std::uint64_t seed);

    const NetworkSpec& spec() const { return spec_; }
    const Transform& transform() const { return transform_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    std::vector<Block>& blocks() { return blocks_; }
    const Tensor3& classifier() const { return classifier_; }
    const std::optional<Tensor3>& classifier_bias() const { return classifier_bias_; }

    // Returns the classifier output X = W_N * A_N (+ b_N), p x m x n.
    Tensor3 forward(const Tensor3& a0);
    const Tensor3& features() const;
    // A_0 followed by the state after every layer or leapfrog step.
    std::vector<Tensor3> layer_states() const;

    // Gradients of a scalar objective given dF/dX, aligned with parameters().
    // Also leaves dF/dA_0 in input_gradient().
    std::vector<Tensor3> backward(const Tensor3& d_output);
    const Tensor3& input_gradient() const { return input_grad_; }

    std::vector<ParameterRef> parameters();
    std::vector<const Tensor3*> parameters() const;
    std::vector<std::string> parameter_names() const;
    std::vector<WeightChain> weight_chains() const;

private:
    NetworkSpec spec_;
    Transform transform_;
    std::vector<Block> blocks_;
    Tensor3 classifier_;
    std::optional<Tensor3> classifier_bias_;
    std::vector<Tensor3> inputs_;
    Tensor3 features_;
    bool has_forward_ = false;
    Tensor3 input_grad_;
};

// Column-wise class probabilities of W_N * features.
ProbabilityMatrix classify(const Tensor3& classifier, const Tensor3& features, const Transform& t);

}  // namespace tnn
