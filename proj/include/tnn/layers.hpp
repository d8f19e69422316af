#pragma once

// Layer catalog.
//
//   t-linear   A_{j+1} = sigma(W * A_j + B)
//   residual   A_{j+1} = A_j + h sigma(W * A_j + B)
//   leapfrog   Z_{j+1/2} = Z_{j-1/2} - h sigma(W_j^T * A_j + B_j)
//              A_{j+1}   = A_j + h sigma(W_j * Z_{j+1/2} + B_j),  Z_{-1/2} = 0
//
// "*" and "^T" are the product and transpose of the layer's Transform.
// The bias B is ell x 1 x n and is added to every lateral slice.
// Forward passes cache what the matching backward pass needs; calling
// backward without a preceding forward throws MissingCache.

#include <optional>
#include <stdexcept>
#include <vector>

#include "tnn/activation.hpp"
#include "tnn/tensor3.hpp"
#include "tnn/transform.hpp"

namespace tnn {

class MissingCache : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// W * A + B with B broadcast over lateral slices.
Tensor3 affine(const Tensor3& w, const Tensor3& a, const Tensor3& b, const Transform& t);

struct LayerGradients {
    Tensor3 input;
    Tensor3 weight;
    Tensor3 bias;
};

class TLinearLayer {
public:
    TLinearLayer(Tensor3 weight, Tensor3 bias, Activation act);
    static TLinearLayer zeros(Index out, Index in, Index n, Activation act);

    Tensor3 forward(const Tensor3& a, const Transform& t);
    // dA_next is dF/dA_{j+1}; a is the input the forward pass saw.
    LayerGradients backward(const Tensor3& d_next, const Tensor3& a, const Transform& t) const;

    const Tensor3& weight() const { return w_; }
    const Tensor3& bias() const { return b_; }
    Tensor3& weight() { return w_; }
    Tensor3& bias() { return b_; }
    Activation activation() const { return act_; }
    Index out_width() const { return w_.ell(); }
    Index in_width() const { return w_.m(); }
    Index param_count() const { return w_.size() + b_.size(); }

    bool has_cache() const { return z_.has_value(); }
    void clear_cache() { z_.reset(); }

private:
    Tensor3 w_;
    Tensor3 b_;
    Activation act_;
    std::optional<Tensor3> z_;
};

class ResidualLayer {
public:
    ResidualLayer(TLinearLayer layer, double h);

    Tensor3 forward(const Tensor3& a, const Transform& t);
    LayerGradients backward(const Tensor3& d_next, const Tensor3& a, const Transform& t) const;

    const TLinearLayer& layer() const { return layer_; }
    TLinearLayer& layer() { return layer_; }
    double step() const { return h_; }

private:
    TLinearLayer layer_;
    double h_;
};

struct LeapfrogGradients {
    Tensor3 input;
    std::vector<Tensor3> weights;
    std::vector<Tensor3> biases;
};

class LeapfrogBlock {
public:
    // One layer per step. With shared = true, `layers` holds a single
    // layer whose weights are reused for all `depth` steps.
    LeapfrogBlock(std::vector<TLinearLayer> layers, double h, Index depth, bool shared = false);

    Tensor3 forward(const Tensor3& a0, const Transform& t);
    LeapfrogGradients backward(const Tensor3& d_out, const Transform& t) const;

    Index depth() const { return depth_; }
    double step() const { return h_; }
    bool shared() const { return shared_; }
    const std::vector<TLinearLayer>& layers() const { return layers_; }
    std::vector<TLinearLayer>& layers() { return layers_; }
    Index width() const { return layers_.front().out_width(); }

    // A_0..A_N and Z_{1/2}..Z_{N-1/2} of the last forward pass.
    const std::vector<Tensor3>& positions() const { return a_; }
    const std::vector<Tensor3>& momenta() const { return z_; }
    bool has_cache() const { return !u_.empty(); }

private:
    const TLinearLayer& layer_at(Index step) const { return layers_[static_cast<std::size_t>(shared_ ? 0 : step)]; }

    std::vector<TLinearLayer> layers_;
    double h_;
    Index depth_;
    bool shared_;
    std::vector<Tensor3> a_;
    std::vector<Tensor3> z_;
    std::vector<Tensor3> u_;  // W_j^T * A_j + B_j
    std::vector<Tensor3> v_;  // W_j * Z_{j+1/2} + B_j
};

}  // namespace tnn
