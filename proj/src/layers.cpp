#include "tnn/layers.hpp"

#include "tnn/tproducts.hpp"

namespace tnn {

Tensor3 affine(const Tensor3& w, const Tensor3& a, const Tensor3& b, const Transform& t)
{
    Tensor3 z = m_product(w, a, t);
    add_lateral_broadcast(z, b);
    return z;
}

TLinearLayer::TLinearLayer(Tensor3 weight, Tensor3 bias, Activation act)
    : w_(std::move(weight)), b_(std::move(bias)), act_(act)
{
    if (b_.m() != 1 || b_.ell() != w_.ell() || b_.n() != w_.n())
        throw ShapeError("TLinearLayer: bias " + to_string(b_.dims()) + " does not match weight " + to_string(w_.dims()));
}

TLinearLayer TLinearLayer::zeros(Index out, Index in, Index n, Activation act)
{
    return TLinearLayer(Tensor3(out, in, n), Tensor3(out, 1, n), act);
}

Tensor3 TLinearLayer::forward(const Tensor3& a, const Transform& t)
{
    if (a.ell() != w_.m() || a.n() != w_.n())
        throw ShapeError("TLinearLayer: input " + to_string(a.dims()) + " for weight " + to_string(w_.dims()));
    z_ = affine(w_, a, b_, t);
    return activate(act_, *z_);
}

LayerGradients TLinearLayer::backward(const Tensor3& d_next, const Tensor3& a, const Transform& t) const
{
    if (!z_)
        throw MissingCache("TLinearLayer::backward called before forward");
    if (d_next.dims() != z_->dims())
        throw ShapeError("TLinearLayer::backward: gradient " + to_string(d_next.dims()) + " vs output " + to_string(z_->dims()));
    const Tensor3 g = d_next.hadamard(activate_derivative(act_, *z_));
    return LayerGradients{
        m_product(transpose(w_, t), g, t),
        m_product(g, transpose(a, t), t),
        sum_lateral(g),
    };
}

ResidualLayer::ResidualLayer(TLinearLayer layer, double h) : layer_(std::move(layer)), h_(h)
{
    if (layer_.out_width() != layer_.in_width())
        throw ShapeError("ResidualLayer: weight must be square, got " + to_string(layer_.weight().dims()));
}

Tensor3 ResidualLayer::forward(const Tensor3& a, const Transform& t)
{
    Tensor3 out = a;
    out.axpy(h_, layer_.forward(a, t));
    return out;
}

LayerGradients ResidualLayer::backward(const Tensor3& d_next, const Tensor3& a, const Transform& t) const
{
    LayerGradients g = layer_.backward(h_ * d_next, a, t);
    g.input += d_next;
    return g;
}

LeapfrogBlock::LeapfrogBlock(std::vector<TLinearLayer> layers, double h, Index depth, bool shared)
    : layers_(std::move(layers)), h_(h), depth_(depth), shared_(shared)
{
    if (layers_.empty() || depth_ < 1)
        throw std::invalid_argument("LeapfrogBlock: needs at least one step");
    if (shared_ ? layers_.size() != 1 : static_cast<Index>(layers_.size()) != depth_)
        throw std::invalid_argument("LeapfrogBlock: layer count does not match depth");
    const Dims d = layers_.front().weight().dims();
    for (const auto& l : layers_) {
        if (l.weight().dims() != d || d.ell != d.m)
            throw ShapeError("LeapfrogBlock: every step needs the same square weight, got " + to_string(l.weight().dims()));
    }
}

Tensor3 LeapfrogBlock::forward(const Tensor3& a0, const Transform& t)
{
    if (a0.ell() != width() || a0.n() != layers_.front().weight().n())
        throw ShapeError("LeapfrogBlock: input " + to_string(a0.dims()) + " for width " + std::to_string(width()));
    a_.clear();
    z_.clear();
    u_.clear();
    v_.clear();
    a_.push_back(a0);
    Tensor3 z(a0.dims());
    for (Index j = 0; j < depth_; ++j) {
        const TLinearLayer& l = layer_at(j);
        const Activation act = l.activation();
        const Tensor3& a = a_.back();

        Tensor3 u = affine(transpose(l.weight(), t), a, l.bias(), t);
        z.axpy(-h_, activate(act, u));

        Tensor3 v = affine(l.weight(), z, l.bias(), t);
        Tensor3 next = a;
        next.axpy(h_, activate(act, v));

        u_.push_back(std::move(u));
        v_.push_back(std::move(v));
        z_.push_back(z);
        a_.push_back(std::move(next));
    }
    return a_.back();
}

LeapfrogGradients LeapfrogBlock::backward(const Tensor3& d_out, const Transform& t) const
{
    if (!has_cache())
        throw MissingCache("LeapfrogBlock::backward called before forward");
    if (d_out.dims() != a_.back().dims())
        throw ShapeError("LeapfrogBlock::backward: gradient shape mismatch");

    LeapfrogGradients g;
    const Dims wd = layers_.front().weight().dims();
    const Dims bd = layers_.front().bias().dims();
    g.weights.assign(layers_.size(), Tensor3(wd));
    g.biases.assign(layers_.size(), Tensor3(bd));

    Tensor3 ga = d_out;
    Tensor3 gz(d_out.dims());
    for (Index j = depth_ - 1; j >= 0; --j) {
        const std::size_t slot = shared_ ? 0 : static_cast<std::size_t>(j);
        const TLinearLayer& l = layer_at(j);
        const Tensor3& w = l.weight();
        const std::size_t js = static_cast<std::size_t>(j);

        // A_{j+1} = A_j + h sigma(V_j), V_j = W_j * Z_{j+1/2} + B_j
        const Tensor3 gv = (h_ * ga).hadamard(activate_derivative(l.activation(), v_[js]));
        gz += m_product(transpose(w, t), gv, t);
        g.weights[slot] += m_product(gv, transpose(z_[js], t), t);
        g.biases[slot] += sum_lateral(gv);

        // Z_{j+1/2} = Z_{j-1/2} - h sigma(U_j), U_j = W_j^T * A_j + B_j
        const Tensor3 gu = (-h_ * gz).hadamard(activate_derivative(l.activation(), u_[js]));
        ga += m_product(w, gu, t);
        // d/dW of W^T: (G_U * A^T)^T = A * G_U^T
        g.weights[slot] += m_product(a_[js], transpose(gu, t), t);
        g.biases[slot] += sum_lateral(gu);
    }
    g.input = std::move(ga);
    return g;
}

}  // namespace tnn
