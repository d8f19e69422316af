#include "tnn/network.hpp"

#include <cmath>
#include <stdexcept>

#include "tnn/random.hpp"
#include "tnn/tproducts.hpp"

namespace tnn {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Tensor3 random_weight(Dims d, const Transform& t, InitScheme scheme, double scale, Rng& rng)
{
    Tensor3 w(d);
    if (scheme == InitScheme::NormalizedTube) {
        for (double& v : w.values())
            v = rng.normal();
        const double norm = w.frobenius_norm();
        if (norm > 0.0)
            w *= 1.0 / norm;
        return w;
    }
    const double sd = scale / std::sqrt(static_cast<double>(d.m));
    if (t.is_circulant()) {
        const double spatial_sd = sd / std::sqrt(static_cast<double>(d.n));
        for (double& v : w.values())
            v = spatial_sd * rng.normal();
        return w;
    }
    for (double& v : w.values())
        v = sd * rng.normal();
    return mode3_product(w, t.inverse_matrix());
}

}  // namespace

Transform make_transform(TransformKind kind, Index n, ProductPath path)
{
    switch (kind) {
    case TransformKind::Circulant: return Transform::circulant(n, path);
    case TransformKind::Orthogonal: return Transform::dct(n);
    case TransformKind::Identity: return Transform::identity(n);
    }
    throw std::invalid_argument("make_transform: unknown kind");
}

Transform make_transform(const NetworkSpec& spec)
{
    return make_transform(spec.transform, spec.n, spec.path);
}

std::string to_string(BlockKind k)
{
    switch (k) {
    case BlockKind::TLinear: return "tlinear";
    case BlockKind::Residual: return "residual";
    case BlockKind::Leapfrog: return "leapfrog";
    }
    return "?";
}

BlockKind parse_block_kind(std::string_view name)
{
    if (name == "tlinear")
        return BlockKind::TLinear;
    if (name == "residual")
        return BlockKind::Residual;
    if (name == "leapfrog")
        return BlockKind::Leapfrog;
    throw std::invalid_argument("unknown block kind '" + std::string(name) + "'");
}

namespace {

struct Counts {
    Index weights = 0;
    Index biases = 0;
};

Counts count(const NetworkSpec& spec)
{
    Counts c;
    Index width = spec.input_width;
    const Index n = spec.n;
    for (const auto& b : spec.blocks) {
        switch (b.kind) {
        case BlockKind::TLinear:
            c.weights += b.width * width * n;
            c.biases += b.width * n;
            width = b.width;
            break;
        case BlockKind::Residual:
            c.weights += b.steps * width * width * n;
            c.biases += b.steps * width * n;
            break;
        case BlockKind::Leapfrog: {
            const Index layers = b.shared ? 1 : b.steps;
            c.weights += layers * width * width * n;
            c.biases += layers * width * n;
            break;
        }
        }
    }
    c.weights += spec.classes * width * n;
    if (spec.classifier_bias)
        c.biases += spec.classes * n;
    return c;
}

}  // namespace

Index param_count(const NetworkSpec& spec)
{
    const Counts c = count(spec);
    return c.weights + c.biases;
}

Index weight_count(const NetworkSpec& spec)
{
    return count(spec).weights;
}

Index feature_width(const NetworkSpec& spec)
{
    Index width = spec.input_width;
    for (const auto& b : spec.blocks)
        if (b.kind == BlockKind::TLinear)
            width = b.width;
    return width;
}

Tensor3 classifier_output(const Tensor3& classifier, const std::optional<Tensor3>& bias, const Tensor3& features,
                          const Transform& t)
{
    Tensor3 x = m_product(classifier, features, t);
    if (bias)
        add_lateral_broadcast(x, *bias);
    return x;
}

Network::Network(NetworkSpec spec, std::vector<Block> blocks, Tensor3 classifier, std::optional<Tensor3> classifier_bias)
    : spec_(std::move(spec)),
      transform_(make_transform(spec_)),
      blocks_(std::move(blocks)),
      classifier_(std::move(classifier)),
      classifier_bias_(std::move(classifier_bias))
{
    Index width = spec_.input_width;
    auto check = [&](const TLinearLayer& l) {
        if (l.in_width() != width || l.weight().n() != spec_.n)
            throw ShapeError("Network: layer weight " + to_string(l.weight().dims()) + " does not accept width " +
                             std::to_string(width));
        width = l.out_width();
    };
    for (const auto& b : blocks_)
        std::visit(Overloaded{
                       [&](const TLinearLayer& l) { check(l); },
                       [&](const ResidualLayer& r) { check(r.layer()); },
                       [&](const LeapfrogBlock& lf) { check(lf.layers().front()); },
                   },
                   b);
    if (classifier_.dims() != Dims{spec_.classes, width, spec_.n})
        throw ShapeError("Network: classifier " + to_string(classifier_.dims()) + " for features of width " +
                         std::to_string(width));
    if (classifier_bias_ && classifier_bias_->dims() != Dims{spec_.classes, 1, spec_.n})
        throw ShapeError("Network: classifier bias shape mismatch");
}

Network Network::initialize(const NetworkSpec& spec, std::uint64_t seed)
{
    const Transform t = make_transform(spec);
    Rng rng(seed);
    std::vector<Block> blocks;
    Index width = spec.input_width;
    const Index n = spec.n;
    auto layer = [&](Index out, Index in, Activation act) {
        return TLinearLayer(random_weight(Dims{out, in, n}, t, spec.init, spec.init_scale, rng), Tensor3(out, 1, n), act);
    };
    for (const auto& b : spec.blocks) {
        if (!(b.h >= 0.0))
            throw std::invalid_argument("Network: step size must be non-negative");
        switch (b.kind) {
        case BlockKind::TLinear:
            if (b.width < 1)
                throw std::invalid_argument("Network: t-linear block needs a width");
            blocks.emplace_back(layer(b.width, width, b.activation));
            width = b.width;
            break;
        case BlockKind::Residual:
            for (Index s = 0; s < b.steps; ++s)
                blocks.emplace_back(ResidualLayer(layer(width, width, b.activation), b.h));
            break;
        case BlockKind::Leapfrog: {
            std::vector<TLinearLayer> layers;
            const Index count = b.shared ? 1 : b.steps;
            for (Index s = 0; s < count; ++s)
                layers.push_back(layer(width, width, b.activation));
            blocks.emplace_back(LeapfrogBlock(std::move(layers), b.h, b.steps, b.shared));
            break;
        }
        }
    }
    Tensor3 classifier = random_weight(Dims{spec.classes, width, n}, t, spec.init, spec.init_scale, rng);
    std::optional<Tensor3> bias;
    if (spec.classifier_bias)
        bias = Tensor3(spec.classes, 1, n);
    return Network(spec, std::move(blocks), std::move(classifier), std::move(bias));
}

Tensor3 Network::forward(const Tensor3& a0)
{
    if (a0.ell() != spec_.input_width || a0.n() != spec_.n)
        throw ShapeError("Network: input " + to_string(a0.dims()) + " for width " + std::to_string(spec_.input_width) +
                         " and n " + std::to_string(spec_.n));
    inputs_.clear();
    Tensor3 a = a0;
    for (auto& b : blocks_) {
        inputs_.push_back(a);
        a = std::visit([&](auto& blk) { return blk.forward(a, transform_); }, b);
    }
    features_ = std::move(a);
    has_forward_ = true;
    return classifier_output(classifier_, classifier_bias_, features_, transform_);
}

const Tensor3& Network::features() const
{
    if (!has_forward_)
        throw MissingCache("Network::features before forward");
    return features_;
}

std::vector<Tensor3> Network::layer_states() const
{
    if (!has_forward_)
        throw MissingCache("Network::layer_states before forward");
    std::vector<Tensor3> states;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (b == 0)
            states.push_back(inputs_[0]);
        if (const auto* lf = std::get_if<LeapfrogBlock>(&blocks_[b])) {
            const auto& pos = lf->positions();
            states.insert(states.end(), pos.begin() + 1, pos.end());
        } else {
            states.push_back(b + 1 < blocks_.size() ? inputs_[b + 1] : features_);
        }
    }
    if (blocks_.empty())
        states.push_back(features_);
    return states;
}

std::vector<Tensor3> Network::backward(const Tensor3& d_output)
{
    if (!has_forward_)
        throw MissingCache("Network::backward before forward");
    if (d_output.dims() != Dims{spec_.classes, features_.m(), spec_.n})
        throw ShapeError("Network::backward: gradient " + to_string(d_output.dims()));

    // Gradients are produced back to front, then reordered to match parameters().
    std::vector<std::vector<Tensor3>> per_block(blocks_.size());
    std::vector<Tensor3> head;
    head.push_back(m_product(d_output, transpose(features_, transform_), transform_));
    if (classifier_bias_)
        head.push_back(sum_lateral(d_output));
    Tensor3 d = m_product(transpose(classifier_, transform_), d_output, transform_);

    for (std::size_t b = blocks_.size(); b-- > 0;) {
        auto& out = per_block[b];
        std::visit(Overloaded{
                       [&](const TLinearLayer& l) {
                           LayerGradients g = l.backward(d, inputs_[b], transform_);
                           out = {std::move(g.weight), std::move(g.bias)};
                           d = std::move(g.input);
                       },
                       [&](const ResidualLayer& r) {
                           LayerGradients g = r.backward(d, inputs_[b], transform_);
                           out = {std::move(g.weight), std::move(g.bias)};
                           d = std::move(g.input);
                       },
                       [&](const LeapfrogBlock& lf) {
                           LeapfrogGradients g = lf.backward(d, transform_);
                           for (std::size_t s = 0; s < g.weights.size(); ++s) {
                               out.push_back(std::move(g.weights[s]));
                               out.push_back(std::move(g.biases[s]));
                           }
                           d = std::move(g.input);
                       },
                   },
                   blocks_[b]);
    }
    input_grad_ = std::move(d);

    std::vector<Tensor3> grads;
    for (auto& g : per_block)
        for (auto& t : g)
            grads.push_back(std::move(t));
    for (auto& t : head)
        grads.push_back(std::move(t));
    return grads;
}

std::vector<ParameterRef> Network::parameters()
{
    std::vector<ParameterRef> p;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const std::string prefix = "block" + std::to_string(b);
        std::visit(Overloaded{
                       [&](TLinearLayer& l) {
                           p.push_back({prefix + ".W", &l.weight()});
                           p.push_back({prefix + ".B", &l.bias()});
                       },
                       [&](ResidualLayer& r) {
                           p.push_back({prefix + ".W", &r.layer().weight()});
                           p.push_back({prefix + ".B", &r.layer().bias()});
                       },
                       [&](LeapfrogBlock& lf) {
                           for (std::size_t s = 0; s < lf.layers().size(); ++s) {
                               const std::string step = prefix + ".step" + std::to_string(s);
                               p.push_back({step + ".W", &lf.layers()[s].weight()});
                               p.push_back({step + ".B", &lf.layers()[s].bias()});
                           }
                       },
                   },
                   blocks_[b]);
    }
    p.push_back({"classifier.W", &classifier_});
    if (classifier_bias_)
        p.push_back({"classifier.B", &*classifier_bias_});
    return p;
}

std::vector<const Tensor3*> Network::parameters() const
{
    std::vector<const Tensor3*> out;
    for (const auto& ref : const_cast<Network*>(this)->parameters())
        out.push_back(ref.tensor);
    return out;
}

std::vector<std::string> Network::parameter_names() const
{
    std::vector<std::string> out;
    for (const auto& ref : const_cast<Network*>(this)->parameters())
        out.push_back(ref.name);
    return out;
}

std::vector<WeightChain> Network::weight_chains() const
{
    std::vector<WeightChain> chains;
    WeightChain run;
    std::size_t index = 0;
    auto flush = [&] {
        if (run.params.size() >= 2)
            chains.push_back(run);
        run = {};
    };
    for (const auto& b : blocks_) {
        if (const auto* r = std::get_if<ResidualLayer>(&b)) {
            if (!run.params.empty() && run.h != r->step())
                flush();
            run.h = r->step();
            run.params.push_back(index);
            index += 2;
            continue;
        }
        flush();
        if (const auto* lf = std::get_if<LeapfrogBlock>(&b)) {
            WeightChain chain{{}, lf->step()};
            for (std::size_t s = 0; s < lf->layers().size(); ++s)
                chain.params.push_back(index + 2 * s);
            if (chain.params.size() >= 2)
                chains.push_back(std::move(chain));
            index += 2 * lf->layers().size();
        } else {
            index += 2;
        }
    }
    flush();
    return chains;
}

ProbabilityMatrix classify(const Tensor3& classifier, const Tensor3& features, const Transform& t)
{
    return scalar_tubal_softmax(m_product(classifier, features, t), t);
}

}  // namespace tnn
