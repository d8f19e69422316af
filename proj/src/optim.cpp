#include "tnn/optim.hpp"

#include <algorithm>
#include <stdexcept>

namespace tnn {

Regularization smoothness_regularizer(std::span<const Tensor3> weights, double h)
{
    if (weights.size() < 2)
        throw std::invalid_argument("smoothness_regularizer: needs at least two weights");
    if (!(h > 0.0))
        throw std::invalid_argument("smoothness_regularizer: h must be positive");
    for (const auto& w : weights)
        if (w.dims() != weights.front().dims())
            throw ShapeError("smoothness_regularizer: weights differ in shape");

    Regularization r;
    r.gradients.assign(weights.size(), Tensor3(weights.front().dims()));
    for (std::size_t j = 1; j < weights.size(); ++j) {
        const Tensor3 diff = weights[j] - weights[j - 1];
        r.value += diff.squared_norm();
        r.gradients[j].axpy(1.0 / h, diff);
        r.gradients[j - 1].axpy(-1.0 / h, diff);
    }
    r.value /= 2.0 * h;
    return r;
}

double max_weight_step(std::span<const Tensor3* const> weights)
{
    double m = 0.0;
    for (std::size_t j = 1; j < weights.size(); ++j)
        m = std::max(m, (*weights[j] - *weights[j - 1]).frobenius_norm());
    return m;
}

Sgd::Sgd(double learning_rate, double momentum) : lr_(learning_rate), mu_(momentum)
{
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("Sgd: learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw std::invalid_argument("Sgd: momentum must be in [0, 1)");
}

void Sgd::step(std::span<Tensor3* const> params, std::span<const Tensor3> grads)
{
    if (params.size() != grads.size())
        throw ShapeError("Sgd::step: parameter and gradient counts differ");
    if (velocity_.empty())
        for (const Tensor3* p : params)
            velocity_.emplace_back(p->dims());
    if (velocity_.size() != params.size())
        throw ShapeError("Sgd::step: parameter count changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].dims() != params[i]->dims() || velocity_[i].dims() != params[i]->dims())
            throw ShapeError("Sgd::step: gradient shape mismatch for parameter " + std::to_string(i));
        velocity_[i] *= mu_;
        velocity_[i] += grads[i];
        params[i]->axpy(-lr_, velocity_[i]);
    }
}

}  // namespace tnn
