#pragma once

#include <span>
#include <vector>

#include "tnn/tensor3.hpp"

namespace tnn {

struct Regularization {
    double value = 0.0;
    std::vector<Tensor3> gradients;
};

// R = 1/(2h) sum_j ||W_j - W_{j-1}||_F^2 over a sequence of equal-shape
// weights; the gradient is the discrete Laplacian (2W_j - W_{j-1} - W_{j+1})/h
// with one-sided differences at the ends.
Regularization smoothness_regularizer(std::span<const Tensor3> weights, double h);

// max_j ||W_j - W_{j-1}||_F, 0 for fewer than two weights.
double max_weight_step(std::span<const Tensor3* const> weights);

// Classical momentum:  v <- mu v + g;  w <- w - lr v.
class Sgd {
public:
    Sgd(double learning_rate, double momentum);

    void step(std::span<Tensor3* const> params, std::span<const Tensor3> grads);

    double learning_rate() const { return lr_; }
    double momentum() const { return mu_; }
    const std::vector<Tensor3>& velocities() const { return velocity_; }

private:
    double lr_;
    double mu_;
    std::vector<Tensor3> velocity_;
};

}  // namespace tnn
