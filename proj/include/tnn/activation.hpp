#pragma once

#include <string>
#include <string_view>

#include "tnn/tensor3.hpp"

namespace tnn {

enum class Activation { Tanh, ReLU, Identity };

Activation parse_activation(std::string_view name);
std::string to_string(Activation a);

Tensor3 activate(Activation a, const Tensor3& z);
// sigma'(z) elementwise; ReLU'(0) = 0.
Tensor3 activate_derivative(Activation a, const Tensor3& z);

}  // namespace tnn
