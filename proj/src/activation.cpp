#include "tnn/activation.hpp"

#include <cmath>
#include <stdexcept>

namespace tnn {

Activation parse_activation(std::string_view name)
{
    if (name == "tanh")
        return Activation::Tanh;
    if (name == "relu")
        return Activation::ReLU;
    if (name == "identity" || name == "linear")
        return Activation::Identity;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation a)
{
    switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
    }
    return "?";
}

Tensor3 activate(Activation a, const Tensor3& z)
{
    Tensor3 out = z;
    switch (a) {
    case Activation::Tanh:
        for (double& v : out.values())
            v = std::tanh(v);
        break;
    case Activation::ReLU:
        for (double& v : out.values())
            v = v > 0.0 ? v : 0.0;
        break;
    case Activation::Identity:
        break;
    }
    return out;
}

Tensor3 activate_derivative(Activation a, const Tensor3& z)
{
    Tensor3 out(z.dims());
    auto src = z.values();
    auto dst = out.values();
    switch (a) {
    case Activation::Tanh:
        for (std::size_t p = 0; p < src.size(); ++p) {
            const double t = std::tanh(src[p]);
            dst[p] = 1.0 - t * t;
        }
        break;
    case Activation::ReLU:
        for (std::size_t p = 0; p < src.size(); ++p)
            dst[p] = src[p] > 0.0 ? 1.0 : 0.0;
        break;
    case Activation::Identity:
        out.fill(1.0);
        break;
    }
    return out;
}

}  // namespace tnn
