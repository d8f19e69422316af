#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "tnn/tensor3.hpp"
#include "tnn/transform.hpp"

namespace tnn::testing {

inline Tensor3 random_tensor(Dims d, std::mt19937_64& gen, double scale = 1.0)
{
    std::normal_distribution<double> nd(0.0, scale);
    Tensor3 t(d);
    for (double& v : t.values())
        v = nd(gen);
    return t;
}

inline Matrix random_orthogonal(Index n, std::mt19937_64& gen)
{
    std::normal_distribution<double> nd;
    Matrix a(n, n);
    for (Index i = 0; i < a.size(); ++i)
        a.data()[i] = nd(gen);
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(n, n);
}

inline Index uniform_index(std::mt19937_64& gen, Index lo, Index hi)
{
    return std::uniform_int_distribution<Index>(lo, hi)(gen);
}

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const Tensor3& a, const Tensor3& b)
{
    const double denom = std::max(a.frobenius_norm(), b.frobenius_norm());
    if (denom == 0.0)
        return 0.0;
    return (a - b).frobenius_norm() / denom;
}

inline constexpr double kFdStep = 1e-6;
inline constexpr double kFdTol = 1e-5;

// Central differences of f with respect to every entry of x.
inline Tensor3 numeric_gradient(const std::function<double()>& f, Tensor3& x, double step = kFdStep)
{
    Tensor3 g(x.dims());
    for (Index e = 0; e < x.size(); ++e) {
        const double saved = x.data()[e];
        x.data()[e] = saved + step;
        const double up = f();
        x.data()[e] = saved - step;
        const double down = f();
        x.data()[e] = saved;
        g.data()[e] = (up - down) / (2.0 * step);
    }
    return g;
}

// <a, b> summed over all entries.
inline double inner(const Tensor3& a, const Tensor3& b)
{
    double s = 0.0;
    for (Index e = 0; e < a.size(); ++e)
        s += a.data()[e] * b.data()[e];
    return s;
}

inline Transform algebra(int which, Index n)
{
    return which == 0 ? Transform::circulant(n) : Transform::dct(n);
}

}  // namespace tnn::testing
