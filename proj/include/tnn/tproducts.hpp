#pragma once

// Tensor-tensor products and the tube ("scalar") algebra.
//
// The t-product A * B of an ell x p x n and a p x m x n tensor is
// fold(bcirc(A) unfold(B)); slice by slice (0-based, indices mod n)
//
//     C^(k) = sum_i A^(i) B^(k - i).
//
// The M-product is ((A x3 M) facewise (B x3 M)) x3 M^-1. All functions
// here take and return real tensors; the circulant algebra's frequency
// representation stays internal.

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tnn/tensor3.hpp"
#include "tnn/transform.hpp"

namespace tnn {

Tensor3 t_product(const Tensor3& a, const Tensor3& b, ProductPath path = ProductPath::Direct);

// Transposes each frontal slice and reverses slices 2..n: (1)->(1), (k)->(n-k+2).
Tensor3 t_transpose(const Tensor3& a);

// First frontal slice I_m, the rest zero.
Tensor3 t_identity(Index m, Index n);

// M-product. A Circulant transform routes to t_product.
Tensor3 m_product(const Tensor3& a, const Tensor3& b, const Transform& t);

// Per-slice transpose without reordering.
Tensor3 m_transpose(const Tensor3& a);

// The algebra's transpose: t_transpose for Circulant, m_transpose otherwise.
Tensor3 transpose(const Tensor3& a, const Transform& t);

// Multiplicative identity of the algebra; its diagonal tubes are identity_tube(t).
Tensor3 identity(Index m, const Transform& t);

using Tube = std::vector<double>;

class SingularTube : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kSingularTubeTol = 1e-12;

// e1 for Circulant; M^T 1 (all ones in the transform domain) otherwise.
Tube identity_tube(const Transform& t);
Tube tube_mult(std::span<const double> a, std::span<const double> b, const Transform& t);
// Throws SingularTube if any transform-domain coefficient has magnitude <= 1e-12.
Tube tube_inverse(std::span<const double> a, const Transform& t);

// A scalar function applied to transform-domain coefficients. Circulant
// coefficients are complex (the eigenvalues of circ(tube)); the real
// kinds pass real values with zero imaginary part and keep the real part
// of the result.
using SpectralFunction = std::function<std::complex<double>(std::complex<double>)>;

Tensor3 tubal_apply(const SpectralFunction& phi, const Tensor3& a, const Transform& t);

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;
    double max_real = 0.0;
    double max_abs_real = 0.0;
};

// Eigenvalues of the materialized bcirc(W); W must be square in its
// first two dims and within kMaterializeCap.
SpectrumReport bcirc_spectrum(const Tensor3& w);

// [[0, bcirc(W)], [-bcirc(W)^T, 0]] -- the linearized leapfrog system.
Matrix antisymmetric_system(const Tensor3& w);
SpectrumReport antisymmetric_system_spectrum(const Tensor3& w);

SpectrumReport matrix_spectrum(const Matrix& a);

}  // namespace tnn
