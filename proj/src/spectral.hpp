#pragma once

// Half-spectrum representation of real tubes, used internally by the
// circulant algebra. Nothing here is part of the public interface.

#include <complex>
#include <vector>

#include "tnn/tensor3.hpp"

namespace tnn::detail {

using Complex = std::complex<double>;

// Unnormalized DFT of every tube, bins 0..n/2:
//
//     X[f] = sum_t x[t] exp(-2 pi i f t / n)
//
// These are exactly the eigenvalues of circ(x).
struct Spectrum {
    Dims dims;
    Index bins = 0;
    std::vector<Complex> coeffs;  // tube-major: ((i * m + j) * bins + f)

    Complex& at(Index i, Index j, Index f) { return coeffs[static_cast<std::size_t>((i * dims.m + j) * bins + f)]; }
    Complex at(Index i, Index j, Index f) const { return coeffs[static_cast<std::size_t>((i * dims.m + j) * bins + f)]; }
};

inline Index spectrum_bins(Index n) { return n / 2 + 1; }

Spectrum rfft_tubes(const Tensor3& a);
// Inverse of rfft_tubes. The Hermitian extension of the half spectrum is
// implied, so the result is real by construction.
Tensor3 irfft_tubes(const Spectrum& s);

}  // namespace tnn::detail
