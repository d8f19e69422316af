#pragma once

#include <string>

#include "tnn/tensor3.hpp"

namespace tnn {

// Which tensor-tensor product a computation uses.
//
//  Circulant   the t-product (circulant convolution along mode 3)
//  Orthogonal  the M-product for a real orthogonal M, M^-1 = M^T
//  Identity    the M-product with M = I, i.e. the facewise product
enum class TransformKind { Circulant, Orthogonal, Identity };

// How the Circulant kind evaluates products. Both are real in, real out.
enum class ProductPath { Direct, Fourier };

class Transform {
public:
    static Transform circulant(Index n, ProductPath path = ProductPath::Direct);
    static Transform identity(Index n);
    // Throws std::invalid_argument unless max|M M^T - I| <= 1e-10.
    static Transform orthogonal(Matrix m);
    // Orthonormal DCT-II.
    static Transform dct(Index n);

    TransformKind kind() const { return kind_; }
    Index n() const { return n_; }
    ProductPath path() const { return path_; }
    bool is_circulant() const { return kind_ == TransformKind::Circulant; }

    // M and M^-1 for the real kinds (identity matrices for Identity).
    // The Circulant kind has no real matrix and throws.
    const Matrix& matrix() const;
    const Matrix& inverse_matrix() const;

    std::string name() const;

private:
    Transform(TransformKind kind, Index n, ProductPath path, Matrix m);

    TransformKind kind_;
    Index n_;
    ProductPath path_;
    Matrix m_;
    Matrix m_inv_;
};

Matrix dct_matrix(Index n);

inline constexpr double kOrthogonalityTol = 1e-10;

}  // namespace tnn
