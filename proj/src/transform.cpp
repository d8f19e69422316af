#include "tnn/transform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tnn {

Transform::Transform(TransformKind kind, Index n, ProductPath path, Matrix m)
    : kind_(kind), n_(n), path_(path), m_(std::move(m))
{
    if (n < 1)
        throw std::invalid_argument("Transform: n must be >= 1");
    if (kind_ != TransformKind::Circulant)
        m_inv_ = m_.transpose();
}

Transform Transform::circulant(Index n, ProductPath path)
{
    return Transform(TransformKind::Circulant, n, path, Matrix());
}

Transform Transform::identity(Index n)
{
    return Transform(TransformKind::Identity, n, ProductPath::Direct, Matrix::Identity(n, n));
}

Transform Transform::orthogonal(Matrix m)
{
    if (m.rows() != m.cols() || m.rows() < 1)
        throw std::invalid_argument("Transform::orthogonal: matrix must be square");
    const Index n = m.rows();
    const double err = (m * m.transpose() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(err <= kOrthogonalityTol))
        throw std::invalid_argument("Transform::orthogonal: max|M M^T - I| = " + std::to_string(err));
    return Transform(TransformKind::Orthogonal, n, ProductPath::Direct, std::move(m));
}

Transform Transform::dct(Index n)
{
    return orthogonal(dct_matrix(n));
}

const Matrix& Transform::matrix() const
{
    if (kind_ == TransformKind::Circulant)
        throw std::logic_error("Transform: circulant kind has no real transform matrix");
    return m_;
}

const Matrix& Transform::inverse_matrix() const
{
    if (kind_ == TransformKind::Circulant)
        throw std::logic_error("Transform: circulant kind has no real transform matrix");
    return m_inv_;
}

std::string Transform::name() const
{
    switch (kind_) {
    case TransformKind::Circulant: return path_ == ProductPath::Fourier ? "circulant-fourier" : "circulant";
    case TransformKind::Orthogonal: return "orthogonal";
    case TransformKind::Identity: return "identity";
    }
    return "?";
}

Matrix dct_matrix(Index n)
{
    if (n < 1)
        throw std::invalid_argument("dct_matrix: n must be >= 1");
    Matrix m(n, n);
    const double nd = static_cast<double>(n);
    for (Index k = 0; k < n; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
        for (Index t = 0; t < n; ++t)
            m(k, t) = scale * std::cos(std::numbers::pi * (2.0 * t + 1.0) * k / (2.0 * nd));
    }
    return m;
}

}  // namespace tnn
