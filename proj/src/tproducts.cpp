#include "tnn/tproducts.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "spectral.hpp"

namespace tnn {
namespace {

using detail::Complex;
using ComplexMatrix = Eigen::MatrixXcd;

void check_conformable(const Tensor3& a, const Tensor3& b, const char* what)
{
    if (a.m() != b.ell() || a.n() != b.n())
        throw ShapeError(std::string(what) + ": " + to_string(a.dims()) + " with " + to_string(b.dims()));
}

Tensor3 t_product_direct(const Tensor3& a, const Tensor3& b)
{
    const Index n = a.n();
    const auto as = frontal_slices(a);
    const auto bs = frontal_slices(b);
    std::vector<Matrix> cs(static_cast<std::size_t>(n), Matrix::Zero(a.ell(), b.m()));
    // Fixed summation order i = 0..n-1 for every output slice.
    for (Index k = 0; k < n; ++k)
        for (Index i = 0; i < n; ++i) {
            const Index q = ((k - i) % n + n) % n;
            cs[static_cast<std::size_t>(k)].noalias() += as[static_cast<std::size_t>(i)] * bs[static_cast<std::size_t>(q)];
        }
    return Tensor3::from_frontal_slices(cs);
}

ComplexMatrix spectral_slice(const detail::Spectrum& s, Index f)
{
    ComplexMatrix out(s.dims.ell, s.dims.m);
    for (Index i = 0; i < s.dims.ell; ++i)
        for (Index j = 0; j < s.dims.m; ++j)
            out(i, j) = s.at(i, j, f);
    return out;
}

Tensor3 t_product_fourier(const Tensor3& a, const Tensor3& b)
{
    const auto sa = detail::rfft_tubes(a);
    const auto sb = detail::rfft_tubes(b);
    detail::Spectrum sc;
    sc.dims = Dims{a.ell(), b.m(), a.n()};
    sc.bins = sa.bins;
    sc.coeffs.assign(static_cast<std::size_t>(a.ell() * b.m() * sc.bins), Complex{});
    for (Index f = 0; f < sc.bins; ++f) {
        const ComplexMatrix c = spectral_slice(sa, f) * spectral_slice(sb, f);
        for (Index i = 0; i < c.rows(); ++i)
            for (Index j = 0; j < c.cols(); ++j)
                sc.at(i, j, f) = c(i, j);
    }
    return detail::irfft_tubes(sc);
}

Tensor3 tube_tensor(std::span<const double> a)
{
    Tensor3 t(1, 1, static_cast<Index>(a.size()));
    std::copy(a.begin(), a.end(), t.values().begin());
    return t;
}

Tube to_tube(const Tensor3& t)
{
    return Tube(t.values().begin(), t.values().end());
}

}  // namespace

Tensor3 t_product(const Tensor3& a, const Tensor3& b, ProductPath path)
{
    check_conformable(a, b, "t_product");
    return path == ProductPath::Fourier ? t_product_fourier(a, b) : t_product_direct(a, b);
}

Tensor3 t_transpose(const Tensor3& a)
{
    const Index n = a.n();
    Tensor3 out(a.m(), a.ell(), n);
    for (Index i = 0; i < a.ell(); ++i)
        for (Index j = 0; j < a.m(); ++j) {
            auto src = a.tube(i, j);
            auto dst = out.tube(j, i);
            dst[0] = src[0];
            for (Index k = 1; k < n; ++k)
                dst[n - k] = src[k];
        }
    return out;
}

Tensor3 t_identity(Index m, Index n)
{
    Tensor3 out(m, m, n);
    for (Index i = 0; i < m; ++i)
        out(i, i, 0) = 1.0;
    return out;
}

Tensor3 m_product(const Tensor3& a, const Tensor3& b, const Transform& t)
{
    check_conformable(a, b, "m_product");
    if (t.n() != a.n())
        throw ShapeError("m_product: transform size " + std::to_string(t.n()) + " vs tubes of length " + std::to_string(a.n()));
    switch (t.kind()) {
    case TransformKind::Circulant:
        return t_product(a, b, t.path());
    case TransformKind::Identity:
        return facewise_product(a, b);
    case TransformKind::Orthogonal:
        break;
    }
    const Tensor3 c_hat = facewise_product(mode3_product(a, t.matrix()), mode3_product(b, t.matrix()));
    return mode3_product(c_hat, t.inverse_matrix());
}

Tensor3 m_transpose(const Tensor3& a)
{
    Tensor3 out(a.m(), a.ell(), a.n());
    for (Index i = 0; i < a.ell(); ++i)
        for (Index j = 0; j < a.m(); ++j)
            std::copy_n(a.tube(i, j).data(), a.n(), out.tube(j, i).data());
    return out;
}

Tensor3 transpose(const Tensor3& a, const Transform& t)
{
    return t.is_circulant() ? t_transpose(a) : m_transpose(a);
}

Tensor3 identity(Index m, const Transform& t)
{
    if (t.is_circulant())
        return t_identity(m, t.n());
    const Tube e = identity_tube(t);
    Tensor3 out(m, m, t.n());
    for (Index i = 0; i < m; ++i)
        std::copy(e.begin(), e.end(), out.tube(i, i).begin());
    return out;
}

Tube identity_tube(const Transform& t)
{
    if (t.is_circulant()) {
        Tube e(static_cast<std::size_t>(t.n()), 0.0);
        e[0] = 1.0;
        return e;
    }
    const Vector ones = Vector::Ones(t.n());
    const Vector e = t.inverse_matrix() * ones;
    return Tube(e.data(), e.data() + e.size());
}

Tube tube_mult(std::span<const double> a, std::span<const double> b, const Transform& t)
{
    if (a.size() != b.size())
        throw ShapeError("tube_mult: tube lengths differ");
    if (static_cast<Index>(a.size()) != t.n())
        throw ShapeError("tube_mult: tube length does not match transform");
    return to_tube(m_product(tube_tensor(a), tube_tensor(b), t));
}

Tube tube_inverse(std::span<const double> a, const Transform& t)
{
    if (static_cast<Index>(a.size()) != t.n())
        throw ShapeError("tube_inverse: tube length does not match transform");
    auto checked_reciprocal = [](std::complex<double> z) {
        if (std::abs(z) <= kSingularTubeTol)
            throw SingularTube("tube_inverse: transform-domain coefficient " + std::to_string(std::abs(z)) +
                               " is below the singularity threshold");
        return 1.0 / z;
    };
    return to_tube(tubal_apply(checked_reciprocal, tube_tensor(a), t));
}

Tensor3 tubal_apply(const SpectralFunction& phi, const Tensor3& a, const Transform& t)
{
    if (t.n() != a.n())
        throw ShapeError("tubal_apply: transform size does not match tubes");
    if (t.is_circulant()) {
        auto s = detail::rfft_tubes(a);
        for (auto& c : s.coeffs)
            c = phi(c);
        return detail::irfft_tubes(s);
    }
    Tensor3 hat = mode3_product(a, t.matrix());
    for (double& v : hat.values())
        v = phi(std::complex<double>(v, 0.0)).real();
    return mode3_product(hat, t.inverse_matrix());
}

SpectrumReport matrix_spectrum(const Matrix& a)
{
    if (a.rows() != a.cols())
        throw ShapeError("matrix_spectrum: matrix must be square");
    SpectrumReport r;
    if (a.size() == 0)
        return r;
    Eigen::EigenSolver<Matrix> solver(a, false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("matrix_spectrum: eigensolver did not converge");
    const auto& ev = solver.eigenvalues();
    r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    r.max_real = -std::numeric_limits<double>::infinity();
    for (const auto& z : r.eigenvalues) {
        r.max_real = std::max(r.max_real, z.real());
        r.max_abs_real = std::max(r.max_abs_real, std::abs(z.real()));
    }
    return r;
}

SpectrumReport bcirc_spectrum(const Tensor3& w)
{
    if (w.ell() != w.m())
        throw ShapeError("bcirc_spectrum: weight must be square in its first two dims, got " + to_string(w.dims()));
    return matrix_spectrum(bcirc(w));
}

Matrix antisymmetric_system(const Tensor3& w)
{
    if (w.ell() != w.m())
        throw ShapeError("antisymmetric_system: weight must be square, got " + to_string(w.dims()));
    const Index s = w.ell() * w.n();
    if (4 * s * s > kMaterializeCap)
        throw ShapeError("antisymmetric_system: exceeds materialization cap");
    const Matrix b = bcirc(w);
    Matrix sys = Matrix::Zero(2 * s, 2 * s);
    sys.topRightCorner(s, s) = b;
    sys.bottomLeftCorner(s, s) = -b.transpose();
    return sys;
}

SpectrumReport antisymmetric_system_spectrum(const Tensor3& w)
{
    return matrix_spectrum(antisymmetric_system(w));
}

}  // namespace tnn
