#include "tnn/tensor3.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tnn {

std::string to_string(const Dims& d)
{
    std::ostringstream os;
    os << d.ell << "x" << d.m << "x" << d.n;
    return os.str();
}

Tensor3::Tensor3(Index ell, Index m, Index n) : dims_{ell, m, n}
{
    if (ell < 1 || m < 1 || n < 1)
        throw ShapeError("Tensor3: dims must be >= 1, got " + to_string(dims_));
    values_.assign(static_cast<std::size_t>(ell * m * n), 0.0);
}

Tensor3::Tensor3(Dims dims, std::vector<double> values) : Tensor3(dims)
{
    if (static_cast<Index>(values.size()) != dims.size())
        throw ShapeError("Tensor3: value count does not match " + to_string(dims));
    values_ = std::move(values);
}

Tensor3 Tensor3::constant(Dims dims, double value)
{
    Tensor3 t(dims);
    t.fill(value);
    return t;
}

Tensor3 Tensor3::from_frontal_slices(std::span<const Matrix> slices)
{
    if (slices.empty())
        throw ShapeError("from_frontal_slices: no slices");
    Tensor3 t(slices[0].rows(), slices[0].cols(), static_cast<Index>(slices.size()));
    for (Index k = 0; k < t.n(); ++k)
        t.set_frontal_slice(k, slices[static_cast<std::size_t>(k)]);
    return t;
}

Matrix Tensor3::frontal_slice(Index k) const
{
    Matrix s(dims_.ell, dims_.m);
    for (Index i = 0; i < dims_.ell; ++i)
        for (Index j = 0; j < dims_.m; ++j)
            s(i, j) = (*this)(i, j, k);
    return s;
}

void Tensor3::set_frontal_slice(Index k, const Matrix& slice)
{
    if (slice.rows() != dims_.ell || slice.cols() != dims_.m)
        throw ShapeError("set_frontal_slice: slice shape mismatch");
    for (Index i = 0; i < dims_.ell; ++i)
        for (Index j = 0; j < dims_.m; ++j)
            (*this)(i, j, k) = slice(i, j);
}

Matrix Tensor3::lateral_slice(Index j) const
{
    Matrix s(dims_.ell, dims_.n);
    for (Index i = 0; i < dims_.ell; ++i)
        for (Index k = 0; k < dims_.n; ++k)
            s(i, k) = (*this)(i, j, k);
    return s;
}

void Tensor3::set_lateral_slice(Index j, const Matrix& slice)
{
    if (slice.rows() != dims_.ell || slice.cols() != dims_.n)
        throw ShapeError("set_lateral_slice: slice shape mismatch");
    for (Index i = 0; i < dims_.ell; ++i)
        for (Index k = 0; k < dims_.n; ++k)
            (*this)(i, j, k) = slice(i, k);
}

Tensor3& Tensor3::operator+=(const Tensor3& other)
{
    axpy(1.0, other);
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other)
{
    axpy(-1.0, other);
    return *this;
}

Tensor3& Tensor3::operator*=(double s)
{
    for (double& v : values_)
        v *= s;
    return *this;
}

void Tensor3::axpy(double s, const Tensor3& other)
{
    if (other.dims_ != dims_)
        throw ShapeError("elementwise op: " + to_string(dims_) + " vs " + to_string(other.dims_));
    for (std::size_t p = 0; p < values_.size(); ++p)
        values_[p] += s * other.values_[p];
}

Tensor3 Tensor3::hadamard(const Tensor3& other) const
{
    if (other.dims_ != dims_)
        throw ShapeError("hadamard: " + to_string(dims_) + " vs " + to_string(other.dims_));
    Tensor3 out(dims_);
    for (std::size_t p = 0; p < values_.size(); ++p)
        out.values_[p] = values_[p] * other.values_[p];
    return out;
}

void Tensor3::fill(double v)
{
    std::fill(values_.begin(), values_.end(), v);
}

double Tensor3::squared_norm() const
{
    double s = 0.0;
    for (double v : values_)
        s += v * v;
    return s;
}

double Tensor3::frobenius_norm() const
{
    return std::sqrt(squared_norm());
}

double Tensor3::sum() const
{
    double s = 0.0;
    for (double v : values_)
        s += v;
    return s;
}

double max_abs_diff(const Tensor3& a, const Tensor3& b)
{
    if (a.dims() != b.dims())
        throw ShapeError("max_abs_diff: " + to_string(a.dims()) + " vs " + to_string(b.dims()));
    double d = 0.0;
    for (Index p = 0; p < a.size(); ++p)
        d = std::max(d, std::abs(a.data()[p] - b.data()[p]));
    return d;
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("max_abs_diff: matrix shape mismatch");
    if (a.size() == 0)
        return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

void add_lateral_broadcast(Tensor3& target, const Tensor3& column)
{
    if (column.m() != 1 || column.ell() != target.ell() || column.n() != target.n())
        throw ShapeError("bias " + to_string(column.dims()) + " does not broadcast over " + to_string(target.dims()));
    const Index n = target.n();
    for (Index i = 0; i < target.ell(); ++i) {
        auto b = column.tube(i, 0);
        for (Index j = 0; j < target.m(); ++j) {
            auto t = target.tube(i, j);
            for (Index k = 0; k < n; ++k)
                t[k] += b[k];
        }
    }
}

Tensor3 sum_lateral(const Tensor3& a)
{
    Tensor3 out(a.ell(), 1, a.n());
    for (Index i = 0; i < a.ell(); ++i) {
        auto o = out.tube(i, 0);
        for (Index j = 0; j < a.m(); ++j) {
            auto t = a.tube(i, j);
            for (Index k = 0; k < a.n(); ++k)
                o[k] += t[k];
        }
    }
    return out;
}

Tensor3 lateral_range(const Tensor3& a, Index first, Index count)
{
    if (first < 0 || count < 1 || first + count > a.m())
        throw ShapeError("lateral_range out of bounds");
    Tensor3 out(a.ell(), count, a.n());
    for (Index i = 0; i < a.ell(); ++i)
        for (Index j = 0; j < count; ++j)
            std::copy_n(a.tube(i, first + j).data(), a.n(), out.tube(i, j).data());
    return out;
}

Tensor3 gather_lateral(const Tensor3& a, std::span<const Index> columns)
{
    if (columns.empty())
        throw ShapeError("gather_lateral: no columns");
    Tensor3 out(a.ell(), static_cast<Index>(columns.size()), a.n());
    for (Index i = 0; i < a.ell(); ++i)
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (columns[j] < 0 || columns[j] >= a.m())
                throw ShapeError("gather_lateral: column out of range");
            std::copy_n(a.tube(i, columns[j]).data(), a.n(), out.tube(i, static_cast<Index>(j)).data());
        }
    return out;
}

Matrix unfold(const Tensor3& a)
{
    const Index ell = a.ell();
    Matrix u(ell * a.n(), a.m());
    for (Index k = 0; k < a.n(); ++k)
        for (Index i = 0; i < ell; ++i)
            for (Index j = 0; j < a.m(); ++j)
                u(k * ell + i, j) = a(i, j, k);
    return u;
}

Tensor3 fold(const Matrix& u, Dims dims)
{
    if (u.rows() != dims.ell * dims.n || u.cols() != dims.m)
        throw ShapeError("fold: matrix is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                         ", target " + to_string(dims));
    Tensor3 a(dims);
    for (Index k = 0; k < dims.n; ++k)
        for (Index i = 0; i < dims.ell; ++i)
            for (Index j = 0; j < dims.m; ++j)
                a(i, j, k) = u(k * dims.ell + i, j);
    return a;
}

Matrix bcirc(const Tensor3& a)
{
    const Index rows = a.ell() * a.n();
    const Index cols = a.m() * a.n();
    if (rows * cols > kMaterializeCap)
        throw ShapeError("bcirc: " + std::to_string(rows) + "x" + std::to_string(cols) + " exceeds materialization cap");
    Matrix b(rows, cols);
    const Index n = a.n();
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) {
            const Index k = ((r - c) % n + n) % n;
            b.block(r * a.ell(), c * a.m(), a.ell(), a.m()) = a.frontal_slice(k);
        }
    return b;
}

Matrix circ(std::span<const double> a)
{
    const Index n = static_cast<Index>(a.size());
    if (n < 1)
        throw ShapeError("circ: empty tube");
    Matrix c(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index col = 0; col < n; ++col)
            c(r, col) = a[static_cast<std::size_t>(((r - col) % n + n) % n)];
    return c;
}

Matrix unfold3(const Tensor3& a)
{
    Matrix u(a.n(), a.ell() * a.m());
    for (Index j = 0; j < a.m(); ++j)
        for (Index i = 0; i < a.ell(); ++i) {
            auto t = a.tube(i, j);
            for (Index k = 0; k < a.n(); ++k)
                u(k, j * a.ell() + i) = t[k];
        }
    return u;
}

Tensor3 fold3(const Matrix& u, Dims dims)
{
    if (u.rows() != dims.n || u.cols() != dims.ell * dims.m)
        throw ShapeError("fold3: matrix shape does not match " + to_string(dims));
    Tensor3 a(dims);
    for (Index j = 0; j < dims.m; ++j)
        for (Index i = 0; i < dims.ell; ++i) {
            auto t = a.tube(i, j);
            for (Index k = 0; k < dims.n; ++k)
                t[k] = u(k, j * dims.ell + i);
        }
    return a;
}

Tensor3 mode3_product(const Tensor3& a, const Matrix& m)
{
    if (m.rows() != a.n() || m.cols() != a.n())
        throw ShapeError("mode3_product: transform is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         ", tubes have length " + std::to_string(a.n()));
    // Tubes are the columns of an n x (ell*m) column-major view.
    Tensor3 out(a.dims());
    Eigen::Map<const Matrix> in(a.data(), a.n(), a.ell() * a.m());
    Eigen::Map<Matrix> res(out.data(), a.n(), a.ell() * a.m());
    res.noalias() = m * in;
    return out;
}

std::vector<Matrix> frontal_slices(const Tensor3& a)
{
    std::vector<Matrix> s;
    s.reserve(static_cast<std::size_t>(a.n()));
    for (Index k = 0; k < a.n(); ++k)
        s.push_back(a.frontal_slice(k));
    return s;
}

Tensor3 facewise_product(const Tensor3& a, const Tensor3& b)
{
    if (a.m() != b.ell() || a.n() != b.n())
        throw ShapeError("facewise_product: " + to_string(a.dims()) + " with " + to_string(b.dims()));
    std::vector<Matrix> c(static_cast<std::size_t>(a.n()));
    for (Index k = 0; k < a.n(); ++k)
        c[static_cast<std::size_t>(k)].noalias() = a.frontal_slice(k) * b.frontal_slice(k);
    return Tensor3::from_frontal_slices(c);
}

}  // namespace tnn
