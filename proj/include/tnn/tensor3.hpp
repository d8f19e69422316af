#pragma once

// Dense third-order tensors.
//
// A Tensor3 of shape ell x m x n holds real values A(i, j, k) with
// i in [0, ell), j in [0, m), k in [0, n). Documentation and diagnostics
// use the usual 1-based slice numbering: frontal slice A^(k+1) is the
// ell x m matrix obtained by fixing k, lateral slice j+1 is the ell x n
// matrix obtained by fixing j, and tube (i+1, j+1) is the length-n fiber
// obtained by fixing i and j.
//
// Storage is tube-contiguous (mode 3 varies fastest):
//
//     offset(i, j, k) = (i * m + j) * n + k
//
// so a tube is a contiguous span of n doubles and transform-domain work,
// which is applied tube by tube, streams through memory. Frontal slices
// are gathered with a stride of n.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tnn {

using Index = std::ptrdiff_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Dims {
    Index ell = 1;
    Index m = 1;
    Index n = 1;

    Index size() const { return ell * m * n; }
    friend bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

class Tensor3 {
public:
    Tensor3() : Tensor3(1, 1, 1) {}
    Tensor3(Index ell, Index m, Index n);
    explicit Tensor3(Dims dims) : Tensor3(dims.ell, dims.m, dims.n) {}
    Tensor3(Dims dims, std::vector<double> values);

    static Tensor3 constant(Dims dims, double value);
    // Builds a tensor from its frontal slices A^(1), ..., A^(n).
    static Tensor3 from_frontal_slices(std::span<const Matrix> slices);

    Dims dims() const { return dims_; }
    Index ell() const { return dims_.ell; }
    Index m() const { return dims_.m; }
    Index n() const { return dims_.n; }
    Index size() const { return static_cast<Index>(values_.size()); }

    double& operator()(Index i, Index j, Index k) { return values_[offset(i, j, k)]; }
    double operator()(Index i, Index j, Index k) const { return values_[offset(i, j, k)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    std::span<double> tube(Index i, Index j) { return {values_.data() + offset(i, j, 0), static_cast<std::size_t>(dims_.n)}; }
    std::span<const double> tube(Index i, Index j) const { return {values_.data() + offset(i, j, 0), static_cast<std::size_t>(dims_.n)}; }

    Matrix frontal_slice(Index k) const;
    void set_frontal_slice(Index k, const Matrix& slice);
    // ell x n matrix; column k is the k-th entry of every tube in lateral slice j.
    Matrix lateral_slice(Index j) const;
    void set_lateral_slice(Index j, const Matrix& slice);

    Tensor3& operator+=(const Tensor3& other);
    Tensor3& operator-=(const Tensor3& other);
    Tensor3& operator*=(double s);
    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
    friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
    friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }

    // this += s * other
    void axpy(double s, const Tensor3& other);
    Tensor3 hadamard(const Tensor3& other) const;
    void fill(double v);

    double frobenius_norm() const;
    double squared_norm() const;
    double sum() const;

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    Index offset(Index i, Index j, Index k) const { return (i * dims_.m + j) * dims_.n + k; }

    Dims dims_;
    std::vector<double> values_;
};

double max_abs_diff(const Tensor3& a, const Tensor3& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Broadcasts an ell x 1 x n tensor across m lateral slices and adds it.
void add_lateral_broadcast(Tensor3& target, const Tensor3& column);
// Sum over lateral slices (mode 2): ell x m x n -> ell x 1 x n.
Tensor3 sum_lateral(const Tensor3& a);
// Lateral slices [first, first + count) as a new ell x count x n tensor.
Tensor3 lateral_range(const Tensor3& a, Index first, Index count);
Tensor3 gather_lateral(const Tensor3& a, std::span<const Index> columns);

// Upper bound on entries of the dense matrices materialized by bcirc and
// the Kronecker oracle.
inline constexpr Index kMaterializeCap = 1'000'000;

// unfold stacks the frontal slices vertically, A^(1) on top:
// an (ell*n) x m matrix. fold inverts it for the given target dims.
Matrix unfold(const Tensor3& a);
Tensor3 fold(const Matrix& u, Dims dims);

// Block-circulant matrix, (ell*n) x (m*n), block (r, c) = A^(((r - c) mod n) + 1).
Matrix bcirc(const Tensor3& a);

// n x n circulant matrix with first column a.
Matrix circ(std::span<const double> a);

// n x (ell*m) matrix whose columns are the tubes of A. Column index is
// j * ell + i (lateral index major, row index minor).
Matrix unfold3(const Tensor3& a);
Tensor3 fold3(const Matrix& u, Dims dims);

// Replaces every tube t of A by M * t.
Tensor3 mode3_product(const Tensor3& a, const Matrix& m);

// C^(k) = A^(k) * B^(k) for every frontal slice.
Tensor3 facewise_product(const Tensor3& a, const Tensor3& b);

std::vector<Matrix> frontal_slices(const Tensor3& a);

}  // namespace tnn
