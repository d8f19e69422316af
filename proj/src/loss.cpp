#include "tnn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "spectral.hpp"

namespace tnn {
namespace {

using detail::Complex;

// Softmax over the class index i of v(0..p-1), in place. Shifting by the
// largest real part leaves the result unchanged and keeps exp finite.
template <typename T>
void softmax_inplace(std::vector<T>& v)
{
    double shift = -std::numeric_limits<double>::infinity();
    for (const T& x : v)
        shift = std::max(shift, std::real(x));
    T total{};
    for (T& x : v) {
        x = std::exp(x - shift);
        total += x;
    }
    for (T& x : v)
        x /= total;
}

// Transform-domain softmax values retained for the backward pass.
struct SoftmaxState {
    Tensor3 y;                   // h(X), spatial domain
    Tensor3 real_probs;          // real kinds: softmax in the transform domain
    detail::Spectrum spectrum;   // circulant: softmax of the half spectrum
    // Tube sums of y, p x m, read off the transform domain: the zero
    // frequency bin, or c^T yhat with c the column sums of M^-1. These add
    // non-negative terms, where summing y itself cancels and loses the
    // relative accuracy of small probabilities.
    Matrix sums;
};

SoftmaxState softmax_forward(const Tensor3& x, const Transform& t)
{
    if (t.n() != x.n())
        throw ShapeError("tubal_softmax: transform size does not match tubes");
    const Index p = x.ell();
    SoftmaxState st;
    if (t.is_circulant()) {
        st.spectrum = detail::rfft_tubes(x);
        std::vector<Complex> col(static_cast<std::size_t>(p));
        for (Index j = 0; j < x.m(); ++j)
            for (Index f = 0; f < st.spectrum.bins; ++f) {
                for (Index i = 0; i < p; ++i)
                    col[static_cast<std::size_t>(i)] = st.spectrum.at(i, j, f);
                softmax_inplace(col);
                for (Index i = 0; i < p; ++i)
                    st.spectrum.at(i, j, f) = col[static_cast<std::size_t>(i)];
            }
        st.y = detail::irfft_tubes(st.spectrum);
        st.sums.resize(p, x.m());
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < x.m(); ++j)
                st.sums(i, j) = st.spectrum.at(i, j, 0).real();
        return st;
    }
    st.real_probs = mode3_product(x, t.matrix());
    std::vector<double> col(static_cast<std::size_t>(p));
    for (Index j = 0; j < x.m(); ++j)
        for (Index k = 0; k < x.n(); ++k) {
            for (Index i = 0; i < p; ++i)
                col[static_cast<std::size_t>(i)] = st.real_probs(i, j, k);
            softmax_inplace(col);
            for (Index i = 0; i < p; ++i)
                st.real_probs(i, j, k) = col[static_cast<std::size_t>(i)];
        }
    st.y = mode3_product(st.real_probs, t.inverse_matrix());
    const Vector c = t.inverse_matrix().colwise().sum().transpose();
    st.sums.resize(p, x.m());
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < x.m(); ++j)
            st.sums(i, j) = Vector::Map(st.real_probs.tube(i, j).data(), x.n()).dot(c);
    return st;
}

// Adjoint of X -> h(X): maps dF/dY to dF/dX. Per transform slice the
// softmax Jacobian is J = diag(s) - s s^T; the real kinds apply J^T = J
// between x3 M and x3 M^T, the circulant kind applies J^H to the
// spectrum of dF/dY.
Tensor3 softmax_backward(const SoftmaxState& st, const Tensor3& dy, const Transform& t)
{
    const Index p = dy.ell();
    if (t.is_circulant()) {
        detail::Spectrum g = detail::rfft_tubes(dy);
        for (Index j = 0; j < dy.m(); ++j)
            for (Index f = 0; f < g.bins; ++f) {
                Complex dot{};
                for (Index i = 0; i < p; ++i)
                    dot += std::conj(st.spectrum.at(i, j, f)) * g.at(i, j, f);
                for (Index i = 0; i < p; ++i)
                    g.at(i, j, f) = std::conj(st.spectrum.at(i, j, f)) * (g.at(i, j, f) - dot);
            }
        return detail::irfft_tubes(g);
    }
    Tensor3 g = mode3_product(dy, t.inverse_matrix().transpose());
    for (Index j = 0; j < dy.m(); ++j)
        for (Index k = 0; k < dy.n(); ++k) {
            double dot = 0.0;
            for (Index i = 0; i < p; ++i)
                dot += st.real_probs(i, j, k) * g(i, j, k);
            for (Index i = 0; i < p; ++i)
                g(i, j, k) = st.real_probs(i, j, k) * (g(i, j, k) - dot);
        }
    return mode3_product(g, t.matrix().transpose());
}

ProbabilityMatrix safeguard(const Matrix& q)
{
    ProbabilityMatrix out;
    out.raw_sums = q.colwise().sum().transpose();
    out.probs = q;
    for (Index j = 0; j < q.cols(); ++j) {
        double total = 0.0;
        for (Index i = 0; i < q.rows(); ++i) {
            if (out.probs(i, j) < 0.0) {
                out.probs(i, j) = 0.0;
                ++out.clamped;
            }
            total += out.probs(i, j);
        }
        if (total < kDegenerateColumnTol)
            throw DegenerateColumn("scalar_tubal_softmax: column " + std::to_string(j + 1) + " sums to " +
                                   std::to_string(total));
        out.probs.col(j) /= total;
    }
    return out;
}

void check_labels(std::span<const int> labels, Index p, Index m)
{
    if (static_cast<Index>(labels.size()) != m)
        throw ShapeError("labels: expected " + std::to_string(m) + ", got " + std::to_string(labels.size()));
    for (int c : labels)
        if (c < 1 || c > p)
            throw std::out_of_range("label " + std::to_string(c) + " outside 1.." + std::to_string(p));
}

// Backpropagates dF/dP through the safeguard, the tube sum and h.
Tensor3 probabilities_backward(const SoftmaxState& st, const Matrix& q, const ProbabilityMatrix& pm,
                               const Matrix& dp, const Transform& t)
{
    const Index p = q.rows();
    Tensor3 dy(st.y.dims());
    for (Index j = 0; j < q.cols(); ++j) {
        double total = 0.0;
        for (Index i = 0; i < p; ++i)
            total += std::max(q(i, j), 0.0);
        const double dot = dp.col(j).dot(pm.probs.col(j));
        for (Index i = 0; i < p; ++i) {
            const double dq = q(i, j) > 0.0 ? (dp(i, j) - dot) / total : 0.0;
            for (double& v : dy.tube(i, j))
                v = dq;
        }
    }
    return softmax_backward(st, dy, t);
}

}  // namespace

double ProbabilityMatrix::max_residual() const
{
    double r = 0.0;
    for (Index j = 0; j < raw_sums.size(); ++j)
        r = std::max(r, std::abs(raw_sums(j) - 1.0));
    return r;
}

Tensor3 tubal_softmax(const Tensor3& x, const Transform& t)
{
    return softmax_forward(x, t).y;
}

ProbabilityMatrix scalar_tubal_softmax(const Tensor3& x, const Transform& t)
{
    return safeguard(softmax_forward(x, t).sums);
}

CrossEntropy cross_entropy(const ProbabilityMatrix& p, std::span<const int> labels, Reduction r)
{
    check_labels(labels, p.probs.rows(), p.probs.cols());
    CrossEntropy ce;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        double v = p.probs(labels[i] - 1, static_cast<Index>(i));
        if (v < kProbabilityFloor) {
            v = kProbabilityFloor;
            ++ce.clamped;
        }
        ce.value -= std::log(v);
    }
    if (r == Reduction::Mean)
        ce.value /= static_cast<double>(labels.size());
    return ce;
}

LossGradient loss_input_gradient(const Tensor3& x, std::span<const int> labels, const Transform& t, Reduction r)
{
    check_labels(labels, x.ell(), x.m());
    const SoftmaxState st = softmax_forward(x, t);
    const Matrix& q = st.sums;
    LossGradient out;
    out.probs = safeguard(q);
    const CrossEntropy ce = cross_entropy(out.probs, labels, r);
    out.loss = ce.value;
    out.clamped = ce.clamped;

    const double scale = r == Reduction::Mean ? 1.0 / static_cast<double>(labels.size()) : 1.0;
    Matrix dp = Matrix::Zero(q.rows(), q.cols());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double v = out.probs.probs(labels[i] - 1, static_cast<Index>(i));
        if (v >= kProbabilityFloor)
            dp(labels[i] - 1, static_cast<Index>(i)) = -scale / v;
    }
    out.grad = probabilities_backward(st, q, out.probs, dp, t);
    return out;
}

LossGradient least_squares_gradient(const Tensor3& x, std::span<const int> labels, const Transform& t, Reduction r)
{
    check_labels(labels, x.ell(), x.m());
    const SoftmaxState st = softmax_forward(x, t);
    const Matrix& q = st.sums;
    LossGradient out;
    out.probs = safeguard(q);

    const double scale = r == Reduction::Mean ? 1.0 / static_cast<double>(labels.size()) : 1.0;
    Matrix dp = out.probs.probs;
    for (std::size_t i = 0; i < labels.size(); ++i)
        dp(labels[i] - 1, static_cast<Index>(i)) -= 1.0;
    out.loss = 0.5 * scale * dp.squaredNorm();
    dp *= scale;
    out.grad = probabilities_backward(st, q, out.probs, dp, t);
    return out;
}

std::vector<int> predict(const ProbabilityMatrix& p)
{
    std::vector<int> out(static_cast<std::size_t>(p.probs.cols()));
    for (Index j = 0; j < p.probs.cols(); ++j) {
        Index best = 0;
        for (Index i = 1; i < p.probs.rows(); ++i)
            if (p.probs(i, j) > p.probs(best, j))
                best = i;
        out[static_cast<std::size_t>(j)] = static_cast<int>(best) + 1;
    }
    return out;
}

Index count_correct(const ProbabilityMatrix& p, std::span<const int> labels)
{
    const auto pred = predict(p);
    if (pred.size() != labels.size())
        throw ShapeError("count_correct: label count mismatch");
    Index correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        correct += pred[i] == labels[i];
    return correct;
}

}  // namespace tnn
