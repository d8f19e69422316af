#pragma once

// Tubal softmax, tensor cross-entropy and their gradients.
//
// For a p x m x n classifier output X, the tubal softmax h applies the
// ordinary p-vector softmax to every lateral slice independently in each
// transform-domain slice and maps back. The scalar tubal softmax then sums
// each output tube along mode 3, giving a p x m matrix of class
// probabilities.
//
// In the circulant algebra the tubes of every lateral slice of h(X) sum
// to e1, so the p probabilities are non-negative and sum to 1. Other
// transforms do not guarantee this; a safeguard clamps negative entries
// to zero and renormalizes each column, and the pre-safeguard deviation
// |sum - 1| is reported per column.
//
// Class labels are 1-based: labels[i] in 1..p.

#include <span>
#include <stdexcept>
#include <vector>

#include "tnn/tensor3.hpp"
#include "tnn/transform.hpp"

namespace tnn {

class DegenerateColumn : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDegenerateColumnTol = 1e-8;
inline constexpr double kProbabilityFloor = 1e-15;

struct ProbabilityMatrix {
    Matrix probs;          // p x m, columns sum to 1
    Vector raw_sums;       // pre-safeguard column sums
    Index clamped = 0;     // negative entries set to zero
    double max_residual() const;
};

Tensor3 tubal_softmax(const Tensor3& x, const Transform& t);
ProbabilityMatrix scalar_tubal_softmax(const Tensor3& x, const Transform& t);

enum class Reduction { Sum, Mean };

struct CrossEntropy {
    double value = 0.0;
    Index clamped = 0;  // probabilities raised to kProbabilityFloor before the log
};

// -sum_i log P(c_i, i), or its mean over samples.
CrossEntropy cross_entropy(const ProbabilityMatrix& p, std::span<const int> labels, Reduction r = Reduction::Sum);

struct LossGradient {
    double loss = 0.0;
    Tensor3 grad;            // dLoss/dX
    ProbabilityMatrix probs;
    Index clamped = 0;
};

// Loss and dLoss/dX of cross_entropy(scalar_tubal_softmax(X)).
LossGradient loss_input_gradient(const Tensor3& x, std::span<const int> labels, const Transform& t,
                                 Reduction r = Reduction::Sum);

// 1/2 sum ||P - onehot(labels)||^2 on the scalar tubal softmax output.
// Used by the spheres experiment only.
LossGradient least_squares_gradient(const Tensor3& x, std::span<const int> labels, const Transform& t,
                                    Reduction r = Reduction::Sum);

// Argmax of each column, ties to the lowest class; 1-based.
std::vector<int> predict(const ProbabilityMatrix& p);
Index count_correct(const ProbabilityMatrix& p, std::span<const int> labels);

}  // namespace tnn
