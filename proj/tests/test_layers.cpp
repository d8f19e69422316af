#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "support.hpp"
#include "tnn/layers.hpp"
#include "tnn/network.hpp"
#include "tnn/optim.hpp"
#include "tnn/tproducts.hpp"

using namespace tnn;
using namespace tnn::testing;

namespace {

TLinearLayer random_layer(Index out, Index in, Index n, Activation act, std::mt19937_64& gen, double scale = 0.5)
{
    return TLinearLayer(random_tensor({out, in, n}, gen, scale), random_tensor({out, 1, n}, gen, scale), act);
}

}  // namespace

TEST(TLinear, IdentityWeightLeavesInputUnchanged)
{
    std::mt19937_64 gen(1);
    const Tensor3 a = random_tensor({3, 4, 5}, gen);
    for (int alg = 0; alg < 2; ++alg) {
        const Transform t = algebra(alg, 5);
        TLinearLayer l(identity(3, t), Tensor3(3, 1, 5), Activation::Identity);
        EXPECT_LT(max_abs_diff(l.forward(a, t), a), 1e-13);
    }
}

TEST(TLinear, SingleSliceIsDenseLayer)
{
    std::mt19937_64 gen(2);
    const Tensor3 w = random_tensor({3, 4, 1}, gen), b = random_tensor({3, 1, 1}, gen), a = random_tensor({4, 6, 1}, gen);
    TLinearLayer l(w, b, Activation::Tanh);
    const Matrix expected =
        ((w.frontal_slice(0) * a.frontal_slice(0)).colwise() + b.frontal_slice(0).col(0)).array().tanh().matrix();
    EXPECT_LT(max_abs_diff(l.forward(a, Transform::circulant(1)).frontal_slice(0), expected), 1e-14);
}

TEST(TLinear, CirculantForwardMatchesBcircMatrixForm)
{
    std::mt19937_64 gen(3);
    const Tensor3 w = random_tensor({3, 2, 4}, gen), b = random_tensor({3, 1, 4}, gen), a = random_tensor({2, 5, 4}, gen);
    TLinearLayer l(w, b, Activation::Tanh);
    Tensor3 z = fold(bcirc(w) * unfold(a), {3, 5, 4});
    add_lateral_broadcast(z, b);
    for (double& v : z.values())
        v = std::tanh(v);
    EXPECT_LT(max_abs_diff(l.forward(a, Transform::circulant(4)), z), 1e-11);
}

TEST(TLinear, ZeroUpstreamGivesZeroGradients)
{
    std::mt19937_64 gen(4);
    auto l = random_layer(3, 2, 4, Activation::Tanh, gen);
    const Tensor3 a = random_tensor({2, 5, 4}, gen);
    const Transform t = Transform::dct(4);
    l.forward(a, t);
    const auto g = l.backward(Tensor3(3, 5, 4), a, t);
    EXPECT_EQ(g.input.frobenius_norm(), 0.0);
    EXPECT_EQ(g.weight.frobenius_norm(), 0.0);
    EXPECT_EQ(g.bias.frobenius_norm(), 0.0);
}

TEST(TLinear, BackwardWithoutForwardThrows)
{
    const auto l = TLinearLayer::zeros(2, 2, 3, Activation::Tanh);
    EXPECT_THROW(l.backward(Tensor3(2, 1, 3), Tensor3(2, 1, 3), Transform::circulant(3)), MissingCache);
}

TEST(TLinear, GradientsMatchFiniteDifferences)
{
    std::mt19937_64 gen(5);
    for (int alg = 0; alg < 2; ++alg)
        for (Activation act : {Activation::Tanh, Activation::Identity})
            for (int trial = 0; trial < 5; ++trial) {
                const Index out = uniform_index(gen, 1, 4), in = uniform_index(gen, 1, 4);
                const Index m = uniform_index(gen, 1, 3), n = uniform_index(gen, 1, 5);
                const Transform t = algebra(alg, n);
                auto l = random_layer(out, in, n, act, gen);
                Tensor3 a = random_tensor({in, m, n}, gen);
                const Tensor3 probe = random_tensor({out, m, n}, gen);
                auto f = [&] {
                    TLinearLayer copy = l;
                    return inner(probe, copy.forward(a, t));
                };
                l.forward(a, t);
                const auto g = l.backward(probe, a, t);
                EXPECT_LT(relative_error(g.input, numeric_gradient(f, a)), kFdTol);
                EXPECT_LT(relative_error(g.weight, numeric_gradient(f, l.weight())), kFdTol);
                EXPECT_LT(relative_error(g.bias, numeric_gradient(f, l.bias())), kFdTol);
            }
}

TEST(Residual, ZeroStepIsIdentityWithZeroGradients)
{
    std::mt19937_64 gen(6);
    ResidualLayer r(random_layer(3, 3, 4, Activation::Tanh, gen), 0.0);
    const Tensor3 a = random_tensor({3, 2, 4}, gen);
    const Transform t = Transform::circulant(4);
    EXPECT_EQ(r.forward(a, t), a);
    const auto g = r.backward(random_tensor({3, 2, 4}, gen), a, t);
    EXPECT_EQ(g.weight.frobenius_norm(), 0.0);
    EXPECT_EQ(g.bias.frobenius_norm(), 0.0);
}

TEST(Residual, ScalarClosedForm)
{
    ResidualLayer r(TLinearLayer(Tensor3({1, 1, 1}, {2.0}), Tensor3({1, 1, 1}, {0.5}), Activation::Identity), 0.25);
    const Tensor3 out = r.forward(Tensor3({1, 1, 1}, {3.0}), Transform::circulant(1));
    EXPECT_DOUBLE_EQ(out(0, 0, 0), 3.0 + 0.25 * (2.0 * 3.0 + 0.5));
}

TEST(Residual, RejectsNonSquareWeight)
{
    EXPECT_THROW(ResidualLayer(TLinearLayer::zeros(2, 3, 2, Activation::Tanh), 0.1), ShapeError);
}

TEST(Residual, GradientsMatchFiniteDifferences)
{
    std::mt19937_64 gen(7);
    for (int alg = 0; alg < 2; ++alg)
        for (int trial = 0; trial < 6; ++trial) {
            const Index w = uniform_index(gen, 1, 4), m = uniform_index(gen, 1, 3), n = uniform_index(gen, 1, 5);
            const Transform t = algebra(alg, n);
            ResidualLayer r(random_layer(w, w, n, Activation::Tanh, gen), 0.3);
            Tensor3 a = random_tensor({w, m, n}, gen);
            const Tensor3 probe = random_tensor({w, m, n}, gen);
            auto f = [&] {
                ResidualLayer copy = r;
                return inner(probe, copy.forward(a, t));
            };
            r.forward(a, t);
            const auto g = r.backward(probe, a, t);
            EXPECT_LT(relative_error(g.input, numeric_gradient(f, a)), kFdTol);
            EXPECT_LT(relative_error(g.weight, numeric_gradient(f, r.layer().weight())), kFdTol);
            EXPECT_LT(relative_error(g.bias, numeric_gradient(f, r.layer().bias())), kFdTol);
        }
}

TEST(Leapfrog, ZeroWeightsKeepInput)
{
    std::mt19937_64 gen(8);
    std::vector<TLinearLayer> layers(3, TLinearLayer::zeros(2, 2, 3, Activation::Tanh));
    LeapfrogBlock lf(layers, 0.5, 3);
    const Tensor3 a = random_tensor({2, 4, 3}, gen);
    EXPECT_EQ(lf.forward(a, Transform::circulant(3)), a);
    for (const auto& z : lf.momenta())
        EXPECT_EQ(z.frobenius_norm(), 0.0);
}

// Linear scalar leapfrog: z' = -w a, a' = w z, a rotation with angular
// speed w. Leapfrog tracks it to O(h^2) over a fixed time.
TEST(Leapfrog, LinearScalarTracksRotation)
{
    const double w = 1.3, a0 = 0.7, h = 0.01;
    const Index steps = 200;
    std::vector<TLinearLayer> layers(1, TLinearLayer(Tensor3({1, 1, 1}, {w}), Tensor3(1, 1, 1), Activation::Identity));
    LeapfrogBlock lf(layers, h, steps, true);
    const Tensor3 out = lf.forward(Tensor3({1, 1, 1}, {a0}), Transform::circulant(1));
    Eigen::Matrix2d k;
    k << 0, w, -w, 0;
    const Eigen::Matrix2d rot = (k * (h * static_cast<double>(steps))).exp();
    const double expected = (rot * Eigen::Vector2d(a0, 0.0))(0);
    EXPECT_NEAR(out(0, 0, 0), expected, 5.0 * h * std::abs(a0) * w);
}

TEST(Leapfrog, LinearRegimeNearlyConservesEnergy)
{
    std::mt19937_64 gen(9);
    const double h = 0.05;
    const Index steps = 20;
    for (int alg = 0; alg < 2; ++alg) {
        const Transform t = algebra(alg, 4);
        Tensor3 w = random_tensor({3, 3, 4}, gen, 0.3);
        std::vector<TLinearLayer> layers(1, TLinearLayer(w, Tensor3(3, 1, 4), Activation::Identity));
        LeapfrogBlock lf(layers, h, steps, true);
        const Tensor3 a = random_tensor({3, 2, 4}, gen);
        lf.forward(a, t);
        const double e0 = a.squared_norm();
        for (Index j = 1; j < steps; ++j) {
            const double e = lf.positions()[static_cast<std::size_t>(j)].squared_norm() +
                             lf.momenta()[static_cast<std::size_t>(j - 1)].squared_norm();
            EXPECT_LT(std::abs(e / e0 - 1.0), 5.0 * h * h * static_cast<double>(steps));
        }
    }
}

TEST(Leapfrog, SingleStepScalarChainRule)
{
    // z = -h w a - h b, out = a + h (w z + b) with identity activation.
    const double w = 0.8, b = 0.3, h = 0.5, a = 1.1;
    std::vector<TLinearLayer> layers(1, TLinearLayer(Tensor3({1, 1, 1}, {w}), Tensor3({1, 1, 1}, {b}), Activation::Identity));
    LeapfrogBlock lf(layers, h, 1);
    const Transform t = Transform::circulant(1);
    lf.forward(Tensor3({1, 1, 1}, {a}), t);
    const auto g = lf.backward(Tensor3({1, 1, 1}, {1.0}), t);
    const double z = -h * (w * a + b);
    EXPECT_NEAR(g.input(0, 0, 0), 1.0 - h * h * w * w, 1e-15);
    EXPECT_NEAR(g.weights[0](0, 0, 0), h * z - h * h * w * a, 1e-15);
    EXPECT_NEAR(g.biases[0](0, 0, 0), h - h * h * w, 1e-15);
}

TEST(Leapfrog, ZeroUpstreamGivesZeroGradients)
{
    std::mt19937_64 gen(10);
    std::vector<TLinearLayer> layers;
    for (int s = 0; s < 3; ++s)
        layers.push_back(random_layer(2, 2, 3, Activation::Tanh, gen));
    LeapfrogBlock lf(layers, 0.2, 3);
    const Transform t = Transform::dct(3);
    lf.forward(random_tensor({2, 2, 3}, gen), t);
    const auto g = lf.backward(Tensor3(2, 2, 3), t);
    EXPECT_EQ(g.input.frobenius_norm(), 0.0);
    for (const auto& x : g.weights)
        EXPECT_EQ(x.frobenius_norm(), 0.0);
}

TEST(Leapfrog, GradientsMatchFiniteDifferences)
{
    std::mt19937_64 gen(11);
    for (int alg = 0; alg < 2; ++alg)
        for (bool shared : {false, true})
            for (int trial = 0; trial < 3; ++trial) {
                const Index w = uniform_index(gen, 1, 3), m = uniform_index(gen, 1, 3), n = uniform_index(gen, 2, 4);
                const Index depth = uniform_index(gen, 1, 4);
                const Transform t = algebra(alg, n);
                std::vector<TLinearLayer> layers;
                for (Index s = 0; s < (shared ? 1 : depth); ++s)
                    layers.push_back(random_layer(w, w, n, Activation::Tanh, gen, 0.8));
                LeapfrogBlock lf(layers, 0.4, depth, shared);
                Tensor3 a = random_tensor({w, m, n}, gen);
                const Tensor3 probe = random_tensor({w, m, n}, gen);
                auto f = [&] {
                    LeapfrogBlock copy = lf;
                    return inner(probe, copy.forward(a, t));
                };
                lf.forward(a, t);
                const auto g = lf.backward(probe, t);
                EXPECT_LT(relative_error(g.input, numeric_gradient(f, a)), kFdTol);
                for (std::size_t s = 0; s < layers.size(); ++s) {
                    EXPECT_LT(relative_error(g.weights[s], numeric_gradient(f, lf.layers()[s].weight())), kFdTol);
                    EXPECT_LT(relative_error(g.biases[s], numeric_gradient(f, lf.layers()[s].bias())), kFdTol);
                }
            }
}

TEST(ParamCount, MatchesLayerShapes)
{
    NetworkSpec s;
    s.input_width = 28;
    s.n = 28;
    s.classes = 10;
    EXPECT_EQ(weight_count(s), 10 * 28 * 28);
    s.blocks.push_back({BlockKind::TLinear, 28, 1, 0.1, Activation::Tanh, false});
    EXPECT_EQ(param_count(s), 28 * 28 * 28 + 28 * 28 + 10 * 28 * 28);

    NetworkSpec cube;
    cube.input_width = 5;
    cube.n = 5;
    cube.blocks.push_back({BlockKind::TLinear, 5, 1, 0.1, Activation::Tanh, false});
    NetworkSpec flat;
    flat.input_width = 25;
    flat.n = 1;
    flat.blocks.push_back({BlockKind::TLinear, 25, 1, 0.1, Activation::Tanh, false});
    EXPECT_EQ(weight_count(cube) - cube.classes * 5 * 5, 125);
    EXPECT_EQ(weight_count(flat) - flat.classes * 25, 625);
}

TEST(ParamCount, EmptySpec)
{
    NetworkSpec s;
    s.classes = 0;
    EXPECT_EQ(param_count(s), 0);
}

TEST(Network, InitializedParametersMatchCount)
{
    NetworkSpec s;
    s.input_width = 3;
    s.n = 4;
    s.classes = 3;
    s.classifier_bias = true;
    s.blocks = {{BlockKind::TLinear, 5, 1, 0.1, Activation::ReLU, false},
                {BlockKind::Residual, 0, 2, 0.1, Activation::Tanh, false},
                {BlockKind::Leapfrog, 0, 3, 0.1, Activation::Tanh, false}};
    Network net = Network::initialize(s, 3);
    Index total = 0;
    for (const auto* p : std::as_const(net).parameters())
        total += p->size();
    EXPECT_EQ(total, param_count(s));
    const auto chains = net.weight_chains();
    ASSERT_EQ(chains.size(), 2u);
    EXPECT_EQ(chains[0].params.size(), 2u);
    EXPECT_EQ(chains[1].params.size(), 3u);
}

TEST(Network, EndToEndGradientMatchesFiniteDifferences)
{
    std::mt19937_64 gen(12);
    for (int alg = 0; alg < 2; ++alg) {
        NetworkSpec s;
        s.input_width = 3;
        s.n = 4;
        s.classes = 3;
        s.transform = alg == 0 ? TransformKind::Circulant : TransformKind::Orthogonal;
        s.classifier_bias = true;
        s.blocks = {{BlockKind::TLinear, 2, 1, 0.1, Activation::Tanh, false},
                    {BlockKind::Leapfrog, 0, 2, 0.5, Activation::Tanh, false}};
        Network net = Network::initialize(s, 7);
        Tensor3 a = random_tensor({3, 4, 4}, gen);
        const std::vector<int> labels = {1, 3, 2, 3};
        const double lambda = 0.7;

        auto objective = [&](Network& nw) {
            const Tensor3 x = nw.forward(a);
            double v = loss_input_gradient(x, labels, nw.transform()).loss;
            for (const auto& chain : nw.weight_chains()) {
                std::vector<Tensor3> w;
                for (std::size_t i : chain.params)
                    w.push_back(*nw.parameters()[i].tensor);
                v += lambda * smoothness_regularizer(w, chain.h).value;
            }
            return v;
        };

        const Tensor3 x = net.forward(a);
        auto grads = net.backward(loss_input_gradient(x, labels, net.transform()).grad);
        for (const auto& chain : net.weight_chains()) {
            std::vector<Tensor3> w;
            for (std::size_t i : chain.params)
                w.push_back(*net.parameters()[i].tensor);
            const auto reg = smoothness_regularizer(w, chain.h);
            for (std::size_t k = 0; k < chain.params.size(); ++k)
                grads[chain.params[k]].axpy(lambda, reg.gradients[k]);
        }
        const Tensor3 d_input = net.input_gradient();

        auto params = net.parameters();
        ASSERT_EQ(params.size(), grads.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto f = [&] { return objective(net); };
            EXPECT_LT(relative_error(grads[i], numeric_gradient(f, *params[i].tensor)), kFdTol) << params[i].name;
        }
        auto f = [&] { return objective(net); };
        EXPECT_LT(relative_error(d_input, numeric_gradient(f, a)), kFdTol);
    }
}

TEST(Classify, IdentityClassifierOnZeroFeaturesIsUniform)
{
    const Transform t = Transform::circulant(3);
    const auto p = classify(identity(4, t), Tensor3(4, 5, 3), t);
    EXPECT_LT((p.probs.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(Classify, SingleSliceIsClassicalSoftmax)
{
    std::mt19937_64 gen(13);
    const Tensor3 w = random_tensor({3, 2, 1}, gen), a = random_tensor({2, 4, 1}, gen);
    const auto p = classify(w, a, Transform::circulant(1));
    const Matrix logits = w.frontal_slice(0) * a.frontal_slice(0);
    for (Index j = 0; j < 4; ++j) {
        const Vector e = (logits.col(j).array() - logits.col(j).maxCoeff()).exp();
        EXPECT_LT((p.probs.col(j) - e / e.sum()).cwiseAbs().maxCoeff(), 1e-15);
    }
}
