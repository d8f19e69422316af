// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   tnn_acceptance            run criteria 1..10
//   tnn_acceptance 3 7        run the listed criteria
//
// Criteria 7, 9 and 10 read MNIST and CIFAR-10 below $TNN_DATA_ROOT.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "support.hpp"
#include "tnn/commands.hpp"
#include "tnn/config.hpp"
#include "tnn/loss.hpp"
#include "tnn/optim.hpp"
#include "tnn/tproducts.hpp"

using namespace tnn;
using namespace tnn::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Dims random_dims(std::mt19937_64& gen, Index max_side)
{
    return {uniform_index(gen, 1, max_side), uniform_index(gen, 1, max_side), uniform_index(gen, 1, max_side)};
}

RunConfig preset(const std::string& name, const fs::path& out)
{
    RunConfig c = load_config(fs::path(TNN_SOURCE_DIR) / "configs" / (name + ".ini"));
    c.output = out;
    return c;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("tnn-acceptance-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Outcome algebra_oracles()
{
    const auto start = Clock::now();
    std::mt19937_64 gen(101);
    double oracle = 0.0, paths = 0.0, facewise = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Dims da = random_dims(gen, 6);
        const Tensor3 a = random_tensor(da, gen), b = random_tensor({da.m, uniform_index(gen, 1, 6), da.n}, gen);
        const Tensor3 direct = t_product(a, b, ProductPath::Direct);
        oracle = std::max(oracle, max_abs_diff(direct, fold(bcirc(a) * unfold(b), {a.ell(), b.m(), a.n()})));
        paths = std::max(paths, max_abs_diff(direct, t_product(a, b, ProductPath::Fourier)));
        facewise = std::max(facewise, max_abs_diff(m_product(a, b, Transform::identity(da.n)), facewise_product(a, b)));
    }
    const double secs = seconds_since(start);
    return {oracle <= 1e-12 && paths <= 1e-10 && facewise <= 1e-14 && secs < 10.0,
            "bcirc oracle " + fmt("%.2e", oracle) + ", paths " + fmt("%.2e", paths) + ", facewise " +
                fmt("%.2e", facewise) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome transpose_bcirc()
{
    std::mt19937_64 gen(102);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Tensor3 a = random_tensor(random_dims(gen, 6), gen);
        worst = std::max(worst, (bcirc(t_transpose(a)) - bcirc(a).transpose()).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-12, "max deviation " + fmt("%.2e", worst) + " over 50 cases"};
}

struct GradientStats {
    int checks = 0;
    int failures = 0;
    double worst = 0.0;

    void record(double err)
    {
        ++checks;
        worst = std::max(worst, err);
        if (!(err <= kFdTol))
            ++failures;
    }
};

// Every parameter and the input of a random small network under the full
// objective: loss + lambda * smoothness over the weight chains.
void network_gradients(int alg, std::mt19937_64& gen, GradientStats& st)
{
    NetworkSpec s;
    s.input_width = uniform_index(gen, 1, 3);
    s.n = uniform_index(gen, 1, 4);
    s.classes = uniform_index(gen, 2, 4);
    s.transform = alg == 0 ? TransformKind::Circulant : TransformKind::Orthogonal;
    s.classifier_bias = gen() % 2 == 0;
    const Index width = uniform_index(gen, 1, 3);
    s.blocks = {{BlockKind::TLinear, width, 1, 0.1, Activation::Tanh, false},
                {BlockKind::Residual, 0, uniform_index(gen, 1, 3), 0.4, Activation::Tanh, false},
                {BlockKind::Leapfrog, 0, uniform_index(gen, 1, 3), 0.5, Activation::Tanh, gen() % 4 == 0}};
    Network net = Network::initialize(s, gen());
    for (auto& p : net.parameters())
        *p.tensor = random_tensor(p.tensor->dims(), gen, 0.7);
    const Index m = uniform_index(gen, 1, 3);
    Tensor3 a = random_tensor({s.input_width, m, s.n}, gen);
    std::vector<int> labels(static_cast<std::size_t>(m));
    for (int& l : labels)
        l = static_cast<int>(uniform_index(gen, 1, s.classes));
    const double lambda = 0.3;
    const Reduction red = gen() % 2 == 0 ? Reduction::Sum : Reduction::Mean;

    auto objective = [&] {
        double v = loss_input_gradient(net.forward(a), labels, net.transform(), red).loss;
        for (const auto& chain : net.weight_chains()) {
            std::vector<Tensor3> w;
            for (std::size_t i : chain.params)
                w.push_back(*net.parameters()[i].tensor);
            v += lambda * smoothness_regularizer(w, chain.h).value;
        }
        return v;
    };

    const Tensor3 x = net.forward(a);
    auto grads = net.backward(loss_input_gradient(x, labels, net.transform(), red).grad);
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
    for (std::size_t i = 0; i < params.size(); ++i)
        st.record(relative_error(grads[i], numeric_gradient(objective, *params[i].tensor)));
    st.record(relative_error(d_input, numeric_gradient(objective, a)));
}

void loss_gradients(int alg, std::mt19937_64& gen, GradientStats& st)
{
    const Index p = uniform_index(gen, 2, 5), m = uniform_index(gen, 1, 4), n = uniform_index(gen, 1, 6);
    const Transform t = alg == 0 ? Transform::circulant(n) : Transform::dct(n);
    Tensor3 x = random_tensor({p, m, n}, gen);
    std::vector<int> labels(static_cast<std::size_t>(m));
    for (int& l : labels)
        l = static_cast<int>(uniform_index(gen, 1, p));
    const LossGradient g = loss_input_gradient(x, labels, t);
    st.record(relative_error(
        g.grad, numeric_gradient([&] { return cross_entropy(scalar_tubal_softmax(x, t), labels).value; }, x)));
}

void regularizer_gradients(std::mt19937_64& gen, GradientStats& st)
{
    const Dims d = random_dims(gen, 4);
    std::vector<Tensor3> ws;
    for (Index j = 0, len = uniform_index(gen, 2, 6); j < len; ++j)
        ws.push_back(random_tensor(d, gen));
    const double h = 0.1 + 0.9 * std::uniform_real_distribution<double>()(gen);
    const Regularization r = smoothness_regularizer(ws, h);
    for (std::size_t j = 0; j < ws.size(); ++j)
        st.record(relative_error(r.gradients[j],
                                 numeric_gradient([&] { return smoothness_regularizer(ws, h).value; }, ws[j])));
}

Outcome gradient_suite()
{
    const auto start = Clock::now();
    std::mt19937_64 gen(103);
    GradientStats st;
    for (int alg = 0; alg < 2; ++alg)
        for (int trial = 0; trial < 50; ++trial) {
            network_gradients(alg, gen, st);
            loss_gradients(alg, gen, st);
        }
    for (int trial = 0; trial < 50; ++trial)
        regularizer_gradients(gen, st);
    const double secs = seconds_since(start);
    return {st.failures == 0 && secs < 120.0,
            std::to_string(st.checks) + " tensor checks, " + std::to_string(st.failures) + " above 1e-5, worst " +
                fmt("%.2e", st.worst) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome tubal_probability()
{
    std::mt19937_64 gen(104);
    double tubes = 0.0, columns = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index p = uniform_index(gen, 2, 6), m = uniform_index(gen, 1, 5), n = uniform_index(gen, 1, 8);
        const Tensor3 x = random_tensor({p, m, n}, gen, 2.0);
        const Transform t = Transform::circulant(n);
        const Tensor3 y = tubal_softmax(x, t);
        for (Index j = 0; j < m; ++j)
            for (Index k = 0; k < n; ++k) {
                double s = 0.0;
                for (Index i = 0; i < p; ++i)
                    s += y(i, j, k);
                tubes = std::max(tubes, std::abs(s - (k == 0 ? 1.0 : 0.0)));
            }
        columns = std::max(columns, scalar_tubal_softmax(x, t).max_residual());
    }
    return {tubes <= 1e-12 && columns <= 1e-12,
            "tube sum vs e1 " + fmt("%.2e", tubes) + ", column sums " + fmt("%.2e", columns) + " over 100 cases"};
}

Outcome stability_spectrum()
{
    std::mt19937_64 gen(105);
    double worst = 0.0;
    for (Index m = 1; m <= 6; ++m)
        for (Index n = 1; n <= 6; ++n)
            for (int rep = 0; rep < 3; ++rep)
                worst = std::max(worst, antisymmetric_system_spectrum(random_tensor({m, m, n}, gen, 2.0)).max_abs_real);
    return {worst <= 1e-10, "max |Re lambda| " + fmt("%.2e", worst) + " over 108 weights up to 6x6x6"};
}

Outcome spheres()
{
    const RunConfig c = preset("spheres", scratch("spheres"));
    std::ostringstream log;
    const auto results = cmd_spheres(c, log);
    const SpheresResult* leap = nullptr;
    const SpheresResult* euler = nullptr;
    for (const auto& r : results) {
        if (r.variant.kind == BlockKind::Leapfrog && r.variant.h == 1.0)
            leap = &r;
        if (r.variant.kind == BlockKind::Residual && r.variant.h == 0.5)
            euler = &r;
    }
    if (!leap || !euler)
        return {false, "preset lacks the leapfrog h=1 or Euler h=0.5 variant"};
    const bool leap_ok = leap->seconds < 60.0 && leap->train_accuracy >= 0.9 && leap->max_norm_ratio <= 10.0;
    const bool euler_unstable = euler->max_norm_ratio > 10.0 || euler->train_accuracy < 0.8;
    return {leap_ok && euler_unstable,
            "leapfrog acc " + fmt("%.4f", leap->train_accuracy) + " ratio " + fmt("%.3f", leap->max_norm_ratio) + " " +
                fmt("%.1f", leap->seconds) + " s; euler h=0.5 acc " + fmt("%.4f", euler->train_accuracy) + " ratio " +
                fmt("%.3f", euler->max_norm_ratio)};
}

struct TrainRun {
    TrainSummary summary;
    double seconds = 0.0;
    double best_test = 0.0;
    double last_test = 0.0;
};

TrainRun train_preset(const std::string& name, const std::string& tag)
{
    TrainRun r;
    const auto start = Clock::now();
    std::ostringstream log;
    r.summary = cmd_train(preset(name, scratch(tag)), log);
    r.seconds = seconds_since(start);
    for (const auto& row : r.summary.rows)
        if (row.split == "test") {
            r.best_test = std::max(r.best_test, row.accuracy);
            r.last_test = row.accuracy;
        }
    return r;
}

// n^3 (tensor) against n^4 (matrix) weights per layer, plus the n^2 bias and
// the 10 x n^2 classifier in both.
bool counts_match(const RunConfig& tensor, const RunConfig& matrix, Index layers, std::string& detail)
{
    const Index n = 28, n2 = n * n, n3 = n2 * n, n4 = n3 * n;
    const Index pt = param_count(tensor.model), pm = param_count(matrix.model);
    const Index wt = weight_count(tensor.model), wm = weight_count(matrix.model);
    if (!detail.empty())
        detail += "; ";
    detail += std::to_string(layers) + " layers: tensor " + std::to_string(pt) + " (weights " + std::to_string(wt) +
              "), matrix " + std::to_string(pm) + " (weights " + std::to_string(wm) + ")";
    return wt == layers * n3 + 10 * n2 && wm == layers * n4 + 10 * n2 && pt == wt + layers * n2 &&
           pm == wm + layers * n2;
}

Outcome mnist()
{
    const TrainRun t = train_preset("mnist-tensor-4", "mnist-tensor");
    const TrainRun m = train_preset("mnist-matrix-4", "mnist-matrix");
    std::string counts;
    const bool counts_ok = counts_match(preset("mnist-tensor-4", "."), preset("mnist-matrix-4", "."), 4, counts);
    const bool pass = t.best_test >= 0.9 && t.seconds < 600.0 && std::abs(t.last_test - m.last_test) <= 0.03 &&
                      counts_ok;
    return {pass, "tensor test acc " + fmt("%.4f", t.last_test) + " (best " + fmt("%.4f", t.best_test) + ") in " +
                      fmt("%.1f", t.seconds) + " s; matrix " + fmt("%.4f", m.last_test) + " in " +
                      fmt("%.1f", m.seconds) + " s; " + counts};
}

Outcome parameter_counts()
{
    std::string detail;
    bool ok = true;
    for (Index layers : {4, 8}) {
        const std::string suffix = "-" + std::to_string(layers);
        ok &= counts_match(preset("mnist-tensor" + suffix, "."), preset("mnist-matrix" + suffix, "."), layers, detail);
    }
    return {ok, detail};
}

Outcome cifar()
{
    const TrainRun r = train_preset("cifar-tensor-4", "cifar");
    std::vector<double> train_loss, test_loss;
    for (const auto& row : r.summary.rows)
        (row.split == "train" ? train_loss : test_loss).push_back(row.loss);
    bool decreasing = train_loss.size() >= 2;
    for (std::size_t i = 1; i < train_loss.size(); ++i)
        decreasing &= train_loss[i] < train_loss[i - 1];
    std::string losses;
    for (std::size_t i = 0; i < train_loss.size(); ++i)
        losses += (i ? " > " : "") + fmt("%.4f", train_loss[i]);
    std::string tests;
    for (std::size_t i = 0; i < test_loss.size(); ++i)
        tests += (i ? ", " : "") + fmt("%.4f", test_loss[i]);
    return {r.last_test > 0.3 && decreasing && r.seconds < 900.0,
            "test acc " + fmt("%.4f", r.last_test) + " in " + fmt("%.1f", r.seconds) + " s; train loss " + losses +
                (decreasing ? "" : " (not strictly decreasing)") + "; test loss " + tests};
}

std::vector<std::string> csv_without_seconds(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ','))
            fields.push_back(f);
        if (fields.size() > 4)
            fields.erase(fields.begin() + 4);
        std::string joined;
        for (std::size_t i = 0; i < fields.size(); ++i)
            joined += (i ? "," : "") + fields[i];
        out.push_back(joined);
    }
    return out;
}

Outcome determinism()
{
    const TrainRun a = train_preset("mnist-tensor-4", "determinism-a");
    const TrainRun b = train_preset("mnist-tensor-4", "determinism-b");
    const auto ca = csv_without_seconds(a.summary.metrics), cb = csv_without_seconds(b.summary.metrics);
    return {ca == cb && ca.size() > 1,
            std::to_string(ca.size()) + " and " + std::to_string(cb.size()) + " lines, " +
                (ca == cb ? "identical" : "different") + " apart from the seconds column"};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"algebra oracles", algebra_oracles},
        {"transpose and bcirc", transpose_bcirc},
        {"gradient suite", gradient_suite},
        {"tubal probabilities", tubal_probability},
        {"leapfrog stability spectrum", stability_spectrum},
        {"spheres experiment", spheres},
        {"MNIST desk scale", mnist},
        {"parameter counts", parameter_counts},
        {"CIFAR-10 smoke", cifar},
        {"determinism", determinism},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int c = std::atoi(argv[i]);
        if (c < 1 || c > static_cast<int>(criteria.size())) {
            std::cerr << "usage: tnn_acceptance [criterion 1-10 ...]\n";
            return 2;
        }
        selected.push_back(c);
    }
    if (selected.empty())
        for (int c = 1; c <= static_cast<int>(criteria.size()); ++c)
            selected.push_back(c);

    int failures = 0;
    for (int c : selected) {
        const auto& [name, run] = criteria[static_cast<std::size_t>(c - 1)];
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c << " (" << name << "): " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
