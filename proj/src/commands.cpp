#include "tnn/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "tnn/checkpoint.hpp"
#include "tnn/loss.hpp"
#include "tnn/random.hpp"
#include "tnn/tproducts.hpp"

namespace tnn {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t epoch_seed(std::uint64_t master, Index epoch)
{
    return splitmix64(derive_seed(master, "shuffle") + static_cast<std::uint64_t>(epoch));
}

double least_squares_sum(const ProbabilityMatrix& p, std::span<const int> labels)
{
    double total = 0.0;
    for (Index j = 0; j < p.probs.cols(); ++j)
        for (Index i = 0; i < p.probs.rows(); ++i) {
            const double target = labels[static_cast<std::size_t>(j)] == i + 1 ? 1.0 : 0.0;
            const double d = p.probs(i, j) - target;
            total += 0.5 * d * d;
        }
    return total;
}

std::filesystem::path dataset_dir(const DataConfig& c)
{
    if (!c.root.empty())
        return resolve_data_dir(c.root);
    return resolve_data_dir(c.dataset == DatasetKind::Cifar10 ? "cifar-10-batches-bin" : "mnist");
}

Dataset load_split(const DataConfig& c, const std::filesystem::path& dir, bool train)
{
    ImageOptions opt;
    opt.orientation = c.orientation;
    opt.limit = train ? c.train_limit : c.test_limit;
    Dataset d;
    switch (c.dataset) {
    case DatasetKind::Mnist: {
        opt.normalization = mnist_normalization(c.mnist_std);
        const auto files = mnist_files(dir, train);
        d = load_mnist(files.images, files.labels, opt);
        break;
    }
    case DatasetKind::Cifar10: d = load_cifar10(cifar10_files(dir, train), opt); break;
    case DatasetKind::Spheres: throw ConfigError("the spheres dataset is run by the spheres command");
    }
    d.split = train ? "train" : "test";
    return d;
}

std::string variant_name(const SpheresVariant& v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s-h%g", v.kind == BlockKind::Leapfrog ? "leapfrog" : "euler", v.h);
    return buf;
}

}  // namespace

EvalResult evaluate(Network& net, const Dataset& d, Index batch_size, LossKind loss)
{
    if (batch_size < 1)
        throw std::invalid_argument("evaluate: batch size must be positive");
    EvalResult r;
    r.total = d.size();
    double loss_sum = 0.0;
    for (Index first = 0; first < d.size(); first += batch_size) {
        const Index count = std::min(batch_size, d.size() - first);
        const std::span<const int> labels(d.labels.data() + first, static_cast<std::size_t>(count));
        const Tensor3 x = net.forward(lateral_range(d.samples, first, count));
        const ProbabilityMatrix p = scalar_tubal_softmax(x, net.transform());
        loss_sum += loss == LossKind::CrossEntropy ? cross_entropy(p, labels, Reduction::Sum).value
                                                   : least_squares_sum(p, labels);
        r.correct += count_correct(p, labels);
        r.safeguard_residual = std::max(r.safeguard_residual, p.max_residual());
    }
    if (r.total > 0) {
        r.loss = loss_sum / static_cast<double>(r.total);
        r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
    }
    return r;
}

double max_weight_step(const Network& net)
{
    const auto params = net.parameters();
    double m = 0.0;
    for (const auto& chain : net.weight_chains()) {
        std::vector<const Tensor3*> w;
        for (std::size_t i : chain.params)
            w.push_back(params[i]);
        m = std::max(m, max_weight_step(std::span<const Tensor3* const>(w)));
    }
    return m;
}

Splits load_splits(const DataConfig& c)
{
    const auto dir = dataset_dir(c);
    return {load_split(c, dir, true), load_split(c, dir, false)};
}

Dataset load_test_split(const DataConfig& c, const std::filesystem::path& dir)
{
    return load_split(c, dir, false);
}

EvalResult train_epoch(Network& net, Sgd& sgd, const Dataset& d, const OptimConfig& o, std::uint64_t shuffle_seed)
{
    std::vector<Tensor3*> params;
    for (auto& p : net.parameters())
        params.push_back(p.tensor);
    const auto chains = net.weight_chains();

    EvalResult r;
    r.total = d.size();
    double loss_sum = 0.0;
    for (const auto& idx : batch_indices(d.size(), o.batch_size, shuffle_seed)) {
        const Batch b = make_batch(d, idx);
        const Tensor3 x = net.forward(b.samples);
        const LossGradient lg = o.loss == LossKind::CrossEntropy
                                    ? loss_input_gradient(x, b.labels, net.transform(), o.reduction)
                                    : least_squares_gradient(x, b.labels, net.transform(), o.reduction);
        std::vector<Tensor3> grads = net.backward(lg.grad);
        if (o.smoothness > 0.0)
            for (const auto& chain : chains) {
                if (!(chain.h > 0.0))
                    continue;
                std::vector<Tensor3> w;
                for (std::size_t i : chain.params)
                    w.push_back(*params[i]);
                const Regularization reg = smoothness_regularizer(w, chain.h);
                for (std::size_t k = 0; k < chain.params.size(); ++k)
                    grads[chain.params[k]].axpy(o.smoothness, reg.gradients[k]);
            }
        sgd.step(params, grads);

        const double batch = static_cast<double>(idx.size());
        loss_sum += o.reduction == Reduction::Mean ? lg.loss * batch : lg.loss;
        r.correct += count_correct(lg.probs, b.labels);
        r.safeguard_residual = std::max(r.safeguard_residual, lg.probs.max_residual());
    }
    if (r.total > 0) {
        r.loss = loss_sum / static_cast<double>(r.total);
        r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
    }
    return r;
}

TrainSummary cmd_train(const RunConfig& c, std::ostream& log)
{
    const auto start = Clock::now();
    const Splits data = load_splits(c.data);
    log << "train " << data.train.size() << " samples, test " << data.test.size() << " samples, input "
        << to_string(data.train.samples.dims()) << "\n";

    Network net = Network::initialize(c.model, derive_seed(c.seed, "init"));
    log << "parameters " << param_count(c.model) << " (weights " << weight_count(c.model) << ")\n";
    Sgd sgd(c.optim.lr, c.optim.momentum);

    std::filesystem::create_directories(c.output);
    TrainSummary s;
    s.metrics = c.output / "metrics.csv";
    s.checkpoint = c.output / "model.tnn";
    MetricsWriter writer(s.metrics);

    for (Index epoch = 1; epoch <= c.optim.epochs; ++epoch) {
        const EvalResult tr = train_epoch(net, sgd, data.train, c.optim, epoch_seed(c.seed, epoch));
        const double step = max_weight_step(net);
        const EvalResult te = evaluate(net, data.test, c.optim.eval_batch_size, c.optim.loss);
        const double secs = since(start);
        const MetricsRow train_row{epoch, "train", tr.loss, tr.accuracy, secs, step, tr.safeguard_residual};
        const MetricsRow test_row{epoch, "test", te.loss, te.accuracy, secs, step, te.safeguard_residual};
        writer.append(train_row);
        writer.append(test_row);
        s.rows.push_back(train_row);
        s.rows.push_back(test_row);
        log << "epoch " << epoch << "  train loss " << tr.loss << " acc " << tr.accuracy << "  test loss " << te.loss
            << " acc " << te.accuracy << "  " << secs << " s\n";
    }
    save_checkpoint(s.checkpoint, net, c.data, c.optim.eval_batch_size);
    log << "wrote " << s.metrics.string() << " and " << s.checkpoint.string() << "\n";
    return s;
}

EvalResult cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset, std::ostream& log)
{
    LoadedCheckpoint ck = load_checkpoint(checkpoint);
    const Dataset test = load_test_split(ck.data, dataset);
    if (test.samples.ell() != ck.network.spec().input_width || test.samples.n() != ck.network.spec().n)
        throw CheckpointError("checkpoint expects inputs of width " + std::to_string(ck.network.spec().input_width) +
                              " and n " + std::to_string(ck.network.spec().n) + ", dataset gives " +
                              to_string(test.samples.dims()));
    const EvalResult r = evaluate(ck.network, test, ck.eval_batch_size);
    log.precision(17);
    log << "samples " << r.total << "\nloss " << r.loss << "\naccuracy " << r.accuracy << "\nsafeguard_residual "
        << r.safeguard_residual << "\n";
    return r;
}

NetworkSpec spheres_spec(const RunConfig& c, const SpheresVariant& v)
{
    NetworkSpec s;
    s.input_width = 1;
    s.n = 3;
    s.classes = 3;
    s.transform = c.model.transform;
    s.path = c.model.path;
    s.classifier_bias = c.model.classifier_bias;
    s.init = c.model.init;
    s.init_scale = c.model.init_scale;
    BlockSpec b;
    b.kind = v.kind;
    b.steps = c.spheres.depth;
    b.h = v.h;
    b.activation = c.spheres.activation;
    s.blocks.push_back(b);
    return s;
}

std::vector<double> norm_ratios(const Tensor3& a0, const Tensor3& aN)
{
    if (a0.dims() != aN.dims())
        throw ShapeError("norm_ratios: state shapes differ");
    std::vector<double> out(static_cast<std::size_t>(a0.m()));
    for (Index j = 0; j < a0.m(); ++j)
        out[static_cast<std::size_t>(j)] = aN.lateral_slice(j).norm() / a0.lateral_slice(j).norm();
    return out;
}

SpheresResult run_spheres_variant(const RunConfig& c, const SpheresVariant& v, const Dataset& data,
                                  const std::optional<std::filesystem::path>& dir, std::ostream& log)
{
    const auto start = Clock::now();
    SpheresResult res;
    res.name = variant_name(v);
    res.variant = v;
    Network net = Network::initialize(spheres_spec(c, v), derive_seed(c.seed, "init"));
    Sgd sgd(c.optim.lr, c.optim.momentum);
    std::optional<MetricsWriter> writer;
    if (dir) {
        std::filesystem::create_directories(*dir);
        writer.emplace(*dir / "metrics.csv");
    }
    for (Index epoch = 1; epoch <= c.optim.epochs; ++epoch) {
        const EvalResult tr = train_epoch(net, sgd, data, c.optim, epoch_seed(c.seed, epoch));
        const MetricsRow row{epoch, "train", tr.loss, tr.accuracy, since(start), max_weight_step(net),
                             tr.safeguard_residual};
        if (writer)
            writer->append(row);
        res.rows.push_back(row);
    }

    const EvalResult final_eval = evaluate(net, data, data.size(), c.optim.loss);
    const auto states = net.layer_states();
    const auto ratios = norm_ratios(states.front(), states.back());
    res.train_accuracy = final_eval.accuracy;
    res.max_norm_ratio = *std::max_element(ratios.begin(), ratios.end());
    res.seconds = since(start);

    if (dir) {
        std::ofstream out(*dir / "snapshots.csv");
        out.precision(17);
        out << "layer,point,label,x1,x2,x3\n";
        for (Index layer : c.spheres.snapshots) {
            const Tensor3& a = states.at(static_cast<std::size_t>(layer));
            for (Index j = 0; j < a.m(); ++j) {
                out << layer << ',' << j + 1 << ',' << data.labels[static_cast<std::size_t>(j)];
                for (Index k = 0; k < a.n(); ++k)
                    out << ',' << a(0, j, k);
                out << '\n';
            }
        }
        if (!out)
            throw std::runtime_error("cannot write snapshots for " + res.name);
    }
    log << res.name << ": train accuracy " << res.train_accuracy << ", max norm ratio " << res.max_norm_ratio
        << ", " << res.seconds << " s\n";
    return res;
}

std::vector<SpheresResult> cmd_spheres(const RunConfig& c, std::ostream& log)
{
    const Dataset data = gen_spheres(derive_seed(c.seed, "data"), c.spheres.counts);
    std::filesystem::create_directories(c.output);
    std::vector<SpheresResult> out;
    for (const auto& v : c.spheres.variants)
        out.push_back(run_spheres_variant(c, v, data, c.output / variant_name(v), log));

    std::ofstream summary(c.output / "summary.csv");
    summary.precision(17);
    summary << "variant,kind,h,train_accuracy,max_norm_ratio,seconds\n";
    for (const auto& r : out)
        summary << r.name << ',' << to_string(r.variant.kind) << ',' << r.variant.h << ',' << r.train_accuracy << ','
                << r.max_norm_ratio << ',' << r.seconds << '\n';
    if (!summary)
        throw std::runtime_error("cannot write spheres summary");
    return out;
}

std::vector<SpectrumRow> diagnose(const Network& net)
{
    std::vector<SpectrumRow> rows;
    auto bcirc_row = [&](const std::string& name, const Tensor3& w) {
        SpectrumRow r{name, "bcirc"};
        if (w.ell() != w.m() || w.ell() * w.n() * w.m() * w.n() > kMaterializeCap) {
            r.skipped = true;
        } else {
            const SpectrumReport s = bcirc_spectrum(w);
            r.max_real = s.max_real;
            r.max_abs_real = s.max_abs_real;
        }
        rows.push_back(r);
    };
    auto system_row = [&](const std::string& name, const Tensor3& w) {
        SpectrumRow r{name, "antisymmetric"};
        const Index side = 2 * w.ell() * w.n();
        if (w.ell() != w.m() || side * side > kMaterializeCap) {
            r.skipped = true;
        } else {
            const SpectrumReport s = antisymmetric_system_spectrum(w);
            r.max_real = s.max_real;
            r.max_abs_real = s.max_abs_real;
        }
        rows.push_back(r);
    };

    const auto names = net.parameter_names();
    const auto params = net.parameters();
    std::size_t index = 0;
    for (const auto& b : net.blocks()) {
        if (const auto* lf = std::get_if<LeapfrogBlock>(&b)) {
            for (std::size_t s = 0; s < lf->layers().size(); ++s, index += 2) {
                bcirc_row(names[index], *params[index]);
                system_row(names[index], *params[index]);
            }
        } else {
            bcirc_row(names[index], *params[index]);
            index += 2;
        }
    }
    return rows;
}

std::vector<SpectrumRow> cmd_diagnose(const std::filesystem::path& checkpoint, const std::filesystem::path& csv,
                                      std::ostream& log)
{
    const LoadedCheckpoint ck = load_checkpoint(checkpoint);
    const auto rows = diagnose(ck.network);
    std::ofstream out(csv);
    if (!out)
        throw std::runtime_error("cannot write " + csv.string());
    out.precision(17);
    out << "parameter,system,max_real,max_abs_real,status\n";
    log.precision(6);
    for (const auto& r : rows) {
        out << r.parameter << ',' << r.system << ',';
        if (r.skipped) {
            out << ",,skipped\n";
            log << r.parameter << " " << r.system << ": skipped, exceeds the materialization cap of "
                << kMaterializeCap << " entries\n";
            continue;
        }
        out << r.max_real << ',' << r.max_abs_real << ",ok\n";
        log << r.parameter << " " << r.system << ": max Re " << r.max_real << ", max |Re| " << r.max_abs_real
            << "\n";
    }
    log << "wrote " << csv.string() << "\n";
    return rows;
}

}  // namespace tnn
