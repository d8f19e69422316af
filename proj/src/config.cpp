#include "tnn/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace tnn {
namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view s)
{
    T v{};
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc{} || r.ptr != end || s.empty())
        throw ConfigError("'" + std::string(key) + "': not a number: '" + std::string(s) + "'");
    return v;
}

bool parse_bool(std::string_view key, std::string_view s)
{
    if (s == "true" || s == "yes" || s == "1")
        return true;
    if (s == "false" || s == "no" || s == "0")
        return false;
    throw ConfigError("'" + std::string(key) + "': expected true or false, got '" + std::string(s) + "'");
}

// Reads keys out of one section, remembering which were used.
class Section {
public:
    Section(const IniSections& all, const std::string& name) : name_(name)
    {
        if (auto it = all.find(name); it != all.end())
            values_ = &it->second;
    }

    std::optional<std::string> get(const std::string& key)
    {
        used_.insert(key);
        if (!values_)
            return std::nullopt;
        auto it = values_->find(key);
        if (it == values_->end())
            return std::nullopt;
        return it->second;
    }

    template <typename T>
    void number(const std::string& key, T& out)
    {
        if (auto v = get(key))
            out = parse_number<T>(name_ + "." + key, *v);
    }

    void flag(const std::string& key, bool& out)
    {
        if (auto v = get(key))
            out = parse_bool(name_ + "." + key, *v);
    }

    void finish() const
    {
        if (!values_)
            return;
        for (const auto& [k, v] : *values_)
            if (!used_.contains(k))
                throw ConfigError("unknown key '" + k + "' in [" + name_ + "]");
    }

private:
    std::string name_;
    const std::map<std::string, std::string>* values_ = nullptr;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ConfigError(what);
}

}  // namespace

IniSections parse_ini(std::string_view text)
{
    IniSections out;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(std::string_view(raw).substr(0, raw.find('#')));
        if (line.empty())
            continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where + "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(where + "empty section name");
            out[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + "expected key = value");
        if (section.empty())
            throw ConfigError(where + "key outside any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            throw ConfigError(where + "empty key");
        if (!out[section].emplace(key, value).second)
            throw ConfigError(where + "duplicate key '" + key + "'");
    }
    return out;
}

DatasetKind parse_dataset_kind(std::string_view s)
{
    if (s == "mnist")
        return DatasetKind::Mnist;
    if (s == "cifar10")
        return DatasetKind::Cifar10;
    if (s == "spheres")
        return DatasetKind::Spheres;
    throw ConfigError("unknown dataset '" + std::string(s) + "'");
}

std::string to_string(DatasetKind k)
{
    switch (k) {
    case DatasetKind::Mnist: return "mnist";
    case DatasetKind::Cifar10: return "cifar10";
    case DatasetKind::Spheres: return "spheres";
    }
    return "?";
}

std::pair<Index, Index> input_shape(DatasetKind d, Orientation o)
{
    switch (d) {
    case DatasetKind::Mnist:
        return o == Orientation::Vector ? std::pair<Index, Index>{784, 1} : std::pair<Index, Index>{28, 28};
    case DatasetKind::Cifar10:
        if (o == Orientation::Vector)
            return {3072, 1};
        return {96, 32};
    case DatasetKind::Spheres: return {1, 3};
    }
    return {1, 1};
}

std::vector<BlockSpec> parse_blocks(std::string_view text, double h, Activation act, bool shared)
{
    std::vector<BlockSpec> out;
    if (trim(text).empty())
        return out;
    for (const std::string& entry : split(text, ',')) {
        std::string body = entry;
        BlockSpec b;
        b.h = h;
        b.activation = act;
        b.shared = shared;
        if (const auto at = body.find('@'); at != std::string::npos) {
            b.width = parse_number<Index>("blocks", trim(std::string_view(body).substr(at + 1)));
            body = trim(std::string_view(body).substr(0, at));
        }
        if (const auto colon = body.find(':'); colon != std::string::npos) {
            b.steps = parse_number<Index>("blocks", trim(std::string_view(body).substr(colon + 1)));
            body = trim(std::string_view(body).substr(0, colon));
        }
        try {
            b.kind = parse_block_kind(body);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        require(b.steps >= 1, "blocks: count must be at least 1 in '" + entry + "'");
        if (b.kind == BlockKind::TLinear) {
            require(b.width >= 1, "blocks: t-linear entry needs @width in '" + entry + "'");
            const Index count = b.steps;
            b.steps = 1;
            for (Index s = 0; s < count; ++s)
                out.push_back(b);
        } else {
            require(b.width == 0, "blocks: only t-linear entries take a width");
            out.push_back(b);
        }
    }
    return out;
}

RunConfig parse_config(std::string_view text)
{
    const IniSections ini = parse_ini(text);
    for (const auto& [name, _] : ini)
        if (name != "run" && name != "data" && name != "model" && name != "optim" && name != "spheres")
            throw ConfigError("unknown section [" + name + "]");

    RunConfig c;
    {
        Section s(ini, "run");
        s.number("seed", c.seed);
        if (auto v = s.get("output"))
            c.output = *v;
        s.finish();
    }
    {
        Section s(ini, "data");
        if (auto v = s.get("dataset"))
            c.data.dataset = parse_dataset_kind(*v);
        if (auto v = s.get("root"))
            c.data.root = *v;
        if (auto v = s.get("orientation")) {
            try {
                c.data.orientation = parse_orientation(*v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        Index limit = 0;
        if (s.get("train_limit")) {
            s.number("train_limit", limit);
            require(limit >= 1, "data.train_limit must be positive");
            c.data.train_limit = limit;
        }
        if (s.get("test_limit")) {
            s.number("test_limit", limit);
            require(limit >= 1, "data.test_limit must be positive");
            c.data.test_limit = limit;
        }
        s.number("mnist_std", c.data.mnist_std);
        s.finish();
        require(c.data.mnist_std > 0.0, "data.mnist_std must be positive");
        require(!(c.data.dataset == DatasetKind::Cifar10 && c.data.orientation == Orientation::Transposed),
                "data.orientation: transposed is only available for mnist");
    }
    {
        Section s(ini, "model");
        NetworkSpec& m = c.model;
        if (auto v = s.get("transform")) {
            if (*v == "dct")
                m.transform = TransformKind::Orthogonal;
            else if (*v == "circulant")
                m.transform = TransformKind::Circulant;
            else if (*v == "identity")
                m.transform = TransformKind::Identity;
            else
                throw ConfigError("model.transform: unknown '" + *v + "'");
        }
        if (auto v = s.get("product")) {
            if (*v == "direct")
                m.path = ProductPath::Direct;
            else if (*v == "fourier")
                m.path = ProductPath::Fourier;
            else
                throw ConfigError("model.product: unknown '" + *v + "'");
        }
        double h = 0.1;
        s.number("h", h);
        require(h >= 0.0, "model.h must be non-negative");
        Activation act = Activation::Tanh;
        if (auto v = s.get("activation")) {
            try {
                act = parse_activation(*v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        bool shared = false;
        s.flag("shared", shared);
        s.flag("classifier_bias", m.classifier_bias);
        if (auto v = s.get("init")) {
            if (*v == "gaussian")
                m.init = InitScheme::TransformGaussian;
            else if (*v == "normalized")
                m.init = InitScheme::NormalizedTube;
            else
                throw ConfigError("model.init: unknown '" + *v + "'");
        }
        s.number("init_scale", m.init_scale);
        require(m.init_scale > 0.0, "model.init_scale must be positive");
        m.blocks = parse_blocks(s.get("blocks").value_or(""), h, act, shared);
        s.finish();

        const auto [ell, n] = input_shape(c.data.dataset, c.data.orientation);
        m.input_width = ell;
        m.n = n;
        m.classes = c.data.dataset == DatasetKind::Spheres ? 3 : 10;
    }
    {
        Section s(ini, "optim");
        OptimConfig& o = c.optim;
        s.number("lr", o.lr);
        s.number("momentum", o.momentum);
        s.number("smoothness", o.smoothness);
        s.number("batch_size", o.batch_size);
        s.number("eval_batch_size", o.eval_batch_size);
        s.number("epochs", o.epochs);
        if (auto v = s.get("reduction")) {
            if (*v == "sum")
                o.reduction = Reduction::Sum;
            else if (*v == "mean")
                o.reduction = Reduction::Mean;
            else
                throw ConfigError("optim.reduction: unknown '" + *v + "'");
        }
        if (auto v = s.get("loss")) {
            if (*v == "cross_entropy")
                o.loss = LossKind::CrossEntropy;
            else if (*v == "least_squares")
                o.loss = LossKind::LeastSquares;
            else
                throw ConfigError("optim.loss: unknown '" + *v + "'");
        }
        s.finish();
        require(o.lr > 0.0, "optim.lr must be positive");
        require(o.momentum >= 0.0 && o.momentum < 1.0, "optim.momentum must be in [0, 1)");
        require(o.smoothness >= 0.0, "optim.smoothness must be non-negative");
        require(o.batch_size >= 1, "optim.batch_size must be at least 1");
        require(o.eval_batch_size >= 1, "optim.eval_batch_size must be at least 1");
        require(o.epochs >= 0, "optim.epochs must be non-negative");
    }
    {
        Section s(ini, "spheres");
        SpheresConfig& sp = c.spheres;
        if (auto v = s.get("counts")) {
            const auto parts = split(*v, ',');
            require(parts.size() == 3, "spheres.counts needs three values");
            sp.counts.inner = parse_number<Index>("spheres.counts", parts[0]);
            sp.counts.middle = parse_number<Index>("spheres.counts", parts[1]);
            sp.counts.outer = parse_number<Index>("spheres.counts", parts[2]);
            require(sp.counts.inner >= 0 && sp.counts.middle >= 0 && sp.counts.outer >= 0 &&
                        sp.counts.inner + sp.counts.middle + sp.counts.outer > 0,
                    "spheres.counts must be non-negative with a positive total");
        }
        s.number("depth", sp.depth);
        if (auto v = s.get("activation")) {
            try {
                sp.activation = parse_activation(*v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        require(sp.depth >= 1, "spheres.depth must be at least 1");
        if (auto v = s.get("variants")) {
            sp.variants.clear();
            for (const std::string& entry : split(*v, ',')) {
                const auto colon = entry.find(':');
                require(colon != std::string::npos, "spheres.variants: expected kind:h in '" + entry + "'");
                SpheresVariant var;
                const std::string kind = trim(std::string_view(entry).substr(0, colon));
                if (kind == "leapfrog")
                    var.kind = BlockKind::Leapfrog;
                else if (kind == "residual")
                    var.kind = BlockKind::Residual;
                else
                    throw ConfigError("spheres.variants: kind must be leapfrog or residual");
                var.h = parse_number<double>("spheres.variants", trim(std::string_view(entry).substr(colon + 1)));
                require(var.h >= 0.0, "spheres.variants: h must be non-negative");
                sp.variants.push_back(var);
            }
        }
        if (auto v = s.get("snapshots")) {
            sp.snapshots.clear();
            for (const std::string& e : split(*v, ','))
                sp.snapshots.push_back(parse_number<Index>("spheres.snapshots", e));
        }
        for (Index l : sp.snapshots)
            require(l >= 0 && l <= sp.depth, "spheres.snapshots must lie in 0..depth");
        s.finish();
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::filesystem::path data_root()
{
    if (const char* env = std::getenv("TNN_DATA_ROOT"); env && *env)
        return env;
    return "data";
}

std::filesystem::path resolve_data_dir(const std::filesystem::path& p)
{
    return p.is_absolute() ? p : data_root() / p;
}

}  // namespace tnn
