#include "tnn/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace tnn {
namespace {

constexpr char kMagic[4] = {'T', 'N', 'N', '1'};
constexpr double kSpecVersion = 1.0;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v)
{
    for (int b = 0; b < 4; ++b)
        out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v)
{
    for (int b = 0; b < 8; ++b)
        out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

class Reader {
public:
    Reader(std::vector<unsigned char> bytes, std::string source) : b_(std::move(bytes)), src_(std::move(source)) {}

    std::uint64_t uint(int width)
    {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i)
            v |= std::uint64_t{b_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }

    std::string bytes(std::size_t n)
    {
        need(n);
        std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return b_.size() - pos_; }
    const std::string& source() const { return src_; }

private:
    void need(std::size_t n) const
    {
        if (remaining() < n)
            throw CheckpointError(src_ + ": truncated checkpoint");
    }

    std::vector<unsigned char> b_;
    std::string src_;
    std::size_t pos_ = 0;
};

Index as_index(double v, const char* what)
{
    if (!(std::isfinite(v) && v == std::floor(v) && v >= -1.0 && v < 1e12))
        throw CheckpointError(std::string("checkpoint: bad ") + what + " in meta.spec");
    return static_cast<Index>(v);
}

template <typename E>
E as_enum(double v, int count, const char* what)
{
    const Index i = as_index(v, what);
    if (i < 0 || i >= count)
        throw CheckpointError(std::string("checkpoint: bad ") + what + " in meta.spec");
    return static_cast<E>(i);
}

double transform_code(TransformKind k)
{
    switch (k) {
    case TransformKind::Circulant: return 0;
    case TransformKind::Orthogonal: return 1;
    case TransformKind::Identity: return 2;
    }
    return 0;
}

TransformKind transform_from(double v)
{
    const TransformKind kinds[] = {TransformKind::Circulant, TransformKind::Orthogonal, TransformKind::Identity};
    return kinds[as_enum<int>(v, 3, "transform")];
}

Tensor3 row(const std::vector<double>& v)
{
    return Tensor3(Dims{1, 1, static_cast<Index>(v.size())}, v);
}

}  // namespace

void write_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors)
{
    std::vector<unsigned char> out(kMagic, kMagic + 4);
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.insert(out.end(), t.name.begin(), t.name.end());
        put_u64(out, static_cast<std::uint64_t>(t.value.ell()));
        put_u64(out, static_cast<std::uint64_t>(t.value.m()));
        put_u64(out, static_cast<std::uint64_t>(t.value.n()));
        for (double v : t.value.values())
            put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw CheckpointError("cannot write checkpoint " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f)
        throw CheckpointError("write failed for checkpoint " + path.string());
}

std::vector<NamedTensor> read_tensors(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw CheckpointError("cannot open checkpoint " + path.string());
    Reader r({std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()}, path.string());
    if (r.remaining() < 4 || r.bytes(4) != std::string(kMagic, 4))
        throw CheckpointError(path.string() + ": not a checkpoint (magic is not TNN1)");
    const std::uint64_t count = r.uint(4);
    std::vector<NamedTensor> out;
    for (std::uint64_t t = 0; t < count; ++t) {
        NamedTensor nt;
        nt.name = r.bytes(r.uint(4));
        const std::uint64_t ell = r.uint(8), m = r.uint(8), n = r.uint(8);
        if (ell == 0 || m == 0 || n == 0 || ell > r.remaining() || m > r.remaining() || n > r.remaining() ||
            ell * m * n > r.remaining() / 8)
            throw CheckpointError(r.source() + ": tensor '" + nt.name + "' has invalid dims or is truncated");
        std::vector<double> values(ell * m * n);
        for (double& v : values)
            v = std::bit_cast<double>(r.uint(8));
        nt.value = Tensor3(Dims{static_cast<Index>(ell), static_cast<Index>(m), static_cast<Index>(n)},
                           std::move(values));
        out.push_back(std::move(nt));
    }
    if (r.remaining() != 0)
        throw CheckpointError(r.source() + ": trailing bytes after the last tensor");
    return out;
}

Tensor3 encode_spec(const NetworkSpec& spec)
{
    std::vector<double> v = {kSpecVersion,
                             static_cast<double>(spec.input_width),
                             static_cast<double>(spec.n),
                             static_cast<double>(spec.classes),
                             transform_code(spec.transform),
                             spec.path == ProductPath::Fourier ? 1.0 : 0.0,
                             spec.classifier_bias ? 1.0 : 0.0,
                             spec.init == InitScheme::NormalizedTube ? 1.0 : 0.0,
                             static_cast<double>(spec.blocks.size())};
    for (const auto& b : spec.blocks) {
        v.push_back(static_cast<double>(static_cast<int>(b.kind)));
        v.push_back(static_cast<double>(b.width));
        v.push_back(static_cast<double>(b.steps));
        v.push_back(b.h);
        v.push_back(static_cast<double>(static_cast<int>(b.activation)));
        v.push_back(b.shared ? 1.0 : 0.0);
    }
    return row(v);
}

NetworkSpec decode_spec(const Tensor3& t)
{
    const auto v = t.values();
    if (v.size() < 9 || v[0] != kSpecVersion)
        throw CheckpointError("checkpoint: unsupported meta.spec");
    NetworkSpec s;
    s.input_width = as_index(v[1], "input width");
    s.n = as_index(v[2], "n");
    s.classes = as_index(v[3], "classes");
    s.transform = transform_from(v[4]);
    s.path = as_enum<int>(v[5], 2, "product path") == 1 ? ProductPath::Fourier : ProductPath::Direct;
    s.classifier_bias = as_enum<int>(v[6], 2, "classifier bias") == 1;
    s.init = as_enum<int>(v[7], 2, "init") == 1 ? InitScheme::NormalizedTube : InitScheme::TransformGaussian;
    const Index blocks = as_index(v[8], "block count");
    if (blocks < 0 || v.size() != 9 + 6 * static_cast<std::size_t>(blocks))
        throw CheckpointError("checkpoint: meta.spec length does not match its block count");
    for (Index b = 0; b < blocks; ++b) {
        const auto* e = v.data() + 9 + 6 * b;
        BlockSpec bs;
        bs.kind = as_enum<BlockKind>(e[0], 3, "block kind");
        bs.width = as_index(e[1], "width");
        bs.steps = as_index(e[2], "steps");
        bs.h = e[3];
        bs.activation = as_enum<Activation>(e[4], 3, "activation");
        bs.shared = as_enum<int>(e[5], 2, "shared") == 1;
        s.blocks.push_back(bs);
    }
    if (s.input_width < 1 || s.n < 1 || s.classes < 1)
        throw CheckpointError("checkpoint: meta.spec has non-positive dimensions");
    return s;
}

void save_checkpoint(const std::filesystem::path& path, const Network& net, const DataConfig& data,
                     Index eval_batch_size)
{
    std::vector<NamedTensor> out;
    out.push_back({"meta.spec", encode_spec(net.spec())});
    out.push_back({"meta.data", row({static_cast<double>(static_cast<int>(data.dataset)),
                                     static_cast<double>(static_cast<int>(data.orientation)),
                                     data.test_limit ? static_cast<double>(*data.test_limit) : -1.0,
                                     data.mnist_std, static_cast<double>(eval_batch_size)})});
    const auto names = net.parameter_names();
    const auto params = net.parameters();
    for (std::size_t i = 0; i < names.size(); ++i)
        out.push_back({names[i], *params[i]});
    write_tensors(path, out);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path)
{
    std::map<std::string, Tensor3> byname;
    for (auto& t : read_tensors(path))
        if (!byname.emplace(t.name, std::move(t.value)).second)
            throw CheckpointError(path.string() + ": duplicate tensor '" + t.name + "'");
    auto take = [&](const std::string& name) {
        auto it = byname.find(name);
        if (it == byname.end())
            throw CheckpointError(path.string() + ": missing tensor '" + name + "'");
        Tensor3 t = std::move(it->second);
        byname.erase(it);
        return t;
    };

    const NetworkSpec spec = decode_spec(take("meta.spec"));
    const Tensor3 meta = take("meta.data");
    if (meta.size() != 5)
        throw CheckpointError(path.string() + ": meta.data must hold 5 values");
    DataConfig data;
    const auto mv = meta.values();
    data.dataset = as_enum<DatasetKind>(mv[0], 3, "dataset");
    data.orientation = as_enum<Orientation>(mv[1], 3, "orientation");
    if (mv[2] >= 1.0)
        data.test_limit = as_index(mv[2], "test limit");
    data.mnist_std = mv[3];
    const Index eval_batch = as_index(mv[4], "eval batch size");
    if (eval_batch < 1)
        throw CheckpointError(path.string() + ": eval batch size must be positive");

    Network net = [&] {
        try {
            return Network::initialize(spec, 0);
        } catch (const std::exception& e) {
            throw CheckpointError(path.string() + ": architecture is invalid: " + e.what());
        }
    }();
    for (auto& p : net.parameters()) {
        Tensor3 t = take(p.name);
        if (t.dims() != p.tensor->dims())
            throw CheckpointError(path.string() + ": tensor '" + p.name + "' is " + to_string(t.dims()) +
                                  ", architecture expects " + to_string(p.tensor->dims()));
        *p.tensor = std::move(t);
    }
    if (!byname.empty())
        throw CheckpointError(path.string() + ": tensor '" + byname.begin()->first +
                              "' does not belong to the architecture");
    return {std::move(net), data, eval_batch};
}

}  // namespace tnn
