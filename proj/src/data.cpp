#include "tnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "tnn/random.hpp"

namespace tnn {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr Index kCifarSide = 32;
constexpr Index kCifarRecord = 1 + 3 * kCifarSide * kCifarSide;

std::vector<unsigned char> read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t at)
{
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

// Position along modes 1 and 3 of pixel (c, r, col) for an image with
// `rows` x `cols` planes.
struct Placement {
    Index i, k;
};

Placement place(Orientation o, Index c, Index r, Index col, Index rows, Index cols)
{
    switch (o) {
    case Orientation::Lateral: return {c * rows + r, col};
    case Orientation::Transposed: return {c * cols + col, r};
    case Orientation::Vector: return {(c * rows + r) * cols + col, 0};
    }
    return {0, 0};
}

Dims image_dims(Orientation o, Index channels, Index rows, Index cols, Index m)
{
    switch (o) {
    case Orientation::Lateral: return {channels * rows, m, cols};
    case Orientation::Transposed: return {channels * cols, m, rows};
    case Orientation::Vector: return {channels * rows * cols, m, 1};
    }
    return {};
}

void check_normalization(const NormalizationSpec& s, Index channels)
{
    if (static_cast<Index>(s.means.size()) != channels || static_cast<Index>(s.stds.size()) != channels)
        throw std::invalid_argument("normalization needs one mean and std per channel");
    for (double v : s.stds)
        if (!(v > 0.0))
            throw std::invalid_argument("normalization std must be positive");
}

// pixels: m images of channels*rows*cols bytes (planes row-major).
Tensor3 orient(const unsigned char* pixels, std::size_t stride, Index m, Index channels, Index rows, Index cols,
               const ImageOptions& opt, const NormalizationSpec& norm)
{
    check_normalization(norm, channels);
    Tensor3 t(image_dims(opt.orientation, channels, rows, cols, m));
    for (Index s = 0; s < m; ++s) {
        const unsigned char* img = pixels + static_cast<std::size_t>(s) * stride;
        for (Index c = 0; c < channels; ++c)
            for (Index r = 0; r < rows; ++r)
                for (Index col = 0; col < cols; ++col) {
                    const double v = img[(c * rows + r) * cols + col] / 255.0;
                    const Placement p = place(opt.orientation, c, r, col, rows, cols);
                    t(p.i, s, p.k) = (v - norm.means[static_cast<std::size_t>(c)]) / norm.stds[static_cast<std::size_t>(c)];
                }
    }
    return t;
}

}  // namespace

Orientation parse_orientation(std::string_view s)
{
    if (s == "lateral")
        return Orientation::Lateral;
    if (s == "transposed")
        return Orientation::Transposed;
    if (s == "vector")
        return Orientation::Vector;
    throw std::invalid_argument("unknown orientation '" + std::string(s) + "'");
}

std::string to_string(Orientation o)
{
    switch (o) {
    case Orientation::Lateral: return "lateral";
    case Orientation::Transposed: return "transposed";
    case Orientation::Vector: return "vector";
    }
    return "?";
}

NormalizationSpec mnist_normalization(double std)
{
    return {{0.1307}, {std}};
}

NormalizationSpec cifar10_normalization()
{
    return {{0.4914, 0.4822, 0.4465}, {0.2023, 0.1994, 0.2010}};
}

Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                   const ImageOptions& options)
{
    const auto img = read_file(images);
    const auto lab = read_file(labels);
    if (img.size() < 16)
        throw TruncatedFile(images.string() + ": header shorter than 16 bytes");
    if (lab.size() < 8)
        throw TruncatedFile(labels.string() + ": header shorter than 8 bytes");
    if (be32(img, 0) != kImageMagic)
        throw BadMagic(images.string() + ": image magic is not 0x00000803");
    if (be32(lab, 0) != kLabelMagic)
        throw BadMagic(labels.string() + ": label magic is not 0x00000801");

    const Index count = be32(img, 4);
    const Index rows = be32(img, 8);
    const Index cols = be32(img, 12);
    if (be32(lab, 4) != static_cast<std::uint32_t>(count))
        throw CountMismatch("MNIST: " + std::to_string(count) + " images but " + std::to_string(be32(lab, 4)) +
                            " labels");
    if (img.size() < 16 + static_cast<std::size_t>(count * rows * cols))
        throw TruncatedFile(images.string() + ": fewer pixels than the header declares");
    if (lab.size() < 8 + static_cast<std::size_t>(count))
        throw TruncatedFile(labels.string() + ": fewer labels than the header declares");

    const Index m = options.limit ? std::min(*options.limit, count) : count;
    Dataset d;
    d.classes = 10;
    d.labels.resize(static_cast<std::size_t>(m));
    for (Index s = 0; s < m; ++s) {
        const int c = lab[static_cast<std::size_t>(8 + s)];
        if (c > 9)
            throw LabelOutOfRange("MNIST: label " + std::to_string(c) + " at sample " + std::to_string(s));
        d.labels[static_cast<std::size_t>(s)] = c + 1;
    }
    d.samples = orient(img.data() + 16, static_cast<std::size_t>(rows * cols), m, 1, rows, cols, options,
                       options.normalization.value_or(mnist_normalization()));
    return d;
}

Dataset load_cifar10(const std::vector<std::filesystem::path>& batches, const ImageOptions& options)
{
    std::vector<unsigned char> all;
    for (const auto& p : batches) {
        const auto bytes = read_file(p);
        if (bytes.size() % kCifarRecord != 0)
            throw TruncatedRecord(p.string() + ": size " + std::to_string(bytes.size()) +
                                  " is not a multiple of 3073");
        all.insert(all.end(), bytes.begin(), bytes.end());
    }
    const Index count = static_cast<Index>(all.size()) / kCifarRecord;
    const Index m = options.limit ? std::min(*options.limit, count) : count;
    Dataset d;
    d.classes = 10;
    d.labels.resize(static_cast<std::size_t>(m));
    for (Index s = 0; s < m; ++s) {
        const int c = all[static_cast<std::size_t>(s * kCifarRecord)];
        if (c > 9)
            throw LabelOutOfRange("CIFAR-10: label " + std::to_string(c) + " in record " + std::to_string(s));
        d.labels[static_cast<std::size_t>(s)] = c + 1;
    }
    d.samples = orient(all.data() + 1, kCifarRecord, m, 3, kCifarSide, kCifarSide, options,
                       options.normalization.value_or(cifar10_normalization()));
    return d;
}

std::vector<std::vector<double>> denormalize(const Dataset& d, Index channels, Index rows, Index cols,
                                             const ImageOptions& options)
{
    if (!options.normalization)
        throw std::invalid_argument("denormalize: normalization must be given");
    const auto& norm = *options.normalization;
    check_normalization(norm, channels);
    if (d.samples.dims() != image_dims(options.orientation, channels, rows, cols, d.samples.m()))
        throw ShapeError("denormalize: samples do not match the image geometry");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(d.samples.m()),
                                         std::vector<double>(static_cast<std::size_t>(channels * rows * cols)));
    for (Index s = 0; s < d.samples.m(); ++s)
        for (Index c = 0; c < channels; ++c)
            for (Index r = 0; r < rows; ++r)
                for (Index col = 0; col < cols; ++col) {
                    const Placement p = place(options.orientation, c, r, col, rows, cols);
                    const double v = d.samples(p.i, s, p.k) * norm.stds[static_cast<std::size_t>(c)] +
                                     norm.means[static_cast<std::size_t>(c)];
                    out[static_cast<std::size_t>(s)][static_cast<std::size_t>((c * rows + r) * cols + col)] = v * 255.0;
                }
    return out;
}

MnistFiles mnist_files(const std::filesystem::path& dir, bool train)
{
    const std::string prefix = train ? "train" : "t10k";
    return {dir / (prefix + "-images-idx3-ubyte"), dir / (prefix + "-labels-idx1-ubyte")};
}

std::vector<std::filesystem::path> cifar10_files(const std::filesystem::path& dir, bool train)
{
    if (!train)
        return {dir / "test_batch.bin"};
    std::vector<std::filesystem::path> out;
    for (int b = 1; b <= 5; ++b)
        out.push_back(dir / ("data_batch_" + std::to_string(b) + ".bin"));
    return out;
}

int sphere_class(double x, double y, double z)
{
    const double r = std::sqrt(x * x + y * y + z * z);
    if (r < 3.5)
        return 1;
    if (r < 5.5)
        return 2;
    return 3;
}

namespace {

Dataset spheres_from(const std::vector<double>& coords, std::vector<int> labels)
{
    Dataset d;
    d.classes = 3;
    d.split = "train";
    const Index m = static_cast<Index>(labels.size());
    d.samples = Tensor3(1, m, 3);
    for (Index j = 0; j < m; ++j)
        for (Index k = 0; k < 3; ++k)
            d.samples(0, j, k) = coords[static_cast<std::size_t>(3 * j + k)];
    d.labels = std::move(labels);
    return d;
}

}  // namespace

Dataset gen_spheres(std::uint64_t seed, SphereCounts counts)
{
    if (counts.inner < 0 || counts.middle < 0 || counts.outer < 0)
        throw std::invalid_argument("gen_spheres: negative class count");
    Rng rng(seed);
    Index want[3] = {counts.inner, counts.middle, counts.outer};
    std::vector<double> coords;
    std::vector<int> labels;
    const Index total = counts.inner + counts.middle + counts.outer;
    while (static_cast<Index>(labels.size()) < total) {
        const double x = 3.0 * rng.normal(), y = 3.0 * rng.normal(), z = 3.0 * rng.normal();
        const int c = sphere_class(x, y, z);
        if (want[c - 1] == 0)
            continue;
        --want[c - 1];
        coords.insert(coords.end(), {x, y, z});
        labels.push_back(c);
    }
    return spheres_from(coords, std::move(labels));
}

Dataset gen_spheres_raw(std::uint64_t seed, Index m)
{
    Rng rng(seed);
    std::vector<double> coords;
    std::vector<int> labels;
    for (Index s = 0; s < m; ++s) {
        const double x = 3.0 * rng.normal(), y = 3.0 * rng.normal(), z = 3.0 * rng.normal();
        coords.insert(coords.end(), {x, y, z});
        labels.push_back(sphere_class(x, y, z));
    }
    return spheres_from(coords, std::move(labels));
}

std::vector<std::vector<Index>> batch_indices(Index m, Index size, std::uint64_t seed)
{
    if (size < 1)
        throw std::invalid_argument("batch size must be at least 1");
    std::vector<Index> order(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i)
        order[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<Index>> out;
    for (Index first = 0; first < m; first += size) {
        const Index last = std::min(m, first + size);
        out.emplace_back(order.begin() + first, order.begin() + last);
    }
    return out;
}

Batch make_batch(const Dataset& d, std::span<const Index> indices)
{
    Batch b;
    b.samples = gather_lateral(d.samples, indices);
    b.labels.reserve(indices.size());
    for (Index i : indices)
        b.labels.push_back(d.labels[static_cast<std::size_t>(i)]);
    return b;
}

std::vector<Batch> batches(const Dataset& d, Index size, std::uint64_t seed)
{
    std::vector<Batch> out;
    for (const auto& idx : batch_indices(d.size(), size, seed))
        out.push_back(make_batch(d, idx));
    return out;
}

}  // namespace tnn
