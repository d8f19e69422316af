#include "tnn/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tnn {
namespace {

std::string real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
T field(const std::string& s, const char* name)
{
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || s.empty())
        throw std::runtime_error(std::string("metrics: bad ") + name + " '" + s + "'");
    return v;
}

}  // namespace

std::string format_row(const MetricsRow& r)
{
    return std::to_string(r.epoch) + "," + r.split + "," + real(r.loss) + "," + real(r.accuracy) + "," +
           real(r.seconds) + "," + real(r.max_weight_step) + "," + real(r.safeguard_residual);
}

MetricsRow parse_row(const std::string& line)
{
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ','))
        f.push_back(item);
    if (f.size() != 7)
        throw std::runtime_error("metrics: expected 7 fields in '" + line + "'");
    MetricsRow r;
    r.epoch = field<long>(f[0], "epoch");
    r.split = f[1];
    r.loss = field<double>(f[2], "loss");
    r.accuracy = field<double>(f[3], "accuracy");
    r.seconds = field<double>(f[4], "seconds");
    r.max_weight_step = field<double>(f[5], "max_weight_step");
    r.safeguard_residual = field<double>(f[6], "safeguard_residual");
    return r;
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("metrics: cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader)
        throw std::runtime_error("metrics: missing header in " + path.string());
    std::vector<MetricsRow> rows;
    while (std::getline(in, line))
        if (!line.empty())
            rows.push_back(parse_row(line));
    return rows;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : path_(path)
{
    std::ofstream out(path_, std::ios::trunc);
    if (!out)
        throw std::runtime_error("metrics: cannot write " + path_.string());
    out << kMetricsHeader << '\n';
}

void MetricsWriter::append(const MetricsRow& r)
{
    const std::string line = format_row(r) + "\n";
    std::ofstream out(path_, std::ios::app);
    out << line;
    out.flush();
    if (!out)
        throw std::runtime_error("metrics: write failed for " + path_.string());
}

}  // namespace tnn
