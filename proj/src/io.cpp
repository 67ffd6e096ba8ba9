#include "gammaproto/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gammaproto/error.hpp"

namespace gammaproto {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw Error("cannot read " + path.string());
    return in;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

long long parse_int(const std::filesystem::path& path, const std::string& field) {
    long long v = 0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end) throw Error(path.string() + ": bad integer '" + field + "'");
    return v;
}

double parse_double(const std::filesystem::path& path, const std::string& field) {
    double v = 0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end) throw Error(path.string() + ": bad number '" + field + "'");
    return v;
}

// Next non-comment line.
bool data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') return true;
    }
    return false;
}

} // namespace

std::string OutputStamp::comment() const { return "# digest=" + digest + " seed=" + std::to_string(seed); }

void write_records_csv(const std::filesystem::path& path, const DetectionRecords& records, const OutputStamp& stamp) {
    auto out = open_out(path);
    if (!stamp.digest.empty()) out << stamp.comment() << '\n';
    out << "t_abs_ns\n";
    for (const auto& r : records) out << static_cast<long long>(std::llround(r.t_abs_ns)) << '\n';
}

DetectionRecords read_records_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!data_line(in, line) || line != "t_abs_ns") throw Error(path.string() + ": expected header t_abs_ns");
    DetectionRecords out;
    while (data_line(in, line)) out.push_back({static_cast<double>(parse_int(path, line))});
    return out;
}

void write_records_binary(const std::filesystem::path& path, const DetectionRecords& records) {
    auto out = open_out(path, std::ios::binary);
    for (const auto& r : records) {
        const auto v = static_cast<std::int64_t>(std::llround(r.t_abs_ns));
        unsigned char b[8];
        for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * k));
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

DetectionRecords read_records_binary(const std::filesystem::path& path) {
    auto in = open_in(path, std::ios::binary);
    DetectionRecords out;
    unsigned char b[8];
    while (in.read(reinterpret_cast<char*>(b), 8)) {
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
        out.push_back({static_cast<double>(static_cast<std::int64_t>(v))});
    }
    if (in.gcount() != 0) throw Error(path.string() + ": truncated record");
    return out;
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h, const OutputStamp& stamp) {
    auto out = open_out(path);
    out << stamp.comment() << '\n' << "channel,time_ns,counts\n";
    for (int c = 0; c < h.channel_count(); ++c)
        out << c << ',' << fixed(c * h.channel_width_ns, 4) << ',' << h.counts(c) << '\n';
}

Histogram read_histogram_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!data_line(in, line) || line != "channel,time_ns,counts")
        throw Error(path.string() + ": expected header channel,time_ns,counts");
    std::vector<std::int64_t> counts;
    std::vector<double> times;
    while (data_line(in, line)) {
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
            throw Error(path.string() + ": malformed row '" + line + "'");
        if (parse_int(path, a) != static_cast<long long>(counts.size()))
            throw Error(path.string() + ": channels must be listed in order from 0");
        times.push_back(parse_double(path, b));
        const long long n = parse_int(path, c);
        if (n < 0) throw Error(path.string() + ": negative count");
        counts.push_back(n);
    }
    if (counts.size() < 2) throw Error(path.string() + ": need at least two channels");
    Histogram h;
    h.counts = Eigen::Map<const CountVector>(counts.data(), static_cast<Eigen::Index>(counts.size()));
    h.channel_width_ns = (times.back() - times.front()) / static_cast<double>(counts.size() - 1);
    h.total_counts = h.counts.sum();
    return h;
}

nlohmann::json histogram_sidecar(const Histogram& h, const TacConfig& tac, const OutputStamp& stamp) {
    return {{"tac",
             {{"start_period_ns", tac.start_period_ns},
              {"frequency_offset_hz", tac.frequency_offset_hz},
              {"channel_count", tac.channel_count},
              {"start_phase_ns", tac.start_phase_ns}}},
            {"channel_width_ns", h.channel_width_ns},
            {"total_starts", h.total_starts},
            {"total_counts", h.total_counts},
            {"seed", stamp.seed},
            {"digest", stamp.digest}};
}

void write_pulse_train_csv(const std::filesystem::path& path, const PulseTrain& train, const OutputStamp& stamp) {
    auto out = open_out(path);
    out << stamp.comment() << '\n' << "edge,time_ns,polarity,kind\n";
    for (std::size_t i = 0; i < train.edges.size(); ++i) {
        const auto& e = train.edges[i];
        out << i << ',' << fixed(e.time_ns, 3) << ',' << (e.polarity == EdgePolarity::rising ? "rising" : "falling")
            << ',' << (e.kind == EdgeKind::payload ? "payload" : "framing") << '\n';
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    auto out = open_out(path);
    out << doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

} // namespace gammaproto
