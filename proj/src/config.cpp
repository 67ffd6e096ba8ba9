#include "gammaproto/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include "gammaproto/error.hpp"

namespace gammaproto {

using nlohmann::json;

namespace {

// Walks one JSON object, tracking which keys were consumed.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    Section child(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(node_.contains(key) ? node_.at(key) : empty, path(key));
    }

    void number(const std::string& key, double& out) {
        if (!take(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_number()) throw ConfigError(path(key), "expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw ConfigError(path(key), "must be finite");
    }

    void integer(const std::string& key, int& out) {
        if (!take(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
        out = v.get<int>();
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (!take(key)) return;
        const auto& v = node_.at(key);
        if (v.is_number_unsigned()) out = v.get<std::uint64_t>();
        else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) out = static_cast<std::uint64_t>(v.get<std::int64_t>());
        else throw ConfigError(path(key), "expected a non-negative integer");
    }

    void boolean(const std::string& key, bool& out) {
        if (!take(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
        out = v.get<bool>();
    }

    void string(const std::string& key, std::string& out) {
        if (!take(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_string()) throw ConfigError(path(key), "expected a string");
        out = v.get<std::string>();
    }

    template <typename E>
    void choice(const std::string& key, E& out, std::initializer_list<std::pair<const char*, E>> options) {
        std::string s;
        if (!take(key)) return;
        string(key, s);
        std::string names;
        for (const auto& [name, value] : options) {
            if (s == name) {
                out = value;
                return;
            }
            names += names.empty() ? name : std::string(", ") + name;
        }
        throw ConfigError(path(key), "expected one of: " + names);
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }

private:
    bool take(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key) && !node_.at(key).is_null();
    }

    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("message_file", "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

const char* phase_mode_name(PhaseMode m) { return m == PhaseMode::ideal_step ? "ideal" : "realistic"; }
const char* convention_name(PhaseConvention c) { return c == PhaseConvention::half_wave ? "half-wave" : "full-wave"; }

} // namespace

std::string to_string(Framing f) {
    switch (f) {
    case Framing::none: return "none";
    case Framing::code_signal: return "code-signal";
    case Framing::stx_etx: return "stx-etx";
    }
    return "none";
}

std::string to_string(SimulationMode m) { return m == SimulationMode::micro ? "micro" : "macro"; }

void ExperimentConfig::validate() const {
    units.validate();
    absorber.validate();
    timing.validate();
    stream.validate();
    tac.validate();
    quadrature.validate();
    if (threads < 1) throw ConfigError("threads", "must be at least 1");
    if (!(phase.trd > 0.0)) throw ConfigError("phase.trd", "must be positive");
    if (!(peaks.k_sigma > 0.0)) throw ConfigError("peaks.k_sigma", "must be positive");
    if (!(peaks.min_mean_counts >= 0.0)) throw ConfigError("peaks.min_mean_counts", "must be >= 0");
    if (!(curves.step > 0.0) || !(curves.t_max > curves.step)) throw ConfigError("curves", "need 0 < step < t_max");
    if (!(curves.flip_time > 0.0)) throw ConfigError("curves.flip_time", "must be positive");
    if (!(curves.pulse_fall > curves.pulse_rise) || curves.pulse_rise < 0.0)
        throw ConfigError("curves", "need 0 <= pulse_rise < pulse_fall");
    if (records.format != "csv" && records.format != "binary")
        throw ConfigError("records.format", "expected csv or binary");
    if (timing.bit_count != static_cast<int>(8 * message.size()))
        throw ConfigError("timing.bit_count", "is " + std::to_string(timing.bit_count) + " but the message holds " +
                                                  std::to_string(8 * message.size()) + " bits");
    if (static_cast<double>(timing.keyed_bit_count()) * timing.bin_width_ns > timing.period_ns)
        throw ConfigError("timing.bit_count", "message does not fit in one period");
    try {
        encode_message(message, timing);
    } catch (const CodecError& e) {
        throw ConfigError("timing.framing", e.what());
    }
}

void ExperimentConfig::finalize() { stream.seed = seed; }

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    Section root(doc, "");
    root.string("message", c.message);
    if (root.has("message_file")) {
        if (root.has("message")) throw ConfigError("message_file", "conflicts with message");
        std::string file;
        root.string("message_file", file);
        c.message = read_bytes(base_dir / file);
    }
    root.unsigned64("seed", c.seed);
    root.string("output_dir", c.output_dir);
    root.integer("threads", c.threads);

    auto units = root.child("units");
    units.number("t1_ns", c.units.t1_ns);
    units.finish();

    auto ab = root.child("absorber");
    ab.number("optical_thickness", c.absorber.optical_thickness);
    ab.number("coherence_rate_ratio", c.absorber.coherence_rate_ratio);
    ab.number("detuning", c.absorber.detuning);
    ab.number("nonresonant_depth", c.absorber.nonresonant_depth);
    ab.number("recoilless_fraction", c.absorber.recoilless_fraction);
    ab.finish();

    auto tm = root.child("timing");
    tm.number("bin_width_ns", c.timing.bin_width_ns);
    c.timing.bit_count = static_cast<int>(8 * c.message.size());
    tm.integer("bit_count", c.timing.bit_count);
    tm.number("period_ns", c.timing.period_ns);
    tm.choice("framing", c.timing.framing,
              {{"none", Framing::none}, {"code-signal", Framing::code_signal}, {"stx-etx", Framing::stx_etx}});
    tm.number("code_signal_fraction", c.timing.code_signal_fraction);
    tm.number("quantize_tolerance", c.timing.quantize_tolerance);
    tm.finish();

    auto ph = root.child("phase");
    ph.choice("mode", c.phase.mode, {{"ideal", PhaseMode::ideal_step}, {"realistic", PhaseMode::realistic_rc}});
    ph.number("trd", c.phase.trd);
    ph.choice("convention", c.phase.convention,
              {{"half-wave", PhaseConvention::half_wave}, {"full-wave", PhaseConvention::full_wave}});
    ph.finish();

    auto st = root.child("stream");
    st.number("mean_rate_hz", c.stream.mean_rate_hz);
    st.number("duration_s", c.stream.duration_s);
    st.choice("mode", c.stream.mode, {{"micro", SimulationMode::micro}, {"macro", SimulationMode::macro}});
    st.number("detector_efficiency", c.stream.detector_efficiency);
    st.number("chunk_duration_s", c.stream.chunk_duration_s);
    st.finish();

    auto tac = root.child("tac");
    c.tac.start_period_ns = c.timing.period_ns;
    tac.number("start_period_ns", c.tac.start_period_ns);
    tac.number("frequency_offset_hz", c.tac.frequency_offset_hz);
    tac.integer("channel_count", c.tac.channel_count);
    tac.number("start_phase_ns", c.tac.start_phase_ns);
    tac.finish();

    auto q = root.child("quadrature");
    q.number("horizon", c.quadrature.horizon);
    q.number("rel_tol", c.quadrature.rel_tol);
    q.number("grid_step", c.quadrature.grid_step);
    q.finish();

    auto pk = root.child("peaks");
    pk.number("k_sigma", c.peaks.k_sigma);
    pk.number("min_mean_counts", c.peaks.min_mean_counts);
    pk.finish();

    auto cv = root.child("curves");
    cv.number("t_max", c.curves.t_max);
    cv.number("step", c.curves.step);
    cv.number("flip_time", c.curves.flip_time);
    cv.number("pulse_rise", c.curves.pulse_rise);
    cv.number("pulse_fall", c.curves.pulse_fall);
    cv.finish();

    auto rec = root.child("records");
    rec.boolean("write", c.records.write);
    rec.string("format", c.records.format);
    rec.finish();

    root.finish();
    c.finalize();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(doc, path.parent_path());
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["message"] = c.message;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
    j["units"] = {{"t1_ns", c.units.t1_ns}};
    j["absorber"] = {{"optical_thickness", c.absorber.optical_thickness},
                     {"coherence_rate_ratio", c.absorber.coherence_rate_ratio},
                     {"detuning", c.absorber.detuning},
                     {"nonresonant_depth", c.absorber.nonresonant_depth},
                     {"recoilless_fraction", c.absorber.recoilless_fraction}};
    j["timing"] = {{"bin_width_ns", c.timing.bin_width_ns},
                   {"bit_count", c.timing.bit_count},
                   {"period_ns", c.timing.period_ns},
                   {"framing", to_string(c.timing.framing)},
                   {"code_signal_fraction", c.timing.code_signal_fraction},
                   {"quantize_tolerance", c.timing.quantize_tolerance}};
    j["phase"] = {{"mode", phase_mode_name(c.phase.mode)},
                  {"trd", c.phase.trd},
                  {"convention", convention_name(c.phase.convention)}};
    j["stream"] = {{"mean_rate_hz", c.stream.mean_rate_hz},
                   {"duration_s", c.stream.duration_s},
                   {"mode", to_string(c.stream.mode)},
                   {"detector_efficiency", c.stream.detector_efficiency},
                   {"chunk_duration_s", c.stream.chunk_duration_s}};
    j["tac"] = {{"start_period_ns", c.tac.start_period_ns},
                {"frequency_offset_hz", c.tac.frequency_offset_hz},
                {"channel_count", c.tac.channel_count},
                {"start_phase_ns", c.tac.start_phase_ns}};
    j["quadrature"] = {{"horizon", c.quadrature.horizon},
                       {"rel_tol", c.quadrature.rel_tol},
                       {"grid_step", c.quadrature.grid_step}};
    j["peaks"] = {{"k_sigma", c.peaks.k_sigma}, {"min_mean_counts", c.peaks.min_mean_counts}};
    j["curves"] = {{"t_max", c.curves.t_max},
                   {"step", c.curves.step},
                   {"flip_time", c.curves.flip_time},
                   {"pulse_rise", c.curves.pulse_rise},
                   {"pulse_fall", c.curves.pulse_fall}};
    j["records"] = {{"write", c.records.write}, {"format", c.records.format}};
    return j;
}

std::string config_digest(const ExperimentConfig& c) {
    json j = config_to_json(c);
    j.erase("output_dir");
    j.erase("threads");
    j["records"].erase("write");
    // The message may hold arbitrary bytes; hash it as hex.
    std::string hex;
    for (unsigned char ch : c.message) {
        char b[3];
        std::snprintf(b, sizeof b, "%02x", ch);
        hex += b;
    }
    j["message"] = hex;
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return hex64(h);
}

} // namespace gammaproto
