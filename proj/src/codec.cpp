#include "gammaproto/codec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gammaproto/error.hpp"

namespace gammaproto {

namespace {

double wrap(double t, double period) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return r;
}

// Edge positions of the code-signal markers in units of tau.
std::vector<double> start_marker(double w) { return {CodeSignalLayout::start_rise, CodeSignalLayout::start_rise + w}; }

std::vector<double> end_marker(int bits, double w) {
    const double rise = CodeSignalLayout::payload_offset + bits + CodeSignalLayout::end_marker_gap;
    return {rise, rise + w, rise + 2 * w, rise + 3 * w};
}

double code_signal_extent(int bits, double w) { return end_marker(bits, w).back(); }

void append_pulse(PulseTrain& train, double rise, double fall, EdgeKind kind) {
    train.edges.push_back({rise, EdgePolarity::rising, kind});
    train.edges.push_back({fall, EdgePolarity::falling, kind});
}

} // namespace

void TimingConfig::validate() const {
    if (!(bin_width_ns > 0.0)) throw ConfigError("timing.bin_width_ns", "must be positive");
    if (!(period_ns > 0.0)) throw ConfigError("timing.period_ns", "must be positive");
    if (bit_count < 0) throw ConfigError("timing.bit_count", "must be non-negative");
    if (!(quantize_tolerance > 0.0 && quantize_tolerance <= 0.5))
        throw ConfigError("timing.quantize_tolerance", "must lie in (0, 0.5]");
    if (!(code_signal_fraction > 0.0 && code_signal_fraction < 1.0))
        throw ConfigError("timing.code_signal_fraction", "must lie in (0, 1)");
    if (framing == Framing::code_signal) {
        const double w = code_signal_fraction;
        if (w > 0.5) throw ConfigError("timing.code_signal_fraction", "code signal must be at most half a bin");
        auto marks = start_marker(w);
        auto ends = end_marker(0, w);
        marks.insert(marks.end(), ends.begin(), ends.end());
        for (double m : marks) {
            const double frac = m - std::floor(m);
            if (frac < 0.1 || frac > 0.9)
                throw ConfigError("timing.code_signal_fraction", "framing edges must stay off bin boundaries");
        }
    }
}

TimingConfig TimingConfig::for_message(std::string_view message) const {
    TimingConfig c = *this;
    c.bit_count = static_cast<int>(8 * message.size());
    return c;
}

std::size_t PulseTrain::framing_edge_count() const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [](const Edge& e) { return e.kind == EdgeKind::framing; }));
}

std::vector<double> PulseTrain::times() const {
    std::vector<double> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.push_back(e.time_ns);
    return out;
}

std::vector<VoltagePulse> PulseTrain::voltage_pulses(const PhysicsUnits& units) const {
    std::vector<VoltagePulse> out;
    for (std::size_t i = 0; i + 1 < edges.size(); i += 2)
        out.push_back({units.to_natural(edges[i].time_ns), units.to_natural(edges[i + 1].time_ns)});
    return out;
}

void PulseTrain::validate(double period_ns) const {
    if (edges.size() % 2 != 0) throw CodecError(CodecError::Kind::unpaired_edge, "unpaired edge");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto want = i % 2 == 0 ? EdgePolarity::rising : EdgePolarity::falling;
        if (edges[i].polarity != want) throw CodecError(CodecError::Kind::bad_polarity, "edges must alternate, rising first");
        if (i > 0 && !(edges[i].time_ns > edges[i - 1].time_ns))
            throw CodecError(CodecError::Kind::bad_polarity, "edges must be strictly increasing");
        if (edges[i].time_ns < 0.0 || edges[i].time_ns >= period_ns)
            throw CodecError(CodecError::Kind::framing_overflow, "edge outside the repetition period");
    }
}

BitSequence text_to_bits(std::string_view text) {
    BitSequence bits;
    bits.reserve(8 * text.size());
    for (unsigned char c : text)
        for (int k = 7; k >= 0; --k) bits.push_back(static_cast<std::uint8_t>((c >> k) & 1u));
    return bits;
}

std::string bits_to_text(const BitSequence& bits, Framing framing) {
    if (bits.size() % 8 != 0) throw CodecError(CodecError::Kind::bad_length, "bit count is not a multiple of 8");
    std::string out;
    out.reserve(bits.size() / 8);
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        unsigned v = 0;
        for (std::size_t k = 0; k < 8; ++k) v = (v << 1) | (bits[i + k] & 1u);
        out.push_back(static_cast<char>(v));
    }
    if (framing == Framing::stx_etx) {
        if (out.size() < 2 || static_cast<std::uint8_t>(out.front()) != kStx ||
            static_cast<std::uint8_t>(out.back()) != kEtx)
            throw CodecError(CodecError::Kind::frame_marker_missing, "frame marker missing: STX/ETX not found");
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

std::string format_bits(const BitSequence& bits) {
    std::string out;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i > 0 && i % 8 == 0) out.push_back(' ');
        out.push_back(bits[i] ? '1' : '0');
    }
    return out;
}

PulseTrain bits_to_pulse_train(const BitSequence& bits, const TimingConfig& cfg) {
    if (static_cast<int>(bits.size()) != cfg.keyed_bit_count())
        throw CodecError(CodecError::Kind::length_mismatch,
                         "bit sequence has " + std::to_string(bits.size()) + " bits, expected " +
                             std::to_string(cfg.keyed_bit_count()));
    const double tau = cfg.bin_width_ns;
    PulseTrain train;
    std::size_t i = 0;
    while (i < bits.size()) {
        if (!bits[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < bits.size() && bits[j]) ++j;
        append_pulse(train, static_cast<double>(i) * tau, static_cast<double>(j) * tau, EdgeKind::payload);
        i = j;
    }
    if (static_cast<double>(bits.size()) * tau > cfg.period_ns)
        throw CodecError(CodecError::Kind::framing_overflow, "message does not fit in one repetition period");
    return train;
}

PulseTrain add_framing(const PulseTrain& train, const TimingConfig& cfg) {
    const double tau = cfg.bin_width_ns;
    switch (cfg.framing) {
    case Framing::none:
        return train;
    case Framing::stx_etx: {
        TimingConfig plain = cfg;
        plain.framing = Framing::none;
        const BitSequence payload = edges_to_bits(train, plain);
        BitSequence wrapped = text_to_bits(std::string(1, static_cast<char>(kStx)));
        wrapped.insert(wrapped.end(), payload.begin(), payload.end());
        const BitSequence etx = text_to_bits(std::string(1, static_cast<char>(kEtx)));
        wrapped.insert(wrapped.end(), etx.begin(), etx.end());
        if (static_cast<double>(wrapped.size()) * tau > cfg.period_ns)
            throw CodecError(CodecError::Kind::framing_overflow, "framing overflow: STX/ETX frame exceeds the period");
        PulseTrain out = bits_to_pulse_train(wrapped, cfg);
        // STX contributes the first pulse, ETX the last.
        const double payload_lo = 8 * tau, payload_hi = (8 + cfg.bit_count) * tau;
        for (auto& e : out.edges)
            if (e.time_ns < payload_lo || e.time_ns > payload_hi) e.kind = EdgeKind::framing;
        return out;
    }
    case Framing::code_signal: {
        const double w = cfg.code_signal_fraction;
        const double extent = code_signal_extent(cfg.bit_count, w) * tau;
        if (extent > cfg.period_ns - 0.75 * tau)
            throw CodecError(CodecError::Kind::framing_overflow, "framing overflow: code-signal frame exceeds the period");
        PulseTrain out;
        const auto start = start_marker(w);
        append_pulse(out, start[0] * tau, start[1] * tau, EdgeKind::framing);
        for (const auto& e : train.edges)
            out.edges.push_back({e.time_ns + CodeSignalLayout::payload_offset * tau, e.polarity, EdgeKind::payload});
        const auto end = end_marker(cfg.bit_count, w);
        append_pulse(out, end[0] * tau, end[1] * tau, EdgeKind::framing);
        append_pulse(out, end[2] * tau, end[3] * tau, EdgeKind::framing);
        return out;
    }
    }
    return train;
}

PulseTrain encode_message(std::string_view text, const TimingConfig& cfg) {
    TimingConfig sized = cfg.for_message(text);
    sized.validate();
    TimingConfig plain = sized;
    plain.framing = Framing::none;
    const PulseTrain payload = bits_to_pulse_train(text_to_bits(text), plain);
    PulseTrain framed = add_framing(payload, sized);
    framed.validate(cfg.period_ns);
    return framed;
}

BitSequence edges_to_bits(std::span<const double> edge_times_ns, const TimingConfig& cfg, int bit_count) {
    if (edge_times_ns.size() % 2 != 0) throw CodecError(CodecError::Kind::unpaired_edge, "unpaired edge");
    std::vector<double> times(edge_times_ns.begin(), edge_times_ns.end());
    std::sort(times.begin(), times.end());
    const double tau = cfg.bin_width_ns;
    const double tol = cfg.quantize_tolerance * tau;
    std::vector<long> slots;
    slots.reserve(times.size());
    for (double t : times) {
        const long k = std::lround(t / tau);
        if (std::abs(t - static_cast<double>(k) * tau) > tol)
            throw CodecError(CodecError::Kind::off_grid_edge, "edge at " + std::to_string(t) + " ns is off the bin grid");
        if (k < 0 || k > bit_count)
            throw CodecError(CodecError::Kind::edge_out_of_range,
                             "edge at " + std::to_string(t) + " ns lies outside the message");
        slots.push_back(k);
    }
    BitSequence bits(static_cast<std::size_t>(bit_count), 0);
    for (std::size_t i = 0; i < slots.size(); i += 2) {
        if (slots[i + 1] <= slots[i] || (i > 0 && slots[i] < slots[i - 1]))
            throw CodecError(CodecError::Kind::unpaired_edge, "unpaired edge: edges collapse onto one bin boundary");
        std::fill(bits.begin() + slots[i], bits.begin() + slots[i + 1], 1);
    }
    return bits;
}

BitSequence edges_to_bits(const PulseTrain& train, const TimingConfig& cfg) {
    train.validate(cfg.period_ns);
    const auto times = train.times();
    return edges_to_bits(times, cfg, cfg.keyed_bit_count());
}

RealignedFrame realign_cyclic(std::span<const double> edge_times_ns, const TimingConfig& cfg) {
    if (cfg.framing != Framing::code_signal)
        throw CodecError(CodecError::Kind::frame_marker_missing, "frame marker missing: framing is not code-signal");
    const double tau = cfg.bin_width_ns;
    const double period = cfg.period_ns;
    const double w = cfg.code_signal_fraction;
    const double short_gap = 0.5 * (1.0 + w) * tau;

    std::vector<double> t;
    for (double x : edge_times_ns) t.push_back(wrap(x, period));
    std::sort(t.begin(), t.end());
    const std::size_t n = t.size();
    if (n < 2) throw CodecError(CodecError::Kind::frame_marker_missing, "frame marker missing");

    std::vector<bool> is_short(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double gap = i + 1 < n ? t[i + 1] - t[i] : t[0] + period - t[i];
        is_short[i] = gap < short_gap;
    }
    if (std::all_of(is_short.begin(), is_short.end(), [](bool s) { return s; }))
        throw CodecError(CodecError::Kind::ambiguous_frame, "ambiguous frame: no long gaps");

    // Runs of consecutive short gaps as (first gap index, length), scanned cyclically
    // from a long gap.
    const std::size_t anchor = static_cast<std::size_t>(std::find(is_short.begin(), is_short.end(), false) - is_short.begin());
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t i = (anchor + k) % n;
        if (!is_short[i]) continue;
        if (!runs.empty() && (runs.back().first + runs.back().second) % n == i) ++runs.back().second;
        else runs.emplace_back(i, 1);
    }
    std::vector<std::size_t> starts, ends;
    for (auto [i, len] : runs) {
        if (len == 1) starts.push_back(i);
        else if (len == 3) ends.push_back(i);
        else throw CodecError(CodecError::Kind::ambiguous_frame, "ambiguous frame: unexpected cluster of short pulses");
    }
    if (starts.empty()) throw CodecError(CodecError::Kind::frame_marker_missing, "frame marker missing");
    if (starts.size() > 1) throw CodecError(CodecError::Kind::ambiguous_frame, "ambiguous frame: several start markers");
    if (ends.size() > 1) throw CodecError(CodecError::Kind::ambiguous_frame, "ambiguous frame: several end markers");

    RealignedFrame frame;
    frame.origin_ns = wrap(t[starts[0]] - CodeSignalLayout::start_rise * tau, period);
    std::vector<double> rotated;
    for (double x : t) rotated.push_back(wrap(x - frame.origin_ns, period));
    const double start_fall = wrap(t[(starts[0] + 1) % n] - frame.origin_ns, period);
    double end_rise = period;
    if (!ends.empty()) {
        frame.end_marker_found = true;
        end_rise = wrap(t[ends[0]] - frame.origin_ns, period);
        frame.bit_count = static_cast<int>(
            std::lround(end_rise / tau - CodeSignalLayout::payload_offset - CodeSignalLayout::end_marker_gap));
        if (frame.bit_count < 0) throw CodecError(CodecError::Kind::ambiguous_frame, "ambiguous frame: end marker precedes start");
    } else {
        frame.bit_count = cfg.bit_count;
    }
    const double guard = 0.25 * tau;
    for (double r : rotated)
        if (r > start_fall + guard && r < end_rise - guard)
            frame.payload_edges_ns.push_back(r - CodeSignalLayout::payload_offset * tau);
    std::sort(frame.payload_edges_ns.begin(), frame.payload_edges_ns.end());
    return frame;
}

std::string decode_edges(std::span<const double> edge_times_ns, const TimingConfig& cfg) {
    switch (cfg.framing) {
    case Framing::code_signal: {
        const RealignedFrame frame = realign_cyclic(edge_times_ns, cfg);
        return bits_to_text(edges_to_bits(frame.payload_edges_ns, cfg, frame.bit_count));
    }
    case Framing::stx_etx:
        return bits_to_text(edges_to_bits(edge_times_ns, cfg, cfg.keyed_bit_count()), Framing::stx_etx);
    case Framing::none:
        break;
    }
    return bits_to_text(edges_to_bits(edge_times_ns, cfg, cfg.bit_count));
}

PhaseProfile phase_profile_for(const PulseTrain& train, const TimingConfig& cfg, const PhysicsUnits& units,
                               PhaseMode mode, double trd, PhaseConvention convention) {
    const double period = units.to_natural(cfg.period_ns);
    auto pulses = train.voltage_pulses(units);
    if (mode == PhaseMode::realistic_rc) return PhaseProfile::realistic(period, std::move(pulses), trd, convention);
    return PhaseProfile::ideal(period, std::move(pulses), convention);
}

} // namespace gammaproto
