#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gammaproto/phase.hpp"
#include "gammaproto/units.hpp"

namespace gammaproto {

enum class Framing { none, code_signal, stx_etx };

inline constexpr std::uint8_t kStx = 0x02;
inline constexpr std::uint8_t kEtx = 0x03;

struct TimingConfig {
    double bin_width_ns = 347.0;      // tau
    int bit_count = 48;               // N message bits, framing excluded
    double period_ns = 20000.0;       // T_S = 1 / Omega_S
    Framing framing = Framing::none;
    double code_signal_fraction = 0.5;
    double quantize_tolerance = 0.5;  // accepted edge offset from a bin boundary, fraction of tau

    void validate() const;

    // Bits actually keyed onto the voltage line (STX/ETX bytes included).
    int keyed_bit_count() const { return framing == Framing::stx_etx ? bit_count + 16 : bit_count; }

    // Same config with bit_count sized for `message`.
    TimingConfig for_message(std::string_view message) const;
};

// Code-signal frame layout in units of tau. The start marker is one pulse of width w;
// the payload starts at payload_offset; the end marker is two pulses of width w
// separated by w, starting end_marker_gap after the payload.
struct CodeSignalLayout {
    static constexpr double start_rise = 0.25;
    static constexpr double payload_offset = 2.0;
    static constexpr double end_marker_gap = 1.25;
};

using BitSequence = std::vector<std::uint8_t>;

enum class EdgePolarity : std::uint8_t { rising, falling };
enum class EdgeKind : std::uint8_t { payload, framing };

struct Edge {
    double time_ns;
    EdgePolarity polarity;
    EdgeKind kind;
};

struct PulseTrain {
    std::vector<Edge> edges;

    std::size_t pulse_count() const { return edges.size() / 2; }
    std::size_t framing_edge_count() const;
    std::vector<double> times() const;

    // Rectangular voltage pulses in units of T1.
    std::vector<VoltagePulse> voltage_pulses(const PhysicsUnits& units) const;

    // Throws CodecError unless edges are strictly increasing, alternate starting with
    // rising, and lie in [0, period_ns).
    void validate(double period_ns) const;
};

BitSequence text_to_bits(std::string_view text);

// MSB-first reassembly. stx_etx framing strips the STX/ETX wrapper.
std::string bits_to_text(const BitSequence& bits, Framing framing = Framing::none);

// Space-separated octets, e.g. "01001110 01100001".
std::string format_bits(const BitSequence& bits);

// Maximal runs of 1s become one voltage pulse each. bits.size() must equal cfg.keyed_bit_count().
PulseTrain bits_to_pulse_train(const BitSequence& bits, const TimingConfig& cfg);

// Adds start/end code signals (code_signal) or STX/ETX bytes (stx_etx) to an unframed message train.
PulseTrain add_framing(const PulseTrain& train, const TimingConfig& cfg);

// text -> bits -> pulses -> framing.
PulseTrain encode_message(std::string_view text, const TimingConfig& cfg);

// Quantizes edge times (ns from the payload origin) to bin boundaries and fills
// every (rising, falling) interval with 1s. Polarity is inferred: the first edge rises.
BitSequence edges_to_bits(std::span<const double> edge_times_ns, const TimingConfig& cfg, int bit_count);

// Decodes an unframed train, checking its polarity tags.
BitSequence edges_to_bits(const PulseTrain& train, const TimingConfig& cfg);

struct RealignedFrame {
    std::vector<double> payload_edges_ns;  // relative to the payload origin
    int bit_count = 0;                     // inferred from the end marker when present
    double origin_ns = 0.0;                // where t = 0 of the sender's frame fell
    bool end_marker_found = false;
};

// Finds the unique isolated short pulse (start code signal) among cyclically ordered
// edges, rotates the frame so it leads, and strips the framing.
RealignedFrame realign_cyclic(std::span<const double> edge_times_ns, const TimingConfig& cfg);

// Full receive path for edge times measured within one period, honoring cfg.framing.
std::string decode_edges(std::span<const double> edge_times_ns, const TimingConfig& cfg);

// Phase-modulation profile for a pulse train, in units of T1.
PhaseProfile phase_profile_for(const PulseTrain& train, const TimingConfig& cfg, const PhysicsUnits& units,
                               PhaseMode mode = PhaseMode::ideal_step, double trd = 0.2,
                               PhaseConvention convention = PhaseConvention::half_wave);

} // namespace gammaproto
