#include <doctest.h>

#include <functional>
#include <numbers>
#include <random>

#include "gammaproto/codec.hpp"
#include "gammaproto/error.hpp"

using namespace gammaproto;

namespace {

const char* kNatureBits = "01001110 01100001 01110100 01110101 01110010 01100101";

TimingConfig nature_cfg(Framing framing = Framing::none) {
    TimingConfig c;
    c.framing = framing;
    return c.for_message("Nature");
}

BitSequence parse_bits(std::string_view s) {
    BitSequence out;
    for (char c : s)
        if (c == '0' || c == '1') out.push_back(static_cast<std::uint8_t>(c - '0'));
    return out;
}

CodecError::Kind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const CodecError& e) {
        return e.kind();
    }
    FAIL("expected CodecError");
    return CodecError::Kind::bad_length;
}

} // namespace

TEST_CASE("text to bits, MSB first") {
    CHECK(format_bits(text_to_bits("N")) == "01001110");
    CHECK(text_to_bits("").empty());
    CHECK(format_bits(text_to_bits("Nature")) == kNatureBits);
    CHECK(format_bits(text_to_bits("\xff\x01")) == "11111111 00000001");
}

TEST_CASE("bits to text") {
    CHECK(bits_to_text(parse_bits(kNatureBits)) == "Nature");
    CHECK(bits_to_text({}).empty());
    CHECK(kind_of([] { bits_to_text(BitSequence(7, 0)); }) == CodecError::Kind::bad_length);
    std::mt19937_64 rng(3);
    std::string s(1000, '\0');
    for (auto& c : s) c = static_cast<char>(rng() & 0xff);
    CHECK(bits_to_text(text_to_bits(s)) == s);
}

TEST_CASE("Nature encodes to 14 pulses and 28 edges") {
    const auto cfg = nature_cfg();
    CHECK(cfg.bit_count == 48);
    CHECK(cfg.bit_count * cfg.bin_width_ns == 16656.0);
    const auto train = bits_to_pulse_train(text_to_bits("Nature"), cfg);
    CHECK(train.pulse_count() == 14);
    CHECK(train.edges.size() == 28);
    CHECK(train.edges.front().time_ns == doctest::Approx(347.0));
    CHECK(train.edges.front().polarity == EdgePolarity::rising);
    CHECK(train.edges[1].time_ns == doctest::Approx(2 * 347.0));
    // "e" = 01100101 ends on 1: falling edge at N tau
    CHECK(train.edges.back().time_ns == doctest::Approx(48 * 347.0));
    train.validate(cfg.period_ns);
    for (const auto& e : train.edges) {
        const double k = e.time_ns / cfg.bin_width_ns;
        CHECK(k == doctest::Approx(std::round(k)));
    }
}

TEST_CASE("run merging and simple trains") {
    TimingConfig cfg;
    cfg.bit_count = 4;
    const auto t = bits_to_pulse_train({0, 1, 1, 0}, cfg);
    REQUIRE(t.pulse_count() == 1);
    CHECK(t.edges[0].time_ns == doctest::Approx(347.0));
    CHECK(t.edges[1].time_ns == doctest::Approx(3 * 347.0));
    CHECK(bits_to_pulse_train({0, 0, 0, 0}, cfg).edges.empty());
    CHECK(kind_of([&] { bits_to_pulse_train({1, 0, 1}, cfg); }) == CodecError::Kind::length_mismatch);
    // runs merge across byte boundaries: 00000001 10000000 is one pulse
    cfg.bit_count = 16;
    CHECK(bits_to_pulse_train(text_to_bits("\x01\x80"), cfg).pulse_count() == 1);
}

TEST_CASE("edge count equals twice the number of 1-runs") {
    std::mt19937_64 rng(11);
    TimingConfig cfg;
    cfg.bit_count = 48;
    for (int trial = 0; trial < 200; ++trial) {
        BitSequence bits(48);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
        int runs = 0;
        for (std::size_t i = 0; i < bits.size(); ++i) runs += bits[i] && (i == 0 || !bits[i - 1]);
        const auto train = bits_to_pulse_train(bits, cfg);
        CHECK(train.edges.size() == static_cast<std::size_t>(2 * runs));
        CHECK(edges_to_bits(train, cfg) == bits);
    }
}

TEST_CASE("edges to bits") {
    const auto cfg = nature_cfg();
    const auto train = encode_message("Nature", cfg);
    CHECK(edges_to_bits(train, cfg) == text_to_bits("Nature"));
    CHECK(edges_to_bits(std::vector<double>{}, cfg, 48) == BitSequence(48, 0));

    const std::vector<double> odd{347.0, 694.0, 1041.0};
    CHECK(kind_of([&] { edges_to_bits(odd, cfg, 48); }) == CodecError::Kind::unpaired_edge);
    const std::vector<double> late{347.0, 49 * 347.0};
    CHECK(kind_of([&] { edges_to_bits(late, cfg, 48); }) == CodecError::Kind::edge_out_of_range);
    const std::vector<double> collapsed{347.0, 400.0};
    CHECK(kind_of([&] { edges_to_bits(collapsed, cfg, 48); }) == CodecError::Kind::unpaired_edge);
    TimingConfig tight = cfg;
    tight.quantize_tolerance = 0.1;
    const std::vector<double> off{347.0 * 1.3, 694.0};
    CHECK(kind_of([&] { edges_to_bits(off, tight, 48); }) == CodecError::Kind::off_grid_edge);
}

TEST_CASE("quantization tolerates peak-location noise of 0.2 tau") {
    const auto cfg = nature_cfg();
    const auto edges = encode_message("Nature", cfg).times();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> jitter(-0.2 * 347.0, 0.2 * 347.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> noisy;
        for (double e : edges) noisy.push_back(e + jitter(rng));
        CHECK(bits_to_text(edges_to_bits(noisy, cfg, 48)) == "Nature");
    }
}

TEST_CASE("polarity checks on tagged trains") {
    const auto cfg = nature_cfg();
    auto train = encode_message("Nature", cfg);
    std::swap(train.edges[0].polarity, train.edges[1].polarity);
    CHECK(kind_of([&] { edges_to_bits(train, cfg); }) == CodecError::Kind::bad_polarity);
}

TEST_CASE("code-signal framing layout") {
    auto cfg = nature_cfg(Framing::code_signal);
    const PulseTrain empty;
    TimingConfig zero = cfg;
    zero.bit_count = 0;
    const auto framed_empty = add_framing(empty, zero);
    CHECK(framed_empty.pulse_count() == 3);
    CHECK(framed_empty.edges.size() == 6);
    CHECK(framed_empty.framing_edge_count() == 6);

    const auto train = encode_message("Nature", cfg);
    CHECK(train.pulse_count() == 17);
    CHECK(train.framing_edge_count() == 6);
    const double tau = cfg.bin_width_ns;
    // framing edges sit off bin boundaries, payload edges on them (shifted by the payload offset)
    for (const auto& e : train.edges) {
        const double k = e.time_ns / tau;
        const double frac = k - std::floor(k);
        if (e.kind == EdgeKind::framing) CHECK(std::min(frac, 1 - frac) >= 0.1);
        else CHECK(std::min(frac, 1 - frac) == doctest::Approx(0.0).epsilon(1e-9));
    }
    // the start marker is sub-tau
    CHECK(train.edges[1].time_ns - train.edges[0].time_ns == doctest::Approx(0.5 * tau));
}

TEST_CASE("framing none is the identity") {
    const auto cfg = nature_cfg();
    const auto train = bits_to_pulse_train(text_to_bits("Nature"), cfg);
    CHECK(add_framing(train, cfg).times() == train.times());
}

TEST_CASE("STX/ETX framing wraps the payload") {
    auto cfg = nature_cfg(Framing::stx_etx);
    CHECK(cfg.keyed_bit_count() == 64);
    // 64 bins of 347 ns do not fit in 20 us
    CHECK(kind_of([&] { encode_message("Nature", cfg); }) == CodecError::Kind::framing_overflow);
    cfg.period_ns = 25000.0;
    const auto train = encode_message("Nature", cfg);
    const auto bits = edges_to_bits(train, cfg);
    CHECK(bits.size() == 64);
    CHECK(format_bits(bits) == "00000010 " + std::string(kNatureBits) + " 00000011");
    CHECK(bits_to_text(bits, Framing::stx_etx) == "Nature");
    CHECK(decode_edges(train.times(), cfg) == "Nature");
    CHECK(train.framing_edge_count() == 4);
    CHECK(kind_of([&] { bits_to_text(text_to_bits("Nature"), Framing::stx_etx); }) ==
          CodecError::Kind::frame_marker_missing);
}

TEST_CASE("code-signal framing overflow") {
    auto cfg = nature_cfg(Framing::code_signal);
    cfg.period_ns = 17000.0;
    CHECK(kind_of([&] { encode_message("Nature", cfg); }) == CodecError::Kind::framing_overflow);
}

TEST_CASE("cyclic realignment recovers every rotation") {
    const auto cfg = nature_cfg(Framing::code_signal);
    const auto edges = encode_message("Nature", cfg).times();
    const double tau = cfg.bin_width_ns;
    for (int k = 0; k < 58; ++k) {
        std::vector<double> rotated;
        for (double e : edges) rotated.push_back(std::fmod(e + k * tau, cfg.period_ns));
        CAPTURE(k);
        CHECK(decode_edges(rotated, cfg) == "Nature");
    }
    // arbitrary sub-bin offsets too
    for (double shift : {1.0, 123.4, 5000.0, 19999.0}) {
        std::vector<double> rotated;
        for (double e : edges) rotated.push_back(std::fmod(e + shift, cfg.period_ns));
        const auto frame = realign_cyclic(rotated, cfg);
        CHECK(frame.end_marker_found);
        CHECK(frame.bit_count == 48);
        CHECK(frame.origin_ns == doctest::Approx(shift).epsilon(1e-9));
        CHECK(bits_to_text(edges_to_bits(frame.payload_edges_ns, cfg, frame.bit_count)) == "Nature");
    }
}

TEST_CASE("rotation by zero is the identity") {
    const auto cfg = nature_cfg(Framing::code_signal);
    const auto frame = realign_cyclic(encode_message("Nature", cfg).times(), cfg);
    CHECK(frame.origin_ns == doctest::Approx(0.0));
    const auto plain = bits_to_pulse_train(text_to_bits("Nature"), nature_cfg()).times();
    REQUIRE(frame.payload_edges_ns.size() == plain.size());
    for (std::size_t i = 0; i < plain.size(); ++i) CHECK(frame.payload_edges_ns[i] == doctest::Approx(plain[i]));
}

TEST_CASE("realignment errors") {
    auto cfg = nature_cfg(Framing::code_signal);
    const auto unframed = bits_to_pulse_train(text_to_bits("Nature"), nature_cfg()).times();
    CHECK(kind_of([&] { realign_cyclic(unframed, cfg); }) == CodecError::Kind::frame_marker_missing);
    auto framed = encode_message("Nature", cfg).times();
    // a second isolated code signal
    framed.push_back(19000.0);
    framed.push_back(19000.0 + 0.5 * 347.0);
    CHECK(kind_of([&] { realign_cyclic(framed, cfg); }) == CodecError::Kind::ambiguous_frame);
    auto truncated = encode_message("Nature", cfg).times();
    truncated.pop_back();
    truncated.pop_back();  // end marker reduced to a single pulse: looks like a second start
    CHECK(kind_of([&] { realign_cyclic(truncated, cfg); }) == CodecError::Kind::ambiguous_frame);
    TimingConfig none = nature_cfg();
    CHECK(kind_of([&] { realign_cyclic(unframed, none); }) == CodecError::Kind::frame_marker_missing);
}

TEST_CASE("round trip over random messages with and without framing") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        std::string s(rng() % 7, '\0');
        for (auto& c : s) c = static_cast<char>(rng() & 0xff);
        for (Framing f : {Framing::none, Framing::code_signal}) {
            TimingConfig cfg;
            cfg.framing = f;
            cfg = cfg.for_message(s);
            CHECK(decode_edges(encode_message(s, cfg).times(), cfg) == s);
        }
    }
}

TEST_CASE("timing validation") {
    TimingConfig cfg;
    cfg.bin_width_ns = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.code_signal_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.framing = Framing::code_signal;
    cfg.code_signal_fraction = 0.75;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.code_signal_fraction = 0.25;  // end marker edge at 4.0 tau would land on a boundary
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.code_signal_fraction = 0.4;  // 4.05 tau: too close
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.code_signal_fraction = 0.3;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("phase profile from a pulse train") {
    const auto cfg = nature_cfg();
    const PhysicsUnits units;
    const auto phase = phase_profile_for(encode_message("Nature", cfg), cfg, units);
    CHECK(phase.period() == doctest::Approx(20000.0 / 141.0));
    CHECK(phase.edges().size() == 28);
    CHECK(phase(units.to_natural(400.0)) == doctest::Approx(std::numbers::pi));
    CHECK(phase(units.to_natural(100.0)) == 0.0);
}
