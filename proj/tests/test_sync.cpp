#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "gammaproto/codec.hpp"
#include "gammaproto/error.hpp"
#include "gammaproto/montecarlo.hpp"
#include "gammaproto/statistics.hpp"
#include "gammaproto/sync.hpp"

using namespace gammaproto;

namespace {

DetectionRecords to_records(const std::vector<double>& t) {
    DetectionRecords r;
    for (double x : t) r.push_back({x});
    return r;
}

Histogram poisson_flat(double mean, int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::poisson_distribution<std::int64_t> pois(mean);
    Histogram h;
    h.counts = CountVector(channels);
    for (int c = 0; c < channels; ++c) h.counts(c) = pois(rng);
    h.channel_width_ns = 20000.0 / channels;
    h.total_counts = h.counts.sum();
    return h;
}

// Noise-free synthetic histogram: baseline plus an exponentially decaying echo after each edge.
Histogram synthetic(const std::vector<double>& edges, double baseline, double height) {
    TacConfig tac;
    Histogram h = empty_histogram(tac);
    for (int c = 0; c < h.channel_count(); ++c) {
        double v = baseline;
        for (double e : edges) {
            double d = h.channel_center_ns(c) - e;
            if (d < 0) d += 20000.0;
            v += height * std::exp(-d / 70.0);
        }
        h.counts(c) = static_cast<std::int64_t>(std::llround(v));
    }
    h.total_counts = h.counts.sum();
    return h;
}

struct NatureRun {
    DetectionRecords records;
    double duration_ns;
};

const NatureRun& nature_run(Framing framing) {
    static std::map<Framing, NatureRun> cache;
    auto it = cache.find(framing);
    if (it != cache.end()) return it->second;
    TimingConfig cfg;
    cfg.framing = framing;
    cfg = cfg.for_message("Nature");
    const auto phase = phase_profile_for(encode_message("Nature", cfg), cfg, {});
    const auto tab = build_tables(phase, AbsorberParams{}, QuadratureSpec{}, SimulationMode::macro);
    StreamParams p;
    p.mean_rate_hz = 5e4;
    p.duration_s = 70.0;  // ~1.4e6 detections
    p.seed = 11;
    return cache[framing] = {run_macro(p, tab), p.duration_s * 1e9};
}

} // namespace

TEST_CASE("log incomplete gamma against high-precision values") {
    CHECK(log_gamma_q(0.5, 0.1) == doctest::Approx(-0.42354632347596573841).epsilon(1e-12));
    CHECK(log_gamma_q(3, 2) == doctest::Approx(-0.3905620875658996254).epsilon(1e-12));
    CHECK(log_gamma_q(511.5, 550) == doctest::Approx(-3.0604558098327290438).epsilon(1e-10));
    CHECK(log_gamma_q(511.5, 150000) == doctest::Approx(-146592.36192091632928).epsilon(1e-12));
    CHECK(log_gamma_q(10, 30) == doctest::Approx(-11.852356955071915053).epsilon(1e-12));
    CHECK(log_gamma_q(2.5, 1e-3) == doctest::Approx(-9.5085346438140652066e-9).epsilon(1e-8));
    CHECK(log_gamma_q(2.0, 0.0) == 0.0);
    CHECK(chi2_log_sf(1100, 1023) == doctest::Approx(-3.0604558098327290438).epsilon(1e-10));
}

TEST_CASE("KS critical value and two-sample Poisson test") {
    CHECK(ks_critical(100, 0.01) == doctest::Approx(0.16276).epsilon(1e-3));
    CHECK(poisson_two_sample_p(1000, 1.0, 1000, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(poisson_two_sample_p(1100, 1.0, 1000, 1.0) < 0.05);
    CHECK(poisson_two_sample_p(0, 1.0, 0, 1.0) == 1.0);
}

TEST_CASE("TAC configuration") {
    TacConfig tac;
    CHECK(tac.channel_width_ns() == doctest::Approx(19.53125));
    CHECK(tac.channel_count * tac.channel_width_ns() == doctest::Approx(tac.start_period_ns));
    tac.frequency_offset_hz = 0.01;
    CHECK(tac.actual_start_period_ns() == doctest::Approx(1e9 / 50000.01));
    tac.channel_count = 0;
    CHECK_THROWS_AS(tac.validate(), ConfigError);
}

TEST_CASE("records at start times land in channel 0") {
    TacConfig tac;
    const auto h = accumulate(to_records({0.0, 20000.0, 40000.0, 1e9}), tac);
    CHECK(h.counts(0) == 4);
    CHECK(h.total_counts == 4);
    CHECK(h.total_starts == 50001);
}

TEST_CASE("start phase: early records are dropped, later ones measured from the latest start") {
    TacConfig tac;
    tac.start_phase_ns = 5000.0;
    const auto h = accumulate(to_records({100.0, 5000.0 + 19.6, 5000.0 + 20000.0 + 40.0}), tac);
    CHECK(h.total_counts == 2);
    CHECK(h.counts(1) == 1);
    CHECK(h.counts(2) == 1);
}

TEST_CASE("negative mismatch wraps long delays") {
    TacConfig tac;
    tac.frequency_offset_hz = -1000.0;  // starts every 20408 ns
    const auto h = accumulate(to_records({20100.0}), tac);
    CHECK(h.counts(5) == 1);  // 20100 - 20000 = 100 ns
}

TEST_CASE("accumulate is a pure fold") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1e8);
    std::vector<double> a, b;
    for (int i = 0; i < 5000; ++i) a.push_back(u(rng));
    for (int i = 0; i < 5000; ++i) b.push_back(1e8 + u(rng));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    TacConfig tac;
    tac.frequency_offset_hz = 0.37;
    Histogram sum = accumulate(to_records(a), tac);
    sum += accumulate(to_records(b), tac);
    const auto whole = accumulate(to_records(ab), tac);
    CHECK(sum.counts == whole.counts);
    CHECK(sum.total_counts == whole.total_counts);
}

TEST_CASE("flatness metric") {
    Histogram h;
    h.counts = CountVector::Constant(1024, 100);
    h.channel_width_ns = 19.53125;
    h.total_counts = h.counts.sum();
    const auto f = flatness_metric(h);
    CHECK(f.max_deviation == 0.0);
    CHECK(f.chi2 == 0.0);
    CHECK(f.p_value() == doctest::Approx(1.0));

    int below = 0;
    for (std::uint64_t s = 1; s <= 100; ++s) below += flatness_metric(poisson_flat(1e6 / 1024, 1024, s)).max_deviation < 5;
    CHECK(below >= 99);
    Histogram empty;
    empty.counts = CountVector::Zero(8);
    CHECK_THROWS_AS(flatness_metric(empty), DomainError);
}

TEST_CASE("peak detection on synthetic histograms") {
    CHECK(detect_peaks(poisson_flat(1000, 1024, 3)).peaks.empty());
    const std::vector<double> edges{347.0, 694.0, 5000.0, 19990.0};
    const auto found = detect_peaks(synthetic(edges, 1000, 3000)).peaks;
    REQUIRE(found.size() == 4);
    // the echo straddling the period boundary is merged cyclically; its centroid wraps past zero
    CHECK(found[0].time_ns < 100.0);
    CHECK(found[1].time_ns == doctest::Approx(347.0 + 60).epsilon(0.2));
    CHECK(found[3].time_ns == doctest::Approx(5000.0 + 60).epsilon(0.02));

    Histogram sparse = poisson_flat(10, 1024, 4);
    try {
        detect_peaks(sparse);
        FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
        CHECK(e.stage() == "detect_peaks");
        CHECK(std::string(e.what()).find("insufficient statistics") != std::string::npos);
    }
}

TEST_CASE("decode failures carry their stage") {
    TimingConfig cfg;
    cfg = cfg.for_message("Nature");
    TacConfig tac;
    try {
        decode_histogram(poisson_flat(1000, 1024, 8), cfg, tac);
        FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
        CHECK(std::string(e.what()).find("insufficient peaks") != std::string::npos);
    }
    cfg.framing = Framing::code_signal;
    try {
        decode_histogram(synthetic({1000.0, 3000.0}, 1000, 3000), cfg, tac);
        FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
        CHECK(e.stage() == "realign_cyclic");
        CHECK(std::string(e.what()).find("frame marker missing") != std::string::npos);
    }
}

TEST_CASE("synchronized Nature run: 28 peaks at the encoded edges, message recovered") {
    TimingConfig cfg;
    cfg = cfg.for_message("Nature");
    const auto& run = nature_run(Framing::none);
    TacConfig tac;
    const auto h = accumulate(run.records, tac, run.duration_ns);
    CHECK(h.total_counts > 1000000);
    CHECK(flatness_metric(h).max_deviation > 20);
    CHECK(flatness_metric(h).log_p < std::log(1e-300));
    const auto peaks = detect_peaks(h).peaks;
    const auto truth = encode_message("Nature", cfg).times();
    REQUIRE(peaks.size() == 28);
    for (std::size_t i = 0; i < 28; ++i) CHECK(std::abs(peaks[i].time_ns - truth[i]) < 0.25 * cfg.bin_width_ns);
    CHECK(decode_histogram(h, cfg, tac).text == "Nature");
}

TEST_CASE("frequency mismatch smears the histogram and destroys the message") {
    TimingConfig cfg;
    cfg = cfg.for_message("Nature");
    StreamParams p;
    p.mean_rate_hz = 1e4;
    p.duration_s = 200.0;
    p.seed = 12;
    const auto phase = phase_profile_for(encode_message("Nature", cfg), cfg, {});
    const auto tab = build_tables(phase, AbsorberParams{}, QuadratureSpec{}, SimulationMode::macro);
    const auto rec = run_macro(p, tab);
    TacConfig tac;
    tac.frequency_offset_hz = 0.01;
    const auto h = accumulate(rec, tac, p.duration_s * 1e9);
    const auto flat = flatness_metric(h);
    CHECK(flat.log_p > std::log(1e-3));
    CHECK(detect_peaks(h).peaks.empty());
    CHECK_THROWS_AS(decode_histogram(h, cfg, tac), DecodeError);
}

TEST_CASE("constant start-phase offset: spacings invariant, framed decode still works") {
    TimingConfig plain;
    plain = plain.for_message("Nature");
    const auto& run0 = nature_run(Framing::none);
    TacConfig sync, shifted;
    shifted.start_phase_ns = 5000.0;
    const auto p0 = detect_peaks(accumulate(run0.records, sync)).times();
    const auto p1 = detect_peaks(accumulate(run0.records, shifted)).times();
    REQUIRE(p0.size() == p1.size());
    auto spacings = [](std::vector<double> t) {
        std::vector<double> s;
        for (std::size_t i = 0; i < t.size(); ++i)
            s.push_back(std::fmod(t[(i + 1) % t.size()] - t[i] + 20000.0, 20000.0));
        std::sort(s.begin(), s.end());
        return s;
    };
    const auto s0 = spacings(p0), s1 = spacings(p1);
    for (std::size_t i = 0; i < s0.size(); ++i) CHECK(s0[i] == doctest::Approx(s1[i]).epsilon(0.02));
    CHECK_THROWS_AS(decode_histogram(accumulate(run0.records, shifted), plain, shifted), DecodeError);

    TimingConfig framed = plain;
    framed.framing = Framing::code_signal;
    const auto& run1 = nature_run(Framing::code_signal);
    for (double offset : {0.0, 5000.0, 12345.0}) {
        TacConfig tac;
        tac.start_phase_ns = offset;
        const auto res = decode_histogram(accumulate(run1.records, tac), framed, tac);
        CAPTURE(offset);
        CHECK(res.text == "Nature");
        CHECK(res.peaks.peaks.size() == 34);
    }
}
