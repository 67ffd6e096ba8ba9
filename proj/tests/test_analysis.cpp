#include <doctest.h>

#include <cmath>

#include "gammaproto/analysis.hpp"
#include "gammaproto/montecarlo.hpp"
#include "gammaproto/statistics.hpp"

using namespace gammaproto;

namespace {

const AbsorberParams kAbsorber{};
const QuadratureSpec kQuad{};

StealthReport report_for(std::string_view msg, Framing framing = Framing::none) {
    TimingConfig cfg;
    cfg.framing = framing;
    return stealth_report(msg, cfg.for_message(msg), kAbsorber, kQuad);
}

} // namespace

TEST_CASE("empty message leaves the rate unchanged") {
    const auto r = report_for("");
    CHECK(r.pulse_count == 0);
    CHECK(r.relative_increase == 0.0);
    CHECK(r.per_pulse_contribution == 0.0);
    CHECK(r.filter_transmission == 1.0);
}

TEST_CASE("filter compensation from the measured relative increase") {
    StealthReport r;
    r.relative_increase = MeasuredStealth::relative_increase;
    const auto f = filter_compensation(r);
    CHECK(f.transmission == doctest::Approx(0.91575091575091575092).epsilon(1e-14));
    CHECK(f.delta_beta == doctest::Approx(0.088010877322713299335).epsilon(1e-14));
    CHECK(std::exp(-f.delta_beta) == doctest::Approx(f.transmission).epsilon(1e-14));
    CHECK(MeasuredStealth::counts_with_message / MeasuredStealth::counts_without_message - 1.0 ==
          doctest::Approx(MeasuredStealth::relative_increase).epsilon(0.01));
}

TEST_CASE("modulation increases the mean rate and the filter restores it") {
    const auto r = report_for("Nature");
    CHECK(r.pulse_count == 14);
    CHECK(r.mean_rate_with_message >= r.mean_rate_without);
    CHECK(r.relative_increase > 0.0);
    CHECK(r.filter_transmission == doctest::Approx(1.0 / (1.0 + r.relative_increase)));

    const auto f = filter_compensation(r);
    TimingConfig cfg;
    cfg = cfg.for_message("Nature");
    const auto closed = stealth_report("Nature", cfg, with_filter(kAbsorber, f), kQuad);
    CHECK(std::abs(closed.mean_rate_with_message / r.mean_rate_without - 1.0) < 1e-6);
    // the filter is nonresonant: it scales both states equally
    CHECK(closed.relative_increase == doctest::Approx(r.relative_increase).epsilon(1e-9));
}

TEST_CASE("contribution grows with pulse count and is roughly additive") {
    const auto one = report_for("\x01");
    CHECK(one.pulse_count == 1);
    const auto nature = report_for("Nature");
    CHECK(nature.per_pulse_contribution == doctest::Approx(one.relative_increase).epsilon(0.2));

    double last = -1.0;
    for (const char* msg : {"\x01", "\x05", "\x15", "\x55", "\x55\x55", "\x55\x55\x55"}) {
        const auto r = report_for(msg);
        CAPTURE(msg);
        CHECK(r.relative_increase > last);
        last = r.relative_increase;
    }
}

TEST_CASE("framing edges also raise the rate") {
    CHECK(report_for("Nature", Framing::code_signal).relative_increase > report_for("Nature").relative_increase);
}

TEST_CASE("realistic phase: same sign, filter still closes") {
    TimingConfig cfg;
    cfg = cfg.for_message("Nature");
    PhaseModel pm;
    pm.mode = PhaseMode::realistic_rc;
    const auto r = stealth_report("Nature", cfg, kAbsorber, kQuad, {}, pm);
    CHECK(r.relative_increase > 0.0);
    const auto closed = stealth_report("Nature", cfg, with_filter(kAbsorber, filter_compensation(r)), kQuad, {}, pm);
    CHECK(std::abs(closed.mean_rate_with_message / r.mean_rate_without - 1.0) < 1e-6);
}

TEST_CASE("simulated closure: filtered modulated stream matches the idle stream") {
    TimingConfig cfg;
    cfg = cfg.for_message("Nature");
    const auto r = report_for("Nature");
    const PhysicsUnits units;
    const auto idle = build_tables(PhaseProfile::constant(units.to_natural(cfg.period_ns)), kAbsorber, kQuad,
                                   SimulationMode::macro);
    const auto phase = phase_profile_for(encode_message("Nature", cfg), cfg, units);
    const auto modulated = build_tables(phase, with_filter(kAbsorber, filter_compensation(r)), kQuad, SimulationMode::macro);
    const auto unfiltered = build_tables(phase, kAbsorber, kQuad, SimulationMode::macro);
    CHECK(modulated.rate_mean() == doctest::Approx(idle.rate_mean()).epsilon(1e-4));

    StreamParams p;
    p.mean_rate_hz = 5e4;
    p.duration_s = 20.0;
    p.seed = 21;
    const auto n_idle = run_macro(p, idle).size();
    p.seed = 22;
    const auto n_mod = run_macro(p, modulated).size();
    p.seed = 23;
    const auto n_raw = run_macro(p, unfiltered).size();
    CHECK(poisson_two_sample_p(n_mod, 1.0, n_idle, 1.0) > 0.01);
    CHECK(poisson_two_sample_p(n_raw, 1.0, n_idle, 1.0) < 1e-6);
}
