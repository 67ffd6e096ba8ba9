#include "gammaproto/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "gammaproto/analysis.hpp"
#include "gammaproto/bessel.hpp"
#include "gammaproto/envelope.hpp"
#include "gammaproto/error.hpp"
#include "gammaproto/rates.hpp"
#include "gammaproto/statistics.hpp"

namespace gammaproto {

namespace {

// Runs `body`, which fills observed/expected/detail and returns pass/fail. Exceptions fail the check.
CheckResult run_check(const std::string& name, const std::function<bool(CheckResult&)>& body) {
    CheckResult r;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        r.passed = body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

// e^{-x} I0(x) from its power series, independent of the library Bessel route.
double nb_series(double thickness) {
    const double x = thickness / 2.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= (x / 2.0) * (x / 2.0) / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return std::exp(-x) * sum;
}

int within_3sigma(const Histogram& a, const Histogram& b) {
    int ok = 0;
    for (int c = 0; c < a.channel_count(); ++c) {
        const double x = static_cast<double>(a.counts(c));
        const double y = static_cast<double>(b.counts(c));
        const double sigma = std::sqrt(x + y);
        if (std::abs(x - y) <= 3.0 * std::max(sigma, 1.0)) ++ok;
    }
    return ok;
}

bool same_peaks(const PeakSearch& a, const PeakSearch& b, double tol) {
    if (a.peaks.size() != b.peaks.size()) return false;
    for (std::size_t i = 0; i < a.peaks.size(); ++i)
        if (std::abs(a.peaks[i].time_ns - b.peaks[i].time_ns) > tol) return false;
    return true;
}

std::string describe(double observed, double expected, const char* relation) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "observed %.6g %s %.6g", observed, relation, expected);
    return buf;
}

} // namespace

bool SelftestReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json SelftestReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"passed", c.passed},
                       {"observed", c.observed},
                       {"expected", c.expected},
                       {"detail", c.detail},
                       {"seconds", c.seconds}});
    return {{"passed", all_passed()}, {"checks", arr}};
}

SelftestReport run_selftest(const ExperimentConfig& cfg) {
    SelftestReport rep;
    const QuadratureSpec& quad = cfg.quadrature;
    auto add = [&](const std::string& name, const std::function<bool(CheckResult&)>& body) {
        rep.checks.push_back(run_check(name, body));
    };

    add("baseline_nb", [&](CheckResult& r) {
        r.observed = baseline_nb(5.0);
        r.expected = 0.270;
        const double oracle = nb_series(5.0);
        r.detail = describe(r.observed, oracle, "vs series");
        return std::abs(r.observed - r.expected) <= 1e-3 && std::abs(r.observed - oracle) < 1e-12;
    });

    add("echo_peak", [&](CheckResult& r) {
        r.observed = integrated_rate_step(1.0 + 1e-9, 1.0, 5.0, quad) - baseline_nb(5.0);
        r.expected = 4.0 * (1.0 - std::exp(-1.25));
        r.detail = describe(r.observed, r.expected, "vs");
        return std::abs(r.observed - 2.854) <= 0.01;
    });

    add("frequency_domain_vs_closed_form", [&](CheckResult& r) {
        double worst = 0.0;
        for (double t : {0.0, 1.0, 5.0, 10.0}) {
            AbsorberParams a;
            a.optical_thickness = t;
            for (double u = 0.0; u <= 10.0 + 1e-12; u += 0.25)
                worst = std::max(worst, std::abs(frequency_domain_envelope(u, a, quad) - resonant_envelope(u, t)));
        }
        r.observed = worst;
        r.expected = 1e-4;
        r.detail = describe(worst, 1e-4, "<");
        return worst < 1e-4;
    });

    add("convolution_vs_pi_shift", [&](CheckResult& r) {
        double worst = 0.0;
        for (double t : {0.0, 1.0, 5.0, 10.0}) {
            AbsorberParams a;
            a.optical_thickness = t;
            const auto input = pi_step_source(0.0, 1.0);
            const ResponseEvaluator response(input, a, quad);
            for (double u = 0.0; u <= 10.0 + 1e-12; u += 0.25) {
                if (std::abs(u - 1.0) < 1e-12) continue;  // the flip itself
                worst = std::max(worst, std::abs(response(u) - pi_shift_envelope(u, 1.0, t)));
            }
        }
        r.observed = worst;
        r.expected = 1e-4;
        r.detail = describe(worst, 1e-4, "<");
        return worst < 1e-4;
    });

    add("general_phase_vs_step_rate", [&](CheckResult& r) {
        const double period = 1e3;
        const auto step = PhaseProfile::ideal(period, {{1.0, period / 2.0}});
        const GeneralPhaseRate general(5.0, quad);
        double worst = 0.0;
        for (double t = 0.05; t < 8.0; t += 0.37) {
            const double a = general(t, step);
            const double b = integrated_rate_step(t, 1.0, 5.0, quad);
            worst = std::max(worst, std::abs(a - b) / std::abs(b));
        }
        r.observed = worst;
        r.expected = 1e-3;
        r.detail = describe(worst, 1e-3, "<");
        return worst < 1e-3;
    });

    add("general_phase_constant_vs_nb", [&](CheckResult& r) {
        double worst = 0.0;
        for (double t : {1.0, 5.0, 10.0}) {
            const auto flat = PhaseProfile::constant(141.0, 0.7);
            worst = std::max(worst, std::abs(rate_general_phase(3.3, flat, t, quad) / baseline_nb(t) - 1.0));
        }
        r.observed = worst;
        r.expected = 1e-3;
        r.detail = describe(worst, 1e-3, "<");
        return worst < 1e-3;
    });

    const PulseTrain train = encode_message(cfg.message, cfg.timing);
    const PhaseProfile phase =
        phase_profile_for(train, cfg.timing, cfg.units, cfg.phase.mode, cfg.phase.trd, cfg.phase.convention);

    add("passivity", [&](CheckResult& r) {
        AbsorberParams lossless = cfg.absorber;
        lossless.recoilless_fraction = 1.0;
        lossless.nonresonant_depth = 0.0;
        const auto micro = build_tables(phase, lossless, quad, SimulationMode::micro, cfg.units, cfg.threads);
        double worst = 0.0;
        for (int i = 0; i < micro.rows(); ++i) worst = std::max(worst, micro.detection_probability(i));
        const auto single = pi_step_source(0.0, 1.0);
        worst = std::max(worst, transmitted_probability(single, lossless, quad));
        r.observed = worst;
        r.expected = 1.0;
        r.detail = describe(worst, 1.0, "<=");
        return worst <= 1.0 + 1e-6;
    });

    add("period_average_bounds", [&](CheckResult& r) {
        const ObservedRate observed(cfg.absorber, quad);
        const double attenuation = std::exp(-cfg.absorber.nonresonant_depth);
        const double f = cfg.absorber.recoilless_fraction;
        const double without = observed.period_average(PhaseProfile::constant(phase.period()));
        const double with = observed.period_average(phase);
        const double floor = attenuation * ((1.0 - f) + f * baseline_nb(cfg.absorber.optical_thickness));
        r.observed = with;
        r.expected = without;
        r.detail = "without " + std::to_string(without) + ", with " + std::to_string(with) + ", ceiling " +
                   std::to_string(attenuation);
        return std::abs(without - floor) < 1e-6 * floor && with >= without - 1e-9 && with <= attenuation;
    });

    add("codec_roundtrip", [&](CheckResult& r) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_int_distribution<int> byte(0, 255), length(0, 6);
        std::uniform_real_distribution<double> jitter(-0.2, 0.2);
        int failures = 0, cases = 0;
        std::string first_failure;
        for (int m = 0; m < 1000; ++m) {
            std::string text(static_cast<std::size_t>(length(rng)), '\0');
            for (auto& ch : text) ch = static_cast<char>(byte(rng));
            for (Framing framing : {Framing::none, Framing::code_signal}) {
                TimingConfig tc = cfg.timing.for_message(text);
                tc.framing = framing;
                const auto edges = encode_message(text, tc).times();
                const int rotations = framing == Framing::code_signal
                                          ? static_cast<int>(std::floor(tc.period_ns / tc.bin_width_ns))
                                          : 1;
                for (int k = 0; k < rotations; ++k) {
                    std::vector<double> shifted;
                    for (double e : edges) {
                        const double noise = framing == Framing::none ? jitter(rng) * tc.bin_width_ns : 0.0;
                        shifted.push_back(std::fmod(e + k * tc.bin_width_ns, tc.period_ns) + noise);
                    }
                    ++cases;
                    std::string back;
                    try {
                        back = decode_edges(shifted, tc);
                    } catch (const CodecError& e) {
                        back = std::string("<") + e.what() + ">";
                    }
                    if (back != text) {
                        if (first_failure.empty()) first_failure = "message of " + std::to_string(text.size()) + " bytes, rotation " + std::to_string(k) + ": " + back;
                        ++failures;
                    }
                }
            }
        }
        r.observed = failures;
        r.expected = 0;
        r.detail = std::to_string(cases) + " cases" + (first_failure.empty() ? "" : "; first failure " + first_failure);
        return failures == 0;
    });

    const TacConfig tac = cfg.tac;
    auto stream_for = [&](SimulationMode mode, double duration, double rate) {
        StreamParams p = cfg.stream;
        p.mode = mode;
        p.duration_s = duration;
        p.mean_rate_hz = rate;
        p.seed = cfg.seed;
        return p;
    };

    add("micro_macro_agreement", [&](CheckResult& r) {
        const auto micro_tab = build_tables(phase, cfg.absorber, quad, SimulationMode::micro, cfg.units, cfg.threads);
        const auto macro_tab = build_tables(phase, cfg.absorber, quad, SimulationMode::macro, cfg.units, cfg.threads);
        const double duration = 30.0;
        auto micro = run_micro(stream_for(SimulationMode::micro, duration, 5e4), micro_tab, cfg.threads);
        StreamParams mp = stream_for(SimulationMode::macro, duration, 5e4);
        mp.seed = cfg.seed + 1;
        auto macro = run_macro(mp, macro_tab, cfg.threads);
        const auto hm = accumulate(micro, tac, duration * 1e9);
        const auto hM = accumulate(macro, tac, duration * 1e9);
        const int ok = within_3sigma(hm, hM);
        r.observed = static_cast<double>(ok) / hm.channel_count();
        r.expected = 0.95;
        const bool peaks = same_peaks(detect_peaks(hm, cfg.peaks), detect_peaks(hM, cfg.peaks),
                                      0.25 * cfg.timing.bin_width_ns);
        r.detail = std::to_string(hm.total_counts) + " micro vs " + std::to_string(hM.total_counts) +
                   " macro detections; peak sets " + (peaks ? "identical" : "differ");
        return r.observed >= 0.95 && peaks;
    });

    add("mismatch_smearing", [&](CheckResult& r) {
        const auto macro_tab = build_tables(phase, cfg.absorber, quad, SimulationMode::macro, cfg.units, cfg.threads);
        const double duration = 200.0;
        const auto records = run_macro(stream_for(SimulationMode::macro, duration, 1e4), macro_tab, cfg.threads);
        TacConfig off = tac;
        off.frequency_offset_hz = 0.01;
        const auto smeared = accumulate(records, off, duration * 1e9);
        const auto synced = accumulate(records, tac, duration * 1e9);
        const auto fs = flatness_metric(smeared);
        const auto fy = flatness_metric(synced);
        bool smeared_decodes = true;
        try {
            decode_histogram(smeared, cfg.timing, off, cfg.peaks);
        } catch (const DecodeError&) {
            smeared_decodes = false;
        }
        const bool synced_ok = decode_histogram(synced, cfg.timing, tac, cfg.peaks).text == cfg.message;
        r.observed = fs.log_p / std::log(10.0);
        r.expected = -3.0;
        r.detail = "log10 p mismatched " + std::to_string(fs.log_p / std::log(10.0)) + ", synchronized " +
                   std::to_string(fy.log_p / std::log(10.0)) + "; mismatched decode " +
                   (smeared_decodes ? "succeeded" : "failed");
        return fs.log_p > std::log(1e-3) && !smeared_decodes && synced_ok && fy.log_p < std::log(1e-300);
    });

    add("determinism", [&](CheckResult& r) {
        const auto micro_tab = build_tables(phase, cfg.absorber, quad, SimulationMode::micro, cfg.units, 1);
        const auto micro_tab3 = build_tables(phase, cfg.absorber, quad, SimulationMode::micro, cfg.units, 3);
        const auto macro_tab = build_tables(phase, cfg.absorber, quad, SimulationMode::macro, cfg.units, 1);
        int mismatches = 0;
        for (auto mode : {SimulationMode::micro, SimulationMode::macro}) {
            StreamParams p = stream_for(mode, 1.0, 5e4);
            p.chunk_duration_s = 0.05;
            const auto& tab = mode == SimulationMode::micro ? micro_tab : macro_tab;
            const auto a = run_stream(p, tab, 1);
            const auto b = run_stream(p, mode == SimulationMode::micro ? micro_tab3 : macro_tab, 3);
            const auto c = run_stream(p, tab, 1);
            if (a.size() != b.size() || a.size() != c.size()) ++mismatches;
            else
                for (std::size_t i = 0; i < a.size(); ++i)
                    if (a[i].t_abs_ns != b[i].t_abs_ns || a[i].t_abs_ns != c[i].t_abs_ns) {
                        ++mismatches;
                        break;
                    }
        }
        r.observed = mismatches;
        r.expected = 0;
        r.detail = "thread counts 1 and 3, repeated seed";
        return mismatches == 0;
    });

    return rep;
}

} // namespace gammaproto
