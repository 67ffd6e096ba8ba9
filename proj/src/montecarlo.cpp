#include "gammaproto/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <thread>

#include <unsupported/Eigen/FFT>

#include "gammaproto/bessel.hpp"
#include "gammaproto/envelope.hpp"
#include "gammaproto/error.hpp"
#include "gammaproto/rates.hpp"

namespace gammaproto {

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double exponential(std::mt19937_64& rng, double rate) { return -std::log1p(-u01(rng)) / rate; }

std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t chunk, std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32), tag};
    return std::mt19937_64(seq);
}

// Runs body(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct Chunk {
    double lo_ns, hi_ns;
};

std::vector<Chunk> chunks_of(const StreamParams& p) {
    const double total = p.duration_s * 1e9;
    const double step = p.chunk_duration_s * 1e9;
    std::vector<Chunk> out;
    const auto n = static_cast<std::size_t>(std::ceil(total / step));
    for (std::size_t k = 0; k < n; ++k)
        out.push_back({static_cast<double>(k) * step, std::min(total, static_cast<double>(k + 1) * step)});
    return out;
}

void poisson_times(double rate_per_ns, double lo, double hi, std::mt19937_64& rng, std::vector<double>& out) {
    if (!(rate_per_ns > 0.0)) return;
    double t = lo;
    while (true) {
        t += exponential(rng, rate_per_ns);
        if (t >= hi) break;
        out.push_back(t);
    }
}

DetectionRecords merge(std::vector<std::vector<double>>& parts, bool sort) {
    std::size_t n = 0;
    for (const auto& p : parts) n += p.size();
    DetectionRecords out;
    out.reserve(n);
    for (auto& p : parts) {
        for (double t : p) out.push_back({t});
        std::vector<double>().swap(p);
    }
    if (sort)
        std::sort(out.begin(), out.end(), [](const DetectionRecord& a, const DetectionRecord& b) {
            return a.t_abs_ns < b.t_abs_ns;
        });
    return out;
}

// Phase jumps (complex amplitude steps) seen by a photon emitted at t0, within the horizon.
std::vector<PhaseJump> jumps_after(const PhaseProfile& phase, double t0, double horizon) {
    std::vector<PhaseJump> out;
    const double p = phase.period();
    const double eps = 1e-9 * p;
    for (double bp : phase.breakpoints(t0, t0 + horizon)) {
        if (bp <= t0) continue;
        const Complex before = std::polar(1.0, phase(bp - eps));
        const Complex after = std::polar(1.0, phase(bp + eps));
        const Complex jump = after - before;
        if (std::abs(jump) > 1e-12) out.push_back({bp - t0, jump});
    }
    std::sort(out.begin(), out.end(), [](const PhaseJump& a, const PhaseJump& b) { return a.delay < b.delay; });
    return out;
}

} // namespace

void StreamParams::validate() const {
    if (!(mean_rate_hz > 0.0)) throw ConfigError("stream.mean_rate_hz", "must be positive");
    if (!(duration_s > 0.0)) throw ConfigError("stream.duration_s", "must be positive");
    if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0))
        throw ConfigError("stream.detector_efficiency", "must lie in (0, 1]");
    if (!(chunk_duration_s > 0.0)) throw ConfigError("stream.chunk_duration_s", "must be positive");
}

std::optional<std::string> pileup_warning(const StreamParams& params, const PhysicsUnits& units) {
    const double occupancy = params.mean_rate_hz * units.t1_ns * 1e-9;
    if (occupancy > 0.05)
        return "mean_rate * T1 = " + std::to_string(occupancy) + " exceeds 0.05; pile-up and dead time are not modeled";
    return std::nullopt;
}

std::vector<double> sample_emissions(const StreamParams& params, std::mt19937_64& rng) {
    std::vector<double> out;
    poisson_times(params.mean_rate_hz * 1e-9, 0.0, params.duration_s * 1e9, rng, out);
    return out;
}

double SamplingTables::delay_cdf(int row, int cell) const {
    const std::size_t base = static_cast<std::size_t>(row) * static_cast<std::size_t>(cells_ + 1);
    const double total = p_det_[static_cast<std::size_t>(row)];
    return total > 0.0 ? cumulative_[base + static_cast<std::size_t>(cell) + 1] / total : 1.0;
}

double SamplingTables::sample_delay_ns(int row, double v) const {
    const auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(row) * (cells_ + 1);
    const auto last = first + cells_ + 1;
    auto it = std::upper_bound(first + 1, last, static_cast<float>(v));
    if (it == last) --it;
    const auto k = static_cast<int>(it - first) - 1;
    const double lo = first[k], hi = first[k + 1];
    const double frac = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.5;
    return (k + frac) * delay_step_ns_;
}

double SamplingTables::rate(double t_ns) const {
    double x = std::fmod(t_ns, period_ns_);
    if (x < 0.0) x += period_ns_;
    const auto nb = bucket_.size() - 1;
    const auto bin = std::min(static_cast<std::size_t>(x / period_ns_ * static_cast<double>(nb)), nb - 1);
    auto it = std::upper_bound(knot_t_.begin() + bucket_[bin], knot_t_.begin() + bucket_[bin + 1] + 1, x);
    if (it == knot_t_.end()) return knot_rate_.back();
    const auto j = std::max<std::size_t>(static_cast<std::size_t>(it - knot_t_.begin()), 1);
    const double t0 = knot_t_[j - 1], t1 = knot_t_[j];
    const double w = t1 > t0 ? (x - t0) / (t1 - t0) : 0.0;
    return knot_rate_[j - 1] + w * (knot_rate_[j] - knot_rate_[j - 1]);
}

double SamplingTables::rate_mean() const {
    double acc = 0.0;
    for (std::size_t j = 1; j < knot_t_.size(); ++j)
        acc += 0.5 * (knot_rate_[j] + knot_rate_[j - 1]) * (knot_t_[j] - knot_t_[j - 1]);
    return acc / period_ns_;
}

SamplingTables build_tables(const PhaseProfile& phase, const AbsorberParams& absorber, const QuadratureSpec& quad,
                            SimulationMode mode, const PhysicsUnits& units, int threads) {
    absorber.validate();
    quad.validate();
    units.validate();
    SamplingTables tab;
    tab.mode_ = mode;
    tab.period_ns_ = units.to_ns(phase.period());
    const double f = absorber.recoilless_fraction;
    const double attenuation = std::exp(-absorber.nonresonant_depth);

    if (mode == SimulationMode::macro) {
        ObservedRate observed(absorber, quad);
        const double p = phase.period();
        std::vector<double> knots;
        for (int i = 0; i <= kMacroKnots; ++i) knots.push_back(p * i / kMacroKnots);
        const double eps = 1e-9 * p;
        if (phase.mode() == PhaseMode::ideal_step)
            for (double e : phase.edges()) {
                if (e - eps > 0.0) knots.push_back(e - eps);
                knots.push_back(e);
            }
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
        std::vector<double> values(knots.size());
        parallel_for(knots.size(), threads, [&](std::size_t i) {
            // the rate is right-continuous at phase edges; the knot at e - eps carries the left limit
            values[i] = observed(std::min(knots[i], p * (1 - 1e-15)), phase);
        });
        for (std::size_t i = 0; i < knots.size(); ++i) {
            tab.knot_t_.push_back(units.to_ns(knots[i]));
            tab.knot_rate_.push_back(values[i]);
        }
        tab.knot_t_.back() = tab.period_ns_;
        tab.knot_rate_.back() = tab.knot_rate_.front();
        const std::size_t nb = kMacroKnots;
        tab.bucket_.resize(nb + 1);
        for (std::size_t i = 0; i <= nb; ++i) {
            const double lo = tab.period_ns_ * static_cast<double>(i) / static_cast<double>(nb);
            auto it = std::upper_bound(tab.knot_t_.begin(), tab.knot_t_.end(), lo);
            tab.bucket_[i] = static_cast<std::uint32_t>(std::max<std::ptrdiff_t>(it - tab.knot_t_.begin() - 1, 0));
        }
        tab.bucket_[nb] = static_cast<std::uint32_t>(tab.knot_t_.size() - 1);
        tab.rate_max_ = *std::max_element(tab.knot_rate_.begin(), tab.knot_rate_.end());
        return tab;
    }

    const int rows = kMicroRows;
    const int cells = static_cast<int>(std::lround(quad.horizon / quad.grid_step));
    const double h = quad.horizon / cells;
    tab.rows_ = rows;
    tab.cells_ = cells;
    tab.delay_step_ns_ = units.to_ns(h);
    tab.p_det_.assign(static_cast<std::size_t>(rows), 0.0);
    tab.cumulative_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cells + 1), 0.0f);
    const double period = phase.period();

    // Recoil channel: unfiltered exponential, cell masses closed form.
    std::vector<double> recoil(static_cast<std::size_t>(cells));
    for (int k = 0; k < cells; ++k) recoil[k] = (1.0 - f) * (std::exp(-k * h) - std::exp(-(k + 1) * h));

    auto store_row = [&](int r, const std::vector<double>& resonant_mass) {
        const std::size_t base = static_cast<std::size_t>(r) * static_cast<std::size_t>(cells + 1);
        double acc = 0.0;
        for (int k = 0; k < cells; ++k) {
            acc += attenuation * (f * resonant_mass[k] + recoil[k]);
            tab.cumulative_[base + k + 1] = static_cast<float>(acc);
        }
        tab.p_det_[static_cast<std::size_t>(r)] = acc;
    };

    if (phase.mode() == PhaseMode::ideal_step) {
        const StepResponseTable step(absorber, quad.horizon + 1.0);
        const auto& gl = gauss_legendre(3);
        parallel_for(static_cast<std::size_t>(rows), threads, [&](std::size_t ri) {
            const int r = static_cast<int>(ri);
            const double t0 = period * r / rows;
            const Complex z0 = std::polar(1.0, phase(t0));
            const auto jumps = jumps_after(phase, t0, quad.horizon);
            auto density = [&](double u) { return std::norm(stepped_phase_envelope(u, z0, jumps, step)); };
            std::vector<double> mass(static_cast<std::size_t>(cells));
            std::size_t j = 0;
            for (int k = 0; k < cells; ++k) {
                double lo = k * h;
                const double hi = (k + 1) * h;
                double m = 0.0;
                while (j < jumps.size() && jumps[j].delay < hi) {
                    if (jumps[j].delay > lo) {
                        m += gl.integrate(density, lo, jumps[j].delay);
                        lo = jumps[j].delay;
                    }
                    ++j;
                }
                m += gl.integrate(density, lo, hi);
                mass[k] = m;
            }
            store_row(r, mass);
        });
        return tab;
    }

    // Continuous phase: trapezoidal Volterra convolution on the delay grid via FFT.
    const int n = cells + 1;
    int nfft = 1;
    while (nfft < 2 * n) nfft *= 2;
    const double b = absorber.coupling();
    const Complex s = absorber.kernel_exponent() - kGamma;
    std::vector<Complex> kernel(static_cast<std::size_t>(nfft), 0.0);
    for (int i = 0; i < n; ++i) kernel[i] = std::exp(s * (i * h)) * sigma1(i * h, b);
    Eigen::FFT<double> fft_plan;
    std::vector<Complex> kernel_hat;
    fft_plan.fwd(kernel_hat, kernel);
    parallel_for(static_cast<std::size_t>(rows), threads, [&](std::size_t ri) {
        const int r = static_cast<int>(ri);
        const double t0 = period * r / rows;
        Eigen::FFT<double> fft;
        std::vector<Complex> in(static_cast<std::size_t>(nfft), 0.0), in_hat, conv;
        for (int i = 0; i < n; ++i) in[i] = std::polar(std::exp(-kGamma * i * h), phase(t0 + i * h));
        fft.fwd(in_hat, in);
        for (int i = 0; i < nfft; ++i) in_hat[i] *= kernel_hat[i];
        fft.inv(conv, in_hat);
        std::vector<double> intensity(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const Complex trap = conv[i] - 0.5 * (kernel[0] * in[i] + kernel[i] * in[0]);
            const Complex a = i == 0 ? in[0] : in[i] - h * trap;
            intensity[i] = std::norm(a);
        }
        std::vector<double> mass(static_cast<std::size_t>(cells));
        for (int k = 0; k < cells; ++k) mass[k] = 0.5 * h * (intensity[k] + intensity[k + 1]);
        store_row(r, mass);
    });
    return tab;
}

DetectionRecords run_micro(const StreamParams& params, const SamplingTables& tables, int threads) {
    params.validate();
    if (tables.mode() != SimulationMode::micro) throw DomainError("run_micro: tables were built for macro mode");
    const auto chunks = chunks_of(params);
    std::vector<std::vector<double>> parts(chunks.size());
    const double period = tables.period_ns();
    const double lattice = period / tables.rows();
    const double eff = params.detector_efficiency;
    const double end = params.duration_s * 1e9;
    parallel_for(chunks.size(), threads, [&](std::size_t c) {
        auto rng = chunk_rng(params.seed, c, 0x6d696372u);
        std::vector<double> emissions;
        poisson_times(params.mean_rate_hz * 1e-9, chunks[c].lo_ns, chunks[c].hi_ns, rng, emissions);
        auto& out = parts[c];
        for (double t0 : emissions) {
            const double cycles = std::floor(t0 / period);
            const double slot = std::nearbyint((t0 - cycles * period) / lattice);
            const double t_lattice = cycles * period + slot * lattice;
            const int row = static_cast<int>(slot) % tables.rows();
            const double u = u01(rng);
            const double p = tables.detection_probability(row) * eff;
            if (u >= p) continue;
            const double t = t_lattice + tables.sample_delay_ns(row, u / eff);
            if (t < end) out.push_back(t);
        }
    });
    return merge(parts, true);
}

DetectionRecords run_macro(const StreamParams& params, const SamplingTables& tables, int threads) {
    params.validate();
    if (tables.mode() != SimulationMode::macro) throw DomainError("run_macro: tables were built for micro mode");
    const auto chunks = chunks_of(params);
    std::vector<std::vector<double>> parts(chunks.size());
    const double lmax = tables.rate_max();
    const double candidate_rate = params.mean_rate_hz * params.detector_efficiency * lmax * 1e-9;
    parallel_for(chunks.size(), threads, [&](std::size_t c) {
        auto rng = chunk_rng(params.seed, c, 0x6d616372u);
        std::vector<double> candidates;
        poisson_times(candidate_rate, chunks[c].lo_ns, chunks[c].hi_ns, rng, candidates);
        auto& out = parts[c];
        for (double t : candidates)
            if (u01(rng) * lmax < tables.rate(t)) out.push_back(t);
    });
    return merge(parts, false);
}

DetectionRecords run_stream(const StreamParams& params, const SamplingTables& tables, int threads) {
    return params.mode == SimulationMode::micro ? run_micro(params, tables, threads)
                                                : run_macro(params, tables, threads);
}

} // namespace gammaproto
