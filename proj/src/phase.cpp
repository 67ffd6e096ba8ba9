#include "gammaproto/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gammaproto/error.hpp"

namespace gammaproto {

double displacement_profile(double t, double t1, double t2, double trd) {
    if (!(t2 > t1)) throw DomainError("displacement_profile: requires t2 > t1");
    if (!(trd > 0.0)) throw DomainError("displacement_profile: requires trd > 0");
    if (t < t1) return 0.0;
    if (t < t2) return -std::expm1(-(t - t1) / trd);
    return std::exp(-(t - t2) / trd) * -std::expm1(-(t2 - t1) / trd);
}

namespace {

double wrap(double t, double period) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return r;
}

double peak_for(PhaseConvention c) {
    return c == PhaseConvention::half_wave ? std::numbers::pi : 2.0 * std::numbers::pi;
}

} // namespace

PhaseProfile PhaseProfile::constant(double period, double phase) {
    PhaseProfile p;
    p.period_ = period;
    p.offset_ = phase;
    p.peak_ = std::numbers::pi;
    p.check();
    return p;
}

PhaseProfile PhaseProfile::ideal(double period, std::vector<VoltagePulse> pulses, PhaseConvention convention) {
    PhaseProfile p;
    p.period_ = period;
    p.peak_ = peak_for(convention);
    p.pulses_ = std::move(pulses);
    p.check();
    return p;
}

PhaseProfile PhaseProfile::realistic(double period, std::vector<VoltagePulse> pulses, double trd,
                                     PhaseConvention convention) {
    if (!(trd > 0.0)) throw DomainError("PhaseProfile::realistic: trd must be positive");
    PhaseProfile p;
    p.period_ = period;
    p.peak_ = peak_for(convention);
    p.trd_ = trd;
    p.mode_ = PhaseMode::realistic_rc;
    p.pulses_ = std::move(pulses);
    p.check();
    return p;
}

void PhaseProfile::check() {
    if (!(period_ > 0.0)) throw DomainError("PhaseProfile: period must be positive");
    std::sort(pulses_.begin(), pulses_.end(), [](auto a, auto b) { return a.rise < b.rise; });
    double last = 0.0;
    for (const auto& p : pulses_) {
        if (!(p.rise >= last) || !(p.fall > p.rise) || !(p.fall <= period_))
            throw DomainError("PhaseProfile: pulses must be ordered, non-overlapping and inside one period");
        last = p.fall;
        edges_.push_back(p.rise);
        edges_.push_back(p.fall);
    }
}

double PhaseProfile::excursion_amplitude(const VoltagePulse& p) const {
    if (mode_ == PhaseMode::ideal_step) return peak_;
    return peak_ / -std::expm1(-(p.fall - p.rise) / trd_);
}

double PhaseProfile::operator()(double t) const {
    const double tm = wrap(t, period_);
    if (pulses_.empty()) return offset_;
    if (mode_ == PhaseMode::ideal_step) {
        const auto n = std::upper_bound(edges_.begin(), edges_.end(), tm) - edges_.begin();
        return offset_ + ((n % 2 == 1) ? peak_ : 0.0);
    }
    // Realistic: superpose the relaxing tails of pulses from earlier periods too.
    const int images = 1 + static_cast<int>(std::ceil(40.0 * trd_ / period_));
    double phase = 0.0;
    for (const auto& p : pulses_) {
        const double amplitude = excursion_amplitude(p);
        for (int k = 0; k <= images; ++k) {
            const double local = tm + k * period_;
            if (local < p.rise) continue;
            phase += amplitude * displacement_profile(local, p.rise, p.fall, trd_);
        }
    }
    return offset_ + phase;
}

std::vector<double> PhaseProfile::edges() const { return edges_; }

std::vector<double> PhaseProfile::breakpoints(double lo, double hi) const {
    std::vector<double> out;
    if (edges_.empty() || !(hi >= lo)) return out;
    const double first = std::floor(lo / period_);
    for (double k = first; k * period_ <= hi; k += 1.0) {
        for (double e : edges_) {
            const double t = e + k * period_;
            if (t >= lo && t <= hi) out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace gammaproto
