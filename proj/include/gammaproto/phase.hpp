#pragma once

#include <vector>

namespace gammaproto {

enum class PhaseMode { ideal_step, realistic_rc };

// How absorber displacement maps to field phase. half_wave: phi = pi D / lambda, so a
// voltage pulse drives the phase to pi at the falling edge. full_wave: phi = 2 pi L / lambda.
enum class PhaseConvention { half_wave, full_wave };

// One rectangular voltage pulse, times in units of T1 within [0, period).
struct VoltagePulse {
    double rise;
    double fall;
};

// D(t)/a for a single rectangular voltage pulse applied at t1 and released at t2,
// with rise/decay time constant trd of the transducer.
double displacement_profile(double t, double t1, double t2, double trd);

// Periodic phase phi(t) of the field seen by the absorber.
class PhaseProfile {
public:
    static PhaseProfile constant(double period, double phase = 0.0);
    static PhaseProfile ideal(double period, std::vector<VoltagePulse> pulses,
                              PhaseConvention convention = PhaseConvention::half_wave);
    static PhaseProfile realistic(double period, std::vector<VoltagePulse> pulses, double trd,
                                  PhaseConvention convention = PhaseConvention::half_wave);

    double operator()(double t) const;

    double period() const { return period_; }
    PhaseMode mode() const { return mode_; }
    double trd() const { return trd_; }
    double offset() const { return offset_; }
    const std::vector<VoltagePulse>& pulses() const { return pulses_; }

    // Phase reached at the falling edge of a pulse: pi (half_wave) or 2 pi (full_wave).
    double peak_phase() const { return peak_; }

    // Asymptote of the exponential approach during a realistic pulse,
    // peak_phase / (1 - exp(-(t2 - t1)/trd)). Equals peak_phase for ideal pulses.
    double excursion_amplitude(const VoltagePulse& p) const;

    // Sorted rising and falling edge times within one period.
    std::vector<double> edges() const;

    // Times in [lo, hi] where phi jumps (ideal) or has a kink (realistic).
    std::vector<double> breakpoints(double lo, double hi) const;

private:
    PhaseProfile() = default;
    void check();

    double period_ = 1.0;
    double offset_ = 0.0;
    double peak_ = 0.0;
    double trd_ = 0.0;
    PhaseMode mode_ = PhaseMode::ideal_step;
    std::vector<VoltagePulse> pulses_;
    std::vector<double> edges_;
};

} // namespace gammaproto
