#pragma once

#include <cmath>
#include <complex>

#include "gammaproto/error.hpp"
#include "gammaproto/units.hpp"

namespace gammaproto {

struct AbsorberParams {
    double optical_thickness = 5.0;     // T = alpha_B * l
    double coherence_rate_ratio = 1.0;  // gamma_A / gamma
    double detuning = 0.0;              // (omega_S - omega_A) / gamma
    double nonresonant_depth = 0.3;     // beta, total exponent
    double recoilless_fraction = 0.8;   // f

    // b = T gamma / 2 in units of 1/T1.
    double coupling() const { return optical_thickness * kGamma / 2.0; }

    bool at_resonance() const { return detuning == 0.0 && coherence_rate_ratio == 1.0; }

    // The resonant kernel R(x) = delta(x) - exp(kernel_exponent() x) sigma1(x) in the frame
    // rotating at the source frequency, relative to the free decay exp(-gamma x).
    std::complex<double> kernel_exponent() const {
        return {-(coherence_rate_ratio - 1.0) * kGamma, detuning * kGamma};
    }

    void validate() const {
        if (!(optical_thickness >= 0.0)) throw ConfigError("absorber.optical_thickness", "must be >= 0");
        if (!(coherence_rate_ratio > 0.0)) throw ConfigError("absorber.coherence_rate_ratio", "must be > 0");
        if (!(nonresonant_depth >= 0.0)) throw ConfigError("absorber.nonresonant_depth", "must be >= 0");
        if (!(recoilless_fraction >= 0.0 && recoilless_fraction <= 1.0))
            throw ConfigError("absorber.recoilless_fraction", "must lie in [0, 1]");
        if (!std::isfinite(detuning)) throw ConfigError("absorber.detuning", "must be finite");
    }
};

} // namespace gammaproto
