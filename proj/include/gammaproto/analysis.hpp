#pragma once

#include <string_view>

#include "gammaproto/absorber.hpp"
#include "gammaproto/codec.hpp"
#include "gammaproto/quadrature.hpp"
#include "gammaproto/units.hpp"

namespace gammaproto {

// Reference values reported by the experiment (counts in an unpublished window).
struct MeasuredStealth {
    static constexpr double counts_with_message = 391.0;
    static constexpr double counts_without_message = 358.0;
    static constexpr double relative_increase = 0.092;
    static constexpr double per_pulse_contribution = 0.0066;
};

struct StealthReport {
    double mean_rate_with_message = 1.0;  // period average of N/N0 with the message phase
    double mean_rate_without = 1.0;       // same with phi = 0
    double relative_increase = 0.0;
    std::size_t pulse_count = 0;
    double per_pulse_contribution = 0.0;
    double filter_transmission = 1.0;
};

struct PhaseModel {
    PhaseMode mode = PhaseMode::ideal_step;
    double trd = 0.2;  // units of T1, realistic mode only
    PhaseConvention convention = PhaseConvention::half_wave;
};

StealthReport stealth_report(const PulseTrain& train, const TimingConfig& cfg, const AbsorberParams& absorber,
                             const QuadratureSpec& quad, const PhysicsUnits& units = {}, const PhaseModel& phase = {});

StealthReport stealth_report(std::string_view message, const TimingConfig& cfg, const AbsorberParams& absorber,
                             const QuadratureSpec& quad, const PhysicsUnits& units = {}, const PhaseModel& phase = {});

struct FilterCompensation {
    double transmission = 1.0;
    double delta_beta = 0.0;  // extra nonresonant depth, -ln(transmission)
};

FilterCompensation filter_compensation(const StealthReport& report);

// Absorber with the compensating filter folded into its nonresonant depth.
AbsorberParams with_filter(const AbsorberParams& absorber, const FilterCompensation& filter);

} // namespace gammaproto
