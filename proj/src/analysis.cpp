#include "gammaproto/analysis.hpp"

#include <cmath>

#include "gammaproto/rates.hpp"

namespace gammaproto {

StealthReport stealth_report(const PulseTrain& train, const TimingConfig& cfg, const AbsorberParams& absorber,
                             const QuadratureSpec& quad, const PhysicsUnits& units, const PhaseModel& phase) {
    absorber.validate();
    const ObservedRate observed(absorber, quad);
    const PhaseProfile idle = PhaseProfile::constant(units.to_natural(cfg.period_ns));
    const PhaseProfile modulated = phase_profile_for(train, cfg, units, phase.mode, phase.trd, phase.convention);

    StealthReport rep;
    rep.mean_rate_without = observed.period_average(idle);
    rep.mean_rate_with_message = train.edges.empty() ? rep.mean_rate_without : observed.period_average(modulated);
    rep.relative_increase = rep.mean_rate_with_message / rep.mean_rate_without - 1.0;
    rep.pulse_count = train.pulse_count();
    rep.per_pulse_contribution = rep.pulse_count ? rep.relative_increase / static_cast<double>(rep.pulse_count) : 0.0;
    rep.filter_transmission = rep.mean_rate_without / rep.mean_rate_with_message;
    return rep;
}

StealthReport stealth_report(std::string_view message, const TimingConfig& cfg, const AbsorberParams& absorber,
                             const QuadratureSpec& quad, const PhysicsUnits& units, const PhaseModel& phase) {
    return stealth_report(encode_message(message, cfg), cfg.for_message(message), absorber, quad, units, phase);
}

FilterCompensation filter_compensation(const StealthReport& report) {
    FilterCompensation f;
    f.transmission = 1.0 / (1.0 + report.relative_increase);
    f.delta_beta = std::log1p(report.relative_increase);
    return f;
}

AbsorberParams with_filter(const AbsorberParams& absorber, const FilterCompensation& filter) {
    AbsorberParams a = absorber;
    a.nonresonant_depth += filter.delta_beta;
    return a;
}

} // namespace gammaproto
