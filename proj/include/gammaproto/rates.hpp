#pragma once

#include <Eigen/Core>

#include "gammaproto/absorber.hpp"
#include "gammaproto/kernel_table.hpp"
#include "gammaproto/phase.hpp"
#include "gammaproto/quadrature.hpp"

namespace gammaproto {

// Transmission baseline exp(-T/2) I0(T/2) of an unmodulated absorber.
double baseline_nb(double optical_thickness);

// Emission-averaged count rate N_pi(t)/N0 for one ideal pi step at t1 (exact resonance).
double integrated_rate_step(double t, double t1, double optical_thickness, const QuadratureSpec& quad);

// The F_T(s) factor of the single-step rate.
double step_rate_factor(double s, double optical_thickness, const QuadratureSpec& quad);

// Emission-averaged count rate N_pi(t)/N0 for an arbitrary periodic phase,
//
//   1 - 2 int_0^H e^{-x} s1(x) cos[phi(t) - phi(t-x)] dx
//     + 2 int_0^H dx e^{-x} s1(x) int_0^x dy s1(y) cos[phi(t-x) - phi(t-y)],
//
// with s1 the resonant kernel. The inner integral is carried along the outer one:
// writing z(x) = exp(i phi(t - x)) and Z(x) = int_0^x s1 z, the inner term is
// Re(conj(z(x)) Z(x)), so one pass over Gauss-Legendre panels with a cumulative
// integration matrix evaluates both terms. Panels never straddle a phase edge.
class GeneralPhaseRate {
public:
    GeneralPhaseRate(double optical_thickness, const QuadratureSpec& quad);

    double operator()(double t, const PhaseProfile& phase) const;

    double optical_thickness() const { return thickness_; }

private:
    double evaluate(double t, const PhaseProfile& phase, double panel, double* tail) const;

    double thickness_;
    QuadratureSpec quad_;
    KernelTable table_;
    Eigen::VectorXd nodes_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd running_;
};

double rate_general_phase(double t, const PhaseProfile& phase, double optical_thickness, const QuadratureSpec& quad);

// Observable normalized rate [(1 - f) + f N_pi/N0] exp(-beta).
class ObservedRate {
public:
    ObservedRate(const AbsorberParams& absorber, const QuadratureSpec& quad);

    double operator()(double t, const PhaseProfile& phase) const;

    // Period average (1/T_S) int_0^{T_S} N(t)/N0 dt.
    double period_average(const PhaseProfile& phase) const;

    const AbsorberParams& absorber() const { return absorber_; }

private:
    AbsorberParams absorber_;
    QuadratureSpec quad_;
    GeneralPhaseRate resonant_;
};

double observed_rate(double t, const PhaseProfile& phase, const AbsorberParams& absorber, const QuadratureSpec& quad);

// Period average of the resonant rate N_pi/N0 alone.
double period_average_rate(const PhaseProfile& phase, double optical_thickness, const QuadratureSpec& quad);

} // namespace gammaproto
