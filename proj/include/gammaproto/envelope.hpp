#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "gammaproto/absorber.hpp"
#include "gammaproto/kernel_table.hpp"
#include "gammaproto/phase.hpp"
#include "gammaproto/quadrature.hpp"

namespace gammaproto {

using Complex = std::complex<double>;

// Field amplitude in the frame rotating at the source frequency. Zero before `onset`;
// `breakpoints` lists times where the amplitude may jump.
class ComplexEnvelope {
public:
    ComplexEnvelope(std::function<Complex(double)> fn, double onset, std::vector<double> breakpoints = {})
        : fn_(std::move(fn)), onset_(onset), breakpoints_(std::move(breakpoints)) {}

    Complex operator()(double t) const { return t < onset_ ? Complex(0.0) : fn_(t); }

    double onset() const { return onset_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }

private:
    std::function<Complex(double)> fn_;
    double onset_;
    std::vector<double> breakpoints_;
};

// Envelope sampled on t_i = t_start + i * step.
struct TabulatedEnvelope {
    double t_start = 0.0;
    double step = 0.0;
    Eigen::ArrayXcd values;

    double time(Eigen::Index i) const { return t_start + static_cast<double>(i) * step; }
    Eigen::Index size() const { return values.size(); }
};

// theta(t - t0) exp(-gamma (t - t0)).
Complex source_envelope(double t, double t0);

// Source photon emitted at t0 whose phase follows `phase`: exp(i phi(t)) exp(-gamma (t - t0)).
ComplexEnvelope phase_modulated_source(double t0, const PhaseProfile& phase);

// Source photon with a single pi flip at t1 > t0: [theta(t - t0) - 2 theta(t - t1)] exp(-gamma (t - t0)).
ComplexEnvelope pi_step_source(double t0, double t1);

// Exact resonance, gamma_A = gamma: exp(-gamma u) J0(2 sqrt(b u)), zero for u < 0.
double resonant_envelope(double u, double optical_thickness);

// Transmitted amplitude of a photon whose phase flips by pi at u1 after emission.
double pi_shift_envelope(double u, double u1, double optical_thickness);

// Transmitted amplitude for a piecewise-constant input phase. `z0` is exp(i phi) at
// emission; each (delay, jump) adds jump * J0(2 sqrt(b (u - delay))) for u >= delay,
// where jump is the change of exp(i phi) at that delay. Sorted by delay.
struct PhaseJump {
    double delay;
    Complex jump;
};
Complex stepped_phase_envelope(double u, Complex z0, const std::vector<PhaseJump>& jumps, const KernelTable& table);

// Step response g(u) = 1 - int_0^u exp(s x) sigma1(x) dx of the absorber kernel, s its
// exponent relative to the free decay. The transmitted amplitude of exp(-gamma u) theta(u - d)
// is exp(-gamma u) g(u - d); at resonance g = sigma0. Tabulated on [0, extent] with
// cubic-Hermite interpolation (g' = -exp(s x) sigma1).
class StepResponseTable {
public:
    StepResponseTable(const AbsorberParams& absorber, double extent, double step = 1.0 / 256.0);

    Complex operator()(double u) const;
    double extent() const { return extent_; }

private:
    double extent_;
    double step_;
    Eigen::ArrayXcd value_, slope_;
};

// Same superposition as stepped_phase_envelope for an arbitrary absorber.
Complex stepped_phase_envelope(double u, Complex z0, const std::vector<PhaseJump>& jumps,
                               const StepResponseTable& table);

// Pointwise evaluation of a(t) = in(t) - int_0^inf exp(k x) sigma1(x) in(t - x) dx.
class ResponseEvaluator {
public:
    ResponseEvaluator(const ComplexEnvelope& input, const AbsorberParams& absorber, const QuadratureSpec& quad);

    Complex operator()(double t) const;

    // Estimated absolute error of the last accepted integral bound, for diagnostics.
    double tolerance() const { return abs_tol_; }

private:
    const ComplexEnvelope& input_;
    double b_;
    Complex exponent_;
    double rel_tol_;
    double abs_tol_;
};

// Output envelope on [input.onset(), input.onset() + quad.horizon] with step quad.grid_step.
TabulatedEnvelope convolve_response(const ComplexEnvelope& input, const AbsorberParams& absorber,
                                    const QuadratureSpec& quad);

// Detection probability 2 gamma int |a|^2 dt of the transmitted photon, truncated at the horizon.
double transmitted_probability(const ComplexEnvelope& input, const AbsorberParams& absorber,
                               const QuadratureSpec& quad);

// General-case route: numerical inversion of the frequency-domain solution, valid for any
// detuning and gamma_A. `u` is the time after emission.
Complex frequency_domain_envelope(double u, const AbsorberParams& absorber, const QuadratureSpec& quad);

} // namespace gammaproto
