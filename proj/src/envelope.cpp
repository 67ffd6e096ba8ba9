#include "gammaproto/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gammaproto/bessel.hpp"

namespace gammaproto {

namespace {

constexpr Complex kI{0.0, 1.0};

// (e^z - 1) / z
Complex psi1(Complex z) {
    if (std::abs(z) < 1e-3) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    return (std::exp(z) - 1.0) / z;
}

// int_0^1 r e^{z r} dr = (e^z (z - 1) + 1) / z^2
Complex psi2(Complex z) {
    if (std::abs(z) < 1e-2) return 0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0 + z * z * z * z / 144.0;
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

// e^{-w} - 1 + w - w^2/2
Complex third_order_remainder(Complex w) {
    if (std::abs(w) < 5e-2) {
        const Complex w3 = w * w * w;
        return w3 * (-1.0 / 6.0 + w / 24.0 - w * w / 120.0 + w * w * w / 720.0);
    }
    return std::exp(-w) - 1.0 + w - w * w / 2.0;
}

} // namespace

Complex source_envelope(double t, double t0) {
    if (t < t0) return 0.0;
    return std::exp(-kGamma * (t - t0));
}

ComplexEnvelope phase_modulated_source(double t0, const PhaseProfile& phase) {
    return ComplexEnvelope(
        [t0, phase](double t) { return std::polar(std::exp(-kGamma * (t - t0)), phase(t)); }, t0,
        phase.breakpoints(t0, t0 + 1e6));
}

ComplexEnvelope pi_step_source(double t0, double t1) {
    if (!(t1 > t0)) throw DomainError("pi_step_source: flip must follow emission");
    return ComplexEnvelope(
        [t0, t1](double t) {
            const double sign = t >= t1 ? -1.0 : 1.0;
            return Complex(sign * std::exp(-kGamma * (t - t0)));
        },
        t0, {t1});
}

double resonant_envelope(double u, double optical_thickness) {
    if (u < 0.0) return 0.0;
    const double b = optical_thickness * kGamma / 2.0;
    return std::exp(-kGamma * u) * sigma0(u, b);
}

double pi_shift_envelope(double u, double u1, double optical_thickness) {
    if (!(u1 > 0.0)) throw DomainError("pi_shift_envelope: flip time must be positive");
    if (u < 0.0) return 0.0;
    const double b = optical_thickness * kGamma / 2.0;
    double v = sigma0(u, b);
    if (u >= u1) v -= 2.0 * sigma0(u - u1, b);
    return std::exp(-kGamma * u) * v;
}

Complex stepped_phase_envelope(double u, Complex z0, const std::vector<PhaseJump>& jumps, const KernelTable& table) {
    if (u < 0.0) return 0.0;
    Complex v = z0 * table.sigma0(u);
    for (const auto& j : jumps) {
        if (j.delay > u) break;
        v += j.jump * table.sigma0(u - j.delay);
    }
    return std::exp(-kGamma * u) * v;
}

StepResponseTable::StepResponseTable(const AbsorberParams& absorber, double extent, double step)
    : extent_(extent), step_(step) {
    if (!(extent > 0.0) || !(step > 0.0)) throw DomainError("StepResponseTable: extent and step must be positive");
    const double b = absorber.coupling();
    const Complex s = absorber.kernel_exponent();
    const auto n = static_cast<Eigen::Index>(std::ceil(extent / step)) + 2;
    value_.resize(n);
    slope_.resize(n);
    const auto& rule = gauss_legendre(8);
    auto kernel = [&](double x) { return std::exp(s * x) * sigma1(x, b); };
    Complex acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) * step;
        if (i > 0) acc += rule.integrate(kernel, x - step, x);
        value_(i) = 1.0 - acc;
        slope_(i) = -kernel(x);
    }
}

Complex StepResponseTable::operator()(double u) const {
    if (u < 0.0) throw DomainError("StepResponseTable: negative argument");
    const double pos = std::min(u, extent_) / step_;
    auto i = static_cast<Eigen::Index>(pos);
    if (i >= value_.size() - 1) i = value_.size() - 2;
    const double t = pos - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * value_(i) + (t3 - 2 * t2 + t) * step_ * slope_(i) +
           (-2 * t3 + 3 * t2) * value_(i + 1) + (t3 - t2) * step_ * slope_(i + 1);
}

Complex stepped_phase_envelope(double u, Complex z0, const std::vector<PhaseJump>& jumps,
                               const StepResponseTable& table) {
    if (u < 0.0) return 0.0;
    Complex v = z0 * table(u);
    for (const auto& j : jumps) {
        if (j.delay > u) break;
        v += j.jump * table(u - j.delay);
    }
    return std::exp(-kGamma * u) * v;
}

ResponseEvaluator::ResponseEvaluator(const ComplexEnvelope& input, const AbsorberParams& absorber,
                                     const QuadratureSpec& quad)
    : input_(input),
      b_(absorber.coupling()),
      exponent_(absorber.kernel_exponent() - kGamma),
      rel_tol_(quad.rel_tol),
      abs_tol_(quad.rel_tol * 1e-2) {}

Complex ResponseEvaluator::operator()(double t) const {
    const double span = t - input_.onset();
    if (span < 0.0) return 0.0;
    const Complex direct = input_(t);
    if (b_ == 0.0 || span == 0.0) return direct;

    std::vector<double> cuts;
    for (double bp : input_.breakpoints())
        if (bp < t && bp > input_.onset()) cuts.push_back(t - bp);

    const double b = b_;
    const Complex k = exponent_;
    auto integrand = [&](double x) { return std::exp(k * x) * sigma1(x, b) * input_(t - x); };
    AdaptiveOptions opt;
    opt.rel_tol = rel_tol_;
    opt.abs_tol = abs_tol_;
    opt.max_intervals = 4000;
    const Complex scattered = integrate_or_throw(integrand, 0.0, span, opt, "convolve_response", cuts);
    return direct - scattered;
}

TabulatedEnvelope convolve_response(const ComplexEnvelope& input, const AbsorberParams& absorber,
                                    const QuadratureSpec& quad) {
    quad.validate();
    absorber.validate();
    ResponseEvaluator response(input, absorber, quad);
    TabulatedEnvelope out;
    out.t_start = input.onset();
    out.step = quad.grid_step;
    const auto n = static_cast<Eigen::Index>(std::floor(quad.horizon / quad.grid_step + 1e-9)) + 1;
    out.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.values(i) = response(out.time(i));
    return out;
}

double transmitted_probability(const ComplexEnvelope& input, const AbsorberParams& absorber,
                               const QuadratureSpec& quad) {
    ResponseEvaluator response(input, absorber, quad);
    const double lo = input.onset();
    const double hi = lo + quad.horizon;
    AdaptiveOptions opt;
    opt.rel_tol = quad.rel_tol;
    opt.abs_tol = quad.rel_tol * 1e-3;
    opt.max_intervals = 2000;
    auto density = [&](double t) { return 2.0 * kGamma * std::norm(response(t)); };
    return integrate_or_throw(density, lo, hi, opt, "transmitted_probability", input.breakpoints());
}

Complex frequency_domain_envelope(double u, const AbsorberParams& absorber, const QuadratureSpec& quad) {
    absorber.validate();
    if (u < 0.0) return 0.0;
    const double free_decay = std::exp(-kGamma * u);
    const double b = absorber.coupling();
    if (b == 0.0) return free_decay;

    // alpha(nu) l = i b / (nu + pole), pole = (omega_S - omega_A) + i gamma_A.
    const Complex pole{absorber.detuning * kGamma, absorber.coherence_rate_ratio * kGamma};
    const Complex s = absorber.kernel_exponent();

    // First- and second-order terms in b, transformed analytically.
    const Complex first = -b * free_decay * u * psi1(s * u);
    const Complex second = 0.5 * b * b * free_decay * u * u * psi2(s * u);

    auto integrand = [&](double nu) {
        const Complex a0 = kI / (nu + kI * kGamma);
        const Complex w = kI * b / (nu + pole);
        return a0 * third_order_remainder(w) * std::exp(-kI * nu * u) / (2.0 * std::numbers::pi);
    };

    const double centre = -0.5 * pole.real();
    const double half_width = std::max(200.0, 40.0 * b) + std::abs(pole.real());
    const double panel = 4.0;
    std::vector<double> cuts{0.0, -pole.real()};
    for (double nu = centre - half_width; nu < centre + half_width; nu += panel) cuts.push_back(nu);

    AdaptiveOptions opt;
    opt.rel_tol = quad.rel_tol;
    opt.abs_tol = quad.rel_tol * 1e-2;
    opt.max_intervals = 200000;
    const Complex remainder = integrate_or_throw(integrand, centre - half_width, centre + half_width, opt,
                                                 "frequency_domain_envelope", cuts);
    return free_decay + first + second + remainder;
}

} // namespace gammaproto
