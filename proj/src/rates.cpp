#include "gammaproto/rates.hpp"

#include <cmath>
#include <complex>

#include "gammaproto/bessel.hpp"
#include "gammaproto/units.hpp"

namespace gammaproto {

namespace {

constexpr int kPanelOrder = 16;
constexpr int kMaxRefinements = 10;

using Complex = std::complex<double>;

double integrate_period(const auto& rate, const PhaseProfile& phase, double rel_tol) {
    AdaptiveOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = rel_tol * 1e-3;
    opt.max_intervals = 20000;
    opt.order = 8;
    const auto cuts = phase.breakpoints(0.0, phase.period());
    const double total = integrate_or_throw(rate, 0.0, phase.period(), opt, "period_average", cuts);
    return total / phase.period();
}

} // namespace

double baseline_nb(double optical_thickness) {
    if (!(optical_thickness >= 0.0)) throw DomainError("baseline_nb: optical thickness must be >= 0");
    const double half = optical_thickness / 2.0;
    return std::exp(-half) * bessel_i0(half);
}

double step_rate_factor(double s, double optical_thickness, const QuadratureSpec& quad) {
    if (s < 0.0) throw DomainError("step_rate_factor: negative delay");
    const double b = optical_thickness * kGamma / 2.0;
    AdaptiveOptions opt;
    opt.rel_tol = std::min(quad.rel_tol, 1e-8);
    opt.abs_tol = 1e-14;
    auto damped = [b](double x) { return 2.0 * kGamma * std::exp(-2.0 * kGamma * x) * sigma0(x, b); };
    const double integral = integrate_or_throw(damped, 0.0, s, opt, "integrated_rate_step");
    return std::exp(-2.0 * kGamma * s) * sigma0(s, b) - std::exp(-optical_thickness / 4.0) + integral;
}

double integrated_rate_step(double t, double t1, double optical_thickness, const QuadratureSpec& quad) {
    const double base = baseline_nb(optical_thickness);
    if (t < t1) return base;
    const double s = t - t1;
    const double b = optical_thickness * kGamma / 2.0;
    return base + 4.0 * sigma0(s, b) * step_rate_factor(s, optical_thickness, quad);
}

GeneralPhaseRate::GeneralPhaseRate(double optical_thickness, const QuadratureSpec& quad)
    : thickness_(optical_thickness),
      quad_(quad),
      table_(optical_thickness * kGamma / 2.0, quad.horizon + 1.0) {
    if (!(optical_thickness >= 0.0)) throw DomainError("GeneralPhaseRate: optical thickness must be >= 0");
    quad_.validate();
    const auto& rule = gauss_legendre(kPanelOrder);
    nodes_ = rule.nodes();
    weights_ = rule.weights();
    running_ = rule.integration_matrix();
}

double GeneralPhaseRate::evaluate(double t, const PhaseProfile& phase, double panel, double* tail) const {
    const double horizon = quad_.horizon;
    std::vector<double> cuts;
    for (double x = 0.0; x < horizon; x += panel) cuts.push_back(x);
    cuts.push_back(horizon);
    for (double bp : phase.breakpoints(t - horizon, t)) cuts.push_back(t - bp);
    std::sort(cuts.begin(), cuts.end());

    const Complex zt = std::polar(1.0, phase(t));
    Complex cumulative = 0.0;
    double linear = 0.0, quadratic = 0.0;
    Eigen::VectorXcd f(kPanelOrder);
    Eigen::VectorXd s1(kPanelOrder), damp(kPanelOrder);
    Eigen::VectorXcd z(kPanelOrder);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double lo = cuts[p], hi = cuts[p + 1];
        if (!(hi - lo > 1e-13)) continue;
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (int j = 0; j < kPanelOrder; ++j) {
            const double x = mid + half * nodes_(j);
            s1(j) = table_.sigma1(x);
            damp(j) = std::exp(-2.0 * kGamma * x);
            z(j) = std::polar(1.0, phase(t - x));
            f(j) = s1(j) * z(j);
        }
        const Eigen::VectorXcd inner = (cumulative + (half * (running_ * f)).array()).matrix();
        for (int j = 0; j < kPanelOrder; ++j) {
            const double w = half * weights_(j) * damp(j) * s1(j);
            linear += w * std::real(std::conj(zt) * z(j));
            quadratic += w * std::real(std::conj(z(j)) * inner(j));
        }
        cumulative += half * weights_.dot(f.real()) + Complex(0.0, half * weights_.dot(f.imag()));
    }
    if (tail) *tail = std::exp(-2.0 * kGamma * horizon) * std::norm(1.0 + std::abs(cumulative));
    return 1.0 - 2.0 * linear + 2.0 * quadratic;
}

double GeneralPhaseRate::operator()(double t, const PhaseProfile& phase) const {
    if (thickness_ == 0.0) return 1.0;
    double tail = 0.0;
    double panel = quad_.horizon / 4.0;
    double previous = evaluate(t, phase, panel, &tail);
    if (tail > quad_.rel_tol)
        throw QuadratureError("rate_general_phase: horizon too short for requested tolerance", tail);
    for (int level = 0; level < kMaxRefinements; ++level) {
        panel /= 2.0;
        const double current = evaluate(t, phase, panel, nullptr);
        const double diff = std::abs(current - previous);
        if (diff <= quad_.rel_tol * std::max(1.0, std::abs(current))) return current;
        previous = current;
        if (level == kMaxRefinements - 1)
            throw QuadratureError("rate_general_phase: panel refinement did not converge", diff);
    }
    return previous;
}

double rate_general_phase(double t, const PhaseProfile& phase, double optical_thickness, const QuadratureSpec& quad) {
    return GeneralPhaseRate(optical_thickness, quad)(t, phase);
}

ObservedRate::ObservedRate(const AbsorberParams& absorber, const QuadratureSpec& quad)
    : absorber_(absorber), quad_(quad), resonant_(absorber.optical_thickness, quad) {
    absorber_.validate();
    if (!absorber_.at_resonance())
        throw DomainError("observed_rate: emission-averaged rate requires exact resonance and gamma_A = gamma");
}

double ObservedRate::operator()(double t, const PhaseProfile& phase) const {
    const double f = absorber_.recoilless_fraction;
    const double resonant = f > 0.0 ? resonant_(t, phase) : 0.0;
    return ((1.0 - f) + f * resonant) * std::exp(-absorber_.nonresonant_depth);
}

double ObservedRate::period_average(const PhaseProfile& phase) const {
    if (phase.pulses().empty()) return (*this)(0.0, phase);
    return integrate_period([&](double t) { return (*this)(t, phase); }, phase, quad_.rel_tol);
}

double observed_rate(double t, const PhaseProfile& phase, const AbsorberParams& absorber, const QuadratureSpec& quad) {
    return ObservedRate(absorber, quad)(t, phase);
}

double period_average_rate(const PhaseProfile& phase, double optical_thickness, const QuadratureSpec& quad) {
    GeneralPhaseRate rate(optical_thickness, quad);
    if (phase.pulses().empty()) return rate(0.0, phase);
    return integrate_period([&](double t) { return rate(t, phase); }, phase, quad.rel_tol);
}

} // namespace gammaproto
