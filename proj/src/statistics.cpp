#include "gammaproto/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gammaproto/error.hpp"

namespace gammaproto {

double log_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw DomainError("log_gamma_q: need a > 0 and x >= 0");
    if (x == 0.0) return 0.0;
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        // P(a, x) by its power series; Q = 1 - P.
        double term = 1.0 / a, sum = term;
        for (int n = 1; n < 100000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-17) break;
        }
        const double p = std::exp(log_prefix + std::log(sum));
        return std::log1p(-std::min(p, 1.0));
    }
    // Continued fraction for Q (modified Lentz).
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return log_prefix + std::log(h);
}

double chi2_log_sf(double chi2, double dof) { return log_gamma_q(dof / 2.0, std::max(chi2, 0.0) / 2.0); }

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double ks_critical(std::size_t n, double alpha) {
    if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw DomainError("ks_critical: need n > 0 and alpha in (0, 1)");
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

double poisson_two_sample_p(std::int64_t n1, double e1, std::int64_t n2, double e2) {
    if (!(e1 > 0.0 && e2 > 0.0)) throw DomainError("poisson_two_sample_p: exposures must be positive");
    const double n = static_cast<double>(n1 + n2);
    if (n == 0.0) return 1.0;
    const double p = e1 / (e1 + e2);
    const double mean = n * p;
    const double sd = std::sqrt(n * p * (1.0 - p));
    const double dev = std::max(std::abs(static_cast<double>(n1) - mean) - 0.5, 0.0);
    return std::erfc(dev / sd / std::sqrt(2.0));
}

} // namespace gammaproto
