#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace gammaproto {

// log Q(a, x), the regularized upper incomplete gamma function, accurate far into the
// tail where Q itself underflows.
double log_gamma_q(double a, double x);

// Natural log of the chi-square survival probability P(X >= chi2) with `dof` degrees of freedom.
double chi2_log_sf(double chi2, double dof);

// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|. Sorts a copy of `samples`.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

// Large-n critical value sqrt(-ln(alpha/2) / 2) / sqrt(n).
double ks_critical(std::size_t n, double alpha);

// Two-sided p-value that counts n1 over exposure e1 and n2 over e2 share one Poisson rate
// (conditional binomial test, normal approximation with continuity correction).
double poisson_two_sample_p(std::int64_t n1, double e1, std::int64_t n2, double e2);

} // namespace gammaproto
