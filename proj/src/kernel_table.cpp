#include "gammaproto/kernel_table.hpp"

#include <cmath>

#include "gammaproto/bessel.hpp"

namespace gammaproto {

KernelTable::KernelTable(double b, double extent, double step) : b_(b), extent_(extent), step_(step) {
    if (!(b >= 0.0)) throw DomainError("KernelTable: coupling must be non-negative");
    if (!(extent > 0.0) || !(step > 0.0)) throw DomainError("KernelTable: extent and step must be positive");
    const auto n = static_cast<Eigen::Index>(std::ceil(extent / step)) + 2;
    s0_.resize(n);
    s1_.resize(n);
    ds1_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) * step;
        s0_(i) = gammaproto::sigma0(x, b);
        s1_(i) = gammaproto::sigma1(x, b);
        ds1_(i) = sigma1_derivative(x, b);
    }
}

double KernelTable::hermite(const Eigen::ArrayXd& value, const Eigen::ArrayXd& slope, double x) const {
    const double pos = x / step_;
    auto i = static_cast<Eigen::Index>(pos);
    if (i >= value.size() - 1) i = value.size() - 2;
    const double t = pos - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * value(i) + h10 * step_ * slope(i) + h01 * value(i + 1) + h11 * step_ * slope(i + 1);
}

double KernelTable::sigma0(double x) const {
    if (x < 0.0) throw DomainError("KernelTable::sigma0: negative argument");
    if (x > extent_) return gammaproto::sigma0(x, b_);
    // sigma0' = -sigma1
    const double pos = x / step_;
    auto i = static_cast<Eigen::Index>(pos);
    if (i >= s0_.size() - 1) i = s0_.size() - 2;
    const double t = pos - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * s0_(i) - (t3 - 2 * t2 + t) * step_ * s1_(i) + (-2 * t3 + 3 * t2) * s0_(i + 1) -
           (t3 - t2) * step_ * s1_(i + 1);
}

double KernelTable::sigma1(double x) const {
    if (x < 0.0) throw DomainError("KernelTable::sigma1: negative argument");
    if (x > extent_) return gammaproto::sigma1(x, b_);
    return hermite(s1_, ds1_, x);
}

} // namespace gammaproto
