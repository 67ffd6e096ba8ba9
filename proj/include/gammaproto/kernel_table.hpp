#pragma once

#include <Eigen/Core>

namespace gammaproto {

// Cubic-Hermite tables of sigma0(x) = J0(2 sqrt(b x)) and sigma1(x) = b J1(2 sqrt(b x))/sqrt(b x)
// on [0, extent]. Both are entire in x, and their derivatives are known in closed form
// (sigma0' = -sigma1), so the interpolation error is O(h^4). Arguments past the table
// fall back to direct evaluation. Immutable after construction.
class KernelTable {
public:
    KernelTable(double b, double extent, double step = 1.0 / 256.0);

    double coupling() const { return b_; }
    double extent() const { return extent_; }

    double sigma0(double x) const;
    double sigma1(double x) const;

private:
    double hermite(const Eigen::ArrayXd& value, const Eigen::ArrayXd& slope, double x) const;

    double b_;
    double extent_;
    double step_;
    Eigen::ArrayXd s0_, s1_, ds1_;
};

} // namespace gammaproto
