#pragma once

#include <cmath>

#include "gammaproto/error.hpp"

namespace gammaproto {

// Cylindrical Bessel functions backed by the C++17 special math library.
// J0 and I0 are even, J1 is odd; the library only accepts x >= 0.

template <typename Scalar>
Scalar bessel_j0(Scalar x) {
    return std::cyl_bessel_j(Scalar(0), std::abs(x));
}

template <typename Scalar>
Scalar bessel_j1(Scalar x) {
    const Scalar v = std::cyl_bessel_j(Scalar(1), std::abs(x));
    return x < Scalar(0) ? -v : v;
}

template <typename Scalar>
Scalar bessel_j2(Scalar x) {
    return std::cyl_bessel_j(Scalar(2), std::abs(x));
}

template <typename Scalar>
Scalar bessel_i0(Scalar x) {
    return std::cyl_bessel_i(Scalar(0), std::abs(x));
}

// sigma0(x) = J0(2 sqrt(b x)): the transmitted envelope of a step-started
// exponential, relative to the free decay.
template <typename Scalar>
Scalar sigma0(Scalar x, Scalar b) {
    if (x < Scalar(0)) throw DomainError("sigma0: negative argument");
    return bessel_j0(Scalar(2) * std::sqrt(b * x));
}

// sigma1(x) = b J1(2 sqrt(b x)) / sqrt(b x), the resonant part of the absorber
// response. Entire in x; sigma1(0) = b.
template <typename Scalar>
Scalar sigma1(Scalar x, Scalar b) {
    if (x < Scalar(0)) throw DomainError("sigma1: negative argument");
    const Scalar bx = b * x;
    if (bx < Scalar(1e-6)) {
        // b * sum_k (-bx)^k / (k! (k+1)!)
        return b * (Scalar(1) - bx / Scalar(2) + bx * bx / Scalar(12) - bx * bx * bx / Scalar(144));
    }
    const Scalar root = std::sqrt(bx);
    return b * bessel_j1(Scalar(2) * root) / root;
}

// d sigma1 / dx = -b^2 sum_k (-bx)^k / (k! (k+2)!) = -4 b^2 J2(z) / z^2, z = 2 sqrt(b x).
template <typename Scalar>
Scalar sigma1_derivative(Scalar x, Scalar b) {
    if (x < Scalar(0)) throw DomainError("sigma1_derivative: negative argument");
    const Scalar bx = b * x;
    if (bx < Scalar(1e-4)) {
        return -b * b * (Scalar(0.5) - bx / Scalar(6) + bx * bx / Scalar(48) - bx * bx * bx / Scalar(720));
    }
    const Scalar z = Scalar(2) * std::sqrt(bx);
    return Scalar(-4) * b * b * bessel_j2(z) / (z * z);
}

} // namespace gammaproto
