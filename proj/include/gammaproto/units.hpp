#pragma once

#include "gammaproto/error.hpp"

namespace gammaproto {

// All internal times are measured in units of the source lifetime T1 = 1/(2 gamma).
// In these units the field decay rate is gamma = 1/2 and 2 gamma = 1.
inline constexpr double kGamma = 0.5;

struct PhysicsUnits {
    double t1_ns = 141.0;

    double to_natural(double ns) const { return ns / t1_ns; }
    double to_ns(double natural) const { return natural * t1_ns; }

    void validate() const {
        if (!(t1_ns > 0.0)) throw ConfigError("units.t1_ns", "lifetime must be positive");
    }
};

} // namespace gammaproto
