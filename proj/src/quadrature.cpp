#include "gammaproto/quadrature.hpp"

#include <array>
#include <memory>
#include <mutex>

namespace gammaproto {

void QuadratureSpec::validate() const {
    if (!(horizon > 0.0)) throw ConfigError("quadrature.horizon", "must be positive");
    if (!(rel_tol > 0.0)) throw ConfigError("quadrature.rel_tol", "must be positive");
    if (!(grid_step > 0.0) || grid_step > horizon) throw ConfigError("quadrature.grid_step", "must lie in (0, horizon]");
}

const GaussLegendre<double>& gauss_legendre(int n) {
    constexpr int kMaxOrder = 64;
    if (n < 1 || n > kMaxOrder) throw DomainError("gauss_legendre: unsupported order");
    static std::array<std::unique_ptr<GaussLegendre<double>>, kMaxOrder + 1> rules;
    static std::array<std::once_flag, kMaxOrder + 1> flags;
    std::call_once(flags[n], [n] { rules[n] = std::make_unique<GaussLegendre<double>>(n); });
    return *rules[n];
}

} // namespace gammaproto
