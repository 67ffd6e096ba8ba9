#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gammaproto/config.hpp"

namespace gammaproto {

struct CheckResult {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double expected = 0.0;
    std::string detail;
    double seconds = 0.0;
};

struct SelftestReport {
    std::vector<CheckResult> checks;

    bool all_passed() const;
    nlohmann::json to_json() const;
};

// Oracle-equivalence and invariant checks at reduced statistics, driven by the
// configuration's absorber, timing, quadrature and seed.
SelftestReport run_selftest(const ExperimentConfig& cfg);

} // namespace gammaproto
