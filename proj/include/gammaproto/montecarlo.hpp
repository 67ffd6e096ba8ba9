#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gammaproto/absorber.hpp"
#include "gammaproto/phase.hpp"
#include "gammaproto/quadrature.hpp"
#include "gammaproto/units.hpp"

namespace gammaproto {

enum class SimulationMode { micro, macro };

struct StreamParams {
    double mean_rate_hz = 5e4;        // resonant-line photons reaching the detector
    double duration_s = 100.0;
    std::uint64_t seed = 1;
    SimulationMode mode = SimulationMode::macro;
    double detector_efficiency = 1.0;
    double chunk_duration_s = 0.05;   // unit of parallel work; fixes the RNG streams

    void validate() const;
};

// Pile-up is not modeled; returns a message when more than 5% of lifetimes hold an emission.
std::optional<std::string> pileup_warning(const StreamParams& params, const PhysicsUnits& units);

struct DetectionRecord {
    double t_abs_ns;
};

using DetectionRecords = std::vector<DetectionRecord>;

// Homogeneous Poisson emission times (ns) on [0, duration).
std::vector<double> sample_emissions(const StreamParams& params, std::mt19937_64& rng);

// Precomputed sampling grids for one (phase profile, absorber, quadrature) configuration.
//
// micro: emission times are snapped to `rows` lattice points per period (a multiple of
// the TAC channel count). Each row stores the cumulative detection probability over
// delay cells of width quad.grid_step out to quad.horizon, so row_total(r) = P_det.
//
// macro: lambda(t)/mean_rate = observed rate, piecewise linear on knots that include
// both one-sided limits at every phase edge.
class SamplingTables {
public:
    SimulationMode mode() const { return mode_; }
    double period_ns() const { return period_ns_; }

    // micro
    int rows() const { return rows_; }
    int cells() const { return cells_; }
    double delay_step_ns() const { return delay_step_ns_; }
    double detection_probability(int row) const { return p_det_[static_cast<std::size_t>(row)]; }
    // Normalized delay CDF at the end of `cell` for `row`.
    double delay_cdf(int row, int cell) const;
    // Inverse CDF on the unnormalized cumulative; v in [0, P_det(row)).
    double sample_delay_ns(int row, double v) const;

    // macro
    double rate(double t_ns) const;  // lambda(t)/mean_rate at absolute time t
    double rate_max() const { return rate_max_; }
    double rate_mean() const;        // period average of the interpolant

    friend SamplingTables build_tables(const PhaseProfile&, const AbsorberParams&, const QuadratureSpec&,
                                       SimulationMode, const PhysicsUnits&, int);

private:
    SimulationMode mode_ = SimulationMode::macro;
    double period_ns_ = 0.0;
    int rows_ = 0;
    int cells_ = 0;
    double delay_step_ns_ = 0.0;
    std::vector<double> p_det_;
    std::vector<float> cumulative_;  // rows x (cells + 1)
    std::vector<double> knot_t_;     // ns within [0, period]
    std::vector<double> knot_rate_;
    std::vector<std::uint32_t> bucket_;  // first knot index per uniform bucket, for lookup
    double rate_max_ = 0.0;
};

inline constexpr int kMicroRows = 4096;
inline constexpr int kMacroKnots = 8192;

SamplingTables build_tables(const PhaseProfile& phase, const AbsorberParams& absorber, const QuadratureSpec& quad,
                            SimulationMode mode, const PhysicsUnits& units = {}, int threads = 1);

// Per-photon sampling: each emission is detected with probability P_det * efficiency and,
// if so, delayed by a draw from its row's conditional delay distribution.
DetectionRecords run_micro(const StreamParams& params, const SamplingTables& tables, int threads = 1);

// Thinning of a homogeneous candidate stream at mean_rate * rate_max.
DetectionRecords run_macro(const StreamParams& params, const SamplingTables& tables, int threads = 1);

// Dispatches on params.mode; tables must have been built for that mode.
DetectionRecords run_stream(const StreamParams& params, const SamplingTables& tables, int threads = 1);

} // namespace gammaproto
