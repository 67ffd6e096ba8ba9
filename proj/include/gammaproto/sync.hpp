#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gammaproto/codec.hpp"
#include "gammaproto/montecarlo.hpp"

namespace gammaproto {

struct TacConfig {
    double start_period_ns = 20000.0;  // T_S at the receiver
    double frequency_offset_hz = 0.0;  // start rate is Omega_S + delta
    int channel_count = 1024;
    double start_phase_ns = 0.0;       // time of the first start

    void validate() const;

    double channel_width_ns() const { return start_period_ns / channel_count; }
    // Spacing of consecutive starts, 1 / (Omega_S + delta).
    double actual_start_period_ns() const;
};

using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct Histogram {
    CountVector counts;
    double channel_width_ns = 0.0;
    std::int64_t total_starts = 0;
    std::int64_t total_counts = 0;

    int channel_count() const { return static_cast<int>(counts.size()); }
    double channel_center_ns(int c) const { return (c + 0.5) * channel_width_ns; }

    // Channelwise sum; both histograms must share the channel grid.
    Histogram& operator+=(const Histogram& other);
};

Histogram empty_histogram(const TacConfig& tac);

// Start-stop binning: each record is measured from the latest start at or before it.
// Records before the first start are dropped. Delays past the histogram span wrap.
// `acquisition_ns` (0: last record) bounds the count of starts issued.
Histogram accumulate(const DetectionRecords& records, const TacConfig& tac, double acquisition_ns = 0.0);

struct FlatnessReport {
    double max_deviation = 0.0;  // max |count - mean| / sqrt(mean)
    double chi2 = 0.0;           // against the uniform hypothesis
    int dof = 0;
    double log_p = 0.0;          // natural log of the chi-square survival probability
    double p_value() const;
};

FlatnessReport flatness_metric(const Histogram& h);

struct PeakPolicy {
    double k_sigma = 6.0;          // threshold = baseline + k * max(sqrt(baseline), 1)
    double min_mean_counts = 25.0; // below this, "insufficient statistics"
};

struct Peak {
    double time_ns;   // count-weighted centroid within the period
    int first_channel;
    int width;        // channels above threshold
    std::int64_t height;
};

struct PeakSearch {
    double baseline = 0.0;
    double threshold = 0.0;
    std::vector<Peak> peaks;

    std::vector<double> times() const;
};

PeakSearch detect_peaks(const Histogram& h, const PeakPolicy& policy = {});

struct DecodeResult {
    std::string text;
    PeakSearch peaks;
    double origin_ns = 0.0;  // recovered frame origin (code-signal framing)
    BitSequence bits;
};

// detect_peaks -> realign_cyclic (code-signal) -> edges_to_bits -> bits_to_text. Throws
// DecodeError naming the failing stage.
DecodeResult decode_histogram(const Histogram& h, const TimingConfig& cfg, const TacConfig& tac,
                              const PeakPolicy& policy = {});

} // namespace gammaproto
