#include "gammaproto/sync.hpp"

#include <algorithm>
#include <cmath>

#include "gammaproto/error.hpp"
#include "gammaproto/statistics.hpp"

namespace gammaproto {

void TacConfig::validate() const {
    if (!(start_period_ns > 0.0)) throw ConfigError("tac.start_period_ns", "must be positive");
    if (channel_count < 1) throw ConfigError("tac.channel_count", "must be positive");
    if (!std::isfinite(frequency_offset_hz) || !(1e9 / start_period_ns + frequency_offset_hz > 0.0))
        throw ConfigError("tac.frequency_offset_hz", "start rate must stay positive");
    if (!(start_phase_ns >= 0.0)) throw ConfigError("tac.start_phase_ns", "must be >= 0");
}

double TacConfig::actual_start_period_ns() const { return 1e9 / (1e9 / start_period_ns + frequency_offset_hz); }

Histogram& Histogram::operator+=(const Histogram& other) {
    if (other.counts.size() != counts.size() || other.channel_width_ns != channel_width_ns)
        throw DomainError("Histogram: channel grids differ");
    counts += other.counts;
    total_starts += other.total_starts;
    total_counts += other.total_counts;
    return *this;
}

Histogram empty_histogram(const TacConfig& tac) {
    tac.validate();
    Histogram h;
    h.counts = CountVector::Zero(tac.channel_count);
    h.channel_width_ns = tac.channel_width_ns();
    return h;
}

Histogram accumulate(const DetectionRecords& records, const TacConfig& tac, double acquisition_ns) {
    Histogram h = empty_histogram(tac);
    const double spacing = tac.actual_start_period_ns();
    const double span = tac.start_period_ns;
    const double width = h.channel_width_ns;
    const int n = tac.channel_count;
    for (const auto& r : records) {
        const double since = r.t_abs_ns - tac.start_phase_ns;
        if (since < 0.0) continue;
        double d = since - std::floor(since / spacing) * spacing;
        if (d >= span) d -= std::floor(d / span) * span;
        auto c = static_cast<int>(d / width);
        if (c >= n) c = n - 1;
        ++h.counts(c);
        ++h.total_counts;
    }
    const double end = acquisition_ns > 0.0 ? acquisition_ns : (records.empty() ? 0.0 : records.back().t_abs_ns);
    if (end >= tac.start_phase_ns)
        h.total_starts = static_cast<std::int64_t>(std::floor((end - tac.start_phase_ns) / spacing)) + 1;
    return h;
}

double FlatnessReport::p_value() const { return std::exp(log_p); }

FlatnessReport flatness_metric(const Histogram& h) {
    if (h.total_counts <= 0) throw DomainError("flatness_metric: empty histogram");
    FlatnessReport rep;
    const double mean = static_cast<double>(h.total_counts) / h.channel_count();
    for (int c = 0; c < h.channel_count(); ++c) {
        const double dev = static_cast<double>(h.counts(c)) - mean;
        rep.max_deviation = std::max(rep.max_deviation, std::abs(dev) / std::sqrt(mean));
        rep.chi2 += dev * dev / mean;
    }
    rep.dof = h.channel_count() - 1;
    rep.log_p = rep.dof > 0 ? chi2_log_sf(rep.chi2, rep.dof) : 0.0;
    return rep;
}

std::vector<double> PeakSearch::times() const {
    std::vector<double> out;
    for (const auto& p : peaks) out.push_back(p.time_ns);
    return out;
}

PeakSearch detect_peaks(const Histogram& h, const PeakPolicy& policy) {
    const int n = h.channel_count();
    if (n == 0 || static_cast<double>(h.total_counts) / n < policy.min_mean_counts)
        throw DecodeError("detect_peaks", "insufficient statistics");
    PeakSearch out;
    std::vector<std::int64_t> sorted(h.counts.data(), h.counts.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    double median = static_cast<double>(sorted[n / 2]);
    if (n % 2 == 0) {
        const auto lower = *std::max_element(sorted.begin(), sorted.begin() + n / 2);
        median = 0.5 * (median + static_cast<double>(lower));
    }
    out.baseline = median;
    out.threshold = median + policy.k_sigma * std::max(std::sqrt(median), 1.0);

    std::vector<bool> above(n);
    for (int c = 0; c < n; ++c) above[c] = static_cast<double>(h.counts(c)) > out.threshold;
    const auto anchor = std::find(above.begin(), above.end(), false);
    if (anchor == above.end()) return out;  // everything above threshold: no structure to report
    const int start = static_cast<int>(anchor - above.begin());
    const double span = n * h.channel_width_ns;
    for (int k = 1; k <= n; ++k) {
        const int c = (start + k) % n;
        if (!above[c] || above[(c + n - 1) % n]) continue;
        Peak p{0.0, c, 0, 0};
        double weight = 0.0, moment = 0.0;
        for (int j = 0; above[(c + j) % n]; ++j) {
            const auto count = h.counts((c + j) % n);
            weight += static_cast<double>(count);
            moment += static_cast<double>(count) * (c + j + 0.5) * h.channel_width_ns;
            p.height = std::max(p.height, count);
            ++p.width;
        }
        p.time_ns = std::fmod(moment / weight, span);
        out.peaks.push_back(p);
    }
    std::sort(out.peaks.begin(), out.peaks.end(), [](const Peak& a, const Peak& b) { return a.time_ns < b.time_ns; });
    return out;
}

DecodeResult decode_histogram(const Histogram& h, const TimingConfig& cfg, const TacConfig& tac,
                              const PeakPolicy& policy) {
    tac.validate();
    DecodeResult res;
    res.peaks = detect_peaks(h, policy);
    if (res.peaks.peaks.empty()) throw DecodeError("detect_peaks", "insufficient peaks");
    std::vector<double> edges = res.peaks.times();
    const char* stage = "edges_to_bits";
    try {
        switch (cfg.framing) {
        case Framing::code_signal: {
            stage = "realign_cyclic";
            const RealignedFrame frame = realign_cyclic(edges, cfg);
            res.origin_ns = frame.origin_ns;
            stage = "edges_to_bits";
            res.bits = edges_to_bits(frame.payload_edges_ns, cfg, frame.bit_count);
            stage = "bits_to_text";
            res.text = bits_to_text(res.bits);
            break;
        }
        case Framing::stx_etx:
            res.bits = edges_to_bits(edges, cfg, cfg.keyed_bit_count());
            stage = "bits_to_text";
            res.text = bits_to_text(res.bits, Framing::stx_etx);
            break;
        case Framing::none:
            res.bits = edges_to_bits(edges, cfg, cfg.bit_count);
            stage = "bits_to_text";
            res.text = bits_to_text(res.bits);
            break;
        }
    } catch (const CodecError& e) {
        throw DecodeError(stage, e.what());
    }
    return res;
}

} // namespace gammaproto
