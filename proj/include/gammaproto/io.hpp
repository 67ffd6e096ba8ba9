#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "gammaproto/codec.hpp"
#include "gammaproto/montecarlo.hpp"
#include "gammaproto/sync.hpp"

namespace gammaproto {

// Provenance written into every output file.
struct OutputStamp {
    std::string digest;
    std::uint64_t seed = 0;

    std::string comment() const;  // "# digest=<hex> seed=<n>"
};

// CSV: optional stamp comment, header `t_abs_ns`, one integer nanosecond per line.
void write_records_csv(const std::filesystem::path& path, const DetectionRecords& records, const OutputStamp& stamp);
DetectionRecords read_records_csv(const std::filesystem::path& path);

// Flat little-endian int64 nanoseconds, no header.
void write_records_binary(const std::filesystem::path& path, const DetectionRecords& records);
DetectionRecords read_records_binary(const std::filesystem::path& path);

// CSV: stamp comment, header `channel,time_ns,counts`; time_ns is the channel's lower edge.
void write_histogram_csv(const std::filesystem::path& path, const Histogram& h, const OutputStamp& stamp);
Histogram read_histogram_csv(const std::filesystem::path& path);

nlohmann::json histogram_sidecar(const Histogram& h, const TacConfig& tac, const OutputStamp& stamp);

void write_pulse_train_csv(const std::filesystem::path& path, const PulseTrain& train, const OutputStamp& stamp);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

} // namespace gammaproto
