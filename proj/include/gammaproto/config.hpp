#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "gammaproto/absorber.hpp"
#include "gammaproto/analysis.hpp"
#include "gammaproto/codec.hpp"
#include "gammaproto/montecarlo.hpp"
#include "gammaproto/quadrature.hpp"
#include "gammaproto/sync.hpp"
#include "gammaproto/units.hpp"

namespace gammaproto {

// Grids for the analytic curves, units of T1.
struct CurvesConfig {
    double t_max = 10.0;
    double step = 0.02;
    double flip_time = 1.0;   // single pi step for the echo and step-rate curves
    double pulse_rise = 1.0;  // one voltage pulse for the displacement comparison
    double pulse_fall = 3.0;
};

struct RecordsOutput {
    bool write = false;
    std::string format = "csv";  // csv | binary
};

struct ExperimentConfig {
    std::string message = "Nature";
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    int threads = 1;
    PhysicsUnits units;
    AbsorberParams absorber;
    TimingConfig timing;
    PhaseModel phase;
    StreamParams stream;
    TacConfig tac;
    QuadratureSpec quadrature;
    PeakPolicy peaks;
    CurvesConfig curves;
    RecordsOutput records;

    // Checks every component; bit_count must match the message.
    void validate() const;

    // Stamps seed into the stream parameters and sizes the timing to the message.
    void finalize();
};

// Parses a nested JSON document; absent keys keep their defaults and unknown keys are
// rejected. Errors carry the dotted path of the offending field.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path);

// Fully defaulted canonical form.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// FNV-1a 64 of the canonical form, excluding output location and worker count.
std::string config_digest(const ExperimentConfig& cfg);

std::string to_string(Framing f);
std::string to_string(SimulationMode m);

} // namespace gammaproto
