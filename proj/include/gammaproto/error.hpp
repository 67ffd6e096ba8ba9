#pragma once

#include <stdexcept>
#include <string>

namespace gammaproto {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Raised when an integral cannot be certified to the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double residual)
        : Error(what + " (achieved residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class CodecError : public Error {
public:
    enum class Kind {
        length_mismatch,
        unpaired_edge,
        off_grid_edge,
        edge_out_of_range,
        bad_polarity,
        framing_overflow,
        frame_marker_missing,
        ambiguous_frame,
        bad_length,
    };

    CodecError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// Failure of the histogram decoding pipeline. `stage` names the step that failed.
class DecodeError : public Error {
public:
    DecodeError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace gammaproto
