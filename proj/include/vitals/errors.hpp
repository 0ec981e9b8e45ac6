#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vitals {

// Bad argument values (empty frame, degenerate length, out-of-range band, ...).
struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer dimension mismatch.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary model file violations; carries the byte offset of the first bad byte.
struct FormatError : std::runtime_error {
    std::size_t offset;
    FormatError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (byte offset " + std::to_string(off) + ")"), offset(off) {}
};

// Text file violations; names the file and 1-based line.
struct ParseError : std::runtime_error {
    ParseError(const std::string& file, std::size_t line, const std::string& msg)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg) {}
};

// Dataset-level problems (missing label file, no subjects found, ...).
struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Run-config file problems (missing key, unknown key, bad value).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training-loop failures (divergence, empty split).
struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace vitals
