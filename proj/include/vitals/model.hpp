#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vitals/nn.hpp"
#include "vitals/signal.hpp"

namespace vitals {

enum class ArchitectureId : std::uint32_t { Base = 0, Fcn = 1, ResidualFcn = 2, Dct = 3 };
enum class TaskId : std::uint32_t { Hr = 0, Spo2 = 1 };

const char* to_string(ArchitectureId a);
const char* to_string(TaskId t);
ArchitectureId parse_architecture(const std::string& s);  // throws InvalidInput
TaskId parse_task(const std::string& s);

// Input channels: HR reads the red channel only, SpO2 all three.
int task_channels(TaskId t);

// A trainable network plus its in-model preprocessing: per-channel
// standardization always, DCT + band crop for the dct architecture.
struct Model {
    ArchitectureId arch = ArchitectureId::Fcn;
    TaskId task = TaskId::Hr;
    int input_len = 0;                  // raw window length fed to predict
    std::optional<BandMask> band;       // present iff arch == Dct
    std::vector<nn::Layer> layers;

    // Shape the layer stack consumes (post-preprocessing).
    nn::Shape stack_input_shape() const;

    // Walks the declared shapes through every layer; throws ShapeError unless
    // the chain ends in exactly one scalar.
    void validate_shapes() const;
};

// Sample rate the windowed PPG convention assumes throughout.
inline constexpr double kWindowSampleRateHz = 30.0;
// Heart-rate band kept by the dct architecture, 42-240 bpm, DC dropped.
inline constexpr double kDctBandLowHz = 0.7;
inline constexpr double kDctBandHighHz = 4.0;

// Builds one of the four architectures with He-uniform weights (bound
// sqrt(6/fan_in)) drawn from a SplitMix64 stream seeded with init_seed;
// biases zero, batch-norm gamma 1 / beta 0. Bit-identical for equal inputs.
Model build_model(ArchitectureId arch, TaskId task, int input_len, std::uint64_t init_seed);

// Standardization (+ DCT crop for dct models) applied to a raw window,
// producing the tensor the layer stack consumes.
nn::Tensor1D preprocess(const Model& model, const Window& window);

// Full inference path: preprocess then the layer stack in inference mode.
// Throws ShapeError on channel/length mismatch, InvalidInput on non-finite
// input.
double predict(const Model& model, const Window& window);

// Trainable parameter count (weights, biases, gamma/beta; running stats
// excluded). Equals the length of the serialized weight vector.
std::size_t param_count(const Model& model);

// --- "MTVL" binary model format (little-endian, version 1) ------------------
//
//   "MTVL" | u32 version | u32 arch | u32 task | u32 input_len
//   u8 has_band [band: f64 low_hz, f64 high_hz, u8 keep_dc, u32 k_lo, u32 k_hi]
//   u32 layer_count, per layer: u32 kind + shape fields (see model_io.cpp)
//   param_count x f64   (exact param_vector order)
//   state_count x f64   (batch-norm running stats)
//
// Round-trips bit-exactly. Throws FormatError (with byte offset) on bad
// magic, version, shape chain, or truncation.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace vitals
