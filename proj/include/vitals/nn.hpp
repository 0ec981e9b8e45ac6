#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace vitals::nn {

// Channel-major activation block: values[c * length + t].
struct Tensor1D {
    int channels = 0;
    int length = 0;
    std::vector<double> values;

    Tensor1D() = default;
    Tensor1D(int ch, int len)
        : channels(ch), length(len), values(static_cast<std::size_t>(ch) * len, 0.0) {}

    double& at(int c, int t) { return values[static_cast<std::size_t>(c) * length + t]; }
    double at(int c, int t) const { return values[static_cast<std::size_t>(c) * length + t]; }
    std::size_t size() const { return values.size(); }
};

struct Shape {
    int channels = 0;
    int length = 0;
    bool operator==(const Shape&) const = default;
};

enum class Padding { Same, Valid };

struct Conv1d {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 1;
    int stride = 1;
    Padding padding = Padding::Same;
    std::vector<double> w;  // [out][in][tap]
    std::vector<double> b;  // [out]

    double weight(int o, int i, int tap) const {
        return w[(static_cast<std::size_t>(o) * in_channels + i) * kernel + tap];
    }
};

struct Relu {};

struct MaxPool {
    int width = 2;
    int stride = 2;
};

struct BatchNorm {
    int channels = 0;
    double eps = 1e-5;
    double momentum = 0.9;  // running = momentum*running + (1-momentum)*batch
    std::vector<double> gamma, beta;
    std::vector<double> run_mean, run_var;
};

struct Dense {
    int in_features = 0;
    int out_features = 0;
    std::vector<double> w;  // [out][in], input is the flattened tensor
    std::vector<double> b;
};

struct Gap {};

// conv -> relu -> conv, identity skip added, relu after the add. Both convs
// must preserve shape (same padding, stride 1, channels unchanged).
struct ResidualBlock {
    Conv1d conv1, conv2;
};

using Layer = std::variant<Conv1d, Relu, MaxPool, BatchNorm, Dense, Gap, ResidualBlock>;

// Output shape of a layer, validating the input shape. Throws ShapeError.
Shape output_shape(const Layer& layer, Shape in);

// --- single-example kernels ----------------------------------------------

Tensor1D conv1d_forward(const Tensor1D& x, const Conv1d& layer);
Tensor1D relu_forward(const Tensor1D& x);
Tensor1D maxpool_forward(const Tensor1D& x, const MaxPool& layer, std::vector<int>* argmax);
Tensor1D batchnorm_forward_infer(const Tensor1D& x, const BatchNorm& layer);
Tensor1D dense_forward(const Tensor1D& x, const Dense& layer);
Tensor1D gap_forward(const Tensor1D& x);

// Inference-mode pass through one layer (batch-norm uses running stats).
Tensor1D forward_layer_infer(const Layer& layer, const Tensor1D& x);

// Inference-mode pass through a stack.
Tensor1D forward_infer(const std::vector<Layer>& layers, const Tensor1D& x);

// --- training-mode batched pass with tape ---------------------------------

// Everything backward needs, cached per layer during the forward pass.
struct LayerTape {
    std::vector<Tensor1D> x;                 // layer input, per example
    std::vector<std::vector<int>> argmax;    // maxpool winners
    std::vector<double> mean, var;           // batch-norm batch stats, per channel
    std::vector<Tensor1D> xhat;              // batch-norm normalized input
    std::vector<Tensor1D> a1, h1, pre;       // residual block internals
};

struct Tape {
    std::vector<LayerTape> layers;
};

// Per-layer parameter gradients, flattened in the layer's own parameter
// order (the same order param_vector uses).
using ModelGrads = std::vector<std::vector<double>>;

ModelGrads zero_grads(const std::vector<Layer>& layers);

// Batched training forward. Batch-norm layers normalize with batch statistics
// across the whole batch and, when update_running is set, fold them into the
// running stats. Other layers treat examples independently.
std::vector<Tensor1D> forward_train(std::vector<Layer>& layers, const std::vector<Tensor1D>& xs,
                                    Tape& tape, bool update_running);

// Reverse pass over a recorded tape. Adds parameter gradients into `grads`
// and returns the gradient with respect to the stack input.
std::vector<Tensor1D> backward(const std::vector<Layer>& layers, const Tape& tape,
                               std::vector<Tensor1D> upstream, ModelGrads& grads);

// --- parameter plumbing ----------------------------------------------------

// Trainable parameter count: weights, biases, batch-norm gamma/beta.
// Running statistics are state, not parameters.
std::size_t layer_param_count(const Layer& layer);
std::size_t param_count(const std::vector<Layer>& layers);

void append_params(const Layer& layer, std::vector<double>& out);
std::vector<double> param_vector(const std::vector<Layer>& layers);
void set_param_vector(std::vector<Layer>& layers, const std::vector<double>& params);

// Batch-norm running stats, in layer order (mean then var per layer).
std::vector<double> state_vector(const std::vector<Layer>& layers);
void set_state_vector(std::vector<Layer>& layers, const std::vector<double>& state);

}  // namespace vitals::nn
