#pragma once

// Serial reference implementations: naive, loop-literal versions of the
// OpenMP kernels, kept as independent oracles for the tests and as the
// baseline side of the benchmark. Nothing in src/ may call these.

#include <array>
#include <vector>

#include "vitals/model.hpp"
#include "vitals/nn.hpp"
#include "vitals/signal.hpp"

namespace vitals::ref {

// Per-pixel accumulation oracle for mean_rgb.
std::array<double, 3> mean_rgb(const Frame& frame);

// Triple-loop convolution, one output element at a time.
nn::Tensor1D conv1d_forward(const nn::Tensor1D& x, const nn::Conv1d& layer);

// Textbook DCT-II / DCT-III with cosines evaluated inline.
std::vector<double> dct2_forward(const std::vector<double>& x);
std::vector<double> dct2_inverse(const std::vector<double>& coeffs);

// Straight-line re-evaluation of the full inference path (standardize, DCT
// crop, layer stack), written against the model structs only.
double predict(const Model& model, const Window& window);

}  // namespace vitals::ref
