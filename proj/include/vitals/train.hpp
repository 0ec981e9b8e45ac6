#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vitals/data.hpp"
#include "vitals/model.hpp"

namespace vitals {

enum class LossKind : std::uint32_t { Mse = 0, Mae = 1, Huber = 2, LogCosh = 3 };

struct LossId {
    LossKind kind = LossKind::Mse;
    double huber_delta = 1.0;
};

const char* to_string(LossKind k);
LossKind parse_loss(const std::string& s);  // throws InvalidInput

// Loss value and d(loss)/d(pred) for one prediction. log-cosh is evaluated
// as |e| + log1p(exp(-2|e|)) - log 2, which stays finite for any error.
// Throws InvalidInput on non-finite pred/target.
std::pair<double, double> loss_and_grad(const LossId& loss, double pred, double target);

struct AdamState {
    std::vector<double> m, v;  // first/second moments, parameter-aligned
    std::int64_t t = 0;        // completed steps
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One bias-corrected Adam update, in place.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const AdamConfig& cfg);

struct TrainingConfig {
    std::string dataset = "synth";  // synth | mths | bidmc
    TaskId task = TaskId::Hr;
    ArchitectureId arch = ArchitectureId::Fcn;
    LossId loss;
    int epochs = 125;
    int batch_size = 32;
    AdamConfig adam;
    std::array<double, 3> fractions = {0.8, 0.04, 0.16};
    std::uint64_t seed = 1400;
    double window_s = 10.0;
    double hop_s = 1.0;
    int input_len = 300;
};

struct TrainHistory {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_mae;     // per epoch
    std::size_t best_epoch = 0;      // earliest epoch with the lowest val MAE
    double test_mae = 0.0;           // of the returned (best) model
};

struct ExampleSplit {
    std::vector<LabeledExample> train, val, test;
};

// Mean absolute error of predict() over the examples.
double evaluate(const Model& model, const std::vector<LabeledExample>& examples);

// Deterministic epoch loop: per-epoch SplitMix64 shuffle (seed derived from
// config seed and epoch index), mini-batch gradient averaging, Adam. Returns
// the weights of the epoch with the best validation MAE. Batch-norm runs in
// train mode while fitting and inference mode for every evaluation.
// Throws TrainError on divergence (non-finite loss) naming epoch and batch.
std::pair<Model, TrainHistory> train(const TrainingConfig& config, const ExampleSplit& split);

// History CSV: "epoch,train_loss,val_mae" rows then "test_mae=<float>".
void save_history(const TrainHistory& h, const std::string& path);
TrainHistory load_history(const std::string& path);

}  // namespace vitals
