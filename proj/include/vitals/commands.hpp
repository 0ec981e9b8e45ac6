#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "vitals/config.hpp"
#include "vitals/data.hpp"
#include "vitals/train.hpp"

namespace vitals::cmd {

// Reads PPM frames in lexicographic filename order and writes an idx,r,g,b
// signal CSV. An empty directory yields a header-only CSV plus a warning on
// `diag`.
void extract(const std::string& frames_dir, const std::string& out_csv, std::ostream& diag);

// Dataset pipeline shared by train/evaluate/report: load, split at subject
// level, window into labeled examples.
struct PreparedData {
    SplitManifest manifest;
    ExampleSplit split;
};
PreparedData prepare_data(const RunConfig& cfg, const std::string& dataset_dir_override = "");

// Full training run: writes the model file, history CSV and split manifest.
void train_run(const RunConfig& cfg);

struct EvalResult {
    std::string dataset;
    std::string task, arch, loss;
    std::string split;
    double mae = 0.0;
    std::size_t n_examples = 0;
};

// Re-derives the split from the manifest recorded by the training run
// (validating seed, fractions and membership), evaluates the model on the
// requested split and returns the report emitted as JSON.
EvalResult evaluate_run(const RunConfig& cfg, const std::string& model_path,
                        const std::string& split, const std::string& dataset_dir_override = "");
std::string eval_result_json(const EvalResult& r);

// Non-overlapping 10 s windows over a signal CSV (30 Hz convention); one JSON
// line {"t_start_s":..,"estimate":..} per window. A signal shorter than one
// window emits nothing but warns on `diag`.
void infer(const std::string& model_path, const std::string& signal_csv, std::ostream& out,
           std::ostream& diag);

// Runs the gradient-check suite, one line per item; returns false on any
// failure.
bool gradcheck(std::ostream& out);

// 4 architectures x 4 losses sharing one split/seed; cells are test MAE.
struct ReportTable {
    std::string dataset, task;
    std::uint64_t seed = 0;
    int epochs = 0;
    std::array<std::array<double, 4>, 4> mae{};  // [arch][loss], paper table order
};
ReportTable report(const RunConfig& cfg, int jobs, std::ostream& diag);
void write_report_csv(const ReportTable& t, const std::string& path);
ReportTable read_report_csv(const std::string& path);

}  // namespace vitals::cmd
