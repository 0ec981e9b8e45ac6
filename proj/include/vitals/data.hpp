#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vitals/model.hpp"
#include "vitals/signal.hpp"

namespace vitals {

// Physiological plausibility ranges; labels outside them are treated as
// missing, never clamped.
inline constexpr double kHrMinBpm = 30.0, kHrMaxBpm = 240.0;
inline constexpr double kSpo2MinPct = 70.0, kSpo2MaxPct = 100.0;

struct LabelSample {
    std::optional<double> hr_bpm;
    std::optional<double> spo2_pct;
};

struct SubjectRecord {
    std::string id;
    Signal ppg;                      // 30 Hz once loaded
    std::vector<LabelSample> labels; // 1 Hz
};

struct LabeledExample {
    Window window;      // channels match the task
    double target = 0;  // bpm or percent
    std::string subject_id;
};

struct SplitManifest {
    std::uint64_t seed = 0;
    std::array<double, 3> fractions{};  // train, val, test
    std::vector<std::string> train, val, test;
};

// MTHS-style directory: per subject "<id>_signal.csv" (header idx,r,g,b at
// 30 Hz) and "<id>_labels.csv" (header sec,hr,spo2, blank cells = missing).
// Subjects discovered from *_signal.csv, sorted ascending by id.
std::vector<SubjectRecord> load_mths(const std::string& dir);

// BIDMC-style directory: per subject "<id>_Signals.csv" with Time and PLETH
// columns at the source rate, and "<id>_Numerics.csv" with Time, HR and SpO2
// columns at 1 Hz. PPG is resampled to 30 Hz; other columns are ignored.
std::vector<SubjectRecord> load_bidmc(const std::string& dir);

// Deterministic subject-level split. Ids are sorted ascending, Fisher-Yates
// shuffled with SplitMix64(seed); test takes the first round(f_test*P) ids,
// val the next round(f_val*P), train the rest.
SplitManifest split_subjects(std::vector<std::string> ids, const std::array<double, 3>& fractions,
                             std::uint64_t seed);

// Plain-text manifest: "seed=<int> fractions=<f,f,f>" then "<id>,<split>"
// lines, subjects sorted ascending.
void save_manifest(const SplitManifest& m, const std::string& path);
SplitManifest load_manifest(const std::string& path);

struct ExampleSet {
    std::vector<LabeledExample> examples;
    std::size_t dropped = 0;  // windows rejected for missing/out-of-range labels
};

// Slides a 10 s window (default hop 1 s) over each record, pairing it with
// the mean of the in-window 1 Hz labels for the task. Windows touching any
// missing label are dropped (counted, not an error). HR keeps the red
// channel; SpO2 keeps all three, replicating single-channel PPG.
ExampleSet make_examples(const std::vector<SubjectRecord>& records, TaskId task,
                         double window_s = 10.0, double hop_s = 1.0);

// Synthetic oracle data: sin(2*pi*f*t) + noise_amp * Gaussian noise at 30 Hz,
// N=300, f = hr/60 with hr uniform in hr_range; target = hr. One window per
// example, unique subject ids, fully determined by the seed.
std::vector<LabeledExample> synth_dataset(std::size_t n, std::uint64_t seed,
                                          std::array<double, 2> hr_range = {48.0, 180.0},
                                          double noise_amp = 0.1);

}  // namespace vitals
