#include "vitals/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "vitals/errors.hpp"
#include "vitals/io_util.hpp"
#include "vitals/rng.hpp"

namespace fs = std::filesystem;

namespace vitals {

namespace {

std::optional<double> range_checked(std::optional<double> v, double lo, double hi) {
    if (!v || !std::isfinite(*v) || *v < lo || *v > hi) return std::nullopt;
    return v;
}

// Subject ids found by suffix, sorted so downstream order never depends on
// directory enumeration order.
std::vector<std::string> subjects_by_suffix(const std::string& dir, const std::string& suffix) {
    if (!fs::is_directory(dir)) throw DatasetError("dataset directory not found: " + dir);
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            ids.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) {
        throw DatasetError("no *" + suffix + " files in " + dir);
    }
    return ids;
}

std::vector<LabelSample> read_mths_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("missing label file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty label CSV");
    auto header = split_csv(line);
    if (header.size() != 3 || header[0] != "sec" || header[1] != "hr" || header[2] != "spo2") {
        throw ParseError(path, 1, "header must be sec,hr,spo2");
    }
    std::vector<LabelSample> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != 3) throw ParseError(path, lineno, "expected 3 columns");
        if (!parse_int(cells[0])) throw ParseError(path, lineno, "bad second index");
        LabelSample s;
        if (!trim(cells[1]).empty()) {
            auto v = parse_double(cells[1]);
            if (!v) throw ParseError(path, lineno, "bad hr value");
            s.hr_bpm = range_checked(v, kHrMinBpm, kHrMaxBpm);
        }
        if (!trim(cells[2]).empty()) {
            auto v = parse_double(cells[2]);
            if (!v) throw ParseError(path, lineno, "bad spo2 value");
            s.spo2_pct = range_checked(v, kSpo2MinPct, kSpo2MaxPct);
        }
        labels.push_back(s);
    }
    return labels;
}

}  // namespace

std::vector<SubjectRecord> load_mths(const std::string& dir) {
    std::vector<SubjectRecord> records;
    for (const std::string& id : subjects_by_suffix(dir, "_signal.csv")) {
        SubjectRecord rec;
        rec.id = id;
        rec.ppg = read_signal_csv(dir + "/" + id + "_signal.csv", kWindowSampleRateHz);
        rec.ppg.validate();
        rec.labels = read_mths_labels(dir + "/" + id + "_labels.csv");
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

// Case-insensitive header lookup, tolerating decorations like "Time [s]".
std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       const std::string& name) {
    auto norm = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (auto cut = s.find(' '); cut != std::string::npos) s.resize(cut);
        if (auto cut = s.find('['); cut != std::string::npos) s.resize(cut);
        return s;
    };
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (norm(header[i]) == name) return i;
    }
    return std::nullopt;
}

Signal read_bidmc_waveform(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("missing signal file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty waveform CSV");
    auto header = split_csv(line);
    auto time_col = find_column(header, "time");
    auto pleth_col = find_column(header, "pleth");
    if (!time_col || !pleth_col) throw ParseError(path, 1, "need Time and PLETH columns");

    std::vector<double> times, pleth;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != header.size()) throw ParseError(path, lineno, "column count mismatch");
        auto t = parse_double(cells[*time_col]);
        auto v = parse_double(cells[*pleth_col]);
        if (!t || !v || !std::isfinite(*v)) throw ParseError(path, lineno, "bad waveform row");
        times.push_back(*t);
        pleth.push_back(*v);
    }
    if (times.size() < 2) throw ParseError(path, 2, "waveform needs at least two samples");

    // Source rate from the time column span.
    double span = times.back() - times.front();
    if (span <= 0.0) throw ParseError(path, 2, "time column must increase");
    double fs = static_cast<double>(times.size() - 1) / span;

    Signal s;
    s.sample_rate_hz = fs;
    s.samples.push_back(std::move(pleth));
    return s;
}

std::vector<LabelSample> read_bidmc_numerics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("missing numerics file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty numerics CSV");
    auto header = split_csv(line);
    auto hr_col = find_column(header, "hr");
    auto spo2_col = find_column(header, "spo2");
    if (!hr_col || !spo2_col) throw ParseError(path, 1, "need HR and SpO2 columns");

    std::vector<LabelSample> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != header.size()) throw ParseError(path, lineno, "column count mismatch");
        LabelSample s;
        if (!trim(cells[*hr_col]).empty()) {
            s.hr_bpm = range_checked(parse_double(cells[*hr_col]), kHrMinBpm, kHrMaxBpm);
        }
        if (!trim(cells[*spo2_col]).empty()) {
            s.spo2_pct = range_checked(parse_double(cells[*spo2_col]), kSpo2MinPct, kSpo2MaxPct);
        }
        labels.push_back(s);
    }
    return labels;
}

}  // namespace

std::vector<SubjectRecord> load_bidmc(const std::string& dir) {
    std::vector<SubjectRecord> records;
    for (const std::string& id : subjects_by_suffix(dir, "_Signals.csv")) {
        SubjectRecord rec;
        rec.id = id;
        Signal raw = read_bidmc_waveform(dir + "/" + id + "_Signals.csv");
        rec.ppg = resample_linear(raw, kWindowSampleRateHz);
        rec.labels = read_bidmc_numerics(dir + "/" + id + "_Numerics.csv");
        records.push_back(std::move(rec));
    }
    return records;
}

SplitManifest split_subjects(std::vector<std::string> ids, const std::array<double, 3>& fractions,
                             std::uint64_t seed) {
    if (ids.empty()) throw InvalidInput("cannot split an empty subject list");
    double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("split fractions must sum to 1");
    for (double f : fractions) {
        if (f < 0.0) throw InvalidInput("split fractions must be non-negative");
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    SplitMix64 rng(seed);
    fisher_yates(ids, rng);

    auto p = static_cast<double>(ids.size());
    auto n_test = static_cast<std::size_t>(std::llround(fractions[2] * p));
    auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * p));
    if (n_test + n_val > ids.size()) throw InvalidInput("split fractions leave no training set");

    SplitManifest m;
    m.seed = seed;
    m.fractions = fractions;
    m.test.assign(ids.begin(), ids.begin() + n_test);
    m.val.assign(ids.begin() + n_test, ids.begin() + n_test + n_val);
    m.train.assign(ids.begin() + n_test + n_val, ids.end());
    return m;
}

void save_manifest(const SplitManifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot open manifest for writing: " + path);
    out << "seed=" << m.seed << " fractions=" << fmt_double(m.fractions[0]) << ","
        << fmt_double(m.fractions[1]) << "," << fmt_double(m.fractions[2]) << "\n";
    std::vector<std::pair<std::string, const char*>> rows;
    for (const auto& id : m.train) rows.emplace_back(id, "train");
    for (const auto& id : m.val) rows.emplace_back(id, "val");
    for (const auto& id : m.test) rows.emplace_back(id, "test");
    std::sort(rows.begin(), rows.end());
    for (const auto& [id, split] : rows) out << id << ',' << split << '\n';
}

SplitManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty manifest");

    SplitManifest m;
    auto header = std::string(trim(line));
    if (header.rfind("seed=", 0) != 0) throw ParseError(path, 1, "expected seed=<int>");
    auto sp = header.find(' ');
    if (sp == std::string::npos || header.compare(sp + 1, 10, "fractions=") != 0) {
        throw ParseError(path, 1, "expected fractions=<f,f,f>");
    }
    auto seed = parse_int(header.substr(5, sp - 5));
    if (!seed) throw ParseError(path, 1, "bad seed");
    m.seed = static_cast<std::uint64_t>(*seed);
    auto fracs = split_csv(header.substr(sp + 11));
    if (fracs.size() != 3) throw ParseError(path, 1, "need exactly 3 fractions");
    for (std::size_t i = 0; i < 3; ++i) {
        auto f = parse_double(fracs[i]);
        if (!f) throw ParseError(path, 1, "bad fraction");
        m.fractions[i] = *f;
    }

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != 2) throw ParseError(path, lineno, "expected <id>,<split>");
        if (cells[1] == "train") {
            m.train.push_back(cells[0]);
        } else if (cells[1] == "val") {
            m.val.push_back(cells[0]);
        } else if (cells[1] == "test") {
            m.test.push_back(cells[0]);
        } else {
            throw ParseError(path, lineno, "split must be train, val or test");
        }
    }
    return m;
}

ExampleSet make_examples(const std::vector<SubjectRecord>& records, TaskId task, double window_s,
                         double hop_s) {
    ExampleSet out;
    int want_channels = task_channels(task);
    for (const SubjectRecord& rec : records) {
        std::vector<Window> windows = make_windows(rec.ppg, window_s, hop_s);
        auto labels_per_window = static_cast<std::size_t>(std::llround(window_s));
        for (Window& w : windows) {
            auto first = static_cast<std::size_t>(std::llround(w.t_start_s));
            double sum = 0.0;
            bool ok = first + labels_per_window <= rec.labels.size();
            for (std::size_t j = 0; ok && j < labels_per_window; ++j) {
                const LabelSample& ls = rec.labels[first + j];
                const auto& v = task == TaskId::Hr ? ls.hr_bpm : ls.spo2_pct;
                if (!v) {
                    ok = false;
                } else {
                    sum += *v;
                }
            }
            if (!ok) {
                ++out.dropped;
                continue;
            }

            LabeledExample ex;
            ex.target = sum / static_cast<double>(labels_per_window);
            ex.subject_id = rec.id;
            ex.window.t_start_s = w.t_start_s;
            ex.window.length = w.length;
            ex.window.channels = want_channels;
            ex.window.values.resize(static_cast<std::size_t>(want_channels) * w.length);
            for (int c = 0; c < want_channels; ++c) {
                // HR: red only; SpO2: all three, replicating 1-channel PPG.
                int src = w.channels == 1 ? 0 : std::min(c, w.channels - 1);
                std::copy(w.values.begin() + static_cast<std::size_t>(src) * w.length,
                          w.values.begin() + static_cast<std::size_t>(src + 1) * w.length,
                          ex.window.values.begin() + static_cast<std::size_t>(c) * w.length);
            }
            out.examples.push_back(std::move(ex));
        }
    }
    return out;
}

std::vector<LabeledExample> synth_dataset(std::size_t n, std::uint64_t seed,
                                          std::array<double, 2> hr_range, double noise_amp) {
    if (hr_range[0] > hr_range[1] || hr_range[0] < kHrMinBpm || hr_range[1] > kHrMaxBpm) {
        throw InvalidInput("synthetic hr range must sit inside the physiological range");
    }
    constexpr int kLen = 300;
    constexpr double kFs = kWindowSampleRateHz;
    SplitMix64 rng(seed);
    std::vector<LabeledExample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double hr = hr_range[0] + rng.next_unit() * (hr_range[1] - hr_range[0]);
        double f = hr / 60.0;
        LabeledExample ex;
        ex.target = hr;
        char id[32];
        std::snprintf(id, sizeof(id), "synth-%06zu", i);
        ex.subject_id = id;
        ex.window.channels = 1;
        ex.window.length = kLen;
        ex.window.values.resize(kLen);
        for (int t = 0; t < kLen; ++t) {
            double ts = static_cast<double>(t) / kFs;
            ex.window.values[static_cast<std::size_t>(t)] =
                std::sin(2.0 * kPi * f * ts) + noise_amp * rng.next_gaussian();
        }
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace vitals
