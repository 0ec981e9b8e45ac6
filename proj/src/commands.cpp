#include "vitals/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <thread>

#include <json.hpp>

#include "vitals/errors.hpp"
#include "vitals/gradcheck.hpp"
#include "vitals/io_util.hpp"

namespace fs = std::filesystem;

namespace vitals::cmd {

void extract(const std::string& frames_dir, const std::string& out_csv, std::ostream& diag) {
    if (!fs::is_directory(frames_dir)) throw DatasetError("frames directory not found: " + frames_dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
            names.push_back(entry.path().filename().string());
        }
    }
    std::sort(names.begin(), names.end());

    std::ofstream out(out_csv);
    if (!out) throw DatasetError("cannot open output CSV: " + out_csv);
    out << "idx,r,g,b\n";
    if (names.empty()) {
        diag << "warning: no .ppm frames in " << frames_dir << ", wrote header only\n";
        return;
    }
    std::size_t idx = 0;
    for (const std::string& name : names) {
        Frame f = read_ppm(frames_dir + "/" + name);
        auto [r, g, b] = mean_rgb(f);
        out << idx++ << ',' << fmt_double(r) << ',' << fmt_double(g) << ',' << fmt_double(b)
            << '\n';
    }
}

namespace {

std::vector<SubjectRecord> load_records(const RunConfig& cfg, const std::string& dir) {
    if (cfg.train.dataset == "mths") return load_mths(dir);
    if (cfg.train.dataset == "bidmc") return load_bidmc(dir);
    throw DatasetError("dataset '" + cfg.train.dataset + "' has no on-disk loader");
}

ExampleSplit partition_by_manifest(const std::vector<LabeledExample>& examples,
                                   const SplitManifest& manifest) {
    std::map<std::string, int> where;  // 0 train, 1 val, 2 test
    for (const auto& id : manifest.train) where[id] = 0;
    for (const auto& id : manifest.val) where[id] = 1;
    for (const auto& id : manifest.test) where[id] = 2;
    ExampleSplit split;
    for (const auto& ex : examples) {
        auto it = where.find(ex.subject_id);
        if (it == where.end()) throw DatasetError("subject missing from manifest: " + ex.subject_id);
        (it->second == 0 ? split.train : it->second == 1 ? split.val : split.test).push_back(ex);
    }
    return split;
}

}  // namespace

PreparedData prepare_data(const RunConfig& cfg, const std::string& dataset_dir_override) {
    std::string dir = dataset_dir_override.empty() ? cfg.dataset_dir : dataset_dir_override;
    PreparedData out;
    std::vector<LabeledExample> examples;
    std::vector<std::string> ids;

    if (cfg.train.dataset == "synth") {
        examples = synth_dataset(cfg.synth_n, cfg.train.seed, {48.0, 180.0}, cfg.synth_noise);
        for (const auto& ex : examples) ids.push_back(ex.subject_id);
    } else {
        std::vector<SubjectRecord> records = load_records(cfg, dir);
        for (const auto& rec : records) ids.push_back(rec.id);
        examples = make_examples(records, cfg.train.task, cfg.train.window_s, cfg.train.hop_s)
                       .examples;
    }
    out.manifest = split_subjects(ids, cfg.train.fractions, cfg.train.seed);
    out.split = partition_by_manifest(examples, out.manifest);
    return out;
}

namespace {

void ensure_parent_dir(const std::string& path) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

}  // namespace

void train_run(const RunConfig& cfg) {
    PreparedData data = prepare_data(cfg);
    auto [model, history] = train(cfg.train, data.split);
    ensure_parent_dir(cfg.model_out);
    ensure_parent_dir(cfg.history_out);
    ensure_parent_dir(cfg.manifest_out);
    save_model(model, cfg.model_out);
    save_history(history, cfg.history_out);
    save_manifest(data.manifest, cfg.manifest_out);
}

namespace {

bool same_fractions(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(a[i] - b[i]) > 1e-12) return false;
    }
    return true;
}

}  // namespace

EvalResult evaluate_run(const RunConfig& cfg, const std::string& model_path,
                        const std::string& split_name, const std::string& dataset_dir_override) {
    Model model = load_model(model_path);
    if (model.task != cfg.train.task || model.arch != cfg.train.arch) {
        throw DatasetError("model architecture/task does not match the config");
    }

    SplitManifest stored = load_manifest(cfg.manifest_out);
    if (stored.seed != cfg.train.seed || !same_fractions(stored.fractions, cfg.train.fractions)) {
        throw DatasetError("manifest seed/fractions do not match the config");
    }
    PreparedData data = prepare_data(cfg, dataset_dir_override);
    // The re-derived split must agree with what the training run recorded.
    if (data.manifest.train != stored.train || data.manifest.val != stored.val ||
        data.manifest.test != stored.test) {
        throw DatasetError("manifest does not match the split re-derived from the dataset");
    }

    const std::vector<LabeledExample>* chosen = nullptr;
    if (split_name == "train") {
        chosen = &data.split.train;
    } else if (split_name == "val") {
        chosen = &data.split.val;
    } else if (split_name == "test") {
        chosen = &data.split.test;
    } else {
        throw InvalidInput("split must be train, val or test");
    }

    EvalResult r;
    r.dataset = cfg.train.dataset;
    r.task = to_string(cfg.train.task);
    r.arch = to_string(model.arch);
    r.loss = to_string(cfg.train.loss.kind);
    r.split = split_name;
    r.n_examples = chosen->size();
    r.mae = evaluate(model, *chosen);
    return r;
}

std::string eval_result_json(const EvalResult& r) {
    nlohmann::json j{{"dataset", r.dataset}, {"task", r.task},   {"arch", r.arch},
                     {"loss", r.loss},       {"split", r.split}, {"mae", r.mae},
                     {"n_examples", r.n_examples}};
    return j.dump();
}

void infer(const std::string& model_path, const std::string& signal_csv, std::ostream& out,
           std::ostream& diag) {
    Model model = load_model(model_path);
    Signal s = read_signal_csv(signal_csv, kWindowSampleRateHz);
    s.validate();

    double window_s = static_cast<double>(model.input_len) / kWindowSampleRateHz;
    std::vector<Window> windows = make_windows(s, window_s, window_s);  // deployment: no overlap
    if (windows.empty()) {
        diag << "warning: signal shorter than one " << window_s << " s window, nothing to infer\n";
        return;
    }
    int want = task_channels(model.task);
    for (const Window& w : windows) {
        Window shaped;
        shaped.t_start_s = w.t_start_s;
        shaped.channels = want;
        shaped.length = w.length;
        shaped.values.resize(static_cast<std::size_t>(want) * w.length);
        for (int c = 0; c < want; ++c) {
            int src = w.channels == 1 ? 0 : std::min(c, w.channels - 1);
            std::copy(w.values.begin() + static_cast<std::size_t>(src) * w.length,
                      w.values.begin() + static_cast<std::size_t>(src + 1) * w.length,
                      shaped.values.begin() + static_cast<std::size_t>(c) * w.length);
        }
        nlohmann::json j{{"t_start_s", w.t_start_s}, {"estimate", predict(model, shaped)}};
        out << j.dump() << '\n';
    }
}

bool gradcheck(std::ostream& out) {
    gradcheck::Report rep = gradcheck::run_suite();
    for (const auto& item : rep.items) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e", item.max_rel_err);
        out << (item.pass ? "PASS" : "FAIL") << "  " << item.name << "  max_rel_err=" << buf
            << "  tol=" << fmt_double(item.tolerance) << '\n';
    }
    out << (rep.all_pass() ? "gradcheck: all items passed\n" : "gradcheck: FAILURES present\n");
    return rep.all_pass();
}

namespace {

constexpr std::array<ArchitectureId, 4> kReportArchs = {
    ArchitectureId::Base, ArchitectureId::Fcn, ArchitectureId::ResidualFcn, ArchitectureId::Dct};
constexpr std::array<LossKind, 4> kReportLosses = {LossKind::Mse, LossKind::Mae, LossKind::Huber,
                                                   LossKind::LogCosh};

}  // namespace

ReportTable report(const RunConfig& cfg, int jobs, std::ostream& diag) {
    PreparedData data = prepare_data(cfg);

    ReportTable table;
    table.dataset = cfg.train.dataset;
    table.task = to_string(cfg.train.task);
    table.seed = cfg.train.seed;
    table.epochs = cfg.train.epochs;
    for (auto& row : table.mae) row.fill(std::numeric_limits<double>::quiet_NaN());

    struct CellDiag {
        bool failed = false;
        std::string message;
    };
    std::array<CellDiag, 16> cell_diag;

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int cell = next.fetch_add(1); cell < 16; cell = next.fetch_add(1)) {
            int ai = cell / 4, li = cell % 4;
            TrainingConfig tc = cfg.train;
            tc.arch = kReportArchs[static_cast<std::size_t>(ai)];
            tc.loss.kind = kReportLosses[static_cast<std::size_t>(li)];
            try {
                auto [model, history] = train(tc, data.split);
                table.mae[static_cast<std::size_t>(ai)][static_cast<std::size_t>(li)] =
                    history.test_mae;
            } catch (const std::exception& e) {
                cell_diag[static_cast<std::size_t>(cell)] = {true, e.what()};
            }
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (int cell = 0; cell < 16; ++cell) {
        const auto& cd = cell_diag[static_cast<std::size_t>(cell)];
        if (cd.failed) {
            diag << "warning: cell " << to_string(kReportArchs[static_cast<std::size_t>(cell / 4)])
                 << "/" << to_string(kReportLosses[static_cast<std::size_t>(cell % 4)])
                 << " failed: " << cd.message << '\n';
        }
    }
    return table;
}

void write_report_csv(const ReportTable& t, const std::string& path) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot open report CSV for writing: " + path);
    out << "dataset=" << t.dataset << ",task=" << t.task << ",seed=" << t.seed
        << ",epochs=" << t.epochs << '\n';
    out << "arch,mse,mae,huber,logcosh\n";
    for (std::size_t a = 0; a < 4; ++a) {
        out << to_string(kReportArchs[a]);
        for (std::size_t l = 0; l < 4; ++l) out << ',' << fmt_double(t.mae[a][l]);
        out << '\n';
    }
    std::size_t best_a = 0, best_l = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t l = 0; l < 4; ++l) {
            if (t.mae[a][l] < best) {
                best = t.mae[a][l];
                best_a = a;
                best_l = l;
            }
        }
    }
    if (std::isfinite(best)) {
        out << "best=" << to_string(kReportArchs[best_a]) << ',' << to_string(kReportLosses[best_l])
            << ',' << fmt_double(best) << '\n';
    } else {
        out << "best=none,none,nan\n";
    }
}

ReportTable read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open report CSV: " + path);
    ReportTable t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty report");
    for (const auto& field : split_csv(line)) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError(path, 1, "bad metadata field");
        std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "dataset") {
            t.dataset = value;
        } else if (key == "task") {
            t.task = value;
        } else if (key == "seed") {
            auto v = parse_int(value);
            if (!v) throw ParseError(path, 1, "bad seed");
            t.seed = static_cast<std::uint64_t>(*v);
        } else if (key == "epochs") {
            auto v = parse_int(value);
            if (!v) throw ParseError(path, 1, "bad epochs");
            t.epochs = static_cast<int>(*v);
        }
    }
    if (!std::getline(in, line) || std::string(trim(line)) != "arch,mse,mae,huber,logcosh") {
        throw ParseError(path, 2, "bad report header row");
    }
    for (std::size_t a = 0; a < 4; ++a) {
        if (!std::getline(in, line)) throw ParseError(path, 3 + a, "missing architecture row");
        auto cells = split_csv(line);
        if (cells.size() != 5 || cells[0] != to_string(kReportArchs[a])) {
            throw ParseError(path, 3 + a, "bad architecture row");
        }
        for (std::size_t l = 0; l < 4; ++l) {
            auto v = parse_double(cells[l + 1]);
            if (!v) throw ParseError(path, 3 + a, "bad MAE cell");
            t.mae[a][l] = *v;
        }
    }
    return t;
}

}  // namespace vitals::cmd
