#include "vitals/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "vitals/errors.hpp"
#include "vitals/io_util.hpp"

namespace vitals {

namespace {

const std::set<std::string> kKnownKeys = {
    "dataset",    "dataset_dir", "task",         "arch",       "loss",      "epochs",
    "batch",      "lr",          "beta1",        "beta2",      "adam_eps",  "huber_delta",
    "train_frac", "val_frac",    "test_frac",    "seed",       "window_s",  "hop_s",
    "model_out",  "history_out", "manifest_out", "synth_n",    "synth_noise"};

const std::set<std::string> kRequiredKeys = {"dataset", "task",      "arch",
                                             "loss",    "model_out", "history_out",
                                             "manifest_out"};

double need_double(const std::map<std::string, std::string>& kv, const std::string& key,
                   double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    auto v = parse_double(it->second);
    if (!v || !std::isfinite(*v)) throw ConfigError("bad value for key '" + key + "'");
    return *v;
}

long long need_int(const std::map<std::string, std::string>& kv, const std::string& key,
                   long long fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    auto v = parse_int(it->second);
    if (!v) throw ConfigError("bad value for key '" + key + "'");
    return *v;
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = std::string(trim(line));
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(path, lineno, "expected key=value");
        auto key = std::string(trim(t.substr(0, eq)));
        auto value = std::string(trim(t.substr(eq + 1)));
        if (!kKnownKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
        if (kv.count(key)) throw ConfigError("duplicate config key '" + key + "'");
        kv[key] = value;
    }
    for (const auto& key : kRequiredKeys) {
        if (!kv.count(key)) throw ConfigError("missing required config key '" + key + "'");
    }

    RunConfig cfg;
    cfg.train.dataset = kv.at("dataset");
    if (cfg.train.dataset != "synth" && cfg.train.dataset != "mths" &&
        cfg.train.dataset != "bidmc") {
        throw ConfigError("dataset must be synth, mths or bidmc");
    }
    if (cfg.train.dataset != "synth") {
        if (!kv.count("dataset_dir")) throw ConfigError("missing required config key 'dataset_dir'");
        cfg.dataset_dir = kv.at("dataset_dir");
    } else if (kv.count("dataset_dir")) {
        cfg.dataset_dir = kv.at("dataset_dir");
    }
    try {
        cfg.train.task = parse_task(kv.at("task"));
        cfg.train.arch = parse_architecture(kv.at("arch"));
        cfg.train.loss.kind = parse_loss(kv.at("loss"));
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }

    cfg.train.epochs = static_cast<int>(need_int(kv, "epochs", 125));
    cfg.train.batch_size = static_cast<int>(need_int(kv, "batch", 32));
    cfg.train.adam.lr = need_double(kv, "lr", 1e-3);
    cfg.train.adam.beta1 = need_double(kv, "beta1", 0.9);
    cfg.train.adam.beta2 = need_double(kv, "beta2", 0.999);
    cfg.train.adam.eps = need_double(kv, "adam_eps", 1e-8);
    cfg.train.loss.huber_delta = need_double(kv, "huber_delta", 1.0);
    cfg.train.fractions[0] = need_double(kv, "train_frac", 0.8);
    cfg.train.fractions[1] = need_double(kv, "val_frac", 0.04);
    cfg.train.fractions[2] = need_double(kv, "test_frac", 0.16);
    cfg.train.seed = static_cast<std::uint64_t>(need_int(kv, "seed", 1400));
    cfg.train.window_s = need_double(kv, "window_s", 10.0);
    cfg.train.hop_s = need_double(kv, "hop_s", 1.0);
    cfg.model_out = kv.at("model_out");
    cfg.history_out = kv.at("history_out");
    cfg.manifest_out = kv.at("manifest_out");
    cfg.synth_n = static_cast<std::size_t>(need_int(kv, "synth_n", 2000));
    cfg.synth_noise = need_double(kv, "synth_noise", 0.1);

    if (cfg.train.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (cfg.train.batch_size < 1) throw ConfigError("batch must be at least 1");
    if (cfg.train.window_s <= 0 || cfg.train.hop_s <= 0) {
        throw ConfigError("window_s and hop_s must be positive");
    }
    double frac_sum = cfg.train.fractions[0] + cfg.train.fractions[1] + cfg.train.fractions[2];
    if (std::abs(frac_sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
    cfg.train.input_len = static_cast<int>(std::llround(cfg.train.window_s * kWindowSampleRateHz));
    return cfg;
}

void write_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open config file for writing: " + path);
    out << "dataset=" << cfg.train.dataset << '\n';
    if (!cfg.dataset_dir.empty()) out << "dataset_dir=" << cfg.dataset_dir << '\n';
    out << "task=" << to_string(cfg.train.task) << '\n';
    out << "arch=" << to_string(cfg.train.arch) << '\n';
    out << "loss=" << to_string(cfg.train.loss.kind) << '\n';
    out << "epochs=" << cfg.train.epochs << '\n';
    out << "batch=" << cfg.train.batch_size << '\n';
    out << "lr=" << fmt_double(cfg.train.adam.lr) << '\n';
    out << "beta1=" << fmt_double(cfg.train.adam.beta1) << '\n';
    out << "beta2=" << fmt_double(cfg.train.adam.beta2) << '\n';
    out << "adam_eps=" << fmt_double(cfg.train.adam.eps) << '\n';
    out << "huber_delta=" << fmt_double(cfg.train.loss.huber_delta) << '\n';
    out << "train_frac=" << fmt_double(cfg.train.fractions[0]) << '\n';
    out << "val_frac=" << fmt_double(cfg.train.fractions[1]) << '\n';
    out << "test_frac=" << fmt_double(cfg.train.fractions[2]) << '\n';
    out << "seed=" << cfg.train.seed << '\n';
    out << "window_s=" << fmt_double(cfg.train.window_s) << '\n';
    out << "hop_s=" << fmt_double(cfg.train.hop_s) << '\n';
    out << "model_out=" << cfg.model_out << '\n';
    out << "history_out=" << cfg.history_out << '\n';
    out << "manifest_out=" << cfg.manifest_out << '\n';
    out << "synth_n=" << cfg.synth_n << '\n';
    out << "synth_noise=" << fmt_double(cfg.synth_noise) << '\n';
}

}  // namespace vitals
