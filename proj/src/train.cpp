#include "vitals/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "vitals/errors.hpp"
#include "vitals/io_util.hpp"
#include "vitals/rng.hpp"

namespace vitals {

const char* to_string(LossKind k) {
    switch (k) {
        case LossKind::Mse: return "mse";
        case LossKind::Mae: return "mae";
        case LossKind::Huber: return "huber";
        case LossKind::LogCosh: return "logcosh";
    }
    return "?";
}

LossKind parse_loss(const std::string& s) {
    if (s == "mse") return LossKind::Mse;
    if (s == "mae") return LossKind::Mae;
    if (s == "huber") return LossKind::Huber;
    if (s == "logcosh") return LossKind::LogCosh;
    throw InvalidInput("unknown loss '" + s + "'");
}

std::pair<double, double> loss_and_grad(const LossId& loss, double pred, double target) {
    if (!std::isfinite(pred) || !std::isfinite(target)) {
        throw InvalidInput("loss inputs must be finite");
    }
    double e = pred - target;
    switch (loss.kind) {
        case LossKind::Mse:
            return {e * e, 2.0 * e};
        case LossKind::Mae:
            return {std::abs(e), e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0)};
        case LossKind::Huber: {
            double d = loss.huber_delta;
            if (d <= 0.0) throw InvalidInput("huber delta must be positive");
            if (std::abs(e) <= d) return {0.5 * e * e, e};
            return {d * (std::abs(e) - 0.5 * d), e > 0.0 ? d : -d};
        }
        case LossKind::LogCosh: {
            double a = std::abs(e);
            double value = a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
            return {value, std::tanh(e)};
        }
    }
    throw InvalidInput("unknown loss kind");
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const AdamConfig& cfg) {
    if (params.size() != grads.size()) throw InvalidInput("adam: grad/param size mismatch");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    if (state.m.size() != params.size()) throw InvalidInput("adam: state size mismatch");
    ++state.t;
    double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        double mhat = state.m[i] / c1;
        double vhat = state.v[i] / c2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

double evaluate(const Model& model, const std::vector<LabeledExample>& examples) {
    if (examples.empty()) throw InvalidInput("cannot evaluate on an empty example list");
    std::vector<double> preds(examples.size());
    int n = static_cast<int>(examples.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        preds[static_cast<std::size_t>(i)] = predict(model, examples[static_cast<std::size_t>(i)].window);
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += std::abs(preds[static_cast<std::size_t>(i)] - examples[static_cast<std::size_t>(i)].target);
    }
    return sum / static_cast<double>(n);
}

namespace {

std::vector<double> flatten_grads(const nn::ModelGrads& grads) {
    std::size_t total = 0;
    for (const auto& g : grads) total += g.size();
    std::vector<double> flat;
    flat.reserve(total);
    for (const auto& g : grads) flat.insert(flat.end(), g.begin(), g.end());
    return flat;
}

}  // namespace

std::pair<Model, TrainHistory> train(const TrainingConfig& config, const ExampleSplit& split) {
    if (split.train.empty()) throw TrainError("training split is empty");
    if (config.epochs < 1 || config.batch_size < 1) {
        throw TrainError("epochs and batch size must be at least 1");
    }

    Model model = build_model(config.arch, config.task, config.input_len, config.seed);

    // Preprocessing depends only on the immutable model metadata, so inputs
    // are materialized once.
    auto materialize = [&](const std::vector<LabeledExample>& exs) {
        std::vector<nn::Tensor1D> xs(exs.size());
        int n = static_cast<int>(exs.size());
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            xs[static_cast<std::size_t>(i)] = preprocess(model, exs[static_cast<std::size_t>(i)].window);
        }
        return xs;
    };
    std::vector<nn::Tensor1D> train_inputs = materialize(split.train);

    std::vector<double> params = nn::param_vector(model.layers);
    AdamState adam;
    TrainHistory history;
    history.train_loss.reserve(static_cast<std::size_t>(config.epochs));
    history.val_mae.reserve(static_cast<std::size_t>(config.epochs));

    Model best_model = model;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t n_train = split.train.size();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<std::size_t> order(n_train);
        std::iota(order.begin(), order.end(), 0);
        SplitMix64 shuffle_rng(
            splitmix_mix(config.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch)));
        fisher_yates(order, shuffle_rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n_train; start += config.batch_size) {
            std::size_t bsize = std::min<std::size_t>(config.batch_size, n_train - start);
            std::vector<nn::Tensor1D> xs(bsize);
            for (std::size_t b = 0; b < bsize; ++b) xs[b] = train_inputs[order[start + b]];

            nn::Tape tape;
            std::vector<nn::Tensor1D> outs =
                nn::forward_train(model.layers, xs, tape, /*update_running=*/true);

            double batch_loss = 0.0;
            std::vector<nn::Tensor1D> upstream(bsize);
            for (std::size_t b = 0; b < bsize; ++b) {
                double target = split.train[order[start + b]].target;
                auto [value, grad] = loss_and_grad(config.loss, outs[b].values[0], target);
                batch_loss += value;
                upstream[b] = nn::Tensor1D(1, 1);
                upstream[b].values[0] = grad / static_cast<double>(bsize);
            }
            batch_loss /= static_cast<double>(bsize);
            if (!std::isfinite(batch_loss)) {
                throw TrainError("training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(start / config.batch_size));
            }
            loss_sum += batch_loss * static_cast<double>(bsize);

            nn::ModelGrads grads = nn::zero_grads(model.layers);
            nn::backward(model.layers, tape, std::move(upstream), grads);
            adam_step(params, flatten_grads(grads), adam, config.adam);
            nn::set_param_vector(model.layers, params);
        }
        history.train_loss.push_back(loss_sum / static_cast<double>(n_train));

        if (!split.val.empty()) {
            double val_mae = evaluate(model, split.val);
            history.val_mae.push_back(val_mae);
            if (val_mae < best_val) {
                best_val = val_mae;
                best_model = model;
                history.best_epoch = static_cast<std::size_t>(epoch);
            }
        } else {
            history.val_mae.push_back(std::numeric_limits<double>::quiet_NaN());
            best_model = model;  // no validation set: keep the latest weights
            history.best_epoch = static_cast<std::size_t>(epoch);
        }
    }

    history.test_mae = split.test.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : evaluate(best_model, split.test);
    return {std::move(best_model), history};
}

void save_history(const TrainHistory& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot open history for writing: " + path);
    out << "epoch,train_loss,val_mae\n";
    for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
        out << e << ',' << fmt_double(h.train_loss[e]) << ',' << fmt_double(h.val_mae[e]) << '\n';
    }
    out << "test_mae=" << fmt_double(h.test_mae) << '\n';
}

TrainHistory load_history(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open history: " + path);
    std::string line;
    if (!std::getline(in, line) || std::string(trim(line)) != "epoch,train_loss,val_mae") {
        throw ParseError(path, 1, "bad history header");
    }
    TrainHistory h;
    std::size_t lineno = 1;
    bool have_trailer = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = std::string(trim(line));
        if (t.empty()) continue;
        if (t.rfind("test_mae=", 0) == 0) {
            auto v = parse_double(t.substr(9));
            if (!v) throw ParseError(path, lineno, "bad test_mae");
            h.test_mae = *v;
            have_trailer = true;
            continue;
        }
        auto cells = split_csv(t);
        if (cells.size() != 3) throw ParseError(path, lineno, "expected epoch,train_loss,val_mae");
        auto tl = parse_double(cells[1]);
        auto vm = parse_double(cells[2]);
        if (!parse_int(cells[0]) || !tl || !vm) throw ParseError(path, lineno, "bad history row");
        h.train_loss.push_back(*tl);
        h.val_mae.push_back(*vm);
    }
    if (!have_trailer) throw ParseError(path, lineno, "missing test_mae trailer");
    // Recover the best epoch from the stored curve.
    if (!h.val_mae.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < h.val_mae.size(); ++i) {
            if (h.val_mae[i] < h.val_mae[best]) best = i;
        }
        h.best_epoch = best;
    }
    return h;
}

}  // namespace vitals
