#include "vitals/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "vitals/errors.hpp"
#include "vitals/model.hpp"
#include "vitals/rng.hpp"
#include "vitals/train.hpp"

namespace vitals::gradcheck {

double max_rel_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    if (analytic.size() != numeric.size()) {
        throw InvalidInput("gradient vectors differ in length");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

namespace {

// Margin every ReLU pre-activation and max-pool top-two gap must clear. The
// finite-difference perturbations move activations by well under 1e-4, so
// clearing this keeps every evaluation inside one linear piece.
constexpr double kKinkMargin = 1e-3;

double stack_kink_margin(const std::vector<nn::Layer>& layers, const nn::Tape& tape) {
    double margin = std::numeric_limits<double>::infinity();
    auto relu_margin = [&](const std::vector<nn::Tensor1D>& pre) {
        for (const auto& t : pre) {
            for (double v : t.values) margin = std::min(margin, std::abs(v));
        }
    };
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const nn::LayerTape& lt = tape.layers[li];
        if (std::get_if<nn::Relu>(&layers[li])) {
            relu_margin(lt.x);
        } else if (const auto* mp = std::get_if<nn::MaxPool>(&layers[li])) {
            for (const auto& x : lt.x) {
                int out_len = (x.length - mp->width) / mp->stride + 1;
                for (int c = 0; c < x.channels; ++c) {
                    for (int j = 0; j < out_len; ++j) {
                        double hi = -std::numeric_limits<double>::infinity(), second = hi;
                        for (int k = 0; k < mp->width; ++k) {
                            double v = x.at(c, j * mp->stride + k);
                            if (v > hi) {
                                second = hi;
                                hi = v;
                            } else if (v > second) {
                                second = v;
                            }
                        }
                        if (mp->width > 1) margin = std::min(margin, hi - second);
                    }
                }
            }
        } else if (std::get_if<nn::ResidualBlock>(&layers[li])) {
            relu_margin(lt.a1);
            relu_margin(lt.pre);
        }
    }
    return margin;
}

// L and its analytic gradient for one batch, abstracted over the readout so
// the same machinery drives linear-probe layer checks and the real-loss
// whole-model check.
struct Problem {
    std::vector<nn::Layer> layers;
    std::vector<nn::Tensor1D> inputs;
    std::function<double(const std::vector<nn::Tensor1D>&)> loss;
    std::function<std::vector<nn::Tensor1D>(const std::vector<nn::Tensor1D>&)> upstream;
};

double eval_loss(const Problem& p, const std::vector<double>& params,
                 const std::vector<nn::Tensor1D>& inputs) {
    std::vector<nn::Layer> layers = p.layers;
    nn::set_param_vector(layers, params);
    nn::Tape tape;
    return p.loss(nn::forward_train(layers, inputs, tape, /*update_running=*/false));
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t want) {
    std::vector<std::size_t> idx;
    if (n <= want) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    } else {
        idx.reserve(want);
        for (std::size_t i = 0; i < want; ++i) idx.push_back(i * n / want);
    }
    return idx;
}

CheckItem run_problem(const std::string& name, Problem p, double tolerance,
                      std::size_t max_params, double analytic_scale) {
    std::vector<nn::Layer> layers = p.layers;
    nn::Tape tape;
    std::vector<nn::Tensor1D> outs = nn::forward_train(layers, p.inputs, tape, false);
    nn::ModelGrads grads = nn::zero_grads(layers);
    std::vector<nn::Tensor1D> input_grads = nn::backward(layers, tape, p.upstream(outs), grads);

    std::vector<double> params = nn::param_vector(p.layers);
    std::vector<double> analytic_flat;
    for (const auto& g : grads) analytic_flat.insert(analytic_flat.end(), g.begin(), g.end());

    std::vector<double> analytic, numeric;
    for (std::size_t i : sample_indices(params.size(), max_params)) {
        double h = 1e-5 * std::max(1.0, std::abs(params[i]));
        std::vector<double> shifted = params;
        shifted[i] = params[i] + h;
        double up = eval_loss(p, shifted, p.inputs);
        shifted[i] = params[i] - h;
        double down = eval_loss(p, shifted, p.inputs);
        numeric.push_back((up - down) / (2.0 * h));
        analytic.push_back(analytic_flat[i] * analytic_scale);
    }

    std::size_t in_total = 0;
    for (const auto& x : p.inputs) in_total += x.values.size();
    for (std::size_t flat : sample_indices(in_total, max_params)) {
        std::size_t b = 0, off = flat;
        while (off >= p.inputs[b].values.size()) off -= p.inputs[b++].values.size();
        double orig = p.inputs[b].values[off];
        double h = 1e-5 * std::max(1.0, std::abs(orig));
        std::vector<nn::Tensor1D> shifted = p.inputs;
        shifted[b].values[off] = orig + h;
        double up = eval_loss(p, params, shifted);
        shifted[b].values[off] = orig - h;
        double down = eval_loss(p, params, shifted);
        numeric.push_back((up - down) / (2.0 * h));
        analytic.push_back(input_grads[b].values[off] * analytic_scale);
    }

    CheckItem item;
    item.name = name;
    item.tolerance = tolerance;
    item.max_rel_err = max_rel_error(analytic, numeric);
    item.pass = item.max_rel_err < tolerance;
    return item;
}

// Draws batch inputs in [-1, 1] and redraws until the stack's kinks all clear
// the margin, so the checks below are well-posed by construction.
std::vector<nn::Tensor1D> draw_clear_inputs(const std::vector<nn::Layer>& layers, int batch,
                                            nn::Shape in_shape, SplitMix64& rng) {
    for (int attempt = 0; attempt < 20000; ++attempt) {
        std::vector<nn::Tensor1D> xs(static_cast<std::size_t>(batch),
                                     nn::Tensor1D(in_shape.channels, in_shape.length));
        for (auto& x : xs) {
            for (double& v : x.values) v = rng.next_symmetric(1.0);
        }
        std::vector<nn::Layer> copy = layers;
        nn::Tape tape;
        nn::forward_train(copy, xs, tape, false);
        if (stack_kink_margin(layers, tape) > kKinkMargin) return xs;
    }
    throw TrainError("could not draw a kink-clear input for gradient checking");
}

std::vector<nn::Layer> random_stack(std::vector<nn::Layer> layers, SplitMix64& rng) {
    std::vector<double> params = nn::param_vector(layers);
    for (double& p : params) p = rng.next_symmetric(1.0);
    nn::set_param_vector(layers, params);
    return layers;
}

Problem linear_probe(std::vector<nn::Layer> layers, int batch, nn::Shape in_shape,
                     std::uint64_t seed) {
    SplitMix64 rng(seed);
    Problem p;
    p.layers = random_stack(std::move(layers), rng);
    p.inputs = draw_clear_inputs(p.layers, batch, in_shape, rng);

    nn::Shape out_shape = in_shape;
    for (const auto& l : p.layers) out_shape = nn::output_shape(l, out_shape);
    auto readout = std::make_shared<std::vector<double>>();
    readout->resize(static_cast<std::size_t>(out_shape.channels) * out_shape.length);
    for (double& r : *readout) r = rng.next_symmetric(1.0);

    p.loss = [readout](const std::vector<nn::Tensor1D>& outs) {
        double acc = 0.0;
        for (const auto& o : outs) {
            for (std::size_t j = 0; j < o.values.size(); ++j) acc += (*readout)[j] * o.values[j];
        }
        return acc;
    };
    p.upstream = [readout, out_shape](const std::vector<nn::Tensor1D>& outs) {
        std::vector<nn::Tensor1D> up(outs.size(), nn::Tensor1D(out_shape.channels, out_shape.length));
        for (auto& u : up) u.values = *readout;
        return up;
    };
    return p;
}

nn::Conv1d conv_spec(int in_ch, int out_ch, int kernel, int stride, nn::Padding pad) {
    nn::Conv1d c;
    c.in_channels = in_ch;
    c.out_channels = out_ch;
    c.kernel = kernel;
    c.stride = stride;
    c.padding = pad;
    c.w.assign(static_cast<std::size_t>(out_ch) * in_ch * kernel, 0.0);
    c.b.assign(static_cast<std::size_t>(out_ch), 0.0);
    return c;
}

CheckItem check_losses(LossKind kind, double analytic_scale) {
    LossId loss{kind, 1.0};
    std::vector<double> analytic, numeric;
    const double h = 1e-5;
    for (double e = -10.0; e <= 10.0 + 1e-12; e += 0.25) {
        if (kind == LossKind::Mae && std::abs(e) < 1e-3) continue;
        if (kind == LossKind::Huber && (std::abs(e - 1.0) < 1e-3 || std::abs(e + 1.0) < 1e-3)) {
            continue;
        }
        double target = 0.5;  // pred = target + e
        analytic.push_back(loss_and_grad(loss, target + e, target).second * analytic_scale);
        double up = loss_and_grad(loss, target + e + h, target).first;
        double down = loss_and_grad(loss, target + e - h, target).first;
        numeric.push_back((up - down) / (2.0 * h));
    }
    CheckItem item;
    item.name = std::string("loss_") + to_string(kind);
    item.tolerance = 1e-8;
    item.max_rel_err = max_rel_error(analytic, numeric);
    item.pass = item.max_rel_err < item.tolerance;
    return item;
}

}  // namespace

CheckItem check_stack(const std::string& name, std::vector<nn::Layer> layers, int batch,
                      nn::Shape in_shape, std::uint64_t seed, double tolerance,
                      std::size_t max_params, double analytic_scale) {
    return run_problem(name, linear_probe(std::move(layers), batch, in_shape, seed), tolerance,
                       max_params, analytic_scale);
}

Report run_suite(std::uint64_t seed, double analytic_scale) {
    Report rep;
    auto add = [&](CheckItem item) { rep.items.push_back(std::move(item)); };

    add(check_stack("conv1d_same", {conv_spec(3, 4, 5, 1, nn::Padding::Same)}, 2, {3, 16},
                    seed + 1, 1e-5, 4096, analytic_scale));
    add(check_stack("conv1d_valid_stride2", {conv_spec(2, 3, 3, 2, nn::Padding::Valid)}, 2, {2, 17},
                    seed + 2, 1e-5, 4096, analytic_scale));
    add(check_stack("relu", {nn::Relu{}}, 2, {2, 12}, seed + 3, 1e-5, 4096, analytic_scale));
    add(check_stack("maxpool", {nn::MaxPool{}}, 2, {2, 14}, seed + 4, 1e-5, 4096, analytic_scale));
    {
        nn::BatchNorm bn;
        bn.channels = 3;
        bn.gamma.assign(3, 0.0);
        bn.beta.assign(3, 0.0);
        bn.run_mean.assign(3, 0.0);
        bn.run_var.assign(3, 1.0);
        add(check_stack("batchnorm", {bn}, 4, {3, 10}, seed + 5, 1e-5, 4096, analytic_scale));
    }
    {
        nn::Dense d;
        d.in_features = 12;
        d.out_features = 5;
        d.w.assign(60, 0.0);
        d.b.assign(5, 0.0);
        add(check_stack("dense", {d}, 2, {2, 6}, seed + 6, 1e-5, 4096, analytic_scale));
    }
    add(check_stack("gap", {nn::Gap{}}, 2, {3, 9}, seed + 7, 1e-5, 4096, analytic_scale));
    {
        nn::ResidualBlock rb;
        rb.conv1 = conv_spec(4, 4, 3, 1, nn::Padding::Same);
        rb.conv2 = conv_spec(4, 4, 3, 1, nn::Padding::Same);
        add(check_stack("residual_block", {rb}, 2, {4, 12}, seed + 8, 1e-5, 4096, analytic_scale));
    }

    // Whole model under the real loss: FCN, log-cosh, sampled parameters.
    {
        Model m = build_model(ArchitectureId::Fcn, TaskId::Hr, 300, seed + 9);
        SplitMix64 rng(seed + 10);
        Problem p;
        p.layers = m.layers;
        p.inputs = draw_clear_inputs(p.layers, 2, m.stack_input_shape(), rng);
        auto targets = std::make_shared<std::vector<double>>(std::vector<double>{0.4, -0.7});
        p.loss = [targets](const std::vector<nn::Tensor1D>& outs) {
            double acc = 0.0;
            for (std::size_t b = 0; b < outs.size(); ++b) {
                acc += loss_and_grad({LossKind::LogCosh, 1.0}, outs[b].values[0], (*targets)[b]).first;
            }
            return acc;
        };
        p.upstream = [targets](const std::vector<nn::Tensor1D>& outs) {
            std::vector<nn::Tensor1D> up(outs.size(), nn::Tensor1D(1, 1));
            for (std::size_t b = 0; b < outs.size(); ++b) {
                up[b].values[0] =
                    loss_and_grad({LossKind::LogCosh, 1.0}, outs[b].values[0], (*targets)[b]).second;
            }
            return up;
        };
        add(run_problem("model_fcn_logcosh", std::move(p), 1e-5, 200, analytic_scale));
    }

    for (LossKind k : {LossKind::Mse, LossKind::Mae, LossKind::Huber, LossKind::LogCosh}) {
        add(check_losses(k, analytic_scale));
    }
    return rep;
}

}  // namespace vitals::gradcheck
