#include "vitals/model.hpp"

#include <cmath>

#include "vitals/errors.hpp"
#include "vitals/rng.hpp"

namespace vitals {

const char* to_string(ArchitectureId a) {
    switch (a) {
        case ArchitectureId::Base: return "base";
        case ArchitectureId::Fcn: return "fcn";
        case ArchitectureId::ResidualFcn: return "residual_fcn";
        case ArchitectureId::Dct: return "dct";
    }
    return "?";
}

const char* to_string(TaskId t) { return t == TaskId::Hr ? "hr" : "spo2"; }

ArchitectureId parse_architecture(const std::string& s) {
    if (s == "base") return ArchitectureId::Base;
    if (s == "fcn") return ArchitectureId::Fcn;
    if (s == "residual_fcn") return ArchitectureId::ResidualFcn;
    if (s == "dct") return ArchitectureId::Dct;
    throw InvalidInput("unknown architecture '" + s + "'");
}

TaskId parse_task(const std::string& s) {
    if (s == "hr") return TaskId::Hr;
    if (s == "spo2") return TaskId::Spo2;
    throw InvalidInput("unknown task '" + s + "'");
}

int task_channels(TaskId t) { return t == TaskId::Hr ? 1 : 3; }

nn::Shape Model::stack_input_shape() const {
    if (band) return {task_channels(task), band->kept_count()};
    return {task_channels(task), input_len};
}

void Model::validate_shapes() const {
    if (input_len < 2) throw ShapeError("model input length must be at least 2");
    if ((arch == ArchitectureId::Dct) != band.has_value()) {
        throw ShapeError("band mask is present iff the architecture is dct");
    }
    nn::Shape s = stack_input_shape();
    for (const nn::Layer& l : layers) s = nn::output_shape(l, s);
    if (!(s == nn::Shape{1, 1})) {
        throw ShapeError("layer stack must end in exactly one scalar, got " +
                         std::to_string(s.channels) + "x" + std::to_string(s.length));
    }
}

namespace {

using nn::Conv1d;
using nn::Padding;

// He-uniform draw order is fixed: layers in order, weights in storage order,
// so equal seeds give bit-identical models.
Conv1d make_conv(int in_ch, int out_ch, int kernel, SplitMix64& rng,
                 Padding pad = Padding::Same) {
    Conv1d c;
    c.in_channels = in_ch;
    c.out_channels = out_ch;
    c.kernel = kernel;
    c.stride = 1;
    c.padding = pad;
    c.w.resize(static_cast<std::size_t>(out_ch) * in_ch * kernel);
    c.b.assign(static_cast<std::size_t>(out_ch), 0.0);
    double bound = std::sqrt(6.0 / (static_cast<double>(in_ch) * kernel));
    for (double& w : c.w) w = rng.next_symmetric(bound);
    return c;
}

nn::Dense make_dense(int in_features, int out_features, SplitMix64& rng) {
    nn::Dense d;
    d.in_features = in_features;
    d.out_features = out_features;
    d.w.resize(static_cast<std::size_t>(out_features) * in_features);
    d.b.assign(static_cast<std::size_t>(out_features), 0.0);
    double bound = std::sqrt(6.0 / static_cast<double>(in_features));
    for (double& w : d.w) w = rng.next_symmetric(bound);
    return d;
}

nn::BatchNorm make_bn(int channels) {
    nn::BatchNorm bn;
    bn.channels = channels;
    bn.gamma.assign(static_cast<std::size_t>(channels), 1.0);
    bn.beta.assign(static_cast<std::size_t>(channels), 0.0);
    bn.run_mean.assign(static_cast<std::size_t>(channels), 0.0);
    bn.run_var.assign(static_cast<std::size_t>(channels), 1.0);
    return bn;
}

nn::ResidualBlock make_resblock(int channels, int kernel, SplitMix64& rng) {
    nn::ResidualBlock r;
    r.conv1 = make_conv(channels, channels, kernel, rng);
    r.conv2 = make_conv(channels, channels, kernel, rng);
    return r;
}

}  // namespace

Model build_model(ArchitectureId arch, TaskId task, int input_len, std::uint64_t init_seed) {
    if (input_len < 2) throw InvalidInput("model input length must be at least 2");
    Model m;
    m.arch = arch;
    m.task = task;
    m.input_len = input_len;
    int ch = task_channels(task);
    SplitMix64 rng(init_seed);

    switch (arch) {
        case ArchitectureId::Base: {
            m.layers.push_back(make_conv(ch, 16, 7, rng));
            m.layers.push_back(make_bn(16));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(nn::MaxPool{});
            m.layers.push_back(make_conv(16, 32, 5, rng));
            m.layers.push_back(make_bn(32));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(nn::MaxPool{});
            m.layers.push_back(make_conv(32, 32, 3, rng));
            m.layers.push_back(make_bn(32));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(nn::MaxPool{});
            int flat = 32 * (((input_len / 2) / 2) / 2);
            m.layers.push_back(make_dense(flat, 64, rng));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(make_dense(64, 1, rng));
            break;
        }
        case ArchitectureId::Fcn: {
            m.layers.push_back(make_conv(ch, 16, 7, rng));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(nn::MaxPool{});
            m.layers.push_back(make_conv(16, 32, 5, rng));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(nn::MaxPool{});
            m.layers.push_back(make_conv(32, 32, 5, rng));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(nn::MaxPool{});
            m.layers.push_back(make_conv(32, 64, 3, rng));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(make_conv(64, 1, 1, rng));
            m.layers.push_back(nn::Gap{});
            break;
        }
        case ArchitectureId::ResidualFcn: {
            m.layers.push_back(make_conv(ch, 32, 7, rng));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(make_resblock(32, 3, rng));
            m.layers.push_back(nn::MaxPool{});
            m.layers.push_back(make_resblock(32, 3, rng));
            m.layers.push_back(nn::MaxPool{});
            m.layers.push_back(make_resblock(32, 3, rng));
            m.layers.push_back(make_conv(32, 1, 1, rng));
            m.layers.push_back(nn::Gap{});
            break;
        }
        case ArchitectureId::Dct: {
            m.band = make_band_mask(input_len, kWindowSampleRateHz, kDctBandLowHz, kDctBandHighHz,
                                    /*keep_dc=*/false);
            m.layers.push_back(make_conv(ch, 16, 5, rng));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(make_conv(16, 32, 3, rng));
            m.layers.push_back(nn::Relu{});
            m.layers.push_back(make_conv(32, 1, 1, rng));
            m.layers.push_back(nn::Gap{});
            break;
        }
        default:
            throw InvalidInput("unknown architecture id");
    }
    m.validate_shapes();
    return m;
}

nn::Tensor1D preprocess(const Model& model, const Window& window) {
    if (window.channels != task_channels(model.task) || window.length != model.input_len) {
        throw ShapeError("window shape " + std::to_string(window.channels) + "x" +
                         std::to_string(window.length) + " does not match model input " +
                         std::to_string(task_channels(model.task)) + "x" +
                         std::to_string(model.input_len));
    }
    for (double v : window.values) {
        if (!std::isfinite(v)) throw InvalidInput("window contains non-finite values");
    }

    nn::Shape shape = model.stack_input_shape();
    nn::Tensor1D x(shape.channels, shape.length);
    for (int c = 0; c < window.channels; ++c) {
        std::vector<double> chan(window.values.begin() + static_cast<std::size_t>(c) * window.length,
                                 window.values.begin() +
                                     static_cast<std::size_t>(c + 1) * window.length);
        std::vector<double> z = standardize(chan);
        if (model.band) {
            z = apply_band_crop(dct2_forward(z), *model.band);
        }
        std::copy(z.begin(), z.end(), x.values.begin() + static_cast<std::size_t>(c) * x.length);
    }
    return x;
}

double predict(const Model& model, const Window& window) {
    nn::Tensor1D out = nn::forward_infer(model.layers, preprocess(model, window));
    if (out.values.size() != 1) throw ShapeError("model output is not a scalar");
    return out.values[0];
}

std::size_t param_count(const Model& model) { return nn::param_count(model.layers); }

}  // namespace vitals
