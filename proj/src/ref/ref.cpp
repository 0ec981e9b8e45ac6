#include "vitals/ref.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

namespace vitals::ref {

std::array<double, 3> mean_rgb(const Frame& frame) {
    double r = 0.0, g = 0.0, b = 0.0;
    std::size_t n = frame.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        r += frame.pixels[p * 3];
        g += frame.pixels[p * 3 + 1];
        b += frame.pixels[p * 3 + 2];
    }
    return {r / static_cast<double>(n), g / static_cast<double>(n), b / static_cast<double>(n)};
}

nn::Tensor1D conv1d_forward(const nn::Tensor1D& x, const nn::Conv1d& layer) {
    int pad = layer.padding == nn::Padding::Same ? (layer.kernel - 1) / 2 : 0;
    int out_len = (x.length + 2 * pad - layer.kernel) / layer.stride + 1;
    nn::Tensor1D out(layer.out_channels, out_len);
    for (int o = 0; o < layer.out_channels; ++o) {
        for (int t = 0; t < out_len; ++t) {
            double acc = layer.b[o];
            for (int i = 0; i < layer.in_channels; ++i) {
                for (int tau = 0; tau < layer.kernel; ++tau) {
                    int u = t * layer.stride + tau - pad;
                    if (u >= 0 && u < x.length) acc += layer.weight(o, i, tau) * x.at(i, u);
                }
            }
            out.at(o, t) = acc;
        }
    }
    return out;
}

std::vector<double> dct2_forward(const std::vector<double>& x) {
    int n = static_cast<int>(x.size());
    std::vector<double> out(x.size());
    double pi = std::acos(-1.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += x[i] * std::cos(pi * (2.0 * i + 1.0) * k / (2.0 * n));
        }
        out[k] = acc * (k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n));
    }
    return out;
}

std::vector<double> dct2_inverse(const std::vector<double>& coeffs) {
    int n = static_cast<int>(coeffs.size());
    std::vector<double> out(coeffs.size());
    double pi = std::acos(-1.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            double sk = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            acc += coeffs[k] * sk * std::cos(pi * (2.0 * i + 1.0) * k / (2.0 * n));
        }
        out[i] = acc;
    }
    return out;
}

namespace {

std::vector<double> standardize_channel(const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    double sd = std::sqrt(var);
    std::vector<double> out(x.size(), 0.0);
    if (sd < 1e-8) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
    return out;
}

nn::Tensor1D apply_layer(const nn::Layer& layer, const nn::Tensor1D& x) {
    if (const auto* c = std::get_if<nn::Conv1d>(&layer)) {
        return conv1d_forward(x, *c);
    }
    if (std::get_if<nn::Relu>(&layer)) {
        nn::Tensor1D out = x;
        for (double& v : out.values) v = v > 0.0 ? v : 0.0;
        return out;
    }
    if (const auto* m = std::get_if<nn::MaxPool>(&layer)) {
        int out_len = (x.length - m->width) / m->stride + 1;
        nn::Tensor1D out(x.channels, out_len);
        for (int c = 0; c < x.channels; ++c) {
            for (int j = 0; j < out_len; ++j) {
                double best = x.at(c, j * m->stride);
                for (int k = 1; k < m->width; ++k) {
                    best = std::max(best, x.at(c, j * m->stride + k));
                }
                out.at(c, j) = best;
            }
        }
        return out;
    }
    if (const auto* bn = std::get_if<nn::BatchNorm>(&layer)) {
        nn::Tensor1D out(x.channels, x.length);
        for (int c = 0; c < x.channels; ++c) {
            double inv = 1.0 / std::sqrt(bn->run_var[c] + bn->eps);
            for (int t = 0; t < x.length; ++t) {
                out.at(c, t) = bn->gamma[c] * (x.at(c, t) - bn->run_mean[c]) * inv + bn->beta[c];
            }
        }
        return out;
    }
    if (const auto* d = std::get_if<nn::Dense>(&layer)) {
        nn::Tensor1D out(d->out_features, 1);
        for (int o = 0; o < d->out_features; ++o) {
            double acc = d->b[o];
            for (int j = 0; j < d->in_features; ++j) {
                acc += d->w[static_cast<std::size_t>(o) * d->in_features + j] * x.values[j];
            }
            out.values[o] = acc;
        }
        return out;
    }
    if (std::get_if<nn::Gap>(&layer)) {
        nn::Tensor1D out(x.channels, 1);
        for (int c = 0; c < x.channels; ++c) {
            double acc = 0.0;
            for (int t = 0; t < x.length; ++t) acc += x.at(c, t);
            out.values[c] = acc / x.length;
        }
        return out;
    }
    const auto& r = std::get<nn::ResidualBlock>(layer);
    nn::Tensor1D h = apply_layer(nn::Layer{nn::Relu{}}, conv1d_forward(x, r.conv1));
    nn::Tensor1D s = conv1d_forward(h, r.conv2);
    for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] += x.values[i];
    return apply_layer(nn::Layer{nn::Relu{}}, s);
}

}  // namespace

double predict(const Model& model, const Window& window) {
    nn::Shape shape = model.stack_input_shape();
    nn::Tensor1D x(shape.channels, shape.length);
    for (int c = 0; c < window.channels; ++c) {
        std::vector<double> chan(window.values.begin() + static_cast<std::size_t>(c) * window.length,
                                 window.values.begin() +
                                     static_cast<std::size_t>(c + 1) * window.length);
        std::vector<double> z = standardize_channel(chan);
        if (model.band) {
            std::vector<double> coeffs = dct2_forward(z);
            z.clear();
            if (model.band->keep_dc) z.push_back(coeffs[0]);
            for (int k = model.band->k_lo; k <= model.band->k_hi; ++k) z.push_back(coeffs[k]);
        }
        for (std::size_t t = 0; t < z.size(); ++t) {
            x.values[static_cast<std::size_t>(c) * x.length + t] = z[t];
        }
    }
    nn::Tensor1D cur = x;
    for (const nn::Layer& l : model.layers) cur = apply_layer(l, cur);
    if (cur.values.size() != 1) throw std::runtime_error("reference predict: non-scalar output");
    return cur.values[0];
}

}  // namespace vitals::ref
