#include "vitals/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "vitals/errors.hpp"

// Every kernel here fixes its floating-point accumulation order per output
// element, and OpenMP only ever splits work so that one thread owns each
// output element (or each parameter-gradient slice). Results are therefore
// bit-identical for any thread count.

namespace vitals::nn {

namespace {

int same_pad(const Conv1d& c) { return c.padding == Padding::Same ? (c.kernel - 1) / 2 : 0; }

void check_conv(const Conv1d& c, int in_channels) {
    if (c.in_channels != in_channels) {
        throw ShapeError("conv1d expects " + std::to_string(c.in_channels) + " channels, got " +
                         std::to_string(in_channels));
    }
    if (c.kernel < 1 || c.stride < 1) throw ShapeError("conv1d kernel/stride must be positive");
    if (c.padding == Padding::Same && c.kernel % 2 == 0) {
        throw ShapeError("same-padded conv1d needs an odd kernel");
    }
    std::size_t wn = static_cast<std::size_t>(c.out_channels) * c.in_channels * c.kernel;
    if (c.w.size() != wn || c.b.size() != static_cast<std::size_t>(c.out_channels)) {
        throw ShapeError("conv1d weight/bias counts do not match declared shape");
    }
}

int conv_out_len(const Conv1d& c, int in_len) {
    int p = same_pad(c);
    int lo = (in_len + 2 * p - c.kernel) / c.stride + 1;
    if (in_len + 2 * p < c.kernel || lo < 1) throw ShapeError("conv1d input shorter than kernel");
    return lo;
}

// Valid output range for tap tau: indices t with 0 <= t*stride + tau - pad < len.
struct TapRange {
    int lo, hi;  // inclusive; empty when lo > hi
};

TapRange tap_range(int tau, int pad, int stride, int in_len, int out_len) {
    int a = pad - tau;
    int lo = a <= 0 ? 0 : (a + stride - 1) / stride;
    int b = in_len - 1 + pad - tau;
    int hi = b < 0 ? -1 : b / stride;
    return {lo, std::min(hi, out_len - 1)};
}

}  // namespace

Shape output_shape(const Layer& layer, Shape in) {
    struct Visitor {
        Shape in;
        Shape operator()(const Conv1d& c) const {
            check_conv(c, in.channels);
            return {c.out_channels, conv_out_len(c, in.length)};
        }
        Shape operator()(const Relu&) const { return in; }
        Shape operator()(const MaxPool& m) const {
            if (m.width < 1 || m.stride < 1) throw ShapeError("maxpool width/stride must be positive");
            if (in.length < m.width) throw ShapeError("maxpool input shorter than pool width");
            return {in.channels, (in.length - m.width) / m.stride + 1};
        }
        Shape operator()(const BatchNorm& bn) const {
            if (bn.channels != in.channels) throw ShapeError("batchnorm channel mismatch");
            std::size_t c = static_cast<std::size_t>(bn.channels);
            if (bn.gamma.size() != c || bn.beta.size() != c || bn.run_mean.size() != c ||
                bn.run_var.size() != c) {
                throw ShapeError("batchnorm parameter counts do not match channels");
            }
            return in;
        }
        Shape operator()(const Dense& d) const {
            if (d.in_features != in.channels * in.length) {
                throw ShapeError("dense expects " + std::to_string(d.in_features) +
                                 " features, got " + std::to_string(in.channels * in.length));
            }
            if (d.w.size() != static_cast<std::size_t>(d.out_features) * d.in_features ||
                d.b.size() != static_cast<std::size_t>(d.out_features)) {
                throw ShapeError("dense weight/bias counts do not match declared shape");
            }
            return {d.out_features, 1};
        }
        Shape operator()(const Gap&) const {
            if (in.length < 1) throw ShapeError("gap needs a non-empty time axis");
            return {in.channels, 1};
        }
        Shape operator()(const ResidualBlock& r) const {
            for (const Conv1d* c : {&r.conv1, &r.conv2}) {
                check_conv(*c, in.channels);
                if (c->out_channels != in.channels || c->stride != 1 ||
                    c->padding != Padding::Same) {
                    throw ShapeError("residual block convs must preserve shape");
                }
            }
            return in;
        }
    };
    return std::visit(Visitor{in}, layer);
}

// --- conv1d ----------------------------------------------------------------

Tensor1D conv1d_forward(const Tensor1D& x, const Conv1d& layer) {
    check_conv(layer, x.channels);
    int out_len = conv_out_len(layer, x.length);
    int pad = same_pad(layer);
    Tensor1D out(layer.out_channels, out_len);

#pragma omp parallel for schedule(static)
    for (int o = 0; o < layer.out_channels; ++o) {
        double* orow = out.values.data() + static_cast<std::size_t>(o) * out_len;
        std::fill(orow, orow + out_len, layer.b[o]);
        for (int i = 0; i < layer.in_channels; ++i) {
            const double* xrow = x.values.data() + static_cast<std::size_t>(i) * x.length;
            for (int tau = 0; tau < layer.kernel; ++tau) {
                double wv = layer.weight(o, i, tau);
                TapRange r = tap_range(tau, pad, layer.stride, x.length, out_len);
                int off = tau - pad;
                for (int t = r.lo; t <= r.hi; ++t) {
                    orow[t] += wv * xrow[t * layer.stride + off];
                }
            }
        }
    }
    return out;
}

namespace {

// Accumulates dW/db for one batch and optionally the input gradients.
// dW slices are split by output channel and dX by example, so no two threads
// touch the same accumulator.
void conv1d_backward_batch(const Conv1d& layer, const std::vector<Tensor1D>& xs,
                           const std::vector<Tensor1D>& gs, std::vector<Tensor1D>* dxs,
                           double* wgrad, double* bgrad) {
    int pad = same_pad(layer);
    int batch = static_cast<int>(xs.size());
    int in_len = xs[0].length;
    int out_len = gs[0].length;

#pragma omp parallel for schedule(static)
    for (int o = 0; o < layer.out_channels; ++o) {
        double bacc = 0.0;
        double* wrow_o = wgrad + static_cast<std::size_t>(o) * layer.in_channels * layer.kernel;
        for (int b = 0; b < batch; ++b) {
            const double* grow = gs[b].values.data() + static_cast<std::size_t>(o) * out_len;
            for (int t = 0; t < out_len; ++t) bacc += grow[t];
            for (int i = 0; i < layer.in_channels; ++i) {
                const double* xrow = xs[b].values.data() + static_cast<std::size_t>(i) * in_len;
                double* wrow = wrow_o + static_cast<std::size_t>(i) * layer.kernel;
                for (int t = 0; t < out_len; ++t) {
                    double gt = grow[t];
                    int base = t * layer.stride - pad;
                    for (int tau = 0; tau < layer.kernel; ++tau) {
                        int u = base + tau;
                        if (u >= 0 && u < in_len) wrow[tau] += gt * xrow[u];
                    }
                }
            }
        }
        bgrad[o] += bacc;
    }

    if (!dxs) return;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        Tensor1D& dx = (*dxs)[b];
        dx = Tensor1D(layer.in_channels, in_len);
        for (int i = 0; i < layer.in_channels; ++i) {
            double* dxrow = dx.values.data() + static_cast<std::size_t>(i) * in_len;
            for (int o = 0; o < layer.out_channels; ++o) {
                const double* grow = gs[b].values.data() + static_cast<std::size_t>(o) * out_len;
                for (int tau = 0; tau < layer.kernel; ++tau) {
                    double wv = layer.weight(o, i, tau);
                    TapRange r = tap_range(tau, pad, layer.stride, in_len, out_len);
                    int off = tau - pad;
                    for (int t = r.lo; t <= r.hi; ++t) {
                        dxrow[t * layer.stride + off] += wv * grow[t];
                    }
                }
            }
        }
    }
}

}  // namespace

// --- pointwise / pooling / dense / gap --------------------------------------

Tensor1D relu_forward(const Tensor1D& x) {
    Tensor1D out = x;
    for (double& v : out.values) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor1D maxpool_forward(const Tensor1D& x, const MaxPool& layer, std::vector<int>* argmax) {
    Shape os = output_shape(Layer{layer}, {x.channels, x.length});
    Tensor1D out(os.channels, os.length);
    if (argmax) argmax->assign(out.size(), 0);
    for (int c = 0; c < x.channels; ++c) {
        const double* xrow = x.values.data() + static_cast<std::size_t>(c) * x.length;
        for (int j = 0; j < os.length; ++j) {
            int start = j * layer.stride;
            int best = start;
            double bv = xrow[start];
            for (int k = 1; k < layer.width; ++k) {
                if (xrow[start + k] > bv) {  // strict: ties go to the earliest index
                    bv = xrow[start + k];
                    best = start + k;
                }
            }
            out.at(c, j) = bv;
            if (argmax) (*argmax)[static_cast<std::size_t>(c) * os.length + j] = best;
        }
    }
    return out;
}

Tensor1D batchnorm_forward_infer(const Tensor1D& x, const BatchNorm& layer) {
    output_shape(Layer{layer}, {x.channels, x.length});
    Tensor1D out(x.channels, x.length);
    for (int c = 0; c < x.channels; ++c) {
        double inv = 1.0 / std::sqrt(layer.run_var[c] + layer.eps);
        for (int t = 0; t < x.length; ++t) {
            out.at(c, t) = layer.gamma[c] * (x.at(c, t) - layer.run_mean[c]) * inv + layer.beta[c];
        }
    }
    return out;
}

Tensor1D dense_forward(const Tensor1D& x, const Dense& layer) {
    output_shape(Layer{layer}, {x.channels, x.length});
    Tensor1D out(layer.out_features, 1);
    for (int o = 0; o < layer.out_features; ++o) {
        const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in_features;
        double acc = layer.b[o];
        for (int j = 0; j < layer.in_features; ++j) acc += wrow[j] * x.values[j];
        out.values[o] = acc;
    }
    return out;
}

Tensor1D gap_forward(const Tensor1D& x) {
    output_shape(Layer{Gap{}}, {x.channels, x.length});
    Tensor1D out(x.channels, 1);
    for (int c = 0; c < x.channels; ++c) {
        double acc = 0.0;
        for (int t = 0; t < x.length; ++t) acc += x.at(c, t);
        out.values[c] = acc / x.length;
    }
    return out;
}

Tensor1D forward_layer_infer(const Layer& layer, const Tensor1D& x) {
    struct Visitor {
        const Tensor1D& x;
        Tensor1D operator()(const Conv1d& c) const { return conv1d_forward(x, c); }
        Tensor1D operator()(const Relu&) const { return relu_forward(x); }
        Tensor1D operator()(const MaxPool& m) const { return maxpool_forward(x, m, nullptr); }
        Tensor1D operator()(const BatchNorm& bn) const { return batchnorm_forward_infer(x, bn); }
        Tensor1D operator()(const Dense& d) const { return dense_forward(x, d); }
        Tensor1D operator()(const Gap&) const { return gap_forward(x); }
        Tensor1D operator()(const ResidualBlock& r) const {
            output_shape(Layer{r}, {x.channels, x.length});
            Tensor1D h = relu_forward(conv1d_forward(x, r.conv1));
            Tensor1D s = conv1d_forward(h, r.conv2);
            for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] += x.values[i];
            return relu_forward(s);
        }
    };
    return std::visit(Visitor{x}, layer);
}

Tensor1D forward_infer(const std::vector<Layer>& layers, const Tensor1D& x) {
    Tensor1D cur = x;
    for (const Layer& l : layers) cur = forward_layer_infer(l, cur);
    return cur;
}

// --- batched training forward ------------------------------------------------

namespace {

void batchnorm_forward_train(BatchNorm& bn, const std::vector<Tensor1D>& xs, LayerTape& tape,
                             std::vector<Tensor1D>& out, bool update_running) {
    int batch = static_cast<int>(xs.size());
    int len = xs[0].length;
    double m = static_cast<double>(batch) * len;
    tape.mean.assign(bn.channels, 0.0);
    tape.var.assign(bn.channels, 0.0);
    tape.xhat.assign(xs.size(), Tensor1D(bn.channels, len));
    out.assign(xs.size(), Tensor1D(bn.channels, len));

#pragma omp parallel for schedule(static)
    for (int c = 0; c < bn.channels; ++c) {
        double mean = 0.0;
        for (int b = 0; b < batch; ++b) {
            for (int t = 0; t < len; ++t) mean += xs[b].at(c, t);
        }
        mean /= m;
        double var = 0.0;
        for (int b = 0; b < batch; ++b) {
            for (int t = 0; t < len; ++t) {
                double d = xs[b].at(c, t) - mean;
                var += d * d;
            }
        }
        var /= m;
        tape.mean[c] = mean;
        tape.var[c] = var;
        double inv = 1.0 / std::sqrt(var + bn.eps);
        for (int b = 0; b < batch; ++b) {
            for (int t = 0; t < len; ++t) {
                double xh = (xs[b].at(c, t) - mean) * inv;
                tape.xhat[b].at(c, t) = xh;
                out[b].at(c, t) = bn.gamma[c] * xh + bn.beta[c];
            }
        }
        if (update_running) {
            bn.run_mean[c] = bn.momentum * bn.run_mean[c] + (1.0 - bn.momentum) * mean;
            bn.run_var[c] = bn.momentum * bn.run_var[c] + (1.0 - bn.momentum) * var;
        }
    }
}

}  // namespace

ModelGrads zero_grads(const std::vector<Layer>& layers) {
    ModelGrads g(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        g[i].assign(layer_param_count(layers[i]), 0.0);
    }
    return g;
}

std::vector<Tensor1D> forward_train(std::vector<Layer>& layers, const std::vector<Tensor1D>& xs,
                                    Tape& tape, bool update_running) {
    if (xs.empty()) throw InvalidInput("forward_train needs a non-empty batch");
    tape.layers.assign(layers.size(), LayerTape{});
    std::vector<Tensor1D> cur = xs;
    int batch = static_cast<int>(xs.size());

    for (std::size_t li = 0; li < layers.size(); ++li) {
        LayerTape& lt = tape.layers[li];
        lt.x = cur;
        std::vector<Tensor1D> next(cur.size());

        if (auto* bn = std::get_if<BatchNorm>(&layers[li])) {
            batchnorm_forward_train(*bn, cur, lt, next, update_running);
        } else if (auto* mp = std::get_if<MaxPool>(&layers[li])) {
            lt.argmax.assign(cur.size(), {});
#pragma omp parallel for schedule(static)
            for (int b = 0; b < batch; ++b) {
                next[b] = maxpool_forward(cur[b], *mp, &lt.argmax[b]);
            }
        } else if (auto* rb = std::get_if<ResidualBlock>(&layers[li])) {
            lt.a1.assign(cur.size(), {});
            lt.h1.assign(cur.size(), {});
            lt.pre.assign(cur.size(), {});
#pragma omp parallel for schedule(static)
            for (int b = 0; b < batch; ++b) {
                output_shape(layers[li], {cur[b].channels, cur[b].length});
                lt.a1[b] = conv1d_forward(cur[b], rb->conv1);
                lt.h1[b] = relu_forward(lt.a1[b]);
                Tensor1D s = conv1d_forward(lt.h1[b], rb->conv2);
                for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] += cur[b].values[i];
                lt.pre[b] = s;
                next[b] = relu_forward(s);
            }
        } else {
            const Layer& l = layers[li];
#pragma omp parallel for schedule(static)
            for (int b = 0; b < batch; ++b) {
                next[b] = forward_layer_infer(l, cur[b]);
            }
        }
        cur = std::move(next);
    }
    return cur;
}

// --- batched backward ---------------------------------------------------------

namespace {

std::vector<Tensor1D> relu_backward_batch(const std::vector<Tensor1D>& pre,
                                          const std::vector<Tensor1D>& gs) {
    std::vector<Tensor1D> dx(gs.size());
    int batch = static_cast<int>(gs.size());
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        dx[b] = gs[b];
        for (std::size_t i = 0; i < dx[b].values.size(); ++i) {
            // derivative defined as 0 at exactly 0
            if (!(pre[b].values[i] > 0.0)) dx[b].values[i] = 0.0;
        }
    }
    return dx;
}

}  // namespace

std::vector<Tensor1D> backward(const std::vector<Layer>& layers, const Tape& tape,
                               std::vector<Tensor1D> upstream, ModelGrads& grads) {
    if (tape.layers.size() != layers.size() || grads.size() != layers.size()) {
        throw InvalidInput("backward: tape/grad structure does not match the layer stack");
    }
    int batch = static_cast<int>(upstream.size());

    for (std::size_t li = layers.size(); li-- > 0;) {
        const LayerTape& lt = tape.layers[li];
        if (lt.x.size() != upstream.size()) {
            throw InvalidInput("backward: tape batch does not match upstream batch");
        }
        std::vector<double>& g = grads[li];
        std::vector<Tensor1D> down(upstream.size());

        if (const auto* c = std::get_if<Conv1d>(&layers[li])) {
            std::size_t wn = c->w.size();
            conv1d_backward_batch(*c, lt.x, upstream, &down, g.data(), g.data() + wn);
        } else if (std::get_if<Relu>(&layers[li])) {
            down = relu_backward_batch(lt.x, upstream);
        } else if (const auto* mp = std::get_if<MaxPool>(&layers[li])) {
#pragma omp parallel for schedule(static)
            for (int b = 0; b < batch; ++b) {
                const Tensor1D& up = upstream[b];
                down[b] = Tensor1D(lt.x[b].channels, lt.x[b].length);
                for (int ch = 0; ch < up.channels; ++ch) {
                    for (int j = 0; j < up.length; ++j) {
                        int src = lt.argmax[b][static_cast<std::size_t>(ch) * up.length + j];
                        down[b].at(ch, src) += up.at(ch, j);
                    }
                }
            }
            (void)mp;
        } else if (const auto* bn = std::get_if<BatchNorm>(&layers[li])) {
            int len = lt.x[0].length;
            double m = static_cast<double>(batch) * len;
            for (int b = 0; b < batch; ++b) down[b] = Tensor1D(bn->channels, len);
#pragma omp parallel for schedule(static)
            for (int ch = 0; ch < bn->channels; ++ch) {
                double sum_g = 0.0, sum_gx = 0.0;
                for (int b = 0; b < batch; ++b) {
                    for (int t = 0; t < len; ++t) {
                        double gv = upstream[b].at(ch, t);
                        sum_g += gv;
                        sum_gx += gv * lt.xhat[b].at(ch, t);
                    }
                }
                g[ch] += sum_gx;                 // d/d gamma
                g[bn->channels + ch] += sum_g;   // d/d beta
                double inv = 1.0 / std::sqrt(lt.var[ch] + bn->eps);
                double scale = bn->gamma[ch] * inv / m;
                for (int b = 0; b < batch; ++b) {
                    for (int t = 0; t < len; ++t) {
                        double gv = upstream[b].at(ch, t);
                        double xh = lt.xhat[b].at(ch, t);
                        down[b].at(ch, t) = scale * (m * gv - sum_g - xh * sum_gx);
                    }
                }
            }
        } else if (const auto* d = std::get_if<Dense>(&layers[li])) {
            std::size_t wn = d->w.size();
#pragma omp parallel for schedule(static)
            for (int o = 0; o < d->out_features; ++o) {
                double* wg = g.data() + static_cast<std::size_t>(o) * d->in_features;
                double bacc = 0.0;
                for (int b = 0; b < batch; ++b) {
                    double gv = upstream[b].values[o];
                    bacc += gv;
                    const double* xv = lt.x[b].values.data();
                    for (int j = 0; j < d->in_features; ++j) wg[j] += gv * xv[j];
                }
                g[wn + o] += bacc;
            }
#pragma omp parallel for schedule(static)
            for (int b = 0; b < batch; ++b) {
                down[b] = Tensor1D(lt.x[b].channels, lt.x[b].length);
                for (int o = 0; o < d->out_features; ++o) {
                    double gv = upstream[b].values[o];
                    const double* wrow = d->w.data() + static_cast<std::size_t>(o) * d->in_features;
                    for (int j = 0; j < d->in_features; ++j) down[b].values[j] += gv * wrow[j];
                }
            }
        } else if (std::get_if<Gap>(&layers[li])) {
#pragma omp parallel for schedule(static)
            for (int b = 0; b < batch; ++b) {
                int len = lt.x[b].length;
                down[b] = Tensor1D(lt.x[b].channels, len);
                for (int ch = 0; ch < lt.x[b].channels; ++ch) {
                    double gv = upstream[b].values[ch] / len;
                    for (int t = 0; t < len; ++t) down[b].at(ch, t) = gv;
                }
            }
        } else if (const auto* rb = std::get_if<ResidualBlock>(&layers[li])) {
            std::vector<Tensor1D> ds = relu_backward_batch(lt.pre, upstream);
            std::size_t w1n = rb->conv1.w.size();
            std::size_t b1n = rb->conv1.b.size();
            std::size_t w2n = rb->conv2.w.size();
            std::vector<Tensor1D> dh1(upstream.size());
            conv1d_backward_batch(*rb->conv2, lt.h1, ds, &dh1, g.data() + w1n + b1n,
                                  g.data() + w1n + b1n + w2n);
            std::vector<Tensor1D> da1 = relu_backward_batch(lt.a1, dh1);
            conv1d_backward_batch(*rb->conv1, lt.x, da1, &down, g.data(), g.data() + w1n);
#pragma omp parallel for schedule(static)
            for (int b = 0; b < batch; ++b) {  // identity skip path
                for (std::size_t i = 0; i < down[b].values.size(); ++i) {
                    down[b].values[i] += ds[b].values[i];
                }
            }
        }
        upstream = std::move(down);
    }
    return upstream;
}

// --- parameter plumbing --------------------------------------------------------

std::size_t layer_param_count(const Layer& layer) {
    struct Visitor {
        std::size_t operator()(const Conv1d& c) const { return c.w.size() + c.b.size(); }
        std::size_t operator()(const Relu&) const { return 0; }
        std::size_t operator()(const MaxPool&) const { return 0; }
        std::size_t operator()(const BatchNorm& bn) const {
            return bn.gamma.size() + bn.beta.size();
        }
        std::size_t operator()(const Dense& d) const { return d.w.size() + d.b.size(); }
        std::size_t operator()(const Gap&) const { return 0; }
        std::size_t operator()(const ResidualBlock& r) const {
            return r.conv1.w.size() + r.conv1.b.size() + r.conv2.w.size() + r.conv2.b.size();
        }
    };
    return std::visit(Visitor{}, layer);
}

std::size_t param_count(const std::vector<Layer>& layers) {
    std::size_t n = 0;
    for (const Layer& l : layers) n += layer_param_count(l);
    return n;
}

namespace {

void append_range(std::vector<double>& out, const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
}

void take_range(std::vector<double>& dst, const double*& cursor) {
    std::copy(cursor, cursor + dst.size(), dst.begin());
    cursor += dst.size();
}

}  // namespace

void append_params(const Layer& layer, std::vector<double>& out) {
    if (const auto* c = std::get_if<Conv1d>(&layer)) {
        append_range(out, c->w);
        append_range(out, c->b);
    } else if (const auto* bn = std::get_if<BatchNorm>(&layer)) {
        append_range(out, bn->gamma);
        append_range(out, bn->beta);
    } else if (const auto* d = std::get_if<Dense>(&layer)) {
        append_range(out, d->w);
        append_range(out, d->b);
    } else if (const auto* r = std::get_if<ResidualBlock>(&layer)) {
        append_range(out, r->conv1.w);
        append_range(out, r->conv1.b);
        append_range(out, r->conv2.w);
        append_range(out, r->conv2.b);
    }
}

std::vector<double> param_vector(const std::vector<Layer>& layers) {
    std::vector<double> out;
    out.reserve(param_count(layers));
    for (const Layer& l : layers) append_params(l, out);
    return out;
}

void set_param_vector(std::vector<Layer>& layers, const std::vector<double>& params) {
    if (params.size() != param_count(layers)) {
        throw ShapeError("parameter vector length does not match the model");
    }
    const double* cur = params.data();
    for (Layer& l : layers) {
        if (auto* c = std::get_if<Conv1d>(&l)) {
            take_range(c->w, cur);
            take_range(c->b, cur);
        } else if (auto* bn = std::get_if<BatchNorm>(&l)) {
            take_range(bn->gamma, cur);
            take_range(bn->beta, cur);
        } else if (auto* d = std::get_if<Dense>(&l)) {
            take_range(d->w, cur);
            take_range(d->b, cur);
        } else if (auto* r = std::get_if<ResidualBlock>(&l)) {
            take_range(r->conv1.w, cur);
            take_range(r->conv1.b, cur);
            take_range(r->conv2.w, cur);
            take_range(r->conv2.b, cur);
        }
    }
}

std::vector<double> state_vector(const std::vector<Layer>& layers) {
    std::vector<double> out;
    for (const Layer& l : layers) {
        if (const auto* bn = std::get_if<BatchNorm>(&l)) {
            append_range(out, bn->run_mean);
            append_range(out, bn->run_var);
        }
    }
    return out;
}

void set_state_vector(std::vector<Layer>& layers, const std::vector<double>& state) {
    const double* cur = state.data();
    std::size_t need = 0;
    for (const Layer& l : layers) {
        if (const auto* bn = std::get_if<BatchNorm>(&l)) {
            need += bn->run_mean.size() + bn->run_var.size();
        }
    }
    if (state.size() != need) throw ShapeError("state vector length does not match the model");
    for (Layer& l : layers) {
        if (auto* bn = std::get_if<BatchNorm>(&l)) {
            take_range(bn->run_mean, cur);
            take_range(bn->run_var, cur);
        }
    }
}

}  // namespace vitals::nn
