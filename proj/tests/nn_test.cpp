#include <doctest.h>

#include <cmath>

#include "vitals/errors.hpp"
#include "vitals/nn.hpp"
#include "vitals/ref.hpp"
#include "vitals/rng.hpp"

using namespace vitals;
using namespace vitals::nn;

namespace {

Conv1d conv_spec(int in_ch, int out_ch, int kernel, int stride = 1,
                 Padding pad = Padding::Same) {
    Conv1d c;
    c.in_channels = in_ch;
    c.out_channels = out_ch;
    c.kernel = kernel;
    c.stride = stride;
    c.padding = pad;
    c.w.assign(static_cast<std::size_t>(out_ch) * in_ch * kernel, 0.0);
    c.b.assign(static_cast<std::size_t>(out_ch), 0.0);
    return c;
}

Tensor1D random_tensor(int ch, int len, SplitMix64& rng, double scale = 1.0) {
    Tensor1D t(ch, len);
    for (double& v : t.values) v = rng.next_symmetric(scale);
    return t;
}

}  // namespace

TEST_CASE("conv1d identity kernel and sliding sum") {
    Conv1d ident = conv_spec(1, 1, 1);
    ident.w = {1.0};
    Tensor1D x(1, 5);
    x.values = {3.0, -1.0, 4.0, 1.0, -5.0};
    Tensor1D y = conv1d_forward(x, ident);
    CHECK(y.values == x.values);

    Conv1d sums = conv_spec(1, 1, 3, 1, Padding::Valid);
    sums.w = {1.0, 1.0, 1.0};
    Tensor1D z(1, 4);
    z.values = {1.0, 2.0, 3.0, 4.0};
    Tensor1D s = conv1d_forward(z, sums);
    REQUIRE(s.length == 2);
    CHECK(s.values[0] == 6.0);
    CHECK(s.values[1] == 9.0);
}

TEST_CASE("conv1d matches the triple-loop oracle over random shapes") {
    SplitMix64 rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        int in_ch = 1 + static_cast<int>(rng.next_below(4));
        int out_ch = 1 + static_cast<int>(rng.next_below(8));
        int kernel = 1 + 2 * static_cast<int>(rng.next_below(4));  // odd
        bool same = rng.next_below(2) == 0;
        int stride = same ? 1 : 1 + static_cast<int>(rng.next_below(2));
        int len = kernel + static_cast<int>(rng.next_below(40));
        Conv1d c = conv_spec(in_ch, out_ch, kernel, stride, same ? Padding::Same : Padding::Valid);
        for (double& w : c.w) w = rng.next_symmetric(1.0);
        for (double& b : c.b) b = rng.next_symmetric(0.5);
        Tensor1D x = random_tensor(in_ch, len, rng);

        Tensor1D fast = conv1d_forward(x, c);
        Tensor1D slow = ref::conv1d_forward(x, c);
        REQUIRE(fast.length == slow.length);
        for (std::size_t i = 0; i < fast.values.size(); ++i) {
            CHECK(std::abs(fast.values[i] - slow.values[i]) < 1e-12);
        }
        if (same && stride == 1) CHECK(fast.length == len);
    }
}

TEST_CASE("conv1d rejects channel mismatch") {
    Conv1d c = conv_spec(2, 3, 3);
    Tensor1D x(1, 8);
    CHECK_THROWS_AS(conv1d_forward(x, c), ShapeError);
}

TEST_CASE("relu forward and subgradient at zero") {
    Tensor1D x(1, 3);
    x.values = {-1.0, 0.0, 2.0};
    Tensor1D y = relu_forward(x);
    CHECK(y.values[0] == 0.0);
    CHECK(y.values[1] == 0.0);
    CHECK(y.values[2] == 2.0);

    std::vector<Layer> stack{Relu{}};
    Tape tape;
    std::vector<Tensor1D> out = forward_train(stack, {x}, tape, false);
    ModelGrads grads = zero_grads(stack);
    Tensor1D up(1, 3);
    up.values = {1.0, 1.0, 1.0};
    auto dx = backward(stack, tape, {up}, grads);
    CHECK(dx[0].values[0] == 0.0);
    CHECK(dx[0].values[1] == 0.0);  // derivative at exactly 0 is 0
    CHECK(dx[0].values[2] == 1.0);
    CHECK(out[0].values[2] == 2.0);
}

TEST_CASE("maxpool values, floor length rule, tie to earliest") {
    Tensor1D x(1, 4);
    x.values = {1.0, 3.0, 2.0, 2.0};
    std::vector<int> argmax;
    Tensor1D y = maxpool_forward(x, MaxPool{}, &argmax);
    REQUIRE(y.length == 2);
    CHECK(y.values[0] == 3.0);
    CHECK(y.values[1] == 2.0);
    CHECK(argmax[1] == 2);  // tie in window {2,2} routes to the earlier index

    Tensor1D odd(1, 75);
    for (int t = 0; t < 75; ++t) odd.values[static_cast<std::size_t>(t)] = t;
    CHECK(maxpool_forward(odd, MaxPool{}, nullptr).length == 37);
}

TEST_CASE("batchnorm infer identity and train-mode batch statistics") {
    BatchNorm bn;
    bn.channels = 2;
    bn.gamma = {1.0, 1.0};
    bn.beta = {0.0, 0.0};
    bn.run_mean = {0.0, 0.0};
    bn.run_var = {1.0, 1.0};
    SplitMix64 rng(7);
    Tensor1D x = random_tensor(2, 6, rng);
    Tensor1D y = batchnorm_forward_infer(x, bn);
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        CHECK(y.values[i] == doctest::Approx(x.values[i]).epsilon(1e-9));
    }

    std::vector<Layer> stack{bn};
    std::vector<Tensor1D> batch;
    for (int b = 0; b < 4; ++b) batch.push_back(random_tensor(2, 6, rng, 3.0));
    Tape tape;
    auto out = forward_train(stack, batch, tape, true);
    for (int c = 0; c < 2; ++c) {
        double mean = 0.0, var = 0.0;
        for (const auto& t : out) {
            for (int i = 0; i < 6; ++i) mean += t.at(c, i);
        }
        mean /= 24.0;
        for (const auto& t : out) {
            for (int i = 0; i < 6; ++i) var += (t.at(c, i) - mean) * (t.at(c, i) - mean);
        }
        var /= 24.0;
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(var - 1.0) < 1e-3);  // eps in the denominator shifts variance slightly
    }
    // running stats moved toward the batch stats
    const auto& bn_after = std::get<BatchNorm>(stack[0]);
    CHECK(bn_after.run_mean[0] != 0.0);
    CHECK(bn_after.run_var[0] != 1.0);
}

TEST_CASE("dense identity and 2x2 example") {
    Dense ident;
    ident.in_features = 3;
    ident.out_features = 3;
    ident.w = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    ident.b = {0, 0, 0};
    Tensor1D x(3, 1);
    x.values = {4.0, -2.0, 9.0};
    CHECK(dense_forward(x, ident).values == x.values);

    Dense d;
    d.in_features = 2;
    d.out_features = 2;
    d.w = {1, 2, 3, 4};
    d.b = {0, 0};
    Tensor1D v(2, 1);
    v.values = {1.0, 1.0};
    Tensor1D y = dense_forward(v, d);
    CHECK(y.values[0] == 3.0);
    CHECK(y.values[1] == 7.0);
}

TEST_CASE("gap means and constant channels") {
    Tensor1D x(1, 3);
    x.values = {2.0, 4.0, 6.0};
    CHECK(gap_forward(x).values[0] == 4.0);

    Tensor1D c(2, 17);
    for (int t = 0; t < 17; ++t) {
        c.at(0, t) = -3.5;
        c.at(1, t) = 11.0;
    }
    Tensor1D y = gap_forward(c);
    CHECK(y.values[0] == doctest::Approx(-3.5).epsilon(1e-15));
    CHECK(y.values[1] == doctest::Approx(11.0).epsilon(1e-15));

    SplitMix64 rng(13);
    Tensor1D r = random_tensor(4, 25, rng);
    Tensor1D g = gap_forward(r);
    for (int ch = 0; ch < 4; ++ch) {
        double acc = 0.0;
        for (int t = 0; t < 25; ++t) acc += r.at(ch, t);
        CHECK(std::abs(g.values[static_cast<std::size_t>(ch)] - acc / 25.0) < 1e-12);
    }
}

TEST_CASE("gap backward spreads the upstream gradient uniformly") {
    std::vector<Layer> stack{Gap{}};
    SplitMix64 rng(19);
    Tensor1D x = random_tensor(3, 10, rng);
    Tape tape;
    forward_train(stack, {x}, tape, false);
    ModelGrads grads = zero_grads(stack);
    Tensor1D up(3, 1);
    up.values = {0.3, -1.2, 2.0};
    auto dx = backward(stack, tape, {up}, grads);
    for (int c = 0; c < 3; ++c) {
        for (int t = 0; t < 10; ++t) {
            CHECK(dx[0].at(c, t) == doctest::Approx(up.values[static_cast<std::size_t>(c)] / 10.0));
        }
    }
}

TEST_CASE("conv backward: zero upstream gives zero parameter grads, identity kernel passes grad") {
    Conv1d ident = conv_spec(1, 1, 1);
    ident.w = {1.0};
    std::vector<Layer> stack{ident};
    SplitMix64 rng(23);
    Tensor1D x = random_tensor(1, 12, rng);
    Tape tape;
    forward_train(stack, {x}, tape, false);

    ModelGrads grads = zero_grads(stack);
    Tensor1D zero_up(1, 12);
    auto dx0 = backward(stack, tape, {zero_up}, grads);
    for (double g : grads[0]) CHECK(g == 0.0);
    for (double v : dx0[0].values) CHECK(v == 0.0);

    Tape tape2;
    forward_train(stack, {x}, tape2, false);
    ModelGrads grads2 = zero_grads(stack);
    Tensor1D up = random_tensor(1, 12, rng);
    auto dx = backward(stack, tape2, {up}, grads2);
    for (std::size_t i = 0; i < up.values.size(); ++i) {
        CHECK(dx[0].values[i] == doctest::Approx(up.values[i]).epsilon(1e-15));
    }
}

TEST_CASE("forward passes are bit-deterministic") {
    SplitMix64 rng(29);
    Conv1d c = conv_spec(3, 5, 5);
    for (double& w : c.w) w = rng.next_symmetric(1.0);
    Tensor1D x = random_tensor(3, 40, rng);
    Tensor1D a = conv1d_forward(x, c);
    Tensor1D b = conv1d_forward(x, c);
    CHECK(a.values == b.values);
}

TEST_CASE("same-padded stride-1 shape algebra across layer kinds") {
    Shape s{3, 300};
    s = output_shape(Layer{conv_spec(3, 16, 7)}, s);
    CHECK(s == Shape{16, 300});
    s = output_shape(Layer{Relu{}}, s);
    s = output_shape(Layer{MaxPool{}}, s);
    CHECK(s == Shape{16, 150});
    Dense d;
    d.in_features = 16 * 150;
    d.out_features = 4;
    d.w.assign(static_cast<std::size_t>(d.in_features) * 4, 0.0);
    d.b.assign(4, 0.0);
    s = output_shape(Layer{d}, s);
    CHECK(s == Shape{4, 1});
    CHECK_THROWS_AS(output_shape(Layer{d}, Shape{4, 1}), ShapeError);
}

TEST_CASE("parameter vector round trip preserves layer values") {
    SplitMix64 rng(31);
    Conv1d c = conv_spec(2, 3, 3);
    for (double& w : c.w) w = rng.next_symmetric(1.0);
    BatchNorm bn;
    bn.channels = 3;
    bn.gamma = {1.0, 2.0, 3.0};
    bn.beta = {-1.0, 0.0, 1.0};
    bn.run_mean = {0.5, 0.5, 0.5};
    bn.run_var = {2.0, 2.0, 2.0};
    std::vector<Layer> layers{c, bn, Relu{}};

    CHECK(param_count(layers) == c.w.size() + c.b.size() + 6);
    auto params = param_vector(layers);
    CHECK(params.size() == param_count(layers));

    std::vector<Layer> other{conv_spec(2, 3, 3), BatchNorm{bn}, Relu{}};
    std::get<BatchNorm>(other[1]).gamma.assign(3, 0.0);
    set_param_vector(other, params);
    CHECK(param_vector(other) == params);

    auto state = state_vector(layers);
    CHECK(state.size() == 6);  // mean + var for 3 channels
    set_state_vector(other, state);
    CHECK(state_vector(other) == state);
}
