#include <doctest.h>

#include <cmath>

#include "vitals/gradcheck.hpp"
#include "vitals/model.hpp"
#include "vitals/nn.hpp"
#include "vitals/rng.hpp"
#include "vitals/train.hpp"

using namespace vitals;

TEST_CASE("max_rel_error flags disagreement and ignores tiny magnitudes") {
    CHECK(gradcheck::max_rel_error({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(gradcheck::max_rel_error({1.0}, {1.1}) == doctest::Approx(0.1 / 1.1).epsilon(1e-12));
    CHECK(gradcheck::max_rel_error({0.0}, {1e-12}) < 1e-3);
}

TEST_CASE("linear model under mse is exact to rounding") {
    // y = w*x + b through a 1x1 conv; the quadratic loss makes central
    // differences exact up to floating-point noise.
    nn::Conv1d c;
    c.in_channels = 1;
    c.out_channels = 1;
    c.kernel = 1;
    c.w = {0.75};
    c.b = {0.25};
    auto item = gradcheck::check_stack("linear", {c, nn::Gap{}}, 2, {1, 8}, 99, 1e-9);
    CHECK(item.pass);
    CHECK(item.max_rel_err < 1e-9);
}

TEST_CASE("full suite passes at its tolerances") {
    gradcheck::Report rep = gradcheck::run_suite();
    CHECK(rep.items.size() >= 13);  // 8 layer items + full model + 4 losses
    for (const auto& item : rep.items) {
        INFO(item.name, " rel err ", item.max_rel_err);
        CHECK(item.pass);
        CHECK(item.max_rel_err < item.tolerance);
    }
}

TEST_CASE("a planted 10 percent gradient fault is detected") {
    gradcheck::Report rep = gradcheck::run_suite(2024, 1.1);
    CHECK_FALSE(rep.all_pass());
    double worst = 0.0;
    for (const auto& item : rep.items) worst = std::max(worst, item.max_rel_err);
    CHECK(worst > 1e-2);
}

TEST_CASE("full FCN with log-cosh clears 1e-5 (suite item)") {
    gradcheck::Report rep = gradcheck::run_suite();
    bool found = false;
    for (const auto& item : rep.items) {
        if (item.name == "model_fcn_logcosh") {
            found = true;
            CHECK(item.max_rel_err < 1e-5);
        }
    }
    CHECK(found);
}
