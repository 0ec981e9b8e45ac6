#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vitals/nn.hpp"

namespace vitals::gradcheck {

struct CheckItem {
    std::string name;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct Report {
    std::vector<CheckItem> items;
    bool all_pass() const {
        for (const auto& i : items) {
            if (!i.pass) return false;
        }
        return true;
    }
};

// |a - n| / max(|a|, |n|, 1e-8), maximized over the vectors.
double max_rel_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

// Central-difference check of one layer stack under a fixed random linear
// readout. Compares every parameter gradient (up to max_params, sampled
// evenly) and every input gradient against (L(θ+h)-L(θ-h))/2h with
// h = 1e-5*max(1,|θ|). Inputs are redrawn until all ReLU pre-activations and
// max-pool runner-up gaps clear a margin safely above the perturbation size,
// so no finite difference ever crosses a kink. `analytic_scale` exists for
// fault-injection tests and must stay 1.0 otherwise.
CheckItem check_stack(const std::string& name, std::vector<nn::Layer> layers, int batch,
                      nn::Shape in_shape, std::uint64_t seed, double tolerance = 1e-5,
                      std::size_t max_params = 4096, double analytic_scale = 1.0);

// Every layer kind, the full FCN under log-cosh, and all four losses.
Report run_suite(std::uint64_t seed = 2024, double analytic_scale = 1.0);

}  // namespace vitals::gradcheck
