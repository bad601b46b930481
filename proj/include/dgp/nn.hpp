#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>

#include "dgp/autodiff.hpp"
#include "dgp/rng.hpp"

namespace dgp {

// Glorot-uniform weight (in x out) and zero bias registered as
// "<prefix>.weight" and "<prefix>.bias".
void add_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                Rng& rng);

// Two linear layers "<prefix>.0" and "<prefix>.1" with a ReLU between.
void add_mlp2(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::size_t out, Rng& rng);

ad::Var linear(const ad::Var& x, ParamSet& params, const std::string& prefix);
ad::Var mlp2(const ad::Var& x, ParamSet& params, const std::string& prefix);

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    struct Moments {
        Tensor m;
        Tensor v;
    };
    std::unordered_map<std::string, Moments> moments;
    std::int64_t step = 0;
};

// Bias-corrected Adam update on every non-frozen parameter, then zeroes all
// gradients in the set.
void adam_step(ParamSet& params, AdamState& state, const AdamOptions& opt);

}  // namespace dgp
