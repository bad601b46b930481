#include "dgp/nn.hpp"

#include <cmath>

namespace dgp {

void add_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Tensor w(in, out);
    for (auto& v : w.values()) v = rng.uniform(-limit, limit);
    params.add(prefix + ".weight", std::move(w));
    params.add(prefix + ".bias", Tensor(1, out));
}

void add_mlp2(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::size_t out, Rng& rng) {
    add_linear(params, prefix + ".0", in, hidden, rng);
    add_linear(params, prefix + ".1", hidden, out, rng);
}

ad::Var linear(const ad::Var& x, ParamSet& params, const std::string& prefix) {
    return ad::add_bias(ad::matmul(x, ad::leaf(params.at(prefix + ".weight"))),
                        ad::leaf(params.at(prefix + ".bias")));
}

ad::Var mlp2(const ad::Var& x, ParamSet& params, const std::string& prefix) {
    return linear(ad::relu(linear(x, params, prefix + ".0")), params, prefix + ".1");
}

void adam_step(ParamSet& params, AdamState& state, const AdamOptions& opt) {
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(opt.beta1, t);
    const double c2 = 1.0 - std::pow(opt.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param& p = params[i];
        if (p.frozen) continue;
        auto& mom = state.moments[p.name];
        if (!mom.m.same_shape(p.value)) {
            mom.m = Tensor(p.value.rows(), p.value.cols());
            mom.v = Tensor(p.value.rows(), p.value.cols());
        }
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            const double g = p.grad[k];
            mom.m[k] = opt.beta1 * mom.m[k] + (1.0 - opt.beta1) * g;
            mom.v[k] = opt.beta2 * mom.v[k] + (1.0 - opt.beta2) * g * g;
            const double m_hat = mom.m[k] / c1;
            const double v_hat = mom.v[k] / c2;
            p.value[k] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
        }
    }
    params.zero_grad();
}

}  // namespace dgp
