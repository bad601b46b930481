#pragma once

// Central-difference gradient checks against backward().

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dgp/autodiff.hpp"
#include "dgp/graph.hpp"
#include "dgp/rng.hpp"

namespace dgp::testing {

struct FdReport {
    double max_rel = 0.0;
    std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero entries from
// turning round-off into huge relative errors; fd_check raises it to 1e-3
// of the largest gradient entry.
inline double rel_error(double a, double n, double floor = 1e-6) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

inline FdReport fd_check(std::vector<ParamSet*> sets, const std::function<ad::Var()>& loss, double step = 1e-5,
                         double floor = 1e-6) {
    for (auto* ps : sets) ps->zero_grad();
    const ad::Var base = loss();
    ad::backward(base);
    double gmax = 0.0;
    for (auto* ps : sets)
        for (std::size_t i = 0; i < ps->size(); ++i)
            for (double g : (*ps)[i].grad.values()) gmax = std::max(gmax, std::abs(g));
    floor = std::max(floor, 1e-3 * gmax);
    FdReport rep;
    for (auto* ps : sets) {
        for (std::size_t i = 0; i < ps->size(); ++i) {
            Param& p = (*ps)[i];
            if (p.frozen) continue;
            const Tensor analytic = p.grad;
            for (std::size_t k = 0; k < p.value.size(); ++k) {
                const double keep = p.value[k];
                p.value[k] = keep + step;
                const double up = loss().item();
                p.value[k] = keep - step;
                const double down = loss().item();
                p.value[k] = keep;
                const double numeric = (up - down) / (2 * step);
                rep.max_rel = std::max(rep.max_rel, rel_error(analytic[k], numeric, floor));
                ++rep.checked;
            }
        }
    }
    for (auto* ps : sets) ps->zero_grad();
    return rep;
}

// Random undirected graph with dense random features.
inline Graph random_graph(Rng& rng, std::size_t n, std::size_t d, double p = 0.5) {
    Graph g;
    g.node_count = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) {
                g.edges.push_back({i, j});
                g.edges.push_back({j, i});
            }
    g.features = Tensor(n, d);
    for (std::size_t k = 0; k < g.features.size(); ++k) g.features[k] = rng.uniform(-1.0, 1.0);
    return g;
}

}  // namespace dgp::testing
