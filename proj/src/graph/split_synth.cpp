#include <algorithm>
#include <numeric>
#include <set>

#include "dgp/graph.hpp"
#include "dgp/rng.hpp"

namespace dgp {

SplitSizes split_sizes(std::size_t id_count) {
    SplitSizes s;
    s.val = id_count / 10;
    s.test = id_count / 10;
    s.train = id_count - s.val - s.test;
    return s;
}

SplitBundle make_split(const GraphDataset& id_ds, const GraphDataset& ood_ds, std::uint64_t seed) {
    const std::size_t n = id_ds.size();
    const std::size_t required = 2 * ((n + 9) / 10);
    if (ood_ds.size() < required) {
        throw std::invalid_argument("OOD pool too small: need " + std::to_string(required) +
                                    " graphs, have " + std::to_string(ood_ds.size()));
    }
    const SplitSizes sizes = split_sizes(n);
    Rng rng(seed);

    std::vector<std::size_t> id_order(n);
    std::iota(id_order.begin(), id_order.end(), 0);
    rng.shuffle(id_order);
    std::vector<std::size_t> ood_order(ood_ds.size());
    std::iota(ood_order.begin(), ood_order.end(), 0);
    rng.shuffle(ood_order);

    SplitBundle b;
    std::size_t k = 0;
    for (; k < sizes.train; ++k) b.train_id.push_back(id_ds.graphs[id_order[k]]);
    for (std::size_t i = 0; i < sizes.val; ++i, ++k) b.val_id.push_back(id_ds.graphs[id_order[k]]);
    for (std::size_t i = 0; i < sizes.test; ++i, ++k) b.test_id.push_back(id_ds.graphs[id_order[k]]);
    std::size_t o = 0;
    for (std::size_t i = 0; i < sizes.val; ++i, ++o) b.val_ood.push_back(ood_ds.graphs[ood_order[o]]);
    for (std::size_t i = 0; i < sizes.test; ++i, ++o) b.test_ood.push_back(ood_ds.graphs[ood_order[o]]);
    return b;
}

namespace {

using PairSet = std::set<std::pair<std::size_t, std::size_t>>;

void add_pair(PairSet& s, std::size_t a, std::size_t b) {
    if (a != b) s.emplace(std::min(a, b), std::max(a, b));
}

void add_background(PairSet& s, std::size_t n, double density, Rng& rng) {
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (rng.bernoulli(density)) s.emplace(a, b);
}

Graph from_pairs(std::size_t n, const PairSet& s) {
    Graph g;
    g.node_count = n;
    g.edges.reserve(2 * s.size());
    for (const auto& [a, b] : s) {
        g.edges.push_back({a, b});
        g.edges.push_back({b, a});
    }
    g.features = Tensor(n, 1);
    return g;
}

std::size_t draw_nodes(std::size_t lo, std::size_t hi, Rng& rng) {
    if (hi < lo) throw std::invalid_argument("max_nodes < min_nodes");
    return lo + rng.index(hi - lo + 1);
}

}  // namespace

GraphDataset synth_id(std::size_t classes, std::size_t per_class, const MotifSpec& motif,
                      double bg_density, std::uint64_t seed, std::size_t max_degree) {
    if (classes < 2) throw std::invalid_argument("synth_id needs at least 2 classes");
    if (motif.min_nodes < motif.motifs_per_graph * (classes + 2))
        throw std::invalid_argument("min_nodes too small to hold the planted motifs");
    Rng rng(seed);
    GraphDataset ds;
    ds.name = "synth_id";
    ds.class_count = classes;
    for (std::size_t c = 0; c < classes; ++c) {
        const std::size_t cycle = c + 3;
        for (std::size_t k = 0; k < per_class; ++k) {
            const std::size_t n = draw_nodes(motif.min_nodes, motif.max_nodes, rng);
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            PairSet pairs;
            for (std::size_t m = 0; m < motif.motifs_per_graph; ++m) {
                const std::size_t base = m * cycle;
                for (std::size_t i = 0; i < cycle; ++i)
                    add_pair(pairs, perm[base + i], perm[base + (i + 1) % cycle]);
            }
            add_background(pairs, n, bg_density, rng);
            ds.graphs.push_back({from_pairs(n, pairs), c});
        }
    }
    return degree_features(ds, max_degree);
}

GraphDataset synth_ood(std::size_t count, const OodSpec& spec, double id_density, std::uint64_t seed,
                       std::size_t max_degree) {
    if (spec.min_nodes < spec.star_leaves + 1)
        throw std::invalid_argument("min_nodes too small to hold the star");
    Rng rng(seed);
    GraphDataset ds;
    ds.name = "synth_ood";
    ds.class_count = 1;
    const double density = std::min(1.0, spec.density_multiplier * id_density);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t n = draw_nodes(spec.min_nodes, spec.max_nodes, rng);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        PairSet pairs;
        for (std::size_t i = 1; i <= spec.star_leaves; ++i) add_pair(pairs, perm[0], perm[i]);
        add_background(pairs, n, density, rng);
        ds.graphs.push_back({from_pairs(n, pairs), 0});
    }
    return degree_features(ds, max_degree);
}

}  // namespace dgp
