#include <algorithm>
#include <cmath>
#include <set>

#include "dgp/pretrain.hpp"

namespace dgp {

Augmentation Augmentation::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    Augmentation a;
    a.p = colon == std::string::npos ? 0.1 : std::stod(text.substr(colon + 1));
    if (kind == "node_drop") a.kind = Kind::NodeDrop;
    else if (kind == "edge_perturb") a.kind = Kind::EdgePerturb;
    else if (kind == "attr_mask") a.kind = Kind::AttrMask;
    else if (kind == "subgraph") a.kind = Kind::SubgraphSample;
    else throw std::invalid_argument("unknown augmentation '" + kind + "'");
    if (!(a.p >= 0.0 && a.p <= 1.0)) throw std::invalid_argument("augmentation parameter outside [0,1]");
    return a;
}

std::string Augmentation::str() const {
    const char* names[] = {"node_drop", "edge_perturb", "attr_mask", "subgraph"};
    std::string s = names[static_cast<int>(kind)];
    return s + ":" + std::to_string(p);
}

namespace {

Graph induced(const Graph& g, const std::vector<char>& keep) {
    std::vector<std::size_t> new_index(g.node_count, 0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.node_count; ++i)
        if (keep[i]) new_index[i] = n++;
    Graph out;
    out.node_count = n;
    out.features = Tensor(n, g.feature_dim());
    for (std::size_t i = 0; i < g.node_count; ++i)
        if (keep[i])
            std::copy(g.features.row_span(i).begin(), g.features.row_span(i).end(),
                      out.features.row_span(new_index[i]).begin());
    for (const auto& e : g.edges)
        if (keep[e.src] && keep[e.dst]) out.edges.push_back({new_index[e.src], new_index[e.dst]});
    return out;
}

Graph node_drop(const Graph& g, double p, Rng& rng) {
    if (g.node_count == 0) return g;
    std::vector<char> keep(g.node_count);
    bool any = false;
    for (std::size_t i = 0; i < g.node_count; ++i) {
        keep[i] = !rng.bernoulli(p);
        any = any || keep[i];
    }
    if (!any) keep[rng.index(g.node_count)] = 1;
    return induced(g, keep);
}

Graph edge_perturb(const Graph& g, double p, Rng& rng) {
    using Pair = std::pair<std::size_t, std::size_t>;
    std::set<Pair> pairs;
    for (const auto& e : g.edges)
        if (e.src != e.dst) pairs.emplace(std::min(e.src, e.dst), std::max(e.src, e.dst));
    std::set<Pair> removed;
    for (const auto& pr : pairs)
        if (rng.bernoulli(p)) removed.insert(pr);

    Graph out;
    out.node_count = g.node_count;
    out.features = g.features;
    for (const auto& e : g.edges)
        if (!removed.count({std::min(e.src, e.dst), std::max(e.src, e.dst)})) out.edges.push_back(e);

    const std::size_t n = g.node_count;
    const std::size_t total_pairs = n * (n - (n > 0 ? 1 : 0)) / 2;
    std::set<Pair> added;
    for (std::size_t k = 0; k < removed.size(); ++k) {
        if (pairs.size() + added.size() >= total_pairs) break;
        // Rejection sampling over unordered non-edges.
        while (true) {
            std::size_t a = rng.index(n), b = rng.index(n);
            if (a == b) continue;
            const Pair pr{std::min(a, b), std::max(a, b)};
            if (pairs.count(pr) || added.count(pr)) continue;
            added.insert(pr);
            out.edges.push_back({pr.first, pr.second});
            out.edges.push_back({pr.second, pr.first});
            break;
        }
    }
    return out;
}

Graph attr_mask(const Graph& g, double p, Rng& rng) {
    Graph out = g;
    for (std::size_t i = 0; i < g.node_count; ++i)
        if (rng.bernoulli(p))
            for (auto& v : out.features.row_span(i)) v = 0.0;
    return out;
}

Graph subgraph(const Graph& g, double ratio, Rng& rng) {
    const std::size_t n = g.node_count;
    if (n == 0) return g;
    const std::size_t target =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n))), 1, n);
    std::vector<std::vector<std::size_t>> nbrs(n);
    for (const auto& e : g.edges) {
        nbrs[e.src].push_back(e.dst);
        nbrs[e.dst].push_back(e.src);
    }
    std::vector<char> keep(n, 0);
    std::vector<std::size_t> frontier;
    std::size_t kept = 0;
    auto visit = [&](std::size_t v) {
        if (keep[v]) return;
        keep[v] = 1;
        ++kept;
        for (std::size_t u : nbrs[v])
            if (!keep[u]) frontier.push_back(u);
    };
    visit(rng.index(n));
    while (kept < target) {
        // Drop stale frontier entries, restart from a fresh node if exhausted.
        frontier.erase(std::remove_if(frontier.begin(), frontier.end(), [&](std::size_t v) { return keep[v]; }),
                       frontier.end());
        if (frontier.empty()) {
            std::vector<std::size_t> rest;
            for (std::size_t v = 0; v < n; ++v)
                if (!keep[v]) rest.push_back(v);
            visit(rest[rng.index(rest.size())]);
        } else {
            visit(frontier[rng.index(frontier.size())]);
        }
    }
    return induced(g, keep);
}

}  // namespace

Graph augment(const Graph& g, const Augmentation& aug, Rng& rng) {
    switch (aug.kind) {
        case Augmentation::Kind::NodeDrop: return node_drop(g, aug.p, rng);
        case Augmentation::Kind::EdgePerturb: return edge_perturb(g, aug.p, rng);
        case Augmentation::Kind::AttrMask: return attr_mask(g, aug.p, rng);
        case Augmentation::Kind::SubgraphSample: return subgraph(g, aug.p, rng);
    }
    return g;
}

GinEncoder perturb_params(const GinEncoder& enc, double eta, Rng& rng) {
    if (!(eta > 0.0)) throw std::invalid_argument("perturbation scale must be positive");
    GinEncoder out = enc;
    for (std::size_t i = 0; i < out.params.size(); ++i) {
        Tensor& t = out.params[i].value;
        double mean = 0.0;
        for (double v : t.values()) mean += v;
        mean /= static_cast<double>(t.size());
        double var = 0.0;
        for (double v : t.values()) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(t.size()));
        for (auto& v : t.values()) v += eta * sd * rng.normal();
    }
    return out;
}

}  // namespace dgp
