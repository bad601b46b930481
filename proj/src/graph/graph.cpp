#include <algorithm>
#include <set>
#include <sstream>

#include "dgp/graph.hpp"

namespace dgp {

std::vector<std::size_t> Graph::sources() const {
    std::vector<std::size_t> out(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) out[i] = edges[i].src;
    return out;
}

std::vector<std::size_t> Graph::targets() const {
    std::vector<std::size_t> out(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) out[i] = edges[i].dst;
    return out;
}

std::vector<std::size_t> Graph::out_degrees() const {
    std::vector<std::size_t> deg(node_count, 0);
    for (const auto& e : edges) ++deg[e.src];
    return deg;
}

void Graph::validate() const {
    for (const auto& e : edges) {
        if (e.src >= node_count || e.dst >= node_count) {
            std::ostringstream os;
            os << "edge (" << e.src << ", " << e.dst << ") outside node range " << node_count;
            throw std::invalid_argument(os.str());
        }
    }
    if (features.rows() != node_count)
        throw std::invalid_argument("feature rows do not match node count");
}

void GraphDataset::validate() const {
    for (const auto& lg : graphs) {
        lg.graph.validate();
        if (lg.graph.feature_dim() != feature_dim)
            throw std::invalid_argument("graph feature dim differs from dataset feature dim");
        if (lg.label >= class_count) throw std::invalid_argument("graph label >= class count");
    }
}

Graph permute_nodes(const Graph& g, const std::vector<std::size_t>& perm) {
    if (perm.size() != g.node_count) throw std::invalid_argument("permutation size mismatch");
    Graph out;
    out.node_count = g.node_count;
    out.features = Tensor(g.node_count, g.feature_dim());
    for (std::size_t i = 0; i < g.node_count; ++i)
        for (std::size_t j = 0; j < g.feature_dim(); ++j) out.features(perm[i], j) = g.features(i, j);
    out.edges.reserve(g.edges.size());
    for (const auto& e : g.edges) out.edges.push_back({perm[e.src], perm[e.dst]});
    return out;
}

GraphDataset degree_features(const GraphDataset& ds, std::size_t max_degree) {
    if (max_degree < 1) throw std::invalid_argument("max_degree must be >= 1");
    GraphDataset out = ds;
    out.feature_dim = max_degree + 1;
    for (auto& lg : out.graphs) {
        auto& g = lg.graph;
        const auto deg = g.out_degrees();
        g.features = Tensor(g.node_count, max_degree + 1);
        for (std::size_t i = 0; i < g.node_count; ++i) g.features(i, std::min(deg[i], max_degree)) = 1.0;
    }
    return out;
}

GraphDataset pad_features(const GraphDataset& ds, std::size_t dim) {
    if (dim < ds.feature_dim) throw std::invalid_argument("pad_features: target dim too small");
    if (dim == ds.feature_dim) return ds;
    GraphDataset out = ds;
    out.feature_dim = dim;
    for (auto& lg : out.graphs) {
        const Tensor& f = lg.graph.features;
        Tensor padded(f.rows(), dim);
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < f.cols(); ++j) padded(i, j) = f(i, j);
        lg.graph.features = std::move(padded);
    }
    return out;
}

namespace {

std::set<std::pair<std::size_t, std::size_t>> undirected_pairs(const Graph& g) {
    std::set<std::pair<std::size_t, std::size_t>> s;
    for (const auto& e : g.edges)
        if (e.src != e.dst) s.emplace(std::min(e.src, e.dst), std::max(e.src, e.dst));
    return s;
}

std::vector<std::vector<char>> adjacency(const Graph& g) {
    std::vector<std::vector<char>> adj(g.node_count, std::vector<char>(g.node_count, 0));
    for (const auto& [a, b] : undirected_pairs(g)) adj[a][b] = adj[b][a] = 1;
    return adj;
}

}  // namespace

std::size_t count_triangles(const Graph& g) {
    const auto adj = adjacency(g);
    const std::size_t n = g.node_count;
    std::size_t count = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            if (!adj[a][b]) continue;
            for (std::size_t c = b + 1; c < n; ++c)
                if (adj[a][c] && adj[b][c]) ++count;
        }
    return count;
}

std::size_t count_four_cycles(const Graph& g) {
    // Each 4-cycle a-b-c-d is counted once by fixing a as its smallest node
    // and requiring b < d for the two neighbours of a on the cycle.
    const auto adj = adjacency(g);
    const std::size_t n = g.node_count;
    std::size_t count = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            if (!adj[a][b]) continue;
            for (std::size_t d = b + 1; d < n; ++d) {
                if (!adj[a][d]) continue;
                for (std::size_t c = a + 1; c < n; ++c)
                    if (c != b && c != d && adj[b][c] && adj[c][d]) ++count;
            }
        }
    return count;
}

std::size_t max_out_degree(const Graph& g) {
    const auto deg = g.out_degrees();
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

}  // namespace dgp
