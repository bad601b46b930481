#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgp/tensor.hpp"

namespace dgp {

struct Edge {
    std::size_t src = 0;
    std::size_t dst = 0;
    bool operator==(const Edge&) const = default;
};

// Directed edge list over node_count nodes with a node_count x d feature
// matrix. Undirected graphs carry both directions.
struct Graph {
    std::size_t node_count = 0;
    std::vector<Edge> edges;
    Tensor features;

    std::size_t edge_count() const { return edges.size(); }
    std::size_t feature_dim() const { return features.cols(); }
    std::vector<std::size_t> sources() const;
    std::vector<std::size_t> targets() const;
    std::vector<std::size_t> out_degrees() const;

    // Throws std::invalid_argument when an edge index or the feature shape
    // is inconsistent with node_count.
    void validate() const;
    bool operator==(const Graph&) const = default;
};

struct LabeledGraph {
    Graph graph;
    std::size_t label = 0;
    bool operator==(const LabeledGraph&) const = default;
};

struct GraphDataset {
    std::string name;
    std::vector<LabeledGraph> graphs;
    std::size_t class_count = 1;
    std::size_t feature_dim = 1;

    std::size_t size() const { return graphs.size(); }
    void validate() const;
    bool operator==(const GraphDataset&) const = default;
};

struct SplitBundle {
    std::vector<LabeledGraph> train_id;
    std::vector<LabeledGraph> val_id;
    std::vector<LabeledGraph> val_ood;
    std::vector<LabeledGraph> test_id;
    std::vector<LabeledGraph> test_ood;
};

// Returns g with nodes relabelled so that old node i becomes perm[i].
Graph permute_nodes(const Graph& g, const std::vector<std::size_t>& perm);

// ---- TU text format ---------------------------------------------------------

class ParseError : public std::runtime_error {
public:
    ParseError(const std::filesystem::path& file, std::size_t line, const std::string& what);
    const std::filesystem::path& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::filesystem::path file_;
    std::size_t line_;
};

struct TuOptions {
    // Add the reverse of any edge whose reverse is not listed.
    bool symmetrize = true;
};

GraphDataset parse_tu_dataset(const std::filesystem::path& dir, const std::string& name,
                              const TuOptions& opts = {});

// Writes A, graph_indicator, graph_labels and node_attributes files. Node
// features are stored as attributes, so parsing the output reproduces ds.
void write_tu_dataset(const GraphDataset& ds, const std::filesystem::path& dir);

// ---- featurization and splitting --------------------------------------------

inline constexpr std::size_t kDefaultMaxDegree = 32;

// One-hot of min(out-degree, max_degree); feature_dim = max_degree + 1.
GraphDataset degree_features(const GraphDataset& ds, std::size_t max_degree = kDefaultMaxDegree);

// Zero-pads feature columns up to dim (no-op when already that wide).
GraphDataset pad_features(const GraphDataset& ds, std::size_t dim);

struct SplitSizes {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
};
SplitSizes split_sizes(std::size_t id_count);

SplitBundle make_split(const GraphDataset& id_ds, const GraphDataset& ood_ds, std::uint64_t seed);

// ---- synthetic benchmark ----------------------------------------------------

struct MotifSpec {
    std::size_t min_nodes = 16;
    std::size_t max_nodes = 24;
    std::size_t motifs_per_graph = 3;
};

// OOD family: Erdos-Renyi background at density_multiplier x the ID density
// with a planted star.
struct OodSpec {
    std::size_t min_nodes = 16;
    std::size_t max_nodes = 24;
    double density_multiplier = 2.0;
    std::size_t star_leaves = 6;
};

// Class c plants motifs_per_graph disjoint cycles of length c + 3 (class 0
// triangles, class 1 4-cycles, ...) onto a G(n, bg_density) background.
GraphDataset synth_id(std::size_t classes, std::size_t per_class, const MotifSpec& motif,
                      double bg_density, std::uint64_t seed,
                      std::size_t max_degree = kDefaultMaxDegree);

GraphDataset synth_ood(std::size_t count, const OodSpec& spec, double id_density,
                       std::uint64_t seed, std::size_t max_degree = kDefaultMaxDegree);

// Subgraph census helpers (undirected view of the edge list).
std::size_t count_triangles(const Graph& g);
std::size_t count_four_cycles(const Graph& g);
std::size_t max_out_degree(const Graph& g);

}  // namespace dgp
