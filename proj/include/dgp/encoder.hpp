#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dgp/autodiff.hpp"
#include "dgp/graph.hpp"
#include "dgp/rng.hpp"

namespace dgp {

enum class Pooling { Sum, Mean };

struct GinArch {
    std::size_t feature_dim = 1;
    std::vector<std::size_t> layer_dims{32, 32, 32};
    std::size_t gin_hidden = 32;
    std::size_t proj_dim = 96;
    Pooling pooling = Pooling::Sum;

    std::size_t concat_dim() const;
};

// GIN layers "gin.<l>.eps" (1x1, init 0) and "gin.<l>.mlp.{0,1}", followed
// by a projection head "proj.{0,1}" over the layer-concatenated readout.
struct GinEncoder {
    GinArch arch;
    ParamSet params;

    static GinEncoder create(const GinArch& arch, Rng& rng);
    void freeze() { params.freeze_all(true); }
    bool frozen() const;
};

struct NodeReps {
    std::vector<ad::Var> layers;  // node_count x d_l each
    ad::Var concat;               // node_count x sum(d_l)
};

// Weighted GIN message passing over incoming directed edges:
//   a_i^(l) = MLP_l((1 + eps_l) a_i^(l-1) + sum_{(j->i)} w_ji a_j^(l-1)).
// weights is edge_count x 1, parallel to g.edges.
NodeReps encode_nodes(const Graph& g, const ad::Var& weights, GinEncoder& enc);
NodeReps encode_nodes(const Graph& g, GinEncoder& enc);  // unit weights

ad::Var readout(const NodeReps& reps, Pooling pooling = Pooling::Sum);
ad::Var project(const ad::Var& pooled, GinEncoder& enc);

ad::Var encode_graph(const Graph& g, const ad::Var& weights, GinEncoder& enc);
ad::Var encode_graph(const Graph& g, GinEncoder& enc);

// Row-stacked embeddings of many graphs under unit weights, no gradient.
Tensor embed_graphs(const std::vector<LabeledGraph>& graphs, GinEncoder& enc);

ad::Var unit_weights(const Graph& g);

// ---- checkpoint container ---------------------------------------------------
//
// 8-byte magic "DGPCKPT1", 4-byte little-endian length, UTF-8 JSON metadata
// with a "tensors" manifest of {name, shape}, then little-endian float64
// payloads in manifest order.

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

struct NamedTensor {
    std::string name;
    Tensor value;
};

struct Container {
    nlohmann::json meta;
    std::vector<NamedTensor> tensors;

    const Tensor& tensor(const std::string& name) const;
};

std::string serialize_container(const Container& c);
Container deserialize_container(const std::string& bytes);
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

struct EncoderCheckpoint {
    GinEncoder encoder;
    std::string pretrain_method = "none";
    nlohmann::json hyperparams = nlohmann::json::object();
};

std::string serialize_checkpoint(const EncoderCheckpoint& ckpt);
EncoderCheckpoint deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const EncoderCheckpoint& ckpt, const std::filesystem::path& path);
// When expected_feature_dim is non-zero, a mismatch is an error.
EncoderCheckpoint load_checkpoint(const std::filesystem::path& path,
                                  std::size_t expected_feature_dim = 0);

// SHA-256 of the parameter payload (names, shapes, values).
std::string encoder_hash(const GinEncoder& enc);

}  // namespace dgp
