#pragma once

// Disentangled graph prompting: two edge-weight prompt generators over a
// frozen GIN encoder, a shared label predictor, and a Mahalanobis score over
// the embeddings of both prompt graphs.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dgp/encoder.hpp"
#include "dgp/nn.hpp"
#include "dgp/scoring.hpp"

namespace dgp {

enum class Branches { Both, SpecificOnly, AgnosticOnly };

// Which embeddings define the statistics inside the distance loss.
// Prompted: each branch's own prompt embeddings, refit once per epoch.
// Unprompted: embeddings of the original graphs, fit once.
enum class DistanceReference { Prompted, Unprompted };

struct DgpConfig {
    double lambda = 1.0;   // class-agnostic loss weight
    double gamma = 1.0;    // branch mix at test time
    double alpha1 = 1e3;
    double alpha2 = 1e3;
    double lr = 1e-3;
    std::size_t epochs = 100;
    std::size_t batch_size = 128;
    std::size_t gen_hidden = 32;
    std::size_t pred_hidden = 32;
    double gen_init_bias = 2.0;
    Branches branches = Branches::Both;
    DistanceReference distance_reference = DistanceReference::Prompted;
    // Standardise generator inputs (training node representations) and
    // predictor inputs (unprompted training embeddings). Fixed, not trained.
    bool standardize = true;
    ScorerOptions scorer;
    // Early stopping on validation AUC; only active when a validation set is
    // supplied and patience > 0.
    std::size_t eval_every = 5;
    std::size_t patience = 0;
    std::uint64_t seed = 0;
};

enum class Variant { Full, V0, V1, V2 };
const char* variant_name(Variant v);
// V0: class-specific branch only. V1: class-agnostic branch only.
// V2: no distance loss.
DgpConfig apply_variant(DgpConfig cfg, Variant v);

// Two-layer MLP on concat(a_i, a_j) -> sigmoid. Final layer starts at
// weight 0 and bias init_bias, so every initial weight is sigmoid(init_bias).
ParamSet make_generator(std::size_t concat_dim, std::size_t hidden, double init_bias, Rng& rng);
ParamSet make_predictor(std::size_t embed_dim, std::size_t hidden, std::size_t classes, Rng& rng);
// Sets the fixed input shift and scale ("norm.*") of a generator or the
// predictor from the per-column mean and spread of rows.
void set_standardization(ParamSet& params, const Tensor& rows);

// Per-edge prompt weights (edge_count x 1) in (0, 1). node_reps is the
// unit-weight concatenated node representation of g under the frozen encoder.
ad::Var gen_edge_weights(const Graph& g, const Tensor& node_reps, ParamSet& gen);
ad::Var gen_edge_weights(const Graph& g, ParamSet& gen, GinEncoder& enc);

// Unit-weight concatenated node representations, no gradient.
Tensor node_representations(const Graph& g, GinEncoder& enc);

struct BranchOutput {
    ad::Var weights;    // edge_count x 1
    ad::Var h;          // 1 x proj_dim
    ad::Var log_z;      // 1 x C, log of the predicted class distribution
};

BranchOutput branch_forward(const Graph& g, const Tensor& node_reps, ParamSet& gen, GinEncoder& enc,
                            ParamSet& predictor);

struct DgpModel {
    GinEncoder encoder;  // frozen
    std::string encoder_hash;
    ParamSet gen1;
    ParamSet gen2;
    ParamSet predictor;
    std::size_t class_count = 0;
    MahalanobisScorer stats1;
    MahalanobisScorer stats2;
    DgpConfig config;

    // Fresh model around a frozen encoder.
    static DgpModel init(const GinEncoder& frozen_encoder, std::size_t class_count, const DgpConfig& cfg);
};

// Optional precomputed node representations, parallel to the batch.
using RepCache = std::span<const Tensor>;

ad::Var class_specific_loss(std::span<const LabeledGraph> batch, DgpModel& model, RepCache reps = {});
ad::Var class_agnostic_loss(std::span<const LabeledGraph> batch, DgpModel& model, RepCache reps = {});
ad::Var disentangle_loss(std::span<const LabeledGraph> batch, DgpModel& model, double lambda,
                         RepCache reps = {});
// alpha1 / mean MD(h1) + alpha2 / mean MD(h2) against the given statistics,
// which are held constant. A zero alpha drops its term.
ad::Var distance_loss(std::span<const LabeledGraph> batch, DgpModel& model, double alpha1, double alpha2,
                      const MahalanobisScorer& ref1, const MahalanobisScorer& ref2, RepCache reps = {});
ad::Var distance_loss(std::span<const LabeledGraph> batch, DgpModel& model, double alpha1, double alpha2,
                      RepCache reps = {});

// Prompt embeddings (rows) of every graph for one branch, no gradient.
Tensor branch_embeddings(std::span<const LabeledGraph> graphs, DgpModel& model, int branch, RepCache reps = {});
void refit_stats(std::span<const LabeledGraph> graphs, DgpModel& model, RepCache reps = {});

struct GraphScore {
    double score = 0.0;
    double md1 = 0.0;
    double md2 = 0.0;
};

// score = md1 + gamma * md2 for Branches::Both; md1 alone for SpecificOnly
// and md2 alone for AgnosticOnly. The predictor is not used.
GraphScore score_graph(const Graph& g, DgpModel& model, double gamma);
std::vector<GraphScore> score_graphs(std::span<const LabeledGraph> graphs, DgpModel& model, double gamma);

struct ValidationSet {
    std::vector<LabeledGraph> id;
    std::vector<LabeledGraph> ood;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double disentangle = 0.0;
    double distance = 0.0;
    double val_auc = -1.0;
};

struct TrainResult {
    DgpModel model;
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
};

// Alternating optimisation: per epoch, refit branch statistics, then per
// mini-batch an Adam step on the disentangle loss (generators + predictor)
// followed by an Adam step on the distance loss (generators only).
TrainResult train_dgp(std::span<const LabeledGraph> train, const GinEncoder& encoder, std::size_t class_count,
                      const DgpConfig& cfg, const ValidationSet* validation = nullptr,
                      std::ostream* log = nullptr);

// Model file: same container as encoder checkpoints, kind "dgp-model".
std::string serialize_model(const DgpModel& model);
DgpModel deserialize_model(const std::string& bytes, const GinEncoder& encoder);
void save_model(const DgpModel& model, const std::filesystem::path& path);
DgpModel load_model(const std::filesystem::path& path, const GinEncoder& encoder);

}  // namespace dgp
