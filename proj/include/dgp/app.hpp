#pragma once

// Experiment configuration and the subcommands behind the `dgp` tool.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "dgp/graph.hpp"
#include "dgp/metrics.hpp"
#include "dgp/pretrain.hpp"
#include "dgp/prompt.hpp"

namespace dgp {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Featurizer { Degree, Native };

struct DataSide {
    bool synthetic = true;
    std::filesystem::path dir;  // TU directory when not synthetic
    std::string name;
};

struct SyntheticSpec {
    std::size_t classes = 2;
    std::size_t per_class = 150;
    MotifSpec motif;
    double density = 0.1;
    OodSpec ood;
    std::size_t ood_count = 0;  // 0: the minimum the split needs
};

struct GridSpec {
    std::vector<double> lambda{1.0};
    std::vector<double> gamma{1.0};
    std::vector<double> alpha1{1e3};
    std::vector<double> alpha2{1e3};
    std::vector<double> lr{1e-3};

    std::size_t cardinality() const;
};

struct ExperimentConfig {
    DataSide id;
    DataSide ood;
    SyntheticSpec synth;
    Featurizer features = Featurizer::Degree;
    std::size_t max_degree = kDefaultMaxDegree;
    bool pretrain_enabled = true;  // false: random encoder
    PretrainConfig pretrain;
    DgpConfig dgp;
    GridSpec grid;
    std::size_t repeats = 1;  // seeds per ablation row
    std::uint64_t seed = 0;
    std::filesystem::path out = "runs/default";
    std::filesystem::path encoder;  // empty: <out>/encoder.ckpt
    std::filesystem::path model;    // empty: <out>/model.dgp
    std::filesystem::path scores;   // empty: <out>/scores.csv
    std::string split = "test";     // test | val, for score and dump-prompts
};

// key=value lines, '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
// Canonical key=value text covering every key; parses back to the same config.
std::string config_text(const ExperimentConfig& cfg);
nlohmann::json config_json(const ExperimentConfig& cfg);

struct ConfigKey {
    std::string key;
    std::string doc;
};
const std::vector<ConfigKey>& config_keys();

// ---- stages ------------------------------------------------------------------

struct Datasets {
    GraphDataset id;
    GraphDataset ood;
};

Datasets load_datasets(const ExperimentConfig& cfg);
SplitBundle split_datasets(const ExperimentConfig& cfg, const Datasets& ds);

// Stage seeds fan out from the master seed by label.
PretrainConfig pretrain_config(const ExperimentConfig& cfg, std::size_t feature_dim);
DgpConfig dgp_config(const ExperimentConfig& cfg);
ScorerOptions baseline_scorer(const ExperimentConfig& cfg);

EncoderCheckpoint run_pretrain(const ExperimentConfig& cfg, const SplitBundle& split, std::ostream* log = nullptr);
TrainResult run_train(const ExperimentConfig& cfg, const DgpConfig& dgp, const GinEncoder& frozen,
                      const SplitBundle& split, std::size_t class_count, std::ostream* log = nullptr);

ScoreTable score_split(DgpModel& model, const std::vector<LabeledGraph>& id,
                       const std::vector<LabeledGraph>& ood, double gamma);
// Frozen-encoder Mahalanobis baseline fit on the training split.
ScoreTable baseline_scores(const ExperimentConfig& cfg, const GinEncoder& frozen, const SplitBundle& split);
DetectionMetrics table_metrics(const ScoreTable& t);

// ---- grid --------------------------------------------------------------------

struct GridCell {
    double lambda = 0;
    double gamma = 0;
    double alpha1 = 0;
    double alpha2 = 0;
    double lr = 0;
    double val_auc = 0;

    std::vector<double> tuple() const { return {lambda, gamma, alpha1, alpha2, lr}; }
};

// Trains once per training configuration and returns the validation AUC for
// every gamma, in order.
using CellEvaluator = std::function<std::vector<double>(const DgpConfig& cfg, const std::vector<double>& gammas)>;

struct GridResult {
    std::vector<GridCell> cells;  // in sweep order
    GridCell best;
};

// Highest validation AUC wins; ties go to the lexicographically smaller tuple
// (lambda, gamma, alpha1, alpha2, lr).
GridResult run_grid(const GridSpec& spec, const DgpConfig& base, const CellEvaluator& eval);
void write_grid_csv(const GridResult& r, const std::filesystem::path& path);

// ---- prompt dump -----------------------------------------------------------

struct PromptEdge {
    std::string graph_id;
    std::size_t u = 0;
    std::size_t v = 0;  // u < v, or u -> v when the reverse edge is missing
    double w1_uv = 0, w1_vu = 0, w1_avg = 0;
    double w2_uv = 0, w2_vu = 0, w2_avg = 0;
    bool has_reverse = false;
};

std::vector<PromptEdge> dump_prompts(const Graph& g, const std::string& graph_id, DgpModel& model);

// ---- commands ----------------------------------------------------------------

int cmd_synth(const ExperimentConfig& cfg, std::ostream& log);
int cmd_pretrain(const ExperimentConfig& cfg, std::ostream& log);
int cmd_train(const ExperimentConfig& cfg, std::ostream& log);
int cmd_score(const ExperimentConfig& cfg, std::ostream& log);
int cmd_eval(const ExperimentConfig& cfg, std::ostream& log);
int cmd_pipeline(const ExperimentConfig& cfg, std::ostream& log);
int cmd_grid(const ExperimentConfig& cfg, std::ostream& log);
int cmd_ablate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_dump_prompts(const ExperimentConfig& cfg, std::ostream& log);

int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& log);

struct PipelineResult {
    DetectionMetrics dgp;
    DetectionMetrics baseline;
    std::string encoder_hash;
    std::vector<EpochRecord> history;
};

// Whole pipeline in memory, no files written.
PipelineResult run_pipeline(const ExperimentConfig& cfg, std::ostream* log = nullptr);

struct AblationRow {
    Variant variant = Variant::Full;
    std::vector<double> auc;  // per seed
    std::vector<double> aupr;
    std::vector<double> fpr95;
};

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, std::ostream* log = nullptr);
double median(std::vector<double> v);

}  // namespace dgp
