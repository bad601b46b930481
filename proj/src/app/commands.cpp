#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dgp/app.hpp"

namespace dgp {

namespace {

namespace fs = std::filesystem;

fs::path or_default(const fs::path& p, const fs::path& out, const char* name) { return p.empty() ? out / name : p; }

fs::path encoder_path(const ExperimentConfig& c) { return or_default(c.encoder, c.out, "encoder.ckpt"); }
fs::path model_path(const ExperimentConfig& c) { return or_default(c.model, c.out, "model.dgp"); }
fs::path scores_path(const ExperimentConfig& c) { return or_default(c.scores, c.out, "scores.csv"); }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string history_csv(const std::vector<EpochRecord>& h) {
    std::ostringstream os;
    os << "epoch,disentangle,distance,val_auc\n";
    for (const auto& r : h)
        os << r.epoch << ',' << format_double(r.disentangle) << ',' << format_double(r.distance) << ','
           << format_double(r.val_auc) << '\n';
    return os.str();
}

GinEncoder load_frozen(const ExperimentConfig& cfg, std::size_t feature_dim) {
    GinEncoder enc = load_checkpoint(encoder_path(cfg), feature_dim).encoder;
    enc.freeze();
    return enc;
}

const std::vector<LabeledGraph>& pick_id(const ExperimentConfig& c, const SplitBundle& s) {
    return c.split == "val" ? s.val_id : s.test_id;
}
const std::vector<LabeledGraph>& pick_ood(const ExperimentConfig& c, const SplitBundle& s) {
    return c.split == "val" ? s.val_ood : s.test_ood;
}

}  // namespace

int cmd_synth(const ExperimentConfig& cfg, std::ostream& log) {
    ExperimentConfig c = cfg;
    c.id.synthetic = c.ood.synthetic = true;
    const Datasets ds = load_datasets(c);
    write_tu_dataset(ds.id, cfg.out / "id");
    write_tu_dataset(ds.ood, cfg.out / "ood");
    log << "wrote " << ds.id.size() << " ID graphs to " << (cfg.out / "id").string() << " as " << ds.id.name << "\n";
    log << "wrote " << ds.ood.size() << " OOD graphs to " << (cfg.out / "ood").string() << " as " << ds.ood.name
        << "\n";
    return 0;
}

int cmd_pretrain(const ExperimentConfig& cfg, std::ostream& log) {
    const Datasets ds = load_datasets(cfg);
    const SplitBundle split = split_datasets(cfg, ds);
    std::ostringstream losses;
    losses << "epoch,loss\n";
    const EncoderCheckpoint ckpt = run_pretrain(cfg, split, &losses);
    save_checkpoint(ckpt, encoder_path(cfg));
    write_text(cfg.out / "pretrain_log.csv", losses.str());
    log << "encoder " << encoder_path(cfg).string() << " sha256 " << sha256_hex(serialize_checkpoint(ckpt)) << "\n";
    return 0;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
    const Datasets ds = load_datasets(cfg);
    const SplitBundle split = split_datasets(cfg, ds);
    const GinEncoder enc = load_frozen(cfg, ds.id.feature_dim);
    TrainResult tr = run_train(cfg, dgp_config(cfg), enc, split, ds.id.class_count);
    save_model(tr.model, model_path(cfg));
    write_text(cfg.out / "train_log.csv", history_csv(tr.history));
    log << "model " << model_path(cfg).string() << " after " << tr.history.size() << " epochs\n";
    return 0;
}

int cmd_score(const ExperimentConfig& cfg, std::ostream& log) {
    const Datasets ds = load_datasets(cfg);
    const SplitBundle split = split_datasets(cfg, ds);
    const GinEncoder enc = load_frozen(cfg, ds.id.feature_dim);
    DgpModel model = load_model(model_path(cfg), enc);
    const ScoreTable t = score_split(model, pick_id(cfg, split), pick_ood(cfg, split), model.config.gamma);
    write_score_csv(t, scores_path(cfg));
    log << "scored " << t.rows.size() << " graphs into " << scores_path(cfg).string() << "\n";
    return 0;
}

int cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
    const ScoreTable t = read_score_csv(scores_path(cfg));
    const DetectionMetrics m = table_metrics(t);
    write_json(cfg.out / "metrics.json", m.to_json());
    log << m.to_json().dump() << "\n";
    return 0;
}

int cmd_pipeline(const ExperimentConfig& cfg, std::ostream& log) {
    Stopwatch sw;
    nlohmann::json timings = nlohmann::json::object();
    const Datasets ds = load_datasets(cfg);
    const SplitBundle split = split_datasets(cfg, ds);
    timings["data"] = sw.lap();

    std::ostringstream losses;
    losses << "epoch,loss\n";
    const EncoderCheckpoint ckpt = run_pretrain(cfg, split, &losses);
    const std::string ckpt_bytes = serialize_checkpoint(ckpt);
    write_file(encoder_path(cfg), ckpt_bytes);
    write_text(cfg.out / "pretrain_log.csv", losses.str());
    timings["pretrain"] = sw.lap();

    GinEncoder enc = ckpt.encoder;
    enc.freeze();
    const std::string hash_before = encoder_hash(enc);
    TrainResult tr = run_train(cfg, dgp_config(cfg), enc, split, ds.id.class_count);
    const std::string hash_after = encoder_hash(tr.model.encoder);
    if (hash_before != hash_after) throw std::logic_error("encoder changed during prompt training");
    const std::string model_bytes = serialize_model(tr.model);
    write_file(model_path(cfg), model_bytes);
    write_text(cfg.out / "train_log.csv", history_csv(tr.history));
    timings["train"] = sw.lap();

    const ScoreTable scores = score_split(tr.model, pick_id(cfg, split), pick_ood(cfg, split), cfg.dgp.gamma);
    write_score_csv(scores, scores_path(cfg));
    const ScoreTable base = baseline_scores(cfg, enc, split);
    write_score_csv(base, cfg.out / "baseline_scores.csv");
    timings["score"] = sw.lap();

    const DetectionMetrics m = table_metrics(scores);
    const DetectionMetrics mb = table_metrics(base);
    write_json(cfg.out / "metrics.json", m.to_json());
    write_json(cfg.out / "baseline_metrics.json", mb.to_json());
    timings["eval"] = sw.lap();

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["seed"] = cfg.seed;
    manifest["config"] = config_json(cfg);
    manifest["hashes"] = {{"encoder_file_sha256", sha256_hex(ckpt_bytes)},
                          {"encoder_params_before", hash_before},
                          {"encoder_params_after", hash_after},
                          {"model_file_sha256", sha256_hex(model_bytes)}};
    manifest["timings_seconds"] = timings;
    manifest["metrics"] = {{"dgp", m.to_json()}, {"baseline", mb.to_json()}};
    manifest["epochs_run"] = tr.history.size();
    write_json(cfg.out / "manifest.json", manifest);
    write_text(cfg.out / "config.snapshot", config_text(cfg));
    log << "dgp " << m.to_json().dump() << "\n";
    log << "baseline " << mb.to_json().dump() << "\n";
    return 0;
}

int cmd_grid(const ExperimentConfig& cfg, std::ostream& log) {
    const Datasets ds = load_datasets(cfg);
    const SplitBundle split = split_datasets(cfg, ds);
    GinEncoder enc = run_pretrain(cfg, split).encoder;
    enc.freeze();
    const CellEvaluator eval = [&](const DgpConfig& dgp, const std::vector<double>& gammas) {
        TrainResult tr = run_train(cfg, dgp, enc, split, ds.id.class_count);
        std::vector<double> out;
        for (double g : gammas) out.push_back(table_metrics(score_split(tr.model, split.val_id, split.val_ood, g)).auc);
        log << "lambda=" << dgp.lambda << " alpha1=" << dgp.alpha1 << " alpha2=" << dgp.alpha2 << " lr=" << dgp.lr
            << " done\n";
        return out;
    };
    const GridResult r = run_grid(cfg.grid, dgp_config(cfg), eval);
    write_grid_csv(r, cfg.out / "sweep.csv");

    // Test metrics once, for the selected point.
    DgpConfig best = dgp_config(cfg);
    best.lambda = r.best.lambda;
    best.gamma = r.best.gamma;
    best.alpha1 = r.best.alpha1;
    best.alpha2 = r.best.alpha2;
    best.lr = r.best.lr;
    TrainResult tr = run_train(cfg, best, enc, split, ds.id.class_count);
    const DetectionMetrics m = table_metrics(score_split(tr.model, split.test_id, split.test_ood, best.gamma));
    nlohmann::json j;
    j["best"] = {{"lambda", r.best.lambda}, {"gamma", r.best.gamma}, {"alpha1", r.best.alpha1},
                 {"alpha2", r.best.alpha2}, {"lr", r.best.lr},       {"val_auc", r.best.val_auc}};
    j["test"] = m.to_json();
    write_json(cfg.out / "grid_best.json", j);
    log << j.dump() << "\n";
    return 0;
}

int cmd_ablate(const ExperimentConfig& cfg, std::ostream& log) {
    const auto rows = run_ablation(cfg, &log);
    std::ostringstream os;
    os << "variant,median_auc,median_aupr,median_fpr95,auc_per_seed\n";
    for (const auto& r : rows) {
        os << variant_name(r.variant) << ',' << format_double(median(r.auc)) << ',' << format_double(median(r.aupr))
           << ',' << format_double(median(r.fpr95)) << ',';
        for (std::size_t i = 0; i < r.auc.size(); ++i) os << (i ? ";" : "") << format_double(r.auc[i]);
        os << '\n';
    }
    write_text(cfg.out / "ablation.csv", os.str());
    log << os.str();
    return 0;
}

int cmd_dump_prompts(const ExperimentConfig& cfg, std::ostream& log) {
    const Datasets ds = load_datasets(cfg);
    const SplitBundle split = split_datasets(cfg, ds);
    const GinEncoder enc = load_frozen(cfg, ds.id.feature_dim);
    DgpModel model = load_model(model_path(cfg), enc);
    std::ostringstream os;
    os << "graph_id,u,v,w1_uv,w1_vu,w1_avg,w2_uv,w2_vu,w2_avg\n";
    std::size_t rows = 0;
    const auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    const auto emit = [&](const std::vector<LabeledGraph>& graphs, const char* prefix) {
        for (std::size_t k = 0; k < graphs.size(); ++k)
            for (const auto& p : dump_prompts(graphs[k].graph, prefix + std::to_string(k), model)) {
                os << p.graph_id << ',' << p.u << ',' << p.v << ',' << cell(p.w1_uv) << ',' << cell(p.w1_vu) << ','
                   << cell(p.w1_avg) << ',' << cell(p.w2_uv) << ',' << cell(p.w2_vu) << ',' << cell(p.w2_avg)
                   << '\n';
                ++rows;
            }
    };
    emit(pick_id(cfg, split), "id-");
    emit(pick_ood(cfg, split), "ood-");
    write_text(cfg.out / "prompts.csv", os.str());
    log << "wrote " << rows << " edges to " << (cfg.out / "prompts.csv").string() << "\n";
    return 0;
}

int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& log) {
    if (name == "synth") return cmd_synth(cfg, log);
    if (name == "pretrain") return cmd_pretrain(cfg, log);
    if (name == "train") return cmd_train(cfg, log);
    if (name == "score") return cmd_score(cfg, log);
    if (name == "eval") return cmd_eval(cfg, log);
    if (name == "pipeline") return cmd_pipeline(cfg, log);
    if (name == "grid") return cmd_grid(cfg, log);
    if (name == "ablate") return cmd_ablate(cfg, log);
    if (name == "dump-prompts") return cmd_dump_prompts(cfg, log);
    throw ConfigError("unknown command '" + name + "'");
}

}  // namespace dgp
