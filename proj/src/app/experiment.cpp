#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "dgp/app.hpp"

namespace dgp {

namespace {

GraphDataset load_side(const ExperimentConfig& cfg, const DataSide& side, bool is_id, std::size_t id_count) {
    if (!side.synthetic) {
        if (side.name.empty()) throw ConfigError(std::string(is_id ? "id" : "ood") + ".name is required for tu sources");
        return parse_tu_dataset(side.dir, side.name);
    }
    const auto& s = cfg.synth;
    if (is_id) return synth_id(s.classes, s.per_class, s.motif, s.density, derive_seed(cfg.seed, "synth-id"), cfg.max_degree);
    const std::size_t need = 2 * static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(id_count)));
    const std::size_t count = s.ood_count == 0 ? need : s.ood_count;
    return synth_ood(count, s.ood, s.density, derive_seed(cfg.seed, "synth-ood"), cfg.max_degree);
}

}  // namespace

Datasets load_datasets(const ExperimentConfig& cfg) {
    Datasets ds;
    ds.id = load_side(cfg, cfg.id, true, 0);
    ds.ood = load_side(cfg, cfg.ood, false, ds.id.size());
    if (cfg.features == Featurizer::Degree) {
        ds.id = degree_features(ds.id, cfg.max_degree);
        ds.ood = degree_features(ds.ood, cfg.max_degree);
    } else {
        const std::size_t d = std::max(ds.id.feature_dim, ds.ood.feature_dim);
        ds.id = pad_features(ds.id, d);
        ds.ood = pad_features(ds.ood, d);
    }
    ds.id.validate();
    ds.ood.validate();
    return ds;
}

SplitBundle split_datasets(const ExperimentConfig& cfg, const Datasets& ds) {
    return make_split(ds.id, ds.ood, derive_seed(cfg.seed, "split"));
}

PretrainConfig pretrain_config(const ExperimentConfig& cfg, std::size_t feature_dim) {
    PretrainConfig p = cfg.pretrain;
    p.arch.feature_dim = feature_dim;
    p.seed = derive_seed(cfg.seed, "pretrain");
    return p;
}

DgpConfig dgp_config(const ExperimentConfig& cfg) {
    DgpConfig d = cfg.dgp;
    d.seed = derive_seed(cfg.seed, "train");
    d.scorer.seed = derive_seed(cfg.seed, "kmeans");
    return d;
}

ScorerOptions baseline_scorer(const ExperimentConfig& cfg) {
    ScorerOptions s = cfg.dgp.scorer;
    s.seed = derive_seed(cfg.seed, "kmeans");
    return s;
}

EncoderCheckpoint run_pretrain(const ExperimentConfig& cfg, const SplitBundle& split, std::ostream* log) {
    if (split.train_id.empty()) throw std::invalid_argument("empty training split");
    const std::size_t d = split.train_id.front().graph.feature_dim();
    const PretrainConfig p = pretrain_config(cfg, d);
    if (!cfg.pretrain_enabled) return random_encoder(p.arch, p.seed);
    GraphDataset train;
    train.name = "train";
    train.graphs = split.train_id;
    train.feature_dim = d;
    std::size_t classes = 1;
    for (const auto& lg : train.graphs) classes = std::max(classes, lg.label + 1);
    train.class_count = classes;
    return pretrain(train, p, log).checkpoint;
}

TrainResult run_train(const ExperimentConfig& cfg, const DgpConfig& dgp, const GinEncoder& frozen,
                      const SplitBundle& split, std::size_t class_count, std::ostream* log) {
    (void)cfg;
    if (dgp.patience > 0) {
        const ValidationSet val{split.val_id, split.val_ood};
        return train_dgp(split.train_id, frozen, class_count, dgp, &val, log);
    }
    return train_dgp(split.train_id, frozen, class_count, dgp, nullptr, log);
}

ScoreTable score_split(DgpModel& model, const std::vector<LabeledGraph>& id, const std::vector<LabeledGraph>& ood,
                       double gamma) {
    ScoreTable t;
    const auto add = [&](const std::vector<LabeledGraph>& graphs, Origin origin, const char* prefix) {
        const auto scores = score_graphs(graphs, model, gamma);
        for (std::size_t k = 0; k < scores.size(); ++k)
            t.rows.push_back({prefix + std::to_string(k), origin, scores[k].score, scores[k].md1, scores[k].md2});
    };
    add(id, Origin::ID, "id-");
    add(ood, Origin::OOD, "ood-");
    t.validate();
    return t;
}

ScoreTable baseline_scores(const ExperimentConfig& cfg, const GinEncoder& frozen, const SplitBundle& split) {
    GinEncoder enc = frozen;
    const MahalanobisScorer scorer = MahalanobisScorer::fit(embed_graphs(split.train_id, enc), baseline_scorer(cfg));
    const bool val = cfg.split == "val";
    const auto& id = val ? split.val_id : split.test_id;
    const auto& ood = val ? split.val_ood : split.test_ood;
    ScoreTable t;
    const auto add = [&](const std::vector<LabeledGraph>& graphs, Origin origin, const char* prefix) {
        const Tensor e = embed_graphs(graphs, enc);
        for (std::size_t k = 0; k < graphs.size(); ++k) {
            const double s = scorer.score(e.row_span(k));
            t.rows.push_back({prefix + std::to_string(k), origin, s, s, 0.0});
        }
    };
    add(id, Origin::ID, "id-");
    add(ood, Origin::OOD, "ood-");
    t.validate();
    return t;
}

DetectionMetrics table_metrics(const ScoreTable& t) {
    return evaluate(t.scores(Origin::ID), t.scores(Origin::OOD));
}

// ---- grid --------------------------------------------------------------------

GridResult run_grid(const GridSpec& spec, const DgpConfig& base, const CellEvaluator& eval) {
    if (spec.cardinality() == 0) throw ConfigError("grid has no points");
    GridResult r;
    bool have_best = false;
    for (double lambda : spec.lambda)
        for (double alpha1 : spec.alpha1)
            for (double alpha2 : spec.alpha2)
                for (double lr : spec.lr) {
                    DgpConfig cfg = base;
                    cfg.lambda = lambda;
                    cfg.alpha1 = alpha1;
                    cfg.alpha2 = alpha2;
                    cfg.lr = lr;
                    const std::vector<double> aucs = eval(cfg, spec.gamma);
                    if (aucs.size() != spec.gamma.size()) throw std::logic_error("grid evaluator returned wrong count");
                    for (std::size_t g = 0; g < spec.gamma.size(); ++g) {
                        GridCell c{lambda, spec.gamma[g], alpha1, alpha2, lr, aucs[g]};
                        r.cells.push_back(c);
                        const bool better = !have_best || c.val_auc > r.best.val_auc ||
                                            (c.val_auc == r.best.val_auc && c.tuple() < r.best.tuple());
                        if (better) {
                            r.best = c;
                            have_best = true;
                        }
                    }
                }
    return r;
}

void write_grid_csv(const GridResult& r, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "lambda,gamma,alpha1,alpha2,lr,val_auc\n";
    for (const auto& c : r.cells)
        out << format_double(c.lambda) << ',' << format_double(c.gamma) << ',' << format_double(c.alpha1) << ','
            << format_double(c.alpha2) << ',' << format_double(c.lr) << ',' << format_double(c.val_auc) << '\n';
}

// ---- prompt dump -------------------------------------------------------------

std::vector<PromptEdge> dump_prompts(const Graph& g, const std::string& graph_id, DgpModel& model) {
    ParamSet gen1 = model.gen1, gen2 = model.gen2;
    gen1.freeze_all();
    gen2.freeze_all();
    const Tensor reps = node_representations(g, model.encoder);
    const Tensor w1 = gen_edge_weights(g, reps, gen1).value();
    const Tensor w2 = gen_edge_weights(g, reps, gen2).value();
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
    for (std::size_t e = 0; e < g.edge_count(); ++e) index.emplace(std::make_pair(g.edges[e].src, g.edges[e].dst), e);

    std::vector<PromptEdge> out;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const auto [u, v] = g.edges[e];
        const auto rev = index.find({v, u});
        const bool has_rev = rev != index.end() && u != v;
        if (has_rev && u > v) continue;  // reported from the other direction
        PromptEdge p;
        p.graph_id = graph_id;
        p.u = u;
        p.v = v;
        p.has_reverse = has_rev;
        p.w1_uv = w1(e, 0);
        p.w2_uv = w2(e, 0);
        if (has_rev) {
            p.w1_vu = w1(rev->second, 0);
            p.w2_vu = w2(rev->second, 0);
            p.w1_avg = (p.w1_uv + p.w1_vu) / 2;
            p.w2_avg = (p.w2_uv + p.w2_vu) / 2;
        } else {
            p.w1_vu = p.w2_vu = std::nan("");
            p.w1_avg = p.w1_uv;
            p.w2_avg = p.w2_uv;
        }
        out.push_back(p);
    }
    return out;
}

// ---- whole runs --------------------------------------------------------------

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of nothing");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, std::ostream* log) {
    const Datasets ds = load_datasets(cfg);
    const SplitBundle split = split_datasets(cfg, ds);
    EncoderCheckpoint ckpt = run_pretrain(cfg, split);
    GinEncoder enc = ckpt.encoder;
    enc.freeze();
    PipelineResult r;
    r.encoder_hash = encoder_hash(enc);
    TrainResult tr = run_train(cfg, dgp_config(cfg), enc, split, ds.id.class_count, log);
    r.history = tr.history;
    const bool val = cfg.split == "val";
    r.dgp = table_metrics(score_split(tr.model, val ? split.val_id : split.test_id,
                                      val ? split.val_ood : split.test_ood, cfg.dgp.gamma));
    r.baseline = table_metrics(baseline_scores(cfg, enc, split));
    return r;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, std::ostream* log) {
    const Variant variants[] = {Variant::V0, Variant::V1, Variant::V2, Variant::Full};
    std::vector<AblationRow> rows;
    for (Variant v : variants) rows.push_back({v, {}, {}, {}});
    for (std::size_t rep = 0; rep < std::max<std::size_t>(cfg.repeats, 1); ++rep) {
        ExperimentConfig run = cfg;
        run.seed = cfg.repeats <= 1 ? cfg.seed : derive_seed(cfg.seed, rep);
        const Datasets ds = load_datasets(run);
        const SplitBundle split = split_datasets(run, ds);
        GinEncoder enc = run_pretrain(run, split).encoder;
        enc.freeze();
        for (auto& row : rows) {
            const DgpConfig dgp = apply_variant(dgp_config(run), row.variant);
            TrainResult tr = run_train(run, dgp, enc, split, ds.id.class_count);
            const auto m = table_metrics(score_split(tr.model, split.test_id, split.test_ood, dgp.gamma));
            row.auc.push_back(m.auc);
            row.aupr.push_back(m.aupr);
            row.fpr95.push_back(m.fpr95);
            if (log) *log << "seed " << run.seed << " " << variant_name(row.variant) << " auc " << m.auc << "\n";
        }
    }
    return rows;
}

}  // namespace dgp
