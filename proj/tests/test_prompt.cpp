#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dgp/prompt.hpp"
#include "fd.hpp"

using namespace dgp;
using dgp::testing::fd_check;
using dgp::testing::random_graph;

namespace {

GinArch small_arch(std::size_t d) {
    GinArch a;
    a.feature_dim = d;
    a.layer_dims = {6, 6, 6};
    a.gin_hidden = 6;
    a.proj_dim = 8;
    return a;
}

DgpConfig small_cfg() {
    DgpConfig c;
    c.gen_hidden = 5;
    c.pred_hidden = 5;
    c.seed = 11;
    return c;
}

std::vector<LabeledGraph> random_batch(Rng& rng, std::size_t count, std::size_t d, std::size_t classes) {
    std::vector<LabeledGraph> out;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t n = 2 + rng.index(5);
        out.push_back({random_graph(rng, n, d, 0.6), rng.index(classes)});
    }
    return out;
}

DgpModel small_model(std::uint64_t seed, std::size_t d, std::size_t classes) {
    Rng rng(seed);
    GinEncoder enc = GinEncoder::create(small_arch(d), rng);
    enc.freeze();
    return DgpModel::init(enc, classes, small_cfg());
}

// Nudge generator outputs away from the constant init so gradients reach
// every layer.
void scramble(DgpModel& m, Rng& rng) {
    for (ParamSet* ps : {&m.gen1, &m.gen2})
        for (std::size_t i = 0; i < ps->size(); ++i)
            for (std::size_t k = 0; k < (*ps)[i].value.size(); ++k) (*ps)[i].value[k] += rng.normal() * 0.3;
}

}  // namespace

TEST_CASE("fresh generator gives sigmoid(2) on every edge") {
    DgpModel m = small_model(1, 3, 2);
    Rng rng(2);
    const Graph g = random_graph(rng, 5, 3, 0.7);
    const Tensor w = gen_edge_weights(g, m.gen1, m.encoder).value();
    REQUIRE(w.rows() == g.edge_count());
    const double expect = 1.0 / (1.0 + std::exp(-2.0));
    for (std::size_t e = 0; e < w.rows(); ++e) CHECK(w(e, 0) == doctest::Approx(expect).epsilon(1e-15));
    CHECK(std::abs(expect - 0.8808) < 1e-4);
}

TEST_CASE("edgeless graph gets no weights") {
    DgpModel m = small_model(1, 3, 2);
    Graph g;
    g.node_count = 3;
    g.features = Tensor(3, 3, 0.5);
    CHECK(gen_edge_weights(g, m.gen1, m.encoder).rows() == 0);
}

TEST_CASE("branch_forward distribution sums to one; zero final layer gives uniform") {
    DgpModel m = small_model(3, 3, 3);
    Rng rng(4);
    const Graph g = random_graph(rng, 6, 3, 0.5);
    const Tensor reps = node_representations(g, m.encoder);
    auto out = branch_forward(g, reps, m.gen1, m.encoder, m.predictor);
    double s = 0;
    for (double v : out.log_z.value().values()) s += std::exp(v);
    CHECK(std::abs(s - 1.0) < 1e-12);

    m.predictor.at("mlp.1.weight").value.fill(0.0);
    m.predictor.at("mlp.1.bias").value.fill(0.0);
    out = branch_forward(g, reps, m.gen1, m.encoder, m.predictor);
    for (double v : out.log_z.value().values()) CHECK(std::exp(v) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("class-specific and class-agnostic loss values") {
    DgpModel m = small_model(5, 3, 2);
    Rng rng(6);
    auto batch = random_batch(rng, 4, 3, 2);
    // Uniform predictions: both losses are ln C.
    m.predictor.at("mlp.1.weight").value.fill(0.0);
    m.predictor.at("mlp.1.bias").value.fill(0.0);
    CHECK(class_specific_loss(batch, m).item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(class_agnostic_loss(batch, m).item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // Batch mean equals the mean of single-graph losses.
    Rng r2(7);
    DgpModel m2 = small_model(8, 3, 3);
    auto b2 = random_batch(r2, 5, 3, 3);
    double acc = 0;
    for (const auto& lg : b2) acc += class_specific_loss(std::span<const LabeledGraph>(&lg, 1), m2).item();
    CHECK(class_specific_loss(b2, m2).item() == doctest::Approx(acc / 5.0).epsilon(1e-12));

    // disentangle = cs + lambda * ca, linear in lambda.
    const double cs = class_specific_loss(b2, m2).item();
    const double ca = class_agnostic_loss(b2, m2).item();
    for (double lam : {0.0, 1.0, 2.0}) CHECK(disentangle_loss(b2, m2, lam).item() == doctest::Approx(cs + lam * ca).epsilon(1e-12));
    CHECK(disentangle_loss(b2, m2, 0.0).item() == cs);

    LabeledGraph bad = b2[0];
    bad.label = 3;
    CHECK_THROWS(class_specific_loss(std::span<const LabeledGraph>(&bad, 1), m2));
}

TEST_CASE("class-agnostic loss is minimized at the uniform distribution (C=2)") {
    // H(uniform, z) = -(log z0 + log z1)/2 over a grid on the simplex.
    double best = 1e300, arg = -1;
    for (int i = 1; i < 1000; ++i) {
        const double p = i / 1000.0;
        const double h = -(std::log(p) + std::log(1 - p)) / 2;
        if (h < best) best = h, arg = p;
    }
    CHECK(arg == doctest::Approx(0.5));
    CHECK(best == doctest::Approx(std::log(2.0)));
}

TEST_CASE("distance loss matches a hand-composed oracle and scales with alpha") {
    DgpModel m = small_model(9, 3, 2);
    Rng rng(10);
    auto train = random_batch(rng, 12, 3, 2);
    scramble(m, rng);
    refit_stats(train, m);
    std::vector<LabeledGraph> batch(train.begin(), train.begin() + 2);

    double md1 = 0, md2 = 0;
    for (const auto& lg : batch) {
        const Tensor h1 = branch_embeddings(std::span<const LabeledGraph>(&lg, 1), m, 1);
        const Tensor h2 = branch_embeddings(std::span<const LabeledGraph>(&lg, 1), m, 2);
        // Direct quadratic form against the stored statistics.
        auto quad = [](const ClusterStats& s, const Tensor& h) {
            double q = 0;
            for (std::size_t a = 0; a < h.cols(); ++a)
                for (std::size_t b = 0; b < h.cols(); ++b)
                    q += (h(0, a) - s.mean(0, a)) * s.inv(a, b) * (h(0, b) - s.mean(0, b));
            return 1.0 / std::max(q, 1e-12);
        };
        md1 += quad(m.stats1.stats()[0], h1);
        md2 += quad(m.stats2.stats()[0], h2);
    }
    md1 /= 2;
    md2 /= 2;
    const double expect = 3.0 / md1 + 5.0 / md2;
    CHECK(distance_loss(batch, m, 3.0, 5.0).item() == doctest::Approx(expect).epsilon(1e-10));
    const double one = distance_loss(batch, m, 1.0, 0.0).item();
    CHECK(distance_loss(batch, m, 2.0, 0.0).item() == doctest::Approx(2 * one).epsilon(1e-14));
}

TEST_CASE("distance loss at the fitted mean hits the clamp ceiling") {
    DgpModel m = small_model(12, 3, 2);
    Rng rng(13);
    auto train = random_batch(rng, 1, 3, 2);
    train.push_back(train[0]);
    refit_stats(train, m);  // identical graphs: the embedding is the mean
    const double v = distance_loss(std::span<const LabeledGraph>(train.data(), 1), m, 1.0, 0.0).item();
    CHECK(v == doctest::Approx(1e-12).epsilon(1e-9));
}

TEST_CASE("loss gradients pass finite differences") {
    Rng rng(21);
    double worst_cs = 0, worst_ca = 0, worst_dis = 0;
    std::size_t graphs = 0;
    for (int trial = 0; trial < 5; ++trial) {
        DgpModel m = small_model(100 + trial, 3, 3);
        scramble(m, rng);
        auto batch = random_batch(rng, 4, 3, 3);
        graphs += batch.size();
        worst_cs = std::max(worst_cs, fd_check({&m.gen1, &m.predictor}, [&] { return class_specific_loss(batch, m); }).max_rel);
        worst_ca = std::max(worst_ca, fd_check({&m.gen2, &m.predictor}, [&] { return class_agnostic_loss(batch, m); }).max_rel);
        auto fit = random_batch(rng, 30, 3, 3);
        refit_stats(fit, m);
        worst_dis = std::max(worst_dis, fd_check({&m.gen1, &m.gen2}, [&] { return distance_loss(batch, m, 100.0, 1000.0); }).max_rel);
    }
    CHECK(graphs >= 20);
    CHECK(worst_cs < 1e-4);
    CHECK(worst_ca < 1e-4);
    CHECK(worst_dis < 1e-4);
}

namespace {

struct Trained {
    GinEncoder enc;
    std::vector<LabeledGraph> train;
    TrainResult result;
};

Trained train_small(std::uint64_t seed, DgpConfig cfg, std::size_t epochs = 3) {
    Rng rng(seed);
    Trained t{GinEncoder::create(small_arch(3), rng), random_batch(rng, 24, 3, 2), {}};
    t.enc.freeze();
    cfg.epochs = epochs;
    cfg.batch_size = 8;
    cfg.seed = seed;
    t.result = train_dgp(t.train, t.enc, 2, cfg);
    return t;
}

}  // namespace

TEST_CASE("training leaves the encoder untouched") {
    Rng rng(31);
    GinEncoder enc = GinEncoder::create(small_arch(3), rng);
    enc.freeze();
    const std::string before = encoder_hash(enc);
    const auto train = random_batch(rng, 24, 3, 2);
    DgpConfig cfg = small_cfg();
    cfg.epochs = 2;
    cfg.batch_size = 8;
    TrainResult r = train_dgp(train, enc, 2, cfg);
    CHECK(encoder_hash(enc) == before);
    CHECK(encoder_hash(r.model.encoder) == before);
    CHECK(r.model.encoder_hash == before);
    CHECK(r.history.size() == 2);
}

TEST_CASE("score decomposes into the two branches") {
    Trained t = train_small(32, small_cfg());
    Rng rng(5);
    const auto probe = random_batch(rng, 15, 3, 2);
    for (double gamma : {0.0, 0.5, 1.0, 3.0}) {
        for (const auto& s : score_graphs(probe, t.result.model, gamma)) {
            CHECK(s.score == s.md1 + gamma * s.md2);
            if (gamma == 0.0) CHECK(s.score == s.md1);
        }
    }
}

TEST_CASE("V0 is the full model with gamma, alpha2 and lambda at zero") {
    DgpConfig zeroed = small_cfg();
    zeroed.gamma = 0;
    zeroed.alpha2 = 0;
    zeroed.lambda = 0;
    Trained full = train_small(33, zeroed);
    Trained v0 = train_small(33, apply_variant(small_cfg(), Variant::V0));
    CHECK(full.result.model.gen1.same_values(v0.result.model.gen1));
    Rng rng(6);
    const auto probe = random_batch(rng, 10, 3, 2);
    const auto a = score_graphs(probe, full.result.model, 0.0);
    const auto b = score_graphs(probe, v0.result.model, 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].score == b[k].score);
}

TEST_CASE("scores ignore node order") {
    Trained t = train_small(34, small_cfg());
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Graph g = random_graph(rng, 3 + rng.index(5), 3, 0.5);
        std::vector<std::size_t> perm(g.node_count);
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        const GraphScore a = score_graph(g, t.result.model, 1.0);
        const GraphScore b = score_graph(permute_nodes(g, perm), t.result.model, 1.0);
        CHECK(std::abs(a.score - b.score) <= 1e-9 * std::max(1.0, std::abs(a.score)));
    }
}

TEST_CASE("trained prompts live on existing edges, strictly inside (0, 1)") {
    Trained t = train_small(35, small_cfg());
    DgpModel& m = t.result.model;
    for (const auto& lg : t.train) {
        for (ParamSet* gen : {&m.gen1, &m.gen2}) {
            const Tensor w = gen_edge_weights(lg.graph, *gen, m.encoder).value();
            REQUIRE(w.rows() == lg.graph.edge_count());
            for (double v : w.values()) {
                CHECK(v > 0.0);
                CHECK(v < 1.0);
            }
        }
    }
}

TEST_CASE("model file round trip") {
    Trained t = train_small(36, small_cfg());
    const std::string bytes = serialize_model(t.result.model);
    DgpModel back = deserialize_model(bytes, t.enc);
    CHECK(serialize_model(back) == bytes);
    Rng rng(8);
    const auto probe = random_batch(rng, 8, 3, 2);
    const auto a = score_graphs(probe, t.result.model, 1.0);
    const auto b = score_graphs(probe, back, 1.0);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].score == b[k].score);

    Rng other(99);
    GinEncoder wrong = GinEncoder::create(small_arch(3), other);
    CHECK_THROWS(deserialize_model(bytes, wrong));
}

TEST_CASE("disentangle loss goes down") {
    std::vector<double> drops;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        DgpConfig cfg = small_cfg();
        cfg.lr = 1e-2;
        const Trained t = train_small(40 + seed, cfg, 8);
        drops.push_back(t.result.history.front().disentangle - t.result.history.back().disentangle);
    }
    std::sort(drops.begin(), drops.end());
    CHECK(drops[2] > 0.0);
}
