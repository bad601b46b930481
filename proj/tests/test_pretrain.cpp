#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dgp/pretrain.hpp"
#include "fd.hpp"

using namespace dgp;
using dgp::testing::fd_check;
using dgp::testing::random_graph;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c) {
    Tensor t(r, c);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = rng.normal();
    return t;
}

// Direct summation of the NT-Xent formula.
double ntxent_oracle(const Tensor& z1, const Tensor& z2, double tau) {
    const std::size_t b = z1.rows(), d = z1.cols();
    std::vector<std::vector<double>> z;
    for (const Tensor* t : {&z1, &z2})
        for (std::size_t i = 0; i < b; ++i) {
            std::vector<double> r(t->row_span(i).begin(), t->row_span(i).end());
            double n = 0;
            for (double v : r) n += v * v;
            for (double& v : r) v /= std::sqrt(n);
            z.push_back(r);
        }
    const auto sim = [&](std::size_t i, std::size_t j) {
        double s = 0;
        for (std::size_t k = 0; k < d; ++k) s += z[i][k] * z[j][k];
        return s / tau;
    };
    double total = 0;
    for (std::size_t i = 0; i < 2 * b; ++i) {
        const std::size_t pos = i < b ? i + b : i - b;
        double denom = 0;
        for (std::size_t j = 0; j < 2 * b; ++j)
            if (j != i) denom += std::exp(sim(i, j));
        total += -std::log(std::exp(sim(i, pos)) / denom);
    }
    return total / static_cast<double>(2 * b);
}

bool edges_valid(const Graph& g) {
    for (const auto& e : g.edges)
        if (e.src >= g.node_count || e.dst >= g.node_count) return false;
    return g.features.rows() == g.node_count;
}

GraphDataset small_ds(std::size_t count, std::uint64_t seed) {
    GraphDataset ds = synth_id(2, count / 2, {}, 0.1, seed, 8);
    return ds;
}

}  // namespace

TEST_CASE("NT-Xent values") {
    SUBCASE("B=2, identical embeddings gives ln 3") {
        const Tensor z(2, 4, 0.5);
        CHECK(ntxent_loss(ad::constant(z), ad::constant(z), 0.2).item() == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    }
    SUBCASE("matches direct summation") {
        Rng rng(1);
        for (int t = 0; t < 5; ++t) {
            const Tensor a = random_tensor(rng, 3, 5), b = random_tensor(rng, 3, 5);
            CHECK(std::abs(ntxent_loss(ad::constant(a), ad::constant(b), 0.5).item() - ntxent_oracle(a, b, 0.5)) < 1e-10);
        }
    }
    SUBCASE("scale invariant") {
        Rng rng(2);
        Tensor a = random_tensor(rng, 4, 3), b = random_tensor(rng, 4, 3);
        const double base = ntxent_loss(ad::constant(a), ad::constant(b), 0.2).item();
        for (auto& v : a.values()) v *= 5;
        for (auto& v : b.values()) v *= 5;
        CHECK(ntxent_loss(ad::constant(a), ad::constant(b), 0.2).item() == doctest::Approx(base).epsilon(1e-12));
    }
    SUBCASE("B < 2 rejected") { CHECK_THROWS(ntxent_loss(ad::constant(Tensor(1, 3, 1.0)), ad::constant(Tensor(1, 3, 1.0)), 0.2)); }
    SUBCASE("pulling the positive closer lowers the loss") {
        Rng rng(3);
        const Tensor a = random_tensor(rng, 4, 6);
        Tensor b = random_tensor(rng, 4, 6);
        double prev = ntxent_loss(ad::constant(a), ad::constant(b), 0.3).item();
        // move view-2 row 0 towards view-1 row 0; every other row fixed
        for (int step = 1; step <= 5; ++step) {
            for (std::size_t k = 0; k < 6; ++k) b(0, k) = 0.7 * b(0, k) + 0.3 * a(0, k);
            const double cur = ntxent_loss(ad::constant(a), ad::constant(b), 0.3).item();
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("contrastive loss gradients") {
    Rng rng(4);
    GinArch arch;
    arch.feature_dim = 3;
    arch.layer_dims = {5, 5};
    arch.gin_hidden = 5;
    arch.proj_dim = 6;
    double worst = 0;
    for (int t = 0; t < 5; ++t) {
        GinEncoder enc = GinEncoder::create(arch, rng);
        std::vector<Graph> v1, v2;
        for (int k = 0; k < 4; ++k) {
            v1.push_back(random_graph(rng, 2 + rng.index(5), 3, 0.6));
            v2.push_back(random_graph(rng, 2 + rng.index(5), 3, 0.6));
        }
        const auto loss = [&] {
            std::vector<ad::Var> a, b;
            for (std::size_t k = 0; k < v1.size(); ++k) {
                a.push_back(encode_graph(v1[k], enc));
                b.push_back(encode_graph(v2[k], enc));
            }
            return ntxent_loss(ad::concat_rows(a), ad::concat_rows(b), 0.5);
        };
        worst = std::max(worst, fd_check({&enc.params}, loss).max_rel);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("augmentations") {
    Rng rng(5);
    const Graph g = random_graph(rng, 12, 4, 0.3);
    SUBCASE("p=0 leaves the graph unchanged") {
        for (auto kind : {Augmentation::Kind::NodeDrop, Augmentation::Kind::EdgePerturb, Augmentation::Kind::AttrMask}) {
            Rng r(9);
            CHECK(augment(g, {kind, 0.0}, r) == g);
        }
        Rng r(9);
        // for subgraph sampling p is the kept ratio
        const Graph s = augment(g, {Augmentation::Kind::SubgraphSample, 1.0}, r);
        CHECK(s.node_count == g.node_count);
        CHECK(s.edge_count() == g.edge_count());
    }
    SUBCASE("results stay valid and seeded") {
        for (auto kind : {Augmentation::Kind::NodeDrop, Augmentation::Kind::EdgePerturb, Augmentation::Kind::AttrMask,
                          Augmentation::Kind::SubgraphSample}) {
            for (double p : {0.2, 0.5, 0.9}) {
                Rng r1(11), r2(11);
                const Graph a = augment(g, {kind, p}, r1);
                CHECK(edges_valid(a));
                CHECK(a.node_count >= 1);
                CHECK(a == augment(g, {kind, p}, r2));
            }
        }
    }
    SUBCASE("node drop never empties a graph") {
        Rng r(3);
        for (int t = 0; t < 20; ++t) CHECK(augment(g, {Augmentation::Kind::NodeDrop, 1.0}, r).node_count >= 1);
    }
    SUBCASE("subgraph keeps ceil(ratio n) nodes") {
        Rng r(4);
        CHECK(augment(g, {Augmentation::Kind::SubgraphSample, 0.5}, r).node_count == 6);
        CHECK(augment(g, {Augmentation::Kind::SubgraphSample, 0.26}, r).node_count == 4);
    }
    SUBCASE("edge perturbation keeps edges paired") {
        Rng r(6);
        const Graph a = augment(g, {Augmentation::Kind::EdgePerturb, 0.4}, r);
        for (const auto& e : a.edges)
            CHECK(std::find(a.edges.begin(), a.edges.end(), Edge{e.dst, e.src}) != a.edges.end());
    }
    SUBCASE("parse") {
        const Augmentation a = Augmentation::parse("edge_perturb:0.25");
        CHECK(a.kind == Augmentation::Kind::EdgePerturb);
        CHECK(a.p == 0.25);
        CHECK_THROWS(Augmentation::parse("shuffle:0.1"));
        CHECK_THROWS(Augmentation::parse("node_drop:1.5"));
    }
}

TEST_CASE("parameter perturbation") {
    Rng rng(7);
    GinArch arch;
    arch.feature_dim = 4;
    const GinEncoder enc = GinEncoder::create(arch, rng);
    const std::string before = encoder_hash(enc);

    SUBCASE("tiny eta is nearly the identity") {
        Rng r(1);
        const GinEncoder p = perturb_params(enc, 1e-12, r);
        for (std::size_t i = 0; i < enc.params.size(); ++i)
            for (std::size_t k = 0; k < enc.params[i].value.size(); ++k)
                CHECK(std::abs(p.params[i].value[k] - enc.params[i].value[k]) < 1e-9);
    }
    SUBCASE("noise std is eta times the tensor std") {
        const Param& w = enc.params.at("gin.0.mlp.0.weight");
        double mean = 0, var = 0;
        for (double v : w.value.values()) mean += v;
        mean /= static_cast<double>(w.value.size());
        for (double v : w.value.values()) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(w.value.size()));
        const double eta = 0.5;
        Rng r(2);
        double sq = 0;
        std::size_t n = 0;
        for (int draw = 0; draw < 1000; ++draw) {
            const GinEncoder p = perturb_params(enc, eta, r);
            const Tensor& pv = p.params.at("gin.0.mlp.0.weight").value;
            for (std::size_t k = 0; k < pv.size(); ++k, ++n) sq += (pv[k] - w.value[k]) * (pv[k] - w.value[k]);
        }
        CHECK(std::sqrt(sq / static_cast<double>(n)) == doctest::Approx(eta * sd).epsilon(0.05));
    }
    SUBCASE("seeds differ, original untouched") {
        Rng a(1), b(2);
        CHECK_FALSE(perturb_params(enc, 1.0, a).params.same_values(perturb_params(enc, 1.0, b).params));
        CHECK(encoder_hash(enc) == before);
    }
}

TEST_CASE("pretrain smoke and determinism") {
    const GraphDataset ds = small_ds(4, 3);
    PretrainConfig cfg;
    cfg.arch.feature_dim = ds.feature_dim;
    cfg.epochs = 1;
    cfg.seed = 5;
    const PretrainResult r = pretrain(ds, cfg);
    CHECK(r.epoch_losses.size() == 1);
    const EncoderCheckpoint back = deserialize_checkpoint(serialize_checkpoint(r.checkpoint));
    CHECK(back.encoder.params.same_values(r.checkpoint.encoder.params));
    CHECK(serialize_checkpoint(pretrain(ds, cfg).checkpoint) == serialize_checkpoint(r.checkpoint));
}

TEST_CASE("SimGRACE over the eta grid stays finite") {
    const GraphDataset ds = small_ds(8, 4);
    for (double eta : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        PretrainConfig cfg;
        cfg.method = PretrainMethod::SimGRACE;
        cfg.arch.feature_dim = ds.feature_dim;
        cfg.epochs = 2;
        cfg.eta = eta;
        cfg.seed = 6;
        const PretrainResult r = pretrain(ds, cfg);
        for (double l : r.epoch_losses) CHECK(std::isfinite(l));
        for (std::size_t i = 0; i < r.checkpoint.encoder.params.size(); ++i)
            CHECK(r.checkpoint.encoder.params[i].value.all_finite());
    }
}

TEST_CASE("pretraining loss goes down on the synthetic set") {
    std::vector<double> drops;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const GraphDataset ds = synth_id(2, 64, {}, 0.1, derive_seed(seed, "synth-id"));
        PretrainConfig cfg;
        cfg.arch.feature_dim = ds.feature_dim;
        cfg.epochs = 5;
        cfg.lr = 1e-3;
        cfg.seed = derive_seed(seed, "pretrain");
        const PretrainResult r = pretrain(ds, cfg);
        drops.push_back(r.epoch_losses.front() - r.epoch_losses.back());
    }
    std::sort(drops.begin(), drops.end());
    CHECK(drops[2] > 0.0);
}
