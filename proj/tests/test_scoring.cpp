#include "doctest.h"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "dgp/scoring.hpp"
#include "dgp/rng.hpp"
#include "oracles.hpp"

using namespace dgp;

namespace {

Tensor blobs(Rng& rng, const std::vector<std::vector<double>>& centres, std::size_t per, double spread) {
    const std::size_t d = centres[0].size();
    Tensor t(centres.size() * per, d);
    for (std::size_t c = 0; c < centres.size(); ++c)
        for (std::size_t i = 0; i < per; ++i)
            for (std::size_t j = 0; j < d; ++j) t(c * per + i, j) = centres[c][j] + spread * rng.normal();
    return t;
}

Tensor random_points(Rng& rng, std::size_t n, std::size_t d) {
    Tensor t(n, d);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = rng.normal();
    return t;
}

}  // namespace

TEST_CASE("single cluster equals the closed-form mean and covariance") {
    Rng rng(1);
    const Tensor x = random_points(rng, 40, 5);
    const MahalanobisScorer s = MahalanobisScorer::fit(x, {});
    REQUIRE(s.cluster_count() == 1);
    const ClusterStats& st = s.stats()[0];
    for (std::size_t j = 0; j < 5; ++j) {
        double m = 0;
        for (std::size_t i = 0; i < 40; ++i) m += x(i, j);
        m /= 40;
        CHECK(std::abs(st.mean(0, j) - m) < 1e-12);
    }
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b) {
            double c = 0;
            for (std::size_t i = 0; i < 40; ++i) c += (x(i, a) - st.mean(0, a)) * (x(i, b) - st.mean(0, b));
            CHECK(std::abs(st.cov(a, b) - c / 40) < 1e-12);
        }
    double tr = 0;
    for (std::size_t j = 0; j < 5; ++j) tr += st.cov(j, j);
    CHECK(st.ridge == doctest::Approx(1e-3 * tr / 5).epsilon(1e-14));
    CHECK(st.count == 40);
}

TEST_CASE("inverse times regularised covariance is the identity") {
    Rng rng(2);
    const MahalanobisScorer s = MahalanobisScorer::fit(random_points(rng, 30, 8), {});
    const ClusterStats& st = s.stats()[0];
    const Tensor reg = st.regularized();
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            double v = 0;
            for (std::size_t k = 0; k < 8; ++k) v += st.inv(i, k) * reg(k, j);
            CHECK(std::abs(v - (i == j ? 1.0 : 0.0)) < 1e-8);
            CHECK(st.cov(i, j) == st.cov(j, i));
        }
}

TEST_CASE("md score matches the quadratic form for Q = 1, 2, 3") {
    Rng rng(3);
    for (std::size_t q = 1; q <= 3; ++q) {
        std::vector<std::vector<double>> centres;
        for (std::size_t c = 0; c < q; ++c) centres.push_back({6.0 * c, -3.0 * c, 1.0, 2.0 * c});
        ScorerOptions opts;
        opts.clusters = q;
        opts.seed = 7;
        const MahalanobisScorer s = MahalanobisScorer::fit(blobs(rng, centres, 25, 0.8), opts);
        REQUIRE(s.cluster_count() == q);
        for (int t = 0; t < 50; ++t) {
            Tensor h = random_points(rng, 1, 4);
            for (auto& v : h.values()) v *= 5;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& st : s.stats()) best = std::min(best, dgp::testing::quad_form(h.row_span(0), st));
            CHECK(std::abs(s.squared_distance(h.row_span(0)).first - best) <= 1e-10 * std::max(1.0, best));
            CHECK(std::abs(s.score(h.row_span(0)) - 1.0 / best) <= 1e-10 / best);
        }
    }
}

TEST_CASE("unit covariance example and clamp ceiling") {
    ClusterStats st;
    st.mean = Tensor(1, 2, 0.0);
    st.cov = Tensor::identity(2);
    st.inv = Tensor::identity(2);
    st.count = 10;
    const MahalanobisScorer s = MahalanobisScorer::from_stats({st}, 1e-12);
    const std::vector<double> h{0.6, 0.8};
    CHECK(s.score(h) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> at_mean{0.0, 0.0};
    CHECK(s.score(at_mean) == doctest::Approx(1e12));
    const std::vector<double> wrong{1.0};
    CHECK_THROWS(s.score(wrong));
}

TEST_CASE("score falls off radially along eigen directions") {
    Rng rng(4);
    const MahalanobisScorer s = MahalanobisScorer::fit(random_points(rng, 50, 3), {});
    const ClusterStats& st = s.stats()[0];
    Eigen::Matrix3d c;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c(i, j) = st.cov(i, j);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(c);
    for (int k = 0; k < 3; ++k) {
        double prev = std::numeric_limits<double>::infinity();
        for (double r = 0.1; r < 5; r += 0.3) {
            std::vector<double> h(3);
            for (int j = 0; j < 3; ++j) h[j] = st.mean(0, j) + r * es.eigenvectors()(j, k);
            const double v = s.score(h);
            CHECK(v < prev);
            CHECK(v > 0);
            CHECK(std::isfinite(v));
            prev = v;
        }
    }
}

TEST_CASE("affine invariance without regularisation") {
    Rng rng(5);
    const Tensor x = random_points(rng, 60, 3);
    ScorerOptions opts;
    opts.eps_reg = 0;
    const MahalanobisScorer s = MahalanobisScorer::fit(x, opts);
    const double a[3][3] = {{2, 0.5, 0}, {0, 1, -1}, {0.3, 0, 3}};
    const double b[3] = {1, -2, 4};
    const auto map = [&](std::span<const double> v) {
        std::vector<double> o(3);
        for (int i = 0; i < 3; ++i) o[i] = b[i] + a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
        return o;
    };
    Tensor y(60, 3);
    for (std::size_t i = 0; i < 60; ++i) {
        const auto o = map(x.row_span(i));
        for (int j = 0; j < 3; ++j) y(i, j) = o[j];
    }
    const MahalanobisScorer t = MahalanobisScorer::fit(y, opts);
    for (int k = 0; k < 10; ++k) {
        const Tensor h = random_points(rng, 1, 3);
        const double d1 = s.squared_distance(h.row_span(0)).first;
        const double d2 = t.squared_distance(map(h.row_span(0))).first;
        CHECK(d2 == doctest::Approx(d1).epsilon(1e-8));
    }
}

TEST_CASE("kmeans") {
    Rng rng(6);
    const std::vector<std::vector<double>> centres{{0, 0}, {10, 10}};
    const Tensor x = blobs(rng, centres, 40, 1.0);
    const KMeansResult r = kmeans(x, 2, 3);
    for (std::size_t c = 0; c < 2; ++c) {
        double m0 = 0, m1 = 0;
        for (std::size_t i = 0; i < 40; ++i) {
            m0 += x(c * 40 + i, 0);
            m1 += x(c * 40 + i, 1);
        }
        m0 /= 40;
        m1 /= 40;
        double best = 1e9;
        for (std::size_t k = 0; k < 2; ++k)
            best = std::min(best, std::hypot(r.centroids(k, 0) - m0, r.centroids(k, 1) - m1));
        CHECK(best < 0.1);
    }
    const KMeansResult again = kmeans(x, 2, 3);
    CHECK(again.centroids == r.centroids);
    CHECK(again.assignment == r.assignment);

    ScorerOptions opts;
    opts.clusters = 2;
    opts.seed = 3;
    const MahalanobisScorer a = MahalanobisScorer::fit(x, opts), b = MahalanobisScorer::fit(x, opts);
    CHECK(a.stats()[0].inv == b.stats()[0].inv);
    CHECK(a.stats()[1].mean == b.stats()[1].mean);
}

TEST_CASE("fit preconditions") {
    Rng rng(7);
    ScorerOptions opts;
    opts.clusters = 3;
    CHECK_THROWS(MahalanobisScorer::fit(random_points(rng, 3, 2), opts));
    // a singleton cluster gets merged away
    Tensor x = blobs(rng, {{0, 0}, {20, 20}}, 10, 0.5);
    Tensor y(21, 2);
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k];
    y(20, 0) = -500;
    y(20, 1) = 500;
    const MahalanobisScorer s = MahalanobisScorer::fit(y, opts);
    std::size_t total = 0;
    for (const auto& st : s.stats()) {
        CHECK(st.count >= 2);
        total += st.count;
    }
    CHECK(total == 21);
}

TEST_CASE("decide") {
    CHECK(decide(0.5, 0.5).verdict == Decision::Verdict::ID);
    CHECK(decide(0.49, 0.5).verdict == Decision::Verdict::OOD);
    CHECK(decide(-1e300, -std::numeric_limits<double>::infinity()).verdict == Decision::Verdict::ID);
    CHECK(decide(1e300, std::numeric_limits<double>::infinity()).verdict == Decision::Verdict::OOD);
}
