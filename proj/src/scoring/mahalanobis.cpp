#include <iostream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dgp/scoring.hpp"

namespace dgp {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ClusterStats cluster_stats(const Tensor& x, const std::vector<std::size_t>& members, double eps_reg) {
    const std::size_t d = x.cols();
    const double n = static_cast<double>(members.size());
    ClusterStats s;
    s.count = members.size();
    s.mean = Tensor(1, d);
    for (std::size_t i : members)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
    for (auto& v : s.mean.values()) v /= n;

    s.cov = Tensor(d, d);
    std::vector<double> c(d);
    for (std::size_t i : members) {
        for (std::size_t j = 0; j < d; ++j) c[j] = x(i, j) - s.mean[j];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) s.cov(a, b) += c[a] * c[b];
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            s.cov(a, b) /= n;
            s.cov(b, a) = s.cov(a, b);
        }

    double trace = 0.0;
    for (std::size_t a = 0; a < d; ++a) trace += s.cov(a, a);
    s.ridge = eps_reg * trace / static_cast<double>(d);
    // All members identical: no scale to borrow, fall back to an absolute ridge.
    if (!(s.ridge > 0.0)) s.ridge = eps_reg;

    const Tensor reg = s.regularized();
    Eigen::Map<const Mat> m(reg.data(), d, d);
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) throw NumericError("regularized covariance is not positive definite");
    Mat inv = llt.solve(Mat::Identity(d, d));
    inv = 0.5 * (inv + inv.transpose()).eval();
    s.inv = Tensor(d, d, std::vector<double>(inv.data(), inv.data() + d * d));
    if (!s.inv.all_finite()) throw NumericError("covariance inverse is not finite");
    return s;
}

}  // namespace

Tensor ClusterStats::regularized() const {
    Tensor r = cov;
    for (std::size_t a = 0; a < r.rows(); ++a) r(a, a) += ridge;
    return r;
}

MahalanobisScorer MahalanobisScorer::fit(const Tensor& embeddings, const ScorerOptions& opts) {
    const std::size_t n = embeddings.rows();
    if (opts.clusters == 0) throw std::invalid_argument("scorer needs at least one cluster");
    if (n <= opts.clusters) throw std::invalid_argument("scorer fit needs more embeddings than clusters");
    if (!embeddings.all_finite()) throw NumericError("non-finite embedding passed to scorer fit");

    std::vector<std::vector<std::size_t>> members;
    if (opts.clusters == 1) {
        members.emplace_back(n);
        for (std::size_t i = 0; i < n; ++i) members[0][i] = i;
    } else {
        KMeansResult km = kmeans(embeddings, opts.clusters, opts.seed);
        Tensor centroids = km.centroids;
        std::vector<std::size_t> alive(opts.clusters);
        for (std::size_t c = 0; c < alive.size(); ++c) alive[c] = c;
        // Fold clusters with fewer than two members into their nearest neighbour.
        while (true) {
            std::vector<std::size_t> counts(opts.clusters, 0);
            for (std::size_t a : km.assignment) ++counts[a];
            auto small = std::find_if(alive.begin(), alive.end(), [&](std::size_t c) { return counts[c] < 2; });
            if (small == alive.end() || alive.size() == 1) break;
            const std::size_t victim = *small;
            alive.erase(small);
            std::size_t target = alive.front();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c : alive) {
                double dd = 0.0;
                for (std::size_t j = 0; j < centroids.cols(); ++j) {
                    const double diff = centroids(c, j) - centroids(victim, j);
                    dd += diff * diff;
                }
                if (dd < best) {
                    best = dd;
                    target = c;
                }
            }
            std::cerr << "warning: cluster " << victim << " has " << counts[victim]
                      << " member(s); merged into cluster " << target << "\n";
            for (auto& a : km.assignment)
                if (a == victim) a = target;
        }
        for (std::size_t c : alive) {
            std::vector<std::size_t> m;
            for (std::size_t i = 0; i < n; ++i)
                if (km.assignment[i] == c) m.push_back(i);
            if (!m.empty()) members.push_back(std::move(m));
        }
    }

    MahalanobisScorer s;
    s.eps_d_ = opts.eps_d;
    for (const auto& m : members) s.stats_.push_back(cluster_stats(embeddings, m, opts.eps_reg));
    return s;
}

MahalanobisScorer MahalanobisScorer::from_stats(std::vector<ClusterStats> stats, double eps_d) {
    if (stats.empty()) throw std::invalid_argument("scorer needs at least one cluster");
    MahalanobisScorer s;
    s.stats_ = std::move(stats);
    s.eps_d_ = eps_d;
    return s;
}

std::pair<double, std::size_t> MahalanobisScorer::squared_distance(std::span<const double> h) const {
    if (!fitted()) throw std::logic_error("scorer is not fitted");
    const std::size_t d = dim();
    if (h.size() != d) throw ShapeError("md_score: embedding width does not match scorer");
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_q = 0;
    std::vector<double> diff(d);
    for (std::size_t q = 0; q < stats_.size(); ++q) {
        const auto& s = stats_[q];
        for (std::size_t j = 0; j < d; ++j) diff[j] = h[j] - s.mean[j];
        double acc = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            double row = 0.0;
            for (std::size_t b = 0; b < d; ++b) row += s.inv(a, b) * diff[b];
            acc += diff[a] * row;
        }
        if (acc < best) {
            best = acc;
            best_q = q;
        }
    }
    return {best, best_q};
}

double MahalanobisScorer::score(std::span<const double> h) const {
    return 1.0 / std::max(squared_distance(h).first, eps_d_);
}

ad::Var MahalanobisScorer::score(const ad::Var& h) const {
    if (h.rows() != 1) throw ShapeError("md_score expects a single 1 x d embedding");
    const std::size_t q = squared_distance(h.value().values()).second;
    const auto& s = stats_[q];
    const ad::Var diff = ad::sub(h, ad::constant(s.mean));
    const ad::Var d2 = ad::sum(ad::mul(ad::matmul(diff, ad::constant(s.inv)), diff));
    return ad::reciprocal(ad::clamp_min(d2, eps_d_));
}

Decision decide(double score, double threshold) {
    Decision d;
    d.score = score;
    d.threshold = threshold;
    d.verdict = score >= threshold ? Decision::Verdict::ID : Decision::Verdict::OOD;
    return d;
}

}  // namespace dgp
