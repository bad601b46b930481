#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dgp/autodiff.hpp"

namespace dgp {

struct KMeansResult {
    Tensor centroids;                    // k x d
    std::vector<std::size_t> assignment;  // per point
    std::size_t iterations = 0;
};

// Lloyd iterations from D^2-weighted (k-means++) seeding. Ties go to the
// lowest cluster index.
KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100,
                    double tol = 1e-8);

struct ClusterStats {
    Tensor mean;        // 1 x d
    Tensor cov;         // d x d population covariance
    double ridge = 0;   // added to the diagonal before inversion
    Tensor inv;         // (cov + ridge I)^-1
    std::size_t count = 0;

    Tensor regularized() const;
};

struct ScorerOptions {
    std::size_t clusters = 1;
    double eps_reg = 1e-3;   // ridge = eps_reg * trace(cov) / d
    double eps_d = 1e-12;    // floor on the squared distance
    std::uint64_t seed = 0;
};

class MahalanobisScorer {
public:
    MahalanobisScorer() = default;

    static MahalanobisScorer fit(const Tensor& embeddings, const ScorerOptions& opts);
    static MahalanobisScorer from_stats(std::vector<ClusterStats> stats, double eps_d);

    std::size_t dim() const { return stats_.empty() ? 0 : stats_[0].mean.cols(); }
    std::size_t cluster_count() const { return stats_.size(); }
    const std::vector<ClusterStats>& stats() const { return stats_; }
    double eps_d() const { return eps_d_; }
    bool fitted() const { return !stats_.empty(); }

    // Minimum quadratic form over clusters and the index attaining it.
    std::pair<double, std::size_t> squared_distance(std::span<const double> h) const;
    // 1 / max(d^2, eps_d); larger means more in-distribution.
    double score(std::span<const double> h) const;

    // Differentiable score of a 1 x d embedding. The statistics are constants
    // and the nearest cluster is selected on the forward value.
    ad::Var score(const ad::Var& h) const;

private:
    std::vector<ClusterStats> stats_;
    double eps_d_ = 1e-12;
};

struct Decision {
    enum class Verdict { ID, OOD };
    Verdict verdict = Verdict::ID;
    double score = 0.0;
    double threshold = 0.0;
};

// ID iff score >= threshold.
Decision decide(double score, double threshold);

}  // namespace dgp
