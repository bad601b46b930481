#include <algorithm>
#include <limits>

#include "dgp/rng.hpp"
#include "dgp/scoring.hpp"

namespace dgp {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

std::size_t nearest(std::span<const double> p, const Tensor& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = sq_dist(p, centroids.row_span(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace

KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed, std::size_t max_iter, double tol) {
    const std::size_t n = points.rows(), d = points.cols();
    if (k == 0 || n < k) throw std::invalid_argument("kmeans: need at least k points");
    Rng rng(seed);

    KMeansResult r;
    r.centroids = Tensor(k, d);
    const auto set_centroid = [&](std::size_t c, std::size_t i) {
        std::copy(points.row_span(i).begin(), points.row_span(i).end(), r.centroids.row_span(c).begin());
    };
    set_centroid(0, rng.index(n));
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            min_d[i] = std::min(min_d[i], sq_dist(points.row_span(i), r.centroids.row_span(c - 1)));
            total += min_d[i];
        }
        std::size_t pick = n - 1;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                u -= min_d[i];
                if (u < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.index(n);
        }
        set_centroid(c, pick);
    }

    r.assignment.assign(n, 0);
    for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
        for (std::size_t i = 0; i < n; ++i) r.assignment[i] = nearest(points.row_span(i), r.centroids);
        Tensor next(k, d);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[r.assignment[i]];
            auto row = next.row_span(r.assignment[i]);
            auto p = points.row_span(i);
            for (std::size_t j = 0; j < d; ++j) row[j] += p[j];
        }
        double moved = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            auto row = next.row_span(c);
            if (counts[c] == 0) {
                std::copy(r.centroids.row_span(c).begin(), r.centroids.row_span(c).end(), row.begin());
                continue;
            }
            for (auto& v : row) v /= static_cast<double>(counts[c]);
            moved = std::max(moved, sq_dist(row, r.centroids.row_span(c)));
        }
        r.centroids = std::move(next);
        if (moved <= tol * tol) break;
    }
    r.iterations = std::min(r.iterations, max_iter);
    for (std::size_t i = 0; i < n; ++i) r.assignment[i] = nearest(points.row_span(i), r.centroids);
    return r;
}

}  // namespace dgp
