#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dgp/scoring.hpp"

namespace dgp::testing {

inline double brute_auc(const std::vector<double>& id, const std::vector<double>& ood) {
    double s = 0;
    for (double a : id)
        for (double b : ood) s += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    return s / static_cast<double>(id.size() * ood.size());
}

inline double brute_fpr95(const std::vector<double>& id, const std::vector<double>& ood) {
    double t = -std::numeric_limits<double>::infinity();
    for (double c : id) {
        const auto kept = std::count_if(id.begin(), id.end(), [&](double v) { return v >= c; });
        if (static_cast<double>(kept) >= 0.95 * static_cast<double>(id.size())) t = std::max(t, c);
    }
    const auto fp = std::count_if(ood.begin(), ood.end(), [&](double v) { return v >= t; });
    return static_cast<double>(fp) / static_cast<double>(ood.size());
}

// Threshold sweep with one cut just below each distinct score.
inline double brute_aupr(const std::vector<double>& id, const std::vector<double>& ood) {
    std::vector<double> all(id);
    all.insert(all.end(), ood.begin(), ood.end());
    const std::set<double> distinct(all.begin(), all.end());
    std::vector<double> cuts;
    for (auto it = distinct.begin(); it != distinct.end(); ++it)
        cuts.push_back(it == distinct.begin() ? *it - 1.0 : (*it + *std::prev(it)) / 2);
    // predicted positive: score > cut; highest cut first
    std::sort(cuts.begin(), cuts.end(), std::greater<>());
    double area = 0, prev_recall = 0;
    for (double c : cuts) {
        const double tp = static_cast<double>(std::count_if(id.begin(), id.end(), [&](double v) { return v > c; }));
        const double fp = static_cast<double>(std::count_if(ood.begin(), ood.end(), [&](double v) { return v > c; }));
        if (tp + fp == 0) continue;
        const double recall = tp / static_cast<double>(id.size());
        area += (recall - prev_recall) * tp / (tp + fp);
        prev_recall = recall;
    }
    return area;
}

// (h - mu)^T (cov + ridge I)^-1 (h - mu) through Eigen's full-pivot LU.
inline double quad_form(std::span<const double> h, const ClusterStats& s) {
    const auto d = static_cast<Eigen::Index>(h.size());
    Eigen::MatrixXd reg(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            reg(i, j) = s.cov(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) + (i == j ? s.ridge : 0.0);
    Eigen::VectorXd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x(i) = h[static_cast<std::size_t>(i)] - s.mean(0, static_cast<std::size_t>(i));
    return x.dot(reg.fullPivLu().solve(x));
}

}  // namespace dgp::testing
