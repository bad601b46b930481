#include "dgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgp {

namespace {

void require_nonempty(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("metric needs non-empty ID and OOD score lists");
}

}  // namespace

double auc(std::span<const double> id_scores, std::span<const double> ood_scores) {
    require_nonempty(id_scores, ood_scores);
    // Rank-sum with midranks for ties, O(n log n).
    struct Item {
        double s;
        bool id;
    };
    std::vector<Item> all;
    all.reserve(id_scores.size() + ood_scores.size());
    for (double s : id_scores) all.push_back({s, true});
    for (double s : ood_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.s < b.s; });
    // Count pairs in units of half-pairs to stay exact.
    double ood_below = 0.0;
    double wins2 = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        double ids = 0.0, oods = 0.0;
        while (j < all.size() && all[j].s == all[i].s) {
            (all[j].id ? ids : oods) += 1.0;
            ++j;
        }
        wins2 += ids * (2.0 * ood_below + oods);
        ood_below += oods;
        i = j;
    }
    return wins2 / (2.0 * static_cast<double>(id_scores.size()) * static_cast<double>(ood_scores.size()));
}

double aupr(std::span<const double> id_scores, std::span<const double> ood_scores, bool ood_positive) {
    require_nonempty(id_scores, ood_scores);
    if (ood_positive) {
        std::vector<double> pos(ood_scores.size()), neg(id_scores.size());
        std::transform(ood_scores.begin(), ood_scores.end(), pos.begin(), [](double s) { return -s; });
        std::transform(id_scores.begin(), id_scores.end(), neg.begin(), [](double s) { return -s; });
        return aupr(pos, neg, false);
    }
    std::vector<double> pos(id_scores.begin(), id_scores.end());
    std::vector<double> neg(ood_scores.begin(), ood_scores.end());
    std::sort(pos.begin(), pos.end(), std::greater<>());
    std::sort(neg.begin(), neg.end(), std::greater<>());
    const double p_total = static_cast<double>(pos.size());
    std::size_t ip = 0, in = 0;
    double area = 0.0;
    while (ip < pos.size()) {
        const double t = std::max(pos[ip], in < neg.size() ? neg[in] : pos[ip]);
        const std::size_t ip0 = ip;
        while (ip < pos.size() && pos[ip] >= t) ++ip;
        while (in < neg.size() && neg[in] >= t) ++in;
        if (ip > ip0) {
            const double precision = static_cast<double>(ip) / static_cast<double>(ip + in);
            area += precision * static_cast<double>(ip - ip0) / p_total;
        }
    }
    return area;
}

double fpr95(std::span<const double> id_scores, std::span<const double> ood_scores) {
    require_nonempty(id_scores, ood_scores);
    std::vector<double> ids(id_scores.begin(), id_scores.end());
    std::sort(ids.begin(), ids.end(), std::greater<>());
    const std::size_t n = ids.size();
    // Smallest k with k >= 0.95 n, computed in integers: 20k >= 19n.
    const std::size_t k = (19 * n + 19) / 20;
    const double t = ids[std::max<std::size_t>(k, 1) - 1];
    const auto fp = std::count_if(ood_scores.begin(), ood_scores.end(), [t](double s) { return s >= t; });
    return static_cast<double>(fp) / static_cast<double>(ood_scores.size());
}

double overlap(std::span<const double> id_scores, std::span<const double> ood_scores, std::size_t bins) {
    require_nonempty(id_scores, ood_scores);
    if (bins == 0) throw std::invalid_argument("overlap needs at least one bin");
    double lo = id_scores[0], hi = id_scores[0];
    for (auto side : {id_scores, ood_scores})
        for (double s : side) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    if (hi == lo) return 1.0;
    const auto histogram = [&](std::span<const double> xs) {
        std::vector<double> h(bins, 0.0);
        for (double s : xs) {
            auto b = static_cast<std::size_t>((s - lo) / (hi - lo) * static_cast<double>(bins));
            h[std::min(b, bins - 1)] += 1.0 / static_cast<double>(xs.size());
        }
        return h;
    };
    const auto p = histogram(id_scores);
    const auto q = histogram(ood_scores);
    double o = 0.0;
    for (std::size_t b = 0; b < bins; ++b) o += std::min(p[b], q[b]);
    return std::min(o, 1.0);
}

nlohmann::json DetectionMetrics::to_json() const {
    return {{"auc", auc},     {"aupr", aupr},   {"fpr95", fpr95},
            {"overlap", overlap}, {"n_id", n_id}, {"n_ood", n_ood}};
}

DetectionMetrics evaluate(std::span<const double> id_scores, std::span<const double> ood_scores) {
    DetectionMetrics m;
    m.auc = auc(id_scores, ood_scores);
    m.aupr = aupr(id_scores, ood_scores);
    m.fpr95 = fpr95(id_scores, ood_scores);
    m.overlap = overlap(id_scores, ood_scores);
    m.n_id = id_scores.size();
    m.n_ood = ood_scores.size();
    return m;
}

}  // namespace dgp
