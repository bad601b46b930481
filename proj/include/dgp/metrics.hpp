#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace dgp {

// Detection metrics with ID as the positive class (higher score = more
// in-distribution). All throw std::invalid_argument on an empty side.

// Mann-Whitney estimate: P(id > ood) + 0.5 P(id == ood).
double auc(std::span<const double> id_scores, std::span<const double> ood_scores);

// Step-wise area under the precision-recall curve, thresholds at distinct
// scores in descending order. With ood_positive the roles are swapped and
// scores negated.
double aupr(std::span<const double> id_scores, std::span<const double> ood_scores, bool ood_positive = false);

// Fraction of OOD scores >= t, where t is the largest threshold keeping at
// least 95% of ID scores >= t.
double fpr95(std::span<const double> id_scores, std::span<const double> ood_scores);

// Histogram intersection over the pooled score range.
double overlap(std::span<const double> id_scores, std::span<const double> ood_scores, std::size_t bins = 50);

struct DetectionMetrics {
    double auc = 0.0;
    double aupr = 0.0;
    double fpr95 = 0.0;
    double overlap = 0.0;
    std::size_t n_id = 0;
    std::size_t n_ood = 0;

    nlohmann::json to_json() const;
};

DetectionMetrics evaluate(std::span<const double> id_scores, std::span<const double> ood_scores);

// ---- score tables ------------------------------------------------------------

enum class Origin { ID, OOD };

struct ScoreRow {
    std::string graph_id;
    Origin origin = Origin::ID;
    double score = 0.0;
    double md1 = 0.0;
    double md2 = 0.0;
};

struct ScoreTable {
    std::vector<ScoreRow> rows;

    std::vector<double> scores(Origin origin) const;
    void validate() const;  // unique ids, finite scores
};

void write_score_csv(const ScoreTable& t, std::ostream& out);
void write_score_csv(const ScoreTable& t, const std::filesystem::path& path);
ScoreTable read_score_csv(const std::filesystem::path& path);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace dgp
