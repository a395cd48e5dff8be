#ifndef GESA_DEBIAS_FAIRNESS_H_
#define GESA_DEBIAS_FAIRNESS_H_

#include <map>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace gesa::debias {

// Largest pairwise gap in selection rate between groups.
absl::StatusOr<double> DemographicParityDifference(
    const std::vector<bool>& selected, const std::vector<std::string>& groups);

// Largest pairwise gap in true-positive rate (selected among qualified).
absl::StatusOr<double> EqualizedOpportunityDifference(
    const std::vector<bool>& selected, const std::vector<bool>& qualified,
    const std::vector<std::string>& groups);

// Expected calibration error over equal-width bins for one group.
absl::StatusOr<double> ExpectedCalibrationError(
    const std::vector<double>& scores, const std::vector<int>& outcomes,
    int bins = 10);

// Largest pairwise gap in per-group expected calibration error.
absl::StatusOr<double> CalibrationError(const std::vector<double>& scores,
                                        const std::vector<int>& outcomes,
                                        const std::vector<std::string>& groups,
                                        int bins = 10);

// 1 - mean of the three disparities, clamped to [0, 1].
double CompositeFairnessScore(double parity, double opportunity,
                              double calibration);

// Largest score gap between candidates whose embeddings lie closer than
// `epsilon`. Diagnostic only.
double IndividualFairnessGap(const Eigen::MatrixXd& embeddings,
                             const std::vector<double>& scores, double epsilon);

struct CategoryFairness {
  double demographic_parity = 0.0;
  double equalized_opportunity = 0.0;
  double calibration = 0.0;
  double composite = 1.0;
};

struct FairnessReport {
  std::map<std::string, CategoryFairness> categories;
  // Mean of the per-category composites; 1 when there are no categories.
  double composite = 1.0;
};

// Per-candidate inputs shared by every category.
struct FairnessInputs {
  std::vector<bool> selected;
  std::vector<bool> qualified;
  std::vector<double> scores;   // in [0, 1]
  std::vector<int> outcomes;    // 0 or 1
  std::map<std::string, std::vector<std::string>> groups;  // category -> label
};

absl::StatusOr<FairnessReport> BuildFairnessReport(const FairnessInputs& in,
                                                   int bins = 10);

nlohmann::json FairnessReportToJson(const FairnessReport& report);

}  // namespace gesa::debias

#endif  // GESA_DEBIAS_FAIRNESS_H_
