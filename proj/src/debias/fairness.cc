#include "gesa/debias/fairness.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/status_macros.h"

namespace gesa::debias {
namespace {

absl::Status CheckLengths(size_t expected, size_t actual, const char* what) {
  if (expected != actual) {
    return absl::InvalidArgumentError(
        absl::StrCat(what, " has ", actual, " entries, expected ", expected));
  }
  return absl::OkStatus();
}

double Spread(const std::map<std::string, double>& values) {
  double lo = 1e300, hi = -1e300;
  for (const auto& [group, v] : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return values.empty() ? 0.0 : hi - lo;
}

absl::Status NeedTwoGroups(size_t count) {
  if (count < 2) {
    return absl::InvalidArgumentError("fairness metrics need two or more groups");
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<double> DemographicParityDifference(
    const std::vector<bool>& selected, const std::vector<std::string>& groups) {
  RETURN_IF_ERROR(CheckLengths(selected.size(), groups.size(), "groups"));
  std::map<std::string, std::pair<double, double>> counts;  // selected, total
  for (size_t i = 0; i < groups.size(); ++i) {
    auto& [hits, total] = counts[groups[i]];
    hits += selected[i] ? 1.0 : 0.0;
    total += 1.0;
  }
  RETURN_IF_ERROR(NeedTwoGroups(counts.size()));
  std::map<std::string, double> rates;
  for (const auto& [group, c] : counts) rates[group] = c.first / c.second;
  return Spread(rates);
}

absl::StatusOr<double> EqualizedOpportunityDifference(
    const std::vector<bool>& selected, const std::vector<bool>& qualified,
    const std::vector<std::string>& groups) {
  RETURN_IF_ERROR(CheckLengths(selected.size(), groups.size(), "groups"));
  RETURN_IF_ERROR(CheckLengths(selected.size(), qualified.size(), "qualified"));
  std::map<std::string, std::pair<double, double>> counts;
  for (size_t i = 0; i < groups.size(); ++i) {
    auto& [hits, total] = counts[groups[i]];
    if (qualified[i]) {
      hits += selected[i] ? 1.0 : 0.0;
      total += 1.0;
    }
  }
  RETURN_IF_ERROR(NeedTwoGroups(counts.size()));
  std::map<std::string, double> rates;
  for (const auto& [group, c] : counts) {
    if (c.second == 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("group '", group, "' has no qualified members"));
    }
    rates[group] = c.first / c.second;
  }
  return Spread(rates);
}

absl::StatusOr<double> ExpectedCalibrationError(
    const std::vector<double>& scores, const std::vector<int>& outcomes,
    int bins) {
  RETURN_IF_ERROR(CheckLengths(scores.size(), outcomes.size(), "outcomes"));
  if (bins < 1) return absl::InvalidArgumentError("bins must be >= 1");
  if (scores.empty()) return absl::InvalidArgumentError("empty group");
  std::vector<double> score_sum(bins, 0.0), outcome_sum(bins, 0.0),
      count(bins, 0.0);
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      return absl::InvalidArgumentError("scores must lie in [0, 1]");
    }
    const int b = std::min(bins - 1, static_cast<int>(scores[i] * bins));
    score_sum[b] += scores[i];
    outcome_sum[b] += outcomes[i];
    count[b] += 1.0;
  }
  double ece = 0.0;
  const double n = static_cast<double>(scores.size());
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0.0) continue;
    ece += (count[b] / n) *
           std::abs(score_sum[b] / count[b] - outcome_sum[b] / count[b]);
  }
  return ece;
}

absl::StatusOr<double> CalibrationError(const std::vector<double>& scores,
                                        const std::vector<int>& outcomes,
                                        const std::vector<std::string>& groups,
                                        int bins) {
  RETURN_IF_ERROR(CheckLengths(scores.size(), groups.size(), "groups"));
  RETURN_IF_ERROR(CheckLengths(scores.size(), outcomes.size(), "outcomes"));
  std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> split;
  for (size_t i = 0; i < groups.size(); ++i) {
    split[groups[i]].first.push_back(scores[i]);
    split[groups[i]].second.push_back(outcomes[i]);
  }
  RETURN_IF_ERROR(NeedTwoGroups(split.size()));
  std::map<std::string, double> per_group;
  for (const auto& [group, data] : split) {
    ASSIGN_OR_RETURN(per_group[group],
                     ExpectedCalibrationError(data.first, data.second, bins));
  }
  return Spread(per_group);
}

double CompositeFairnessScore(double parity, double opportunity,
                              double calibration) {
  return std::clamp(1.0 - (parity + opportunity + calibration) / 3.0, 0.0, 1.0);
}

double IndividualFairnessGap(const Eigen::MatrixXd& embeddings,
                             const std::vector<double>& scores,
                             double epsilon) {
  double gap = 0.0;
  for (Eigen::Index i = 0; i < embeddings.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < embeddings.cols(); ++j) {
      if ((embeddings.col(i) - embeddings.col(j)).norm() < epsilon) {
        gap = std::max(gap, std::abs(scores[i] - scores[j]));
      }
    }
  }
  return gap;
}

absl::StatusOr<FairnessReport> BuildFairnessReport(const FairnessInputs& in,
                                                   int bins) {
  FairnessReport report;
  double composite_sum = 0.0;
  for (const auto& [category, labels] : in.groups) {
    CategoryFairness c;
    ASSIGN_OR_RETURN(c.demographic_parity,
                     DemographicParityDifference(in.selected, labels));
    ASSIGN_OR_RETURN(c.equalized_opportunity,
                     EqualizedOpportunityDifference(in.selected, in.qualified,
                                                    labels));
    ASSIGN_OR_RETURN(c.calibration,
                     CalibrationError(in.scores, in.outcomes, labels, bins));
    c.composite = CompositeFairnessScore(c.demographic_parity,
                                         c.equalized_opportunity,
                                         c.calibration);
    composite_sum += c.composite;
    report.categories[category] = c;
  }
  if (!report.categories.empty()) {
    report.composite = composite_sum / static_cast<double>(report.categories.size());
  }
  return report;
}

nlohmann::json FairnessReportToJson(const FairnessReport& report) {
  nlohmann::json categories = nlohmann::json::object();
  for (const auto& [name, c] : report.categories) {
    categories[name] = {{"demographic_parity_difference", c.demographic_parity},
                        {"equalized_opportunity_difference",
                         c.equalized_opportunity},
                        {"calibration_error", c.calibration},
                        {"composite", c.composite}};
  }
  return {{"categories", categories}, {"composite", report.composite}};
}

}  // namespace gesa::debias
