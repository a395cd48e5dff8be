#ifndef GESA_RECSYS_FUSION_H_
#define GESA_RECSYS_FUSION_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"

namespace gesa::recsys {

struct FusionWeights {
  double alpha = 1.0;  // content
  double beta = 0.0;   // collaborative
  double gamma = 0.0;  // graph

  bool operator==(const FusionWeights&) const = default;
};

absl::Status CheckFusionWeights(const FusionWeights& w);

struct ComponentScores {
  double content = 0.0;
  double collaborative = 0.0;
  double graph = 0.0;
};

absl::StatusOr<double> HybridScore(const ComponentScores& s, const FusionWeights& w);

struct FusionExample {
  ComponentScores scores;
  bool outcome = false;
};

struct FusionFitConfig {
  int folds = 5;
  double step = 0.05;
  uint64_t seed = 0;
};

struct FusionFit {
  FusionWeights weights;
  double mean_auc = 0.0;
  int grid_points = 0;
};

// Grid search over the weight simplex maximizing mean held-out AUC over
// seeded stratified folds. Ties within 1e-12 go to the larger alpha, then
// the larger beta.
absl::StatusOr<FusionFit> FitFusionWeights(const std::vector<FusionExample>& history,
                                           const FusionFitConfig& config);

}  // namespace gesa::recsys

#endif  // GESA_RECSYS_FUSION_H_
