#include "gesa/recsys/fusion.h"

#include <cmath>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/metrics.h"
#include "gesa/core/random.h"
#include "gesa/core/status_macros.h"

namespace gesa::recsys {

absl::Status CheckFusionWeights(const FusionWeights& w) {
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0) {
    return absl::InvalidArgumentError("fusion weights must be non-negative");
  }
  if (std::abs(w.alpha + w.beta + w.gamma - 1.0) > 1e-9) {
    return absl::InvalidArgumentError("fusion weights must sum to 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<double> HybridScore(const ComponentScores& s, const FusionWeights& w) {
  RETURN_IF_ERROR(CheckFusionWeights(w));
  for (double v : {s.content, s.collaborative, s.graph}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      return absl::InvalidArgumentError("component scores must lie in [0, 1]");
    }
  }
  return w.alpha * s.content + w.beta * s.collaborative + w.gamma * s.graph;
}

absl::StatusOr<FusionFit> FitFusionWeights(const std::vector<FusionExample>& history,
                                           const FusionFitConfig& config) {
  if (config.folds < 2) return absl::InvalidArgumentError("need at least 2 folds");
  const int steps = static_cast<int>(std::lround(1.0 / config.step));
  if (!(config.step > 0.0) || std::abs(steps * config.step - 1.0) > 1e-9) {
    return absl::InvalidArgumentError("grid step must divide 1");
  }
  std::vector<int> positives, negatives;
  for (size_t i = 0; i < history.size(); ++i) {
    (history[i].outcome ? positives : negatives).push_back(static_cast<int>(i));
  }
  if (static_cast<int>(positives.size()) < config.folds ||
      static_cast<int>(negatives.size()) < config.folds) {
    return absl::FailedPreconditionError(absl::StrCat(
        "need at least ", config.folds, " positive and negative outcomes"));
  }
  // Stratified folds: each class shuffled and dealt round-robin.
  Rng rng(config.seed);
  rng.Shuffle(positives);
  rng.Shuffle(negatives);
  std::vector<std::vector<int>> folds(config.folds);
  for (size_t i = 0; i < positives.size(); ++i) folds[i % config.folds].push_back(positives[i]);
  for (size_t i = 0; i < negatives.size(); ++i) folds[i % config.folds].push_back(negatives[i]);

  FusionFit best;
  best.mean_auc = -1.0;
  std::vector<double> scores;
  std::vector<int> labels;
  for (int a = steps; a >= 0; --a) {
    for (int b = steps - a; b >= 0; --b) {
      const FusionWeights w{a * config.step, b * config.step,
                            std::max(0.0, 1.0 - (a + b) * config.step)};
      double total = 0.0;
      for (const std::vector<int>& fold : folds) {
        scores.clear();
        labels.clear();
        for (int i : fold) {
          const ComponentScores& s = history[i].scores;
          scores.push_back(w.alpha * s.content + w.beta * s.collaborative + w.gamma * s.graph);
          labels.push_back(history[i].outcome ? 1 : 0);
        }
        total += RocAuc(scores, labels);
      }
      const double mean = total / config.folds;
      ++best.grid_points;
      if (mean > best.mean_auc + 1e-12) {
        best.mean_auc = mean;
        best.weights = w;
      }
    }
  }
  return best;
}

}  // namespace gesa::recsys
