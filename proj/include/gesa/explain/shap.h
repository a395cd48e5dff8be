#ifndef GESA_EXPLAIN_SHAP_H_
#define GESA_EXPLAIN_SHAP_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace gesa::explain {

using ScoreFn = std::function<double(const std::vector<double>&)>;

struct ShapConfig {
  int max_exact_features = 12;
  int samples = 2048;  // coalitions drawn in sampled mode
  uint64_t seed = 0;
};

struct ShapExplanation {
  double baseline = 0.0;  // score at the background means
  std::vector<double> attributions;
  std::vector<std::string> feature_names;
  double score = 0.0;  // baseline + sum of attributions
  bool exact = true;
};

// Shapley values of `score_fn` at `instance`. Absent features take the mean
// of `background`. Up to `max_exact_features` features every coalition is
// enumerated; beyond that coalitions are sampled from the Shapley kernel and
// fitted by least squares with the additivity constraint imposed.
absl::StatusOr<ShapExplanation> KernelShap(
    const ScoreFn& score_fn, const std::vector<double>& instance,
    const std::vector<std::vector<double>>& background, const ShapConfig& config,
    std::vector<std::string> feature_names = {});

nlohmann::json ShapToJson(const ShapExplanation& e);

}  // namespace gesa::explain

#endif  // GESA_EXPLAIN_SHAP_H_
