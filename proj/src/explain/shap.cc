#include "gesa/explain/shap.h"

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/random.h"

namespace gesa::explain {
namespace {

std::vector<double> Mix(const std::vector<double>& instance,
                        const std::vector<double>& base, uint64_t mask) {
  std::vector<double> x = base;
  for (size_t i = 0; i < x.size(); ++i) {
    if (mask >> i & 1) x[i] = instance[i];
  }
  return x;
}

std::vector<double> Mix(const std::vector<double>& instance,
                        const std::vector<double>& base,
                        const std::vector<bool>& present) {
  std::vector<double> x = base;
  for (size_t i = 0; i < x.size(); ++i) {
    if (present[i]) x[i] = instance[i];
  }
  return x;
}

}  // namespace

absl::StatusOr<ShapExplanation> KernelShap(
    const ScoreFn& score_fn, const std::vector<double>& instance,
    const std::vector<std::vector<double>>& background, const ShapConfig& config,
    std::vector<std::string> feature_names) {
  const int f = static_cast<int>(instance.size());
  if (f < 1) return absl::InvalidArgumentError("instance has no features");
  if (background.empty()) return absl::InvalidArgumentError("empty background set");
  std::vector<double> mean(f, 0.0);
  for (const std::vector<double>& row : background) {
    if (static_cast<int>(row.size()) != f) {
      return absl::InvalidArgumentError("background arity differs from instance");
    }
    for (int i = 0; i < f; ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= static_cast<double>(background.size());
  if (feature_names.empty()) {
    for (int i = 0; i < f; ++i) feature_names.push_back(absl::StrCat("f", i));
  }
  if (static_cast<int>(feature_names.size()) != f) {
    return absl::InvalidArgumentError("feature name count differs from arity");
  }

  ShapExplanation out;
  out.feature_names = std::move(feature_names);
  out.baseline = score_fn(mean);
  const double full = score_fn(instance);
  if (!std::isfinite(out.baseline) || !std::isfinite(full)) {
    return absl::InvalidArgumentError("score function returned a non-finite value");
  }
  out.attributions.assign(f, 0.0);

  if (f <= config.max_exact_features && f < 63) {
    const uint64_t count = uint64_t{1} << f;
    std::vector<double> value(count);
    for (uint64_t mask = 0; mask < count; ++mask) {
      value[mask] = mask == 0           ? out.baseline
                    : mask == count - 1 ? full
                                        : score_fn(Mix(instance, mean, mask));
      if (!std::isfinite(value[mask])) {
        return absl::InvalidArgumentError("score function returned a non-finite value");
      }
    }
    // weight[s] = s! (f - s - 1)! / f!
    std::vector<double> weight(f);
    for (int s = 0; s < f; ++s) {
      double w = 1.0 / f;
      // 1 / (f * C(f-1, s))
      for (int k = 1; k <= s; ++k) w *= static_cast<double>(k) / (f - k);
      weight[s] = w;
    }
    for (uint64_t mask = 0; mask < count; ++mask) {
      const int s = __builtin_popcountll(mask);
      for (int i = 0; i < f; ++i) {
        if (mask >> i & 1) continue;
        out.attributions[i] += weight[s] * (value[mask | uint64_t{1} << i] - value[mask]);
      }
    }
    out.exact = true;
  } else {
    // Coalition sizes drawn with probability proportional to the Shapley
    // kernel mass (f-1) / (s (f-s)), members uniform given the size; each
    // sample then carries unit weight in the regression.
    Rng rng(config.seed);
    std::vector<double> size_mass;
    for (int s = 1; s < f; ++s) size_mass.push_back((f - 1.0) / (s * (f - s)));
    const double delta = full - out.baseline;
    // Unknowns phi_0..phi_{f-2}; phi_{f-1} = delta - sum of the rest.
    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(f - 1, f - 1);
    Eigen::VectorXd atb = Eigen::VectorXd::Zero(f - 1);
    std::vector<int> order(f);
    for (int i = 0; i < f; ++i) order[i] = i;
    for (int n = 0; n < config.samples; ++n) {
      const int s = static_cast<int>(rng.Categorical(size_mass)) + 1;
      rng.Shuffle(order);
      std::vector<bool> present(f, false);
      for (int k = 0; k < s; ++k) present[order[k]] = true;
      const double v = score_fn(Mix(instance, mean, present));
      if (!std::isfinite(v)) {
        return absl::InvalidArgumentError("score function returned a non-finite value");
      }
      const double last = present[f - 1] ? 1.0 : 0.0;
      Eigen::VectorXd row(f - 1);
      for (int i = 0; i < f - 1; ++i) row[i] = (present[i] ? 1.0 : 0.0) - last;
      const double target = v - out.baseline - last * delta;
      ata += row * row.transpose();
      atb += row * target;
    }
    ata.diagonal().array() += 1e-10;
    const Eigen::VectorXd phi = ata.ldlt().solve(atb);
    double rest = 0.0;
    for (int i = 0; i < f - 1; ++i) {
      out.attributions[i] = phi[i];
      rest += phi[i];
    }
    out.attributions[f - 1] = delta - rest;
    out.exact = false;
  }
  out.score = out.baseline;
  for (double a : out.attributions) out.score += a;
  return out;
}

nlohmann::json ShapToJson(const ShapExplanation& e) {
  nlohmann::json features = nlohmann::json::array();
  for (size_t i = 0; i < e.attributions.size(); ++i) {
    features.push_back({{"name", e.feature_names[i]}, {"phi", e.attributions[i]}});
  }
  return {{"baseline", e.baseline},
          {"score", e.score},
          {"exact", e.exact},
          {"features", features}};
}

}  // namespace gesa::explain
