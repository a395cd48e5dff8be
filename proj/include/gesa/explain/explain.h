#ifndef GESA_EXPLAIN_EXPLAIN_H_
#define GESA_EXPLAIN_EXPLAIN_H_

#include <array>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "gesa/explain/shap.h"
#include "gesa/objectives/objectives.h"
#include "nlohmann/json.hpp"

namespace gesa::explain {

inline constexpr int kNumGroups = 5;
inline constexpr std::array<const char*, kNumGroups> kFeatureGroups = {
    "semantic similarity", "graph similarity", "skill coverage",
    "diversity marginal contribution", "preference rank"};

// Objective weights of the selection score being explained.
struct ScoreWeights {
  double merit = 1.0;
  double diversity = 1.0;
  double preference = 1.0;
  double diversity_multiplier = 1.0;  // escalation carried by the front
};

// Everything needed to score one candidate-role pair. `plan` is the
// reference allocation the diversity contribution is measured against;
// empty means nobody assigned.
struct ExplainContext {
  const objectives::ObjectiveContext* objectives = nullptr;
  Eigen::MatrixXd semantic;  // candidates x roles
  Eigen::MatrixXd graph;
  objectives::MeritWeights merit_weights;
  ScoreWeights weights;
  objectives::Genome plan;
  ShapConfig shap;
};

// The five group values for the pair, in kFeatureGroups order.
absl::StatusOr<std::vector<double>> PairFeatures(const ExplainContext& ctx,
                                                 int candidate, int role);

// Weighted selection score of a pair from its group values.
double PairScore(const ExplainContext& ctx, const std::vector<double>& features);

// Group values of every candidate for `role`, candidate order.
absl::StatusOr<std::vector<std::vector<double>>> PoolFeatures(
    const ExplainContext& ctx, int role);

absl::StatusOr<ShapExplanation> ExplainPair(const ExplainContext& ctx,
                                            int candidate, int role);

struct ComparativeRow {
  std::string alternate;
  std::string feature;
  double delta = 0.0;  // phi_selected - phi_alternate
};

// Rows grouped by alternate (input order), each group sorted by |delta|
// descending.
absl::StatusOr<std::vector<ComparativeRow>> ComparativeExplanation(
    const ExplainContext& ctx, int selected, const std::vector<int>& alternates,
    int role);

struct CounterfactualResult {
  std::vector<std::string> edits;
  bool achievable = false;
  int initial_rank = 0;
  int final_rank = 0;
};

// 1-based rank of `candidate` among all candidates for `role` by pair score;
// ties share the better rank.
absl::StatusOr<int> PairRank(const ExplainContext& ctx, int candidate, int role);

// Greedy edits (add a missing required skill, move the role to the top of
// the preference list) until the candidate reaches the top `k`, at most five.
absl::StatusOr<CounterfactualResult> Counterfactual(const ExplainContext& ctx,
                                                    int candidate, int role,
                                                    int k);

struct ExplanationBundle {
  std::string candidate_id;
  std::string role_id;
  ShapExplanation shap;
  std::string summary;
  std::vector<ComparativeRow> comparative;
  CounterfactualResult counterfactual;
};

absl::StatusOr<ExplanationBundle> ExplainAllocation(
    const ExplainContext& ctx, int candidate, int role,
    const std::vector<int>& alternates = {}, int top_k = 5);

// Top three contributors by |phi|, signed, e.g.
// "skill coverage +0.1200; semantic similarity -0.0100; ...".
std::string ExecutiveSummary(const ShapExplanation& shap);

nlohmann::json BundleToJson(const ExplanationBundle& bundle);

}  // namespace gesa::explain

#endif  // GESA_EXPLAIN_EXPLAIN_H_
