#ifndef GESA_ENGINE_PIPELINE_H_
#define GESA_ENGINE_PIPELINE_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "gesa/core/types.h"
#include "gesa/debias/adversarial.h"
#include "gesa/debias/fairness.h"
#include "gesa/embed/embedding.h"
#include "gesa/explain/explain.h"
#include "gesa/hetgraph/gnn.h"
#include "gesa/objectives/objectives.h"
#include "gesa/optimizer/nsga2.h"
#include "nlohmann/json.hpp"

namespace gesa::engine {

// Everything `allocate`, `explain` and `eval` read from a config document.
// Relative paths are resolved against the config file's directory.
struct AllocateConfig {
  objectives::MeritWeights merit_weights;
  optimizer::OptimizerConfig optimizer;
  optimizer::SelectionPolicy selection;
  // Uniform over the declared categories when absent.
  std::optional<objectives::DiversitySpec> diversity;
  std::vector<RepresentationFloor> floors;
  std::vector<Quota> quotas;
  std::string graph_embeddings;  // optional file
  std::string representations;   // optional file, replaces text vectors
  int embedding_dim = embed::HashingEmbedder::kDefaultDimension;
  objectives::Aggregation aggregation = objectives::Aggregation::kPerSlot;
};

absl::StatusOr<AllocateConfig> AllocateConfigFromJson(
    const nlohmann::json& document, const std::string& base_dir = "");
absl::StatusOr<AllocateConfig> ReadAllocateConfig(const std::string& path);
nlohmann::json AllocateConfigToJson(const AllocateConfig& config);

// Candidates x roles, dataset order.
struct ScoreTables {
  Eigen::MatrixXd semantic;
  Eigen::MatrixXd graph;
  Eigen::MatrixXd merit;
  // Weights actually used: beta moves onto alpha and gamma in proportion
  // when no graph embeddings are given.
  objectives::MeritWeights weights;
};

// In-memory alternatives to the config's file paths.
struct Inputs {
  const embed::PrecomputedEmbeddings* graph = nullptr;
  const embed::PrecomputedEmbeddings* representations = nullptr;
};

absl::StatusOr<ScoreTables> BuildScoreTables(const Dataset& dataset,
                                             const AllocateConfig& config,
                                             const Inputs& inputs = {});

// A validated dataset with its score tables and objective context.
struct Workspace {
  AllocateConfig config;
  ScoreTables tables;
  objectives::ObjectiveContext objectives;

  const Dataset& dataset() const { return objectives.dataset(); }
};

absl::StatusOr<std::unique_ptr<Workspace>> Prepare(const Dataset& dataset,
                                                   const AllocateConfig& config,
                                                   const Inputs& inputs = {});

struct AllocationResult {
  optimizer::ParetoFront front;
  optimizer::Individual selected;
  AllocationPlan plan;
};

absl::StatusOr<AllocationResult> Allocate(const Workspace& ws);

// Reselects from an existing front under another policy.
absl::StatusOr<AllocationResult> Reselect(const Workspace& ws,
                                          const optimizer::ParetoFront& front,
                                          const optimizer::SelectionPolicy& policy);

nlohmann::json IndividualToJson(const Workspace& ws,
                                const optimizer::Individual& individual);
// Archive members in objective order, then the run's bookkeeping.
nlohmann::json FrontToJson(const Workspace& ws,
                           const optimizer::ParetoFront& front);

// Explanation context for `plan`, scored with the selection weights.
absl::StatusOr<explain::ExplainContext> MakeExplainContext(
    const Workspace& ws, const AllocationPlan& plan,
    double diversity_multiplier = 1.0);

// Fairness audit of a plan: selected = assigned, qualified = has a planted
// match, score = best merit, outcome = qualified. Missing labels form the
// group "unknown"; groups without a qualified member are left out of their
// category, and a category with fewer than two groups left is skipped.
absl::StatusOr<debias::FairnessReport> AuditPlan(const Workspace& ws,
                                                 const objectives::Genome& plan);

// Share of candidates with at least one planted match whose top `k` roles
// by merit contain one.
absl::StatusOr<double> TopKAccuracy(const Workspace& ws, int k);

// Top-k accuracy, plan precision against the planted matches, objectives,
// diversity against the greedy max-merit baseline, and the fairness audit.
absl::StatusOr<nlohmann::json> EvaluateReport(const Workspace& ws,
                                              const AllocationPlan& plan,
                                              int k = 3);

struct GraphTrainingConfig {
  int embedding_dim = embed::HashingEmbedder::kDefaultDimension;
  double skill_similarity_threshold = hetgraph::kDefaultSkillSimilarityThreshold;
  hetgraph::LinkPredictionConfig training;
};

struct GraphTrainingResult {
  embed::PrecomputedEmbeddings embeddings;
  std::vector<double> loss_history;
};

absl::StatusOr<GraphTrainingResult> TrainGraph(const Dataset& dataset,
                                               const GraphTrainingConfig& config);

struct DebiasRunConfig {
  // Sensitive category; the first declared one when empty.
  std::string category;
  debias::DebiasConfig training;
};

struct DebiasRunResult {
  // Encoded candidates and roles.
  embed::PrecomputedEmbeddings representations;
  std::vector<debias::LossBreakdown> history;
  double leakage = 0.0;
};

// Class per candidate for `category`: index into the sorted label
// vocabulary, with "unknown" appended when some candidate has no label.
struct SensitiveLabels {
  std::vector<std::string> classes;
  std::vector<int> labels;
};
absl::StatusOr<SensitiveLabels> SensitiveClasses(const Dataset& dataset,
                                                 const std::string& category);

// Trains the debiased encoder on candidate and role vectors from
// `embeddings`, with the recorded interactions as match labels.
absl::StatusOr<DebiasRunResult> RunDebias(
    const Dataset& dataset, const embed::PrecomputedEmbeddings& embeddings,
    const DebiasRunConfig& config);

}  // namespace gesa::engine

#endif  // GESA_ENGINE_PIPELINE_H_
