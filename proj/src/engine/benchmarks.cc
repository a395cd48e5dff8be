#include "gesa/engine/benchmarks.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "gesa/core/random.h"
#include "gesa/core/status_macros.h"
#include "gesa/debias/fairness.h"
#include "gesa/embed/embedding.h"
#include "gesa/hetgraph/graph.h"
#include "gesa/objectives/objectives.h"
#include "gesa/optimizer/nsga2.h"

namespace gesa::engine {
namespace {

constexpr const char* kSubgroup = "male";

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

absl::StatusOr<DebiasBenchmarkData> MakeDebiasBenchmark(
    const DebiasBenchmarkConfig& config) {
  if (config.text_dim < 1 || config.proxy_dim < 1) {
    return absl::InvalidArgumentError("text_dim and proxy_dim must be >= 1");
  }
  datagen::GenSpec spec = datagen::DefaultSpec(config.counts, config.seed);
  spec.categories = {{"gender", {"female", "male"}, {0.5, 0.5}}};
  spec.bias = {"gender", kSubgroup, config.bias_strength, 0.3, 0.2};
  DebiasBenchmarkData out;
  ASSIGN_OR_RETURN(out.dataset, datagen::GenerateDataset(spec));
  const Dataset& d = out.dataset;
  const int n = static_cast<int>(d.candidates.size());
  const int m = static_cast<int>(d.roles.size());

  Rng rng(config.seed ^ 0x6465626961735f62ULL);
  Eigen::VectorXd direction(config.proxy_dim);
  for (int k = 0; k < config.proxy_dim; ++k) direction[k] = rng.Normal();
  direction.normalize();

  embed::HashingEmbedder embedder(config.text_dim);
  const int dim = config.text_dim + config.proxy_dim;
  debias::DebiasData& t = out.train;
  t.candidates = Eigen::MatrixXd::Zero(dim, n);
  t.roles = Eigen::MatrixXd::Zero(dim, m);
  t.num_classes = 2;
  for (int i = 0; i < n; ++i) {
    const Candidate& c = d.candidates[i];
    const bool member = c.demographics.group_memberships.at("gender") == kSubgroup;
    t.sensitive.push_back(member ? 1 : 0);
    ASSIGN_OR_RETURN(Eigen::VectorXd text,
                     embedder.Embed(hetgraph::CandidateText(d, c)));
    t.candidates.col(i).head(config.text_dim) = text;
    const double shift = (member ? 1.0 : -1.0) * config.proxy_separation * config.bias_strength;
    for (int k = 0; k < config.proxy_dim; ++k) {
      t.candidates(config.text_dim + k, i) = shift * direction[k] + rng.Normal();
    }
  }
  for (int j = 0; j < m; ++j) {
    ASSIGN_OR_RETURN(Eigen::VectorXd text,
                     embedder.Embed(hetgraph::RoleText(d, d.roles[j])));
    t.roles.col(j).head(config.text_dim) = text;
  }

  std::map<std::string, int> cindex, rindex;
  for (int i = 0; i < n; ++i) cindex[d.candidates[i].id] = i;
  for (int j = 0; j < m; ++j) rindex[d.roles[j].id] = j;
  for (const Interaction& x : d.interactions) {
    const int i = cindex.at(x.candidate_id);
    const int j = rindex.at(x.role_id);
    ASSIGN_OR_RETURN(double coverage,
                     objectives::SkillMatchScore(d.candidates[i], d.roles[j]));
    const bool same_domain = d.candidates[i].domain_id == d.roles[j].domain_id;
    const double favor = (t.sensitive[i] == 1 ? 1.0 : -1.0) * config.favoritism *
                         config.bias_strength;
    const double p = std::clamp(
        0.05 + 0.9 * coverage * (same_domain ? 1.0 : 0.5) + favor, 0.0, 1.0);
    t.pairs.push_back({i, j, rng.Bernoulli(p) ? 1.0 : 0.0});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      out.truth.push_back(
          {i, j, datagen::IsPlantedMatch(d.candidates[i], d.roles[j]) ? 1.0 : 0.0});
    }
  }
  return out;
}

absl::StatusOr<DebiasArm> RunDebiasArm(const DebiasBenchmarkData& data,
                                       const DebiasBenchmarkConfig& config,
                                       double lambda) {
  debias::DebiasConfig training = config.training;
  training.lambda = lambda;
  training.seed = config.seed;
  ASSIGN_OR_RETURN(debias::DebiasResult trained,
                   debias::TrainAdversarial(data.train, training));
  DebiasArm arm;
  arm.lambda = lambda;
  const Eigen::MatrixXd zc = trained.model.Encode(data.train.candidates);
  const Eigen::MatrixXd zr = trained.model.Encode(data.train.roles);
  ASSIGN_OR_RETURN(arm.leakage,
                   debias::LeakageProbe(zc, data.train.sensitive, config.seed));
  arm.auc = debias::AllocationAuc(trained.model, data.train, data.truth);

  const int n = static_cast<int>(zc.cols());
  const Eigen::MatrixXd logits = zc.transpose() * zr;
  std::vector<double> scores(n);
  for (int i = 0; i < n; ++i) scores[i] = Sigmoid(logits.row(i).maxCoeff());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  const int quota = static_cast<int>(std::ceil(config.selection_rate * n));
  debias::FairnessInputs in;
  in.selected.assign(n, false);
  for (int k = 0; k < quota && k < n; ++k) in.selected[order[k]] = true;
  in.qualified.assign(n, false);
  for (const debias::PairLabel& p : data.truth) {
    if (p.label > 0.5) in.qualified[p.candidate] = true;
  }
  in.scores = scores;
  for (int i = 0; i < n; ++i) in.outcomes.push_back(in.qualified[i] ? 1 : 0);
  std::vector<std::string> groups;
  for (int s : data.train.sensitive) groups.push_back(s == 1 ? "male" : "female");
  in.groups["gender"] = std::move(groups);
  ASSIGN_OR_RETURN(debias::FairnessReport report, debias::BuildFairnessReport(in));
  arm.fairness = report.composite;
  return arm;
}

absl::StatusOr<DiversityBenchmarkResult> RunDiversityBenchmark(
    const DiversityBenchmarkConfig& config) {
  ASSIGN_OR_RETURN(Dataset dataset,
                   datagen::GenerateDataset(
                       datagen::DefaultSpec(config.counts, config.seed)));
  AllocateConfig allocate;
  allocate.optimizer.seed = config.seed;
  allocate.selection = config.selection;
  ASSIGN_OR_RETURN(std::unique_ptr<Workspace> ws, Prepare(dataset, allocate));
  ASSIGN_OR_RETURN(AllocationResult run, Allocate(*ws));
  DiversityBenchmarkResult out;
  out.greedy =
      ws->objectives.Evaluate(optimizer::GreedyMaxMerit(ws->objectives)).objectives;
  out.selected = run.selected.evaluation.objectives;
  out.generations = static_cast<int>(run.front.trace.size());
  out.front_size = static_cast<int>(run.front.members.size());
  return out;
}

}  // namespace gesa::engine
