#include "gesa/engine/pipeline.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "gesa/core/dataset_io.h"
#include "gesa/core/status_macros.h"
#include "gesa/core/validate.h"
#include "gesa/hetgraph/graph.h"

namespace gesa::engine {
namespace {

using json = nlohmann::json;

absl::Status CheckKeys(const json& object, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!object.is_object()) {
    return absl::InvalidArgumentError(absl::StrCat(where, " must be an object"));
  }
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key \"", key, "\" in ", where));
    }
  }
  return absl::OkStatus();
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

absl::StatusOr<AllocateConfig> ParseConfig(const json& d,
                                           const std::string& base_dir) {
  AllocateConfig c;
  RETURN_IF_ERROR(CheckKeys(
      d,
      {"seed", "merit_weights", "optimizer", "selection", "diversity", "floors",
       "quotas", "graph_embeddings", "representations", "embedding_dim",
       "aggregation"},
      "config"));
  if (!d.contains("seed")) {
    return absl::InvalidArgumentError("config needs an explicit \"seed\"");
  }
  c.optimizer.seed = d.at("seed").get<uint64_t>();
  if (d.contains("merit_weights")) {
    const json& w = d.at("merit_weights");
    RETURN_IF_ERROR(CheckKeys(w, {"alpha", "beta", "gamma"}, "merit_weights"));
    c.merit_weights.alpha = w.value("alpha", c.merit_weights.alpha);
    c.merit_weights.beta = w.value("beta", c.merit_weights.beta);
    c.merit_weights.gamma = w.value("gamma", c.merit_weights.gamma);
  }
  RETURN_IF_ERROR(objectives::CheckMeritWeights(c.merit_weights));
  if (d.contains("optimizer")) {
    const json& o = d.at("optimizer");
    RETURN_IF_ERROR(CheckKeys(
        o,
        {"population", "max_generations", "crossover_rate", "mutation_rate",
         "penalty", "rho", "stagnation_window", "stagnation_tolerance"},
        "optimizer"));
    optimizer::OptimizerConfig& oc = c.optimizer;
    oc.population = o.value("population", oc.population);
    oc.max_generations = o.value("max_generations", oc.max_generations);
    oc.crossover_rate = o.value("crossover_rate", oc.crossover_rate);
    oc.mutation_rate = o.value("mutation_rate", oc.mutation_rate);
    oc.penalty = o.value("penalty", oc.penalty);
    oc.rho = o.value("rho", oc.rho);
    oc.stagnation_window = o.value("stagnation_window", oc.stagnation_window);
    oc.stagnation_tolerance =
        o.value("stagnation_tolerance", oc.stagnation_tolerance);
  }
  RETURN_IF_ERROR(optimizer::CheckConfig(c.optimizer));
  if (d.contains("selection")) {
    const json& s = d.at("selection");
    RETURN_IF_ERROR(CheckKeys(s,
                              {"merit_weight", "diversity_weight",
                               "preference_weight", "mandatory"},
                              "selection"));
    optimizer::SelectionPolicy& p = c.selection;
    p.merit_weight = s.value("merit_weight", p.merit_weight);
    p.diversity_weight = s.value("diversity_weight", p.diversity_weight);
    p.preference_weight = s.value("preference_weight", p.preference_weight);
    if (s.contains("mandatory")) {
      p.mandatory = s.at("mandatory").get<std::set<std::string>>();
    }
  }
  const optimizer::SelectionPolicy& p = c.selection;
  for (double w : {p.merit_weight, p.diversity_weight, p.preference_weight}) {
    if (!std::isfinite(w) || w < 0.0) {
      return absl::InvalidArgumentError("selection weights must be >= 0");
    }
  }
  if (p.merit_weight + p.diversity_weight + p.preference_weight <= 0.0) {
    return absl::InvalidArgumentError("selection weights must not all be 0");
  }
  if (d.contains("diversity")) {
    objectives::DiversitySpec spec;
    for (const json& entry : d.at("diversity")) {
      RETURN_IF_ERROR(
          CheckKeys(entry, {"category", "weight", "labels"}, "diversity"));
      objectives::CategoryWeight w;
      w.category = entry.at("category").get<std::string>();
      w.weight = entry.at("weight").get<double>();
      w.labels = entry.value("labels", std::vector<std::string>{});
      spec.categories.push_back(std::move(w));
    }
    c.diversity = std::move(spec);
  }
  json rules = json::object();
  if (d.contains("floors")) rules["floors"] = d.at("floors");
  if (d.contains("quotas")) rules["quotas"] = d.at("quotas");
  ASSIGN_OR_RETURN(ConstraintSet parsed, ConstraintSetFromJson(rules));
  c.floors = std::move(parsed.floors);
  c.quotas = std::move(parsed.quotas);
  c.graph_embeddings =
      Resolve(d.value("graph_embeddings", std::string()), base_dir);
  c.representations =
      Resolve(d.value("representations", std::string()), base_dir);
  c.embedding_dim = d.value("embedding_dim", c.embedding_dim);
  if (c.embedding_dim < 1) {
    return absl::InvalidArgumentError("embedding_dim must be >= 1");
  }
  const std::string aggregation = d.value("aggregation", std::string("per_slot"));
  if (aggregation == "per_slot") {
    c.aggregation = objectives::Aggregation::kPerSlot;
  } else if (aggregation == "per_assignment") {
    c.aggregation = objectives::Aggregation::kPerAssignment;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown aggregation \"", aggregation, "\""));
  }
  return c;
}

// Unit columns of the vectors for `ids`.
absl::StatusOr<Eigen::MatrixXd> UnitColumns(
    const embed::PrecomputedEmbeddings& embeddings,
    const std::vector<std::string>& ids, const std::string& what) {
  Eigen::MatrixXd out(embeddings.dimension(), ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    auto v = embeddings.Lookup(ids[i]);
    if (!v.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(what, " have no vector for ", ids[i]));
    }
    const double norm = v->norm();
    if (norm == 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat(what, " hold a zero vector for ", ids[i]));
    }
    out.col(i) = *v / norm;
  }
  return out;
}

std::vector<std::string> CandidateIds(const Dataset& d) {
  std::vector<std::string> ids;
  for (const Candidate& c : d.candidates) ids.push_back(c.id);
  return ids;
}

std::vector<std::string> RoleIds(const Dataset& d) {
  std::vector<std::string> ids;
  for (const Role& r : d.roles) ids.push_back(r.id);
  return ids;
}

absl::StatusOr<embed::PrecomputedEmbeddings> LoadIfNeeded(
    const embed::PrecomputedEmbeddings* given, const std::string& path,
    bool* present) {
  *present = true;
  if (given != nullptr) return *given;
  if (path.empty()) {
    *present = false;
    return embed::PrecomputedEmbeddings();
  }
  return embed::PrecomputedEmbeddings::Load(path);
}

json ObjectivesJson(const ObjectiveVector& v) {
  return {{"merit", v.merit}, {"diversity", v.diversity},
          {"preference", v.preference}};
}

json ViolationsJson(const std::vector<ConstraintViolation>& violations) {
  json out = json::array();
  for (const ConstraintViolation& v : violations) {
    out.push_back({{"constraint_id", v.constraint_id}, {"magnitude", v.magnitude}});
  }
  return out;
}

std::set<std::pair<int, int>> PlantedPairs(const Workspace& ws) {
  std::set<std::pair<int, int>> out;
  for (const Match& m : *ws.dataset().ground_truth) {
    out.emplace(ws.objectives.CandidateIndex(m.candidate_id),
                ws.objectives.RoleIndex(m.role_id));
  }
  return out;
}

}  // namespace

absl::StatusOr<AllocateConfig> AllocateConfigFromJson(const json& document,
                                                      const std::string& base_dir) {
  try {
    return ParseConfig(document, base_dir);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
}

absl::StatusOr<AllocateConfig> ReadAllocateConfig(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFileToString(path));
  json document = json::parse(text, nullptr, false);
  if (document.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": not valid JSON"));
  }
  return AllocateConfigFromJson(
      document, std::filesystem::path(path).parent_path().string());
}

json AllocateConfigToJson(const AllocateConfig& c) {
  const optimizer::OptimizerConfig& o = c.optimizer;
  json d = {
      {"seed", o.seed},
      {"merit_weights",
       {{"alpha", c.merit_weights.alpha},
        {"beta", c.merit_weights.beta},
        {"gamma", c.merit_weights.gamma}}},
      {"optimizer",
       {{"population", o.population},
        {"max_generations", o.max_generations},
        {"crossover_rate", o.crossover_rate},
        {"mutation_rate", o.mutation_rate},
        {"penalty", o.penalty},
        {"rho", o.rho},
        {"stagnation_window", o.stagnation_window},
        {"stagnation_tolerance", o.stagnation_tolerance}}},
      {"selection",
       {{"merit_weight", c.selection.merit_weight},
        {"diversity_weight", c.selection.diversity_weight},
        {"preference_weight", c.selection.preference_weight},
        {"mandatory", c.selection.mandatory}}},
      {"embedding_dim", c.embedding_dim},
      {"aggregation", c.aggregation == objectives::Aggregation::kPerSlot
                          ? "per_slot"
                          : "per_assignment"}};
  ConstraintSet rules;
  rules.floors = c.floors;
  rules.quotas = c.quotas;
  const json r = ConstraintSetToJson(rules);
  d["floors"] = r.at("floors");
  d["quotas"] = r.at("quotas");
  if (c.diversity) {
    json spec = json::array();
    for (const objectives::CategoryWeight& w : c.diversity->categories) {
      spec.push_back(
          {{"category", w.category}, {"weight", w.weight}, {"labels", w.labels}});
    }
    d["diversity"] = spec;
  }
  if (!c.graph_embeddings.empty()) d["graph_embeddings"] = c.graph_embeddings;
  if (!c.representations.empty()) d["representations"] = c.representations;
  return d;
}

absl::StatusOr<ScoreTables> BuildScoreTables(const Dataset& dataset,
                                             const AllocateConfig& config,
                                             const Inputs& inputs) {
  const std::vector<std::string> cids = CandidateIds(dataset);
  const std::vector<std::string> rids = RoleIds(dataset);
  ScoreTables t;
  t.weights = config.merit_weights;
  RETURN_IF_ERROR(objectives::CheckMeritWeights(t.weights));

  bool has_reps = false;
  ASSIGN_OR_RETURN(embed::PrecomputedEmbeddings reps,
                   LoadIfNeeded(inputs.representations, config.representations,
                                &has_reps));
  Eigen::MatrixXd cvec, rvec;
  if (has_reps) {
    ASSIGN_OR_RETURN(cvec, UnitColumns(reps, cids, "representations"));
    ASSIGN_OR_RETURN(rvec, UnitColumns(reps, rids, "representations"));
  } else {
    embed::HashingEmbedder embedder(config.embedding_dim);
    cvec.resize(config.embedding_dim, cids.size());
    rvec.resize(config.embedding_dim, rids.size());
    for (size_t i = 0; i < dataset.candidates.size(); ++i) {
      ASSIGN_OR_RETURN(cvec.col(i), embedder.Embed(hetgraph::CandidateText(
                                        dataset, dataset.candidates[i])));
    }
    for (size_t j = 0; j < dataset.roles.size(); ++j) {
      ASSIGN_OR_RETURN(rvec.col(j),
                       embedder.Embed(hetgraph::RoleText(dataset, dataset.roles[j])));
    }
  }
  t.semantic = (cvec.transpose() * rvec).cwiseMax(0.0).cwiseMin(1.0);

  bool has_graph = false;
  ASSIGN_OR_RETURN(
      embed::PrecomputedEmbeddings graph,
      LoadIfNeeded(inputs.graph, config.graph_embeddings, &has_graph));
  if (has_graph) {
    ASSIGN_OR_RETURN(Eigen::MatrixXd gc, UnitColumns(graph, cids, "graph embeddings"));
    ASSIGN_OR_RETURN(Eigen::MatrixXd gr, UnitColumns(graph, rids, "graph embeddings"));
    t.graph = ((gc.transpose() * gr).array() + 1.0) / 2.0;
    t.graph = t.graph.cwiseMax(0.0).cwiseMin(1.0);
  } else {
    t.graph = Eigen::MatrixXd::Zero(cids.size(), rids.size());
    objectives::MeritWeights& w = t.weights;
    const double rest = w.alpha + w.gamma;
    if (w.beta > 0.0) {
      if (rest <= 0.0) {
        return absl::InvalidArgumentError(
            "merit weight is all on graph similarity but no graph embeddings "
            "were given");
      }
      w.alpha += w.beta * w.alpha / rest;
      w.gamma += w.beta * w.gamma / rest;
      w.beta = 0.0;
    }
  }
  ASSIGN_OR_RETURN(t.merit,
                   objectives::MeritMatrix(dataset, t.weights, t.semantic, t.graph));
  return t;
}

absl::StatusOr<std::unique_ptr<Workspace>> Prepare(const Dataset& dataset,
                                                   const AllocateConfig& config,
                                                   const Inputs& inputs) {
  const auto issues = ValidateDataset(dataset);
  if (!issues.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid dataset: ", FormatIssues(issues)));
  }
  ASSIGN_OR_RETURN(ScoreTables tables, BuildScoreTables(dataset, config, inputs));
  objectives::DiversitySpec spec = config.diversity
                                       ? *config.diversity
                                       : objectives::UniformDiversitySpec(dataset);
  for (objectives::CategoryWeight& w : spec.categories) {
    if (!w.labels.empty()) continue;
    auto it = dataset.demographic_categories.find(w.category);
    if (it == dataset.demographic_categories.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("diversity names undeclared category ", w.category));
    }
    w.labels = it->second;
  }
  RETURN_IF_ERROR(objectives::CheckDiversitySpec(spec));
  ASSIGN_OR_RETURN(ConstraintSet constraints,
                   BuildConstraintSet(dataset, config.floors, config.quotas));
  Eigen::MatrixXd merit = tables.merit;
  ASSIGN_OR_RETURN(objectives::ObjectiveContext ctx,
                   objectives::ObjectiveContext::Create(
                       dataset, std::move(merit), std::move(spec),
                       std::move(constraints), config.aggregation));
  return std::unique_ptr<Workspace>(
      new Workspace{config, std::move(tables), std::move(ctx)});
}

absl::StatusOr<AllocationResult> Allocate(const Workspace& ws) {
  ASSIGN_OR_RETURN(optimizer::ParetoFront front,
                   optimizer::RunNsga2(ws.objectives, ws.config.optimizer));
  return Reselect(ws, front, ws.config.selection);
}

absl::StatusOr<AllocationResult> Reselect(const Workspace& ws,
                                          const optimizer::ParetoFront& front,
                                          const optimizer::SelectionPolicy& policy) {
  ASSIGN_OR_RETURN(optimizer::Individual selected,
                   optimizer::SelectSolution(ws.objectives, front, policy));
  AllocationPlan plan = ws.objectives.ToPlan(selected.genome);
  return AllocationResult{front, std::move(selected), std::move(plan)};
}

json IndividualToJson(const Workspace& ws, const optimizer::Individual& ind) {
  const AllocationPlan plan = ws.objectives.ToPlan(ind.genome);
  json crowding = std::isinf(ind.crowding) ? json(nullptr) : json(ind.crowding);
  return {{"objectives", ObjectivesJson(ind.evaluation.objectives)},
          {"penalized", ObjectivesJson(ind.penalized)},
          {"violations", ViolationsJson(ind.evaluation.violations)},
          {"rank", ind.rank},
          {"crowding", crowding},
          {"assignments", plan.assignments}};
}

json FrontToJson(const Workspace& ws, const optimizer::ParetoFront& front) {
  json members = json::array();
  for (const optimizer::Individual& ind : front.members) {
    members.push_back(IndividualToJson(ws, ind));
  }
  return {{"members", members},
          {"generations", front.trace.size()},
          {"diversity_weight", front.diversity_weight},
          {"escalation_events", front.escalation_events},
          {"feasible_found", front.feasible_found}};
}

absl::StatusOr<explain::ExplainContext> MakeExplainContext(
    const Workspace& ws, const AllocationPlan& plan, double diversity_multiplier) {
  explain::ExplainContext ctx;
  ctx.objectives = &ws.objectives;
  ctx.semantic = ws.tables.semantic;
  ctx.graph = ws.tables.graph;
  ctx.merit_weights = ws.tables.weights;
  ctx.weights = {ws.config.selection.merit_weight,
                 ws.config.selection.diversity_weight,
                 ws.config.selection.preference_weight, diversity_multiplier};
  ASSIGN_OR_RETURN(ctx.plan, ws.objectives.ToGenome(plan));
  ctx.shap.seed = ws.config.optimizer.seed;
  return ctx;
}

absl::StatusOr<debias::FairnessReport> AuditPlan(const Workspace& ws,
                                                 const objectives::Genome& plan) {
  const Dataset& d = ws.dataset();
  if (!d.ground_truth) {
    return absl::FailedPreconditionError("dataset carries no ground truth");
  }
  const int n = ws.objectives.num_candidates();
  std::vector<bool> qualified(n, false);
  for (const auto& [c, r] : PlantedPairs(ws)) qualified[c] = true;

  debias::FairnessReport report;
  double sum = 0.0;
  for (const auto& [category, vocabulary] : d.demographic_categories) {
    std::vector<std::string> labels(n);
    std::map<std::string, int> qualified_in_group;
    for (int i = 0; i < n; ++i) {
      const auto& g = d.candidates[i].demographics.group_memberships;
      auto it = g.find(category);
      labels[i] = it == g.end() ? "unknown" : it->second;
      qualified_in_group[labels[i]] += qualified[i] ? 1 : 0;
    }
    debias::FairnessInputs in;
    std::vector<std::string> kept;
    for (int i = 0; i < n; ++i) {
      if (qualified_in_group[labels[i]] == 0) continue;
      in.selected.push_back(plan[i] >= 0);
      in.qualified.push_back(qualified[i]);
      in.scores.push_back(ws.objectives.merit().row(i).maxCoeff());
      in.outcomes.push_back(qualified[i] ? 1 : 0);
      kept.push_back(labels[i]);
    }
    if (std::set<std::string>(kept.begin(), kept.end()).size() < 2) continue;
    in.groups[category] = std::move(kept);
    ASSIGN_OR_RETURN(debias::FairnessReport one, debias::BuildFairnessReport(in));
    report.categories[category] = one.categories.at(category);
    sum += one.composite;
  }
  if (!report.categories.empty()) report.composite = sum / report.categories.size();
  return report;
}

absl::StatusOr<double> TopKAccuracy(const Workspace& ws, int k) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  if (!ws.dataset().ground_truth) {
    return absl::FailedPreconditionError("dataset carries no ground truth");
  }
  const int n = ws.objectives.num_candidates();
  const int m = ws.objectives.num_roles();
  std::vector<std::set<int>> planted(n);
  for (const auto& [c, r] : PlantedPairs(ws)) planted[c].insert(r);
  int evaluated = 0, hits = 0;
  std::vector<int> order(m);
  for (int c = 0; c < n; ++c) {
    if (planted[c].empty()) continue;
    ++evaluated;
    for (int r = 0; r < m; ++r) order[r] = r;
    const auto& merit = ws.objectives.merit();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return merit(c, a) > merit(c, b);
    });
    for (int t = 0; t < std::min(k, m); ++t) {
      if (planted[c].contains(order[t])) {
        ++hits;
        break;
      }
    }
  }
  if (evaluated == 0) {
    return absl::FailedPreconditionError("no candidate has a planted match");
  }
  return static_cast<double>(hits) / evaluated;
}

absl::StatusOr<json> EvaluateReport(const Workspace& ws, const AllocationPlan& plan,
                                    int k) {
  ASSIGN_OR_RETURN(objectives::Genome genome, ws.objectives.ToGenome(plan));
  ASSIGN_OR_RETURN(double accuracy, TopKAccuracy(ws, k));
  const std::set<std::pair<int, int>> planted = PlantedPairs(ws);
  int with_match = 0;
  {
    std::set<int> seen;
    for (const auto& [c, r] : planted) seen.insert(c);
    with_match = static_cast<int>(seen.size());
  }
  int assigned = 0, hits = 0;
  for (size_t c = 0; c < genome.size(); ++c) {
    if (genome[c] < 0) continue;
    ++assigned;
    hits += planted.contains({static_cast<int>(c), genome[c]}) ? 1 : 0;
  }
  const objectives::Evaluation e = ws.objectives.Evaluate(genome);
  const double baseline =
      ws.objectives.DiversityOf(optimizer::GreedyMaxMerit(ws.objectives));
  ASSIGN_OR_RETURN(debias::FairnessReport fairness, AuditPlan(ws, genome));
  return json{
      {"top_k", {{"k", k}, {"accuracy", accuracy}, {"candidates", with_match}}},
      {"plan",
       {{"assigned", assigned},
        {"planted_hits", hits},
        {"precision", assigned == 0 ? 0.0 : static_cast<double>(hits) / assigned},
        {"objectives", ObjectivesJson(e.objectives)},
        {"violations", ViolationsJson(e.violations)}}},
      {"diversity",
       {{"plan", e.objectives.diversity},
        {"greedy_baseline", baseline},
        {"ratio", baseline > 0.0 ? json(e.objectives.diversity / baseline)
                                 : json(nullptr)}}},
      {"fairness", debias::FairnessReportToJson(fairness)}};
}

absl::StatusOr<GraphTrainingResult> TrainGraph(const Dataset& dataset,
                                               const GraphTrainingConfig& config) {
  const auto issues = ValidateDataset(dataset);
  if (!issues.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid dataset: ", FormatIssues(issues)));
  }
  if (config.embedding_dim < 1) {
    return absl::InvalidArgumentError("embedding_dim must be >= 1");
  }
  embed::HashingEmbedder embedder(config.embedding_dim);
  ASSIGN_OR_RETURN(hetgraph::HeteroGraph graph,
                   hetgraph::BuildGraph(dataset, embedder,
                                        config.skill_similarity_threshold));
  ASSIGN_OR_RETURN(hetgraph::LinkPredictionResult trained,
                   hetgraph::TrainLinkPrediction(graph, config.training));
  return GraphTrainingResult{hetgraph::ExportEmbeddings(graph, trained.embeddings),
                             std::move(trained.loss_history)};
}

absl::StatusOr<SensitiveLabels> SensitiveClasses(const Dataset& dataset,
                                                 const std::string& category) {
  if (dataset.demographic_categories.empty()) {
    return absl::InvalidArgumentError("dataset declares no demographic category");
  }
  const std::string name =
      category.empty() ? dataset.demographic_categories.begin()->first : category;
  auto it = dataset.demographic_categories.find(name);
  if (it == dataset.demographic_categories.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("undeclared demographic category ", name));
  }
  SensitiveLabels out;
  out.classes = it->second;
  std::sort(out.classes.begin(), out.classes.end());
  bool missing = false;
  for (const Candidate& c : dataset.candidates) {
    auto g = c.demographics.group_memberships.find(name);
    if (g == c.demographics.group_memberships.end()) {
      missing = true;
      out.labels.push_back(-1);
      continue;
    }
    const auto pos = std::lower_bound(out.classes.begin(), out.classes.end(), g->second);
    out.labels.push_back(static_cast<int>(pos - out.classes.begin()));
  }
  if (missing) {
    out.classes.push_back("unknown");
    for (int& l : out.labels) {
      if (l < 0) l = static_cast<int>(out.classes.size()) - 1;
    }
  }
  return out;
}

absl::StatusOr<DebiasRunResult> RunDebias(
    const Dataset& dataset, const embed::PrecomputedEmbeddings& embeddings,
    const DebiasRunConfig& config) {
  const auto issues = ValidateDataset(dataset);
  if (!issues.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid dataset: ", FormatIssues(issues)));
  }
  const std::vector<std::string> cids = CandidateIds(dataset);
  const std::vector<std::string> rids = RoleIds(dataset);
  debias::DebiasData data;
  data.candidates.resize(embeddings.dimension(), cids.size());
  data.roles.resize(embeddings.dimension(), rids.size());
  for (size_t i = 0; i < cids.size(); ++i) {
    auto v = embeddings.Lookup(cids[i]);
    if (!v.ok()) {
      return absl::InvalidArgumentError(absl::StrCat("no embedding for ", cids[i]));
    }
    data.candidates.col(i) = *v;
  }
  for (size_t j = 0; j < rids.size(); ++j) {
    auto v = embeddings.Lookup(rids[j]);
    if (!v.ok()) {
      return absl::InvalidArgumentError(absl::StrCat("no embedding for ", rids[j]));
    }
    data.roles.col(j) = *v;
  }
  ASSIGN_OR_RETURN(SensitiveLabels sensitive,
                   SensitiveClasses(dataset, config.category));
  data.sensitive = sensitive.labels;
  data.num_classes = static_cast<int>(sensitive.classes.size());
  std::map<std::string, int> cindex, rindex;
  for (size_t i = 0; i < cids.size(); ++i) cindex[cids[i]] = static_cast<int>(i);
  for (size_t j = 0; j < rids.size(); ++j) rindex[rids[j]] = static_cast<int>(j);
  for (const Interaction& x : dataset.interactions) {
    data.pairs.push_back({cindex.at(x.candidate_id), rindex.at(x.role_id),
                          static_cast<double>(x.outcome)});
  }
  ASSIGN_OR_RETURN(debias::DebiasResult trained,
                   debias::TrainAdversarial(data, config.training));
  const Eigen::MatrixXd zc = trained.model.Encode(data.candidates);
  const Eigen::MatrixXd zr = trained.model.Encode(data.roles);
  DebiasRunResult out;
  for (size_t i = 0; i < cids.size(); ++i) {
    RETURN_IF_ERROR(out.representations.Insert(cids[i], zc.col(i)));
  }
  for (size_t j = 0; j < rids.size(); ++j) {
    RETURN_IF_ERROR(out.representations.Insert(rids[j], zr.col(j)));
  }
  out.history = std::move(trained.history);
  ASSIGN_OR_RETURN(out.leakage,
                   debias::LeakageProbe(zc, data.sensitive, config.training.seed));
  return out;
}

}  // namespace gesa::engine
