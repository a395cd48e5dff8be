#include "gesa/explain/explain.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "gesa/core/status_macros.h"

namespace gesa::explain {
namespace {

constexpr int kSkill = 2;
constexpr int kPreference = 4;
constexpr int kMaxEdits = 5;

absl::Status CheckPair(const ExplainContext& ctx, int candidate, int role) {
  if (ctx.objectives == nullptr) return absl::InvalidArgumentError("no scoring context");
  const auto& o = *ctx.objectives;
  if (candidate < 0 || candidate >= o.num_candidates() || role < 0 ||
      role >= o.num_roles()) {
    return absl::NotFoundError("candidate or role not in the scoring context");
  }
  if (ctx.semantic.rows() != o.num_candidates() || ctx.semantic.cols() != o.num_roles() ||
      ctx.graph.rows() != o.num_candidates() || ctx.graph.cols() != o.num_roles()) {
    return absl::FailedPreconditionError("similarity tables do not cover every pair");
  }
  if (!ctx.plan.empty() && static_cast<int>(ctx.plan.size()) != o.num_candidates()) {
    return absl::InvalidArgumentError("reference plan has the wrong length");
  }
  return absl::OkStatus();
}

struct Edit {
  std::string text;
  int feature;
  double value;
};

}  // namespace

absl::StatusOr<std::vector<double>> PairFeatures(const ExplainContext& ctx,
                                                 int candidate, int role) {
  RETURN_IF_ERROR(CheckPair(ctx, candidate, role));
  const auto& o = *ctx.objectives;
  const Dataset& d = o.dataset();
  ASSIGN_OR_RETURN(double skill,
                   objectives::SkillMatchScore(d.candidates[candidate], d.roles[role]));
  objectives::Genome plan =
      ctx.plan.empty() ? objectives::Genome(o.num_candidates(), -1) : ctx.plan;
  plan[candidate] = role;
  const double with = o.DiversityOf(plan);
  plan[candidate] = -1;
  const double without = o.DiversityOf(plan);
  return std::vector<double>{ctx.semantic(candidate, role), ctx.graph(candidate, role),
                             skill, with - without, o.preference(candidate, role)};
}

double PairScore(const ExplainContext& ctx, const std::vector<double>& x) {
  const objectives::MeritWeights& m = ctx.merit_weights;
  const ScoreWeights& w = ctx.weights;
  return w.merit * (m.alpha * x[0] + m.beta * x[1] + m.gamma * x[2]) +
         w.diversity * w.diversity_multiplier * x[3] + w.preference * x[4];
}

absl::StatusOr<std::vector<std::vector<double>>> PoolFeatures(
    const ExplainContext& ctx, int role) {
  RETURN_IF_ERROR(CheckPair(ctx, 0, role));
  std::vector<std::vector<double>> pool;
  for (int c = 0; c < ctx.objectives->num_candidates(); ++c) {
    ASSIGN_OR_RETURN(std::vector<double> x, PairFeatures(ctx, c, role));
    pool.push_back(std::move(x));
  }
  return pool;
}

absl::StatusOr<ShapExplanation> ExplainPair(const ExplainContext& ctx,
                                            int candidate, int role) {
  ASSIGN_OR_RETURN(std::vector<double> x, PairFeatures(ctx, candidate, role));
  ASSIGN_OR_RETURN(auto pool, PoolFeatures(ctx, role));
  return KernelShap([&](const std::vector<double>& v) { return PairScore(ctx, v); },
                    x, pool, ctx.shap,
                    std::vector<std::string>(kFeatureGroups.begin(), kFeatureGroups.end()));
}

absl::StatusOr<std::vector<ComparativeRow>> ComparativeExplanation(
    const ExplainContext& ctx, int selected, const std::vector<int>& alternates,
    int role) {
  if (alternates.empty()) return absl::InvalidArgumentError("no alternates given");
  ASSIGN_OR_RETURN(ShapExplanation base, ExplainPair(ctx, selected, role));
  const Dataset& d = ctx.objectives->dataset();
  std::vector<ComparativeRow> rows;
  for (int alt : alternates) {
    ASSIGN_OR_RETURN(ShapExplanation other, ExplainPair(ctx, alt, role));
    std::vector<ComparativeRow> group;
    for (int i = 0; i < kNumGroups; ++i) {
      group.push_back({d.candidates[alt].id, kFeatureGroups[i],
                       base.attributions[i] - other.attributions[i]});
    }
    std::stable_sort(group.begin(), group.end(), [](const auto& a, const auto& b) {
      return std::abs(a.delta) > std::abs(b.delta);
    });
    rows.insert(rows.end(), group.begin(), group.end());
  }
  return rows;
}

absl::StatusOr<int> PairRank(const ExplainContext& ctx, int candidate, int role) {
  ASSIGN_OR_RETURN(auto pool, PoolFeatures(ctx, role));
  const double own = PairScore(ctx, pool[candidate]);
  int rank = 1;
  for (const auto& x : pool) rank += PairScore(ctx, x) > own ? 1 : 0;
  return rank;
}

absl::StatusOr<CounterfactualResult> Counterfactual(const ExplainContext& ctx,
                                                    int candidate, int role,
                                                    int k) {
  if (k < 1) return absl::InvalidArgumentError("target k must be >= 1");
  ASSIGN_OR_RETURN(auto pool, PoolFeatures(ctx, role));
  std::vector<double> others;
  for (int c = 0; c < static_cast<int>(pool.size()); ++c) {
    if (c != candidate) others.push_back(PairScore(ctx, pool[c]));
  }
  auto rank_of = [&](const std::vector<double>& x) {
    const double own = PairScore(ctx, x);
    int rank = 1;
    for (double s : others) rank += s > own ? 1 : 0;
    return rank;
  };

  const Dataset& d = ctx.objectives->dataset();
  const Candidate& cand = d.candidates[candidate];
  const Role& r = d.roles[role];
  const std::set<std::string> held(cand.skill_ids.begin(), cand.skill_ids.end());
  const std::set<std::string> required(r.required_skill_ids.begin(),
                                       r.required_skill_ids.end());
  std::vector<std::string> missing;
  for (const std::string& s : required) {
    if (!held.contains(s)) missing.push_back(s);
  }
  const double skill_step = 1.0 / static_cast<double>(required.size());

  std::vector<double> x = pool[candidate];
  CounterfactualResult result;
  result.initial_rank = rank_of(x);
  result.final_rank = result.initial_rank;
  if (result.initial_rank <= k) {
    result.achievable = true;
    return result;
  }
  bool preference_moved = false;
  size_t next_skill = 0;
  while (static_cast<int>(result.edits.size()) < kMaxEdits) {
    std::vector<Edit> options;
    if (next_skill < missing.size()) {
      options.push_back({absl::StrCat("add skill ", missing[next_skill]), kSkill,
                         std::min(1.0, x[kSkill] + skill_step)});
    }
    if (!preference_moved && x[kPreference] < 1.0) {
      options.push_back({absl::StrCat("rank ", r.id, " first in preferences"),
                         kPreference, 1.0});
    }
    if (options.empty()) break;
    const Edit* best = nullptr;
    double best_gain = -1.0;
    for (const Edit& e : options) {
      std::vector<double> trial = x;
      trial[e.feature] = e.value;
      const double gain = PairScore(ctx, trial) - PairScore(ctx, x);
      if (gain > best_gain) {
        best_gain = gain;
        best = &e;
      }
    }
    x[best->feature] = best->value;
    if (best->feature == kSkill) {
      ++next_skill;
    } else {
      preference_moved = true;
    }
    result.edits.push_back(best->text);
    result.final_rank = rank_of(x);
    if (result.final_rank <= k) {
      result.achievable = true;
      return result;
    }
  }
  result.edits.clear();
  result.achievable = false;
  return result;
}

std::string ExecutiveSummary(const ShapExplanation& shap) {
  std::vector<int> order(shap.attributions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(shap.attributions[a]) > std::abs(shap.attributions[b]);
  });
  std::vector<std::string> parts;
  for (size_t i = 0; i < order.size() && i < 3; ++i) {
    parts.push_back(absl::StrFormat("%s %+.4f", shap.feature_names[order[i]],
                                    shap.attributions[order[i]]));
  }
  return absl::StrJoin(parts, "; ");
}

absl::StatusOr<ExplanationBundle> ExplainAllocation(const ExplainContext& ctx,
                                                    int candidate, int role,
                                                    const std::vector<int>& alternates,
                                                    int top_k) {
  ExplanationBundle bundle;
  ASSIGN_OR_RETURN(bundle.shap, ExplainPair(ctx, candidate, role));
  const Dataset& d = ctx.objectives->dataset();
  bundle.candidate_id = d.candidates[candidate].id;
  bundle.role_id = d.roles[role].id;
  bundle.summary = ExecutiveSummary(bundle.shap);
  if (!alternates.empty()) {
    ASSIGN_OR_RETURN(bundle.comparative,
                     ComparativeExplanation(ctx, candidate, alternates, role));
  }
  ASSIGN_OR_RETURN(bundle.counterfactual, Counterfactual(ctx, candidate, role, top_k));
  return bundle;
}

nlohmann::json BundleToJson(const ExplanationBundle& b) {
  nlohmann::json comparative = nlohmann::json::array();
  for (const ComparativeRow& row : b.comparative) {
    comparative.push_back(
        {{"alternate", row.alternate}, {"feature", row.feature}, {"delta", row.delta}});
  }
  nlohmann::json counterfactual = {
      {"edits", b.counterfactual.edits},
      {"achievable", b.counterfactual.achievable},
      {"initial_rank", b.counterfactual.initial_rank},
      {"final_rank", b.counterfactual.final_rank}};
  if (!b.counterfactual.achievable) counterfactual["note"] = "not achievable";
  return {{"candidate_id", b.candidate_id},
          {"role_id", b.role_id},
          {"summary", b.summary},
          {"detail", ShapToJson(b.shap)},
          {"comparative", comparative},
          {"counterfactual", counterfactual}};
}

}  // namespace gesa::explain
