#include "gesa/objectives/objectives.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/status_macros.h"

namespace gesa::objectives {
namespace {

constexpr double kWeightTolerance = 1e-9;

bool InUnitInterval(double x) { return x >= 0.0 && x <= 1.0; }

// Label index within a category's label list, -1 when absent.
int LabelCode(const std::vector<std::string>& labels, const std::string& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

std::vector<int> CodesFor(const Dataset& dataset, const std::string& category,
                          const std::vector<std::string>& labels) {
  std::vector<int> codes;
  codes.reserve(dataset.candidates.size());
  for (const Candidate& c : dataset.candidates) {
    auto it = c.demographics.group_memberships.find(category);
    codes.push_back(it == c.demographics.group_memberships.end()
                        ? -1
                        : LabelCode(labels, it->second));
  }
  return codes;
}

}  // namespace

absl::Status CheckMeritWeights(const MeritWeights& w) {
  if (w.alpha < 0.0 || w.beta < 0.0 || w.gamma < 0.0) {
    return absl::InvalidArgumentError("merit weights must be non-negative");
  }
  if (std::abs(w.alpha + w.beta + w.gamma - 1.0) > kWeightTolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("merit weights sum to ", w.alpha + w.beta + w.gamma,
                     ", expected 1"));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> SkillMatchScore(const Candidate& candidate,
                                       const Role& role) {
  if (role.required_skill_ids.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("role ", role.id, " has no required skills"));
  }
  const std::set<std::string> held(candidate.skill_ids.begin(),
                                   candidate.skill_ids.end());
  const std::set<std::string> required(role.required_skill_ids.begin(),
                                       role.required_skill_ids.end());
  int covered = 0;
  for (const auto& s : required) covered += held.contains(s) ? 1 : 0;
  return static_cast<double>(covered) / static_cast<double>(required.size());
}

absl::StatusOr<double> Merit(const MeritWeights& weights,
                             const Similarities& sims) {
  RETURN_IF_ERROR(CheckMeritWeights(weights));
  if (!InUnitInterval(sims.semantic) || !InUnitInterval(sims.graph) ||
      !InUnitInterval(sims.skill)) {
    return absl::InvalidArgumentError("similarities must lie in [0, 1]");
  }
  return weights.alpha * sims.semantic + weights.beta * sims.graph +
         weights.gamma * sims.skill;
}

absl::StatusOr<Eigen::MatrixXd> MeritMatrix(const Dataset& dataset,
                                            const MeritWeights& weights,
                                            const Eigen::MatrixXd& semantic,
                                            const Eigen::MatrixXd& graph) {
  RETURN_IF_ERROR(CheckMeritWeights(weights));
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.candidates.size());
  const Eigen::Index m = static_cast<Eigen::Index>(dataset.roles.size());
  if (semantic.rows() != n || semantic.cols() != m || graph.rows() != n ||
      graph.cols() != m) {
    return absl::InvalidArgumentError(
        "similarity matrices must be candidates x roles");
  }
  Eigen::MatrixXd merit(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      ASSIGN_OR_RETURN(double skill, SkillMatchScore(dataset.candidates[i],
                                                     dataset.roles[j]));
      ASSIGN_OR_RETURN(merit(i, j),
                       Merit(weights, {semantic(i, j), graph(i, j), skill}));
    }
  }
  return merit;
}

absl::Status CheckDiversitySpec(const DiversitySpec& spec) {
  double total = 0.0;
  std::set<std::string> seen;
  for (const CategoryWeight& c : spec.categories) {
    if (c.weight < 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("negative weight for category ", c.category));
    }
    if (!seen.insert(c.category).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("category ", c.category, " listed twice"));
    }
    total += c.weight;
  }
  if (!spec.categories.empty() && std::abs(total - 1.0) > kWeightTolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("diversity weights sum to ", total, ", expected 1"));
  }
  return absl::OkStatus();
}

DiversitySpec UniformDiversitySpec(const Dataset& dataset) {
  DiversitySpec spec;
  const double w = dataset.demographic_categories.empty()
                       ? 0.0
                       : 1.0 / static_cast<double>(
                                   dataset.demographic_categories.size());
  for (const auto& [category, labels] : dataset.demographic_categories) {
    spec.categories.push_back({category, w, labels});
  }
  return spec;
}

double EntropyFromCounts(const std::vector<int>& counts) {
  double total = 0.0;
  for (int c : counts) total += c;
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = c / total;
    h -= p * std::log(p);
  }
  return h;
}

absl::StatusOr<double> GroupEntropy(const std::vector<std::string>& labels) {
  if (labels.empty()) {
    return absl::InvalidArgumentError("entropy of an empty selection");
  }
  std::map<std::string, int> counts;
  for (const auto& l : labels) ++counts[l];
  std::vector<int> values;
  for (const auto& [label, c] : counts) values.push_back(c);
  return EntropyFromCounts(values);
}

absl::StatusOr<double> Diversity(const AllocationPlan& plan,
                                 const Dataset& dataset,
                                 const DiversitySpec& spec) {
  RETURN_IF_ERROR(CheckDiversitySpec(spec));
  if (plan.assignments.empty()) {
    return absl::InvalidArgumentError("diversity of an empty plan");
  }
  std::unordered_map<std::string, const Candidate*> by_id;
  for (const Candidate& c : dataset.candidates) by_id.emplace(c.id, &c);
  double total = 0.0;
  for (const CategoryWeight& category : spec.categories) {
    std::vector<std::string> labels;
    for (const auto& [cid, rid] : plan.assignments) {
      auto it = by_id.find(cid);
      if (it == by_id.end()) {
        return absl::InvalidArgumentError(
            absl::StrCat("plan references unknown candidate ", cid));
      }
      const auto& groups = it->second->demographics.group_memberships;
      auto g = groups.find(category.category);
      if (g != groups.end()) labels.push_back(g->second);
    }
    if (labels.empty()) continue;
    ASSIGN_OR_RETURN(double h, GroupEntropy(labels));
    total += category.weight * h;
  }
  return total;
}

double PreferenceScore(const Candidate& candidate, const std::string& role_id) {
  const auto& prefs = candidate.preferences;
  auto it = std::find(prefs.begin(), prefs.end(), role_id);
  if (it == prefs.end()) return 0.0;
  if (prefs.size() == 1) return 1.0;
  const double rank = static_cast<double>(it - prefs.begin());  // 0-based
  return 1.0 - rank / static_cast<double>(prefs.size() - 1);
}

double PreferenceSatisfaction(const AllocationPlan& plan,
                              const Dataset& dataset) {
  if (plan.assignments.empty()) return 0.0;
  std::unordered_map<std::string, const Candidate*> by_id;
  for (const Candidate& c : dataset.candidates) by_id.emplace(c.id, &c);
  double total = 0.0;
  for (const auto& [cid, rid] : plan.assignments) {
    auto it = by_id.find(cid);
    if (it != by_id.end()) total += PreferenceScore(*it->second, rid);
  }
  return total / static_cast<double>(plan.assignments.size());
}

absl::StatusOr<std::vector<ConstraintViolation>> EvaluateConstraints(
    const AllocationPlan& plan, const ConstraintSet& constraints,
    const Dataset& dataset) {
  std::unordered_map<std::string, const Candidate*> candidates;
  for (const Candidate& c : dataset.candidates) candidates.emplace(c.id, &c);
  std::set<std::string> roles;
  for (const Role& r : dataset.roles) roles.insert(r.id);

  std::map<std::string, int> per_role;
  for (const auto& [cid, rid] : plan.assignments) {
    if (!candidates.contains(cid) || !roles.contains(rid)) {
      return absl::InvalidArgumentError(
          absl::StrCat("plan pair (", cid, ", ", rid, ") is unknown"));
    }
    ++per_role[rid];
  }
  auto group_count = [&](const std::string& category,
                         const std::string& label) -> absl::StatusOr<int> {
    auto vocab = dataset.demographic_categories.find(category);
    if (vocab == dataset.demographic_categories.end() ||
        LabelCode(vocab->second, label) < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown group ", category, "=", label));
    }
    int count = 0;
    for (const auto& [cid, rid] : plan.assignments) {
      const auto& groups = candidates.at(cid)->demographics.group_memberships;
      auto g = groups.find(category);
      if (g != groups.end() && g->second == label) ++count;
    }
    return count;
  };

  std::vector<ConstraintViolation> out;
  for (const CapacityConstraint& c : constraints.capacities) {
    if (!roles.contains(c.role_id)) {
      return absl::InvalidArgumentError(
          absl::StrCat("capacity constraint on unknown role ", c.role_id));
    }
    auto it = per_role.find(c.role_id);
    const int assigned = it == per_role.end() ? 0 : it->second;
    if (assigned > c.capacity) {
      out.push_back({absl::StrCat("capacity:", c.role_id),
                     static_cast<double>(assigned - c.capacity)});
    }
  }
  for (const RepresentationFloor& f : constraints.floors) {
    ASSIGN_OR_RETURN(int count, group_count(f.category, f.label));
    if (count < f.minimum) {
      out.push_back({f.id, static_cast<double>(f.minimum - count)});
    }
  }
  for (const Quota& q : constraints.quotas) {
    ASSIGN_OR_RETURN(int count, group_count(q.category, q.label));
    if (count != q.target) {
      out.push_back({q.id, static_cast<double>(std::abs(count - q.target))});
    }
  }
  return out;
}

double Evaluation::TotalViolation() const {
  double total = 0.0;
  for (const ConstraintViolation& v : violations) total += v.magnitude;
  return total;
}

absl::StatusOr<ObjectiveContext> ObjectiveContext::Create(
    const Dataset& dataset, Eigen::MatrixXd merit, DiversitySpec diversity,
    ConstraintSet constraints, Aggregation aggregation) {
  RETURN_IF_ERROR(CheckDiversitySpec(diversity));
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.candidates.size());
  const Eigen::Index m = static_cast<Eigen::Index>(dataset.roles.size());
  if (merit.rows() != n || merit.cols() != m) {
    return absl::InvalidArgumentError("merit matrix must be candidates x roles");
  }
  if (!merit.allFinite()) {
    return absl::InvalidArgumentError("merit matrix has non-finite entries");
  }
  ObjectiveContext ctx;
  ctx.dataset_ = dataset;
  ctx.merit_ = std::move(merit);
  ctx.diversity_ = std::move(diversity);
  ctx.constraints_ = std::move(constraints);
  ctx.aggregation_ = aggregation;

  for (Eigen::Index i = 0; i < n; ++i) {
    ctx.candidate_index_.emplace(dataset.candidates[i].id, static_cast<int>(i));
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    ctx.role_index_.emplace(dataset.roles[j].id, static_cast<int>(j));
    ctx.capacity_.push_back(dataset.roles[j].capacity);
  }
  ctx.preference_ = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& rid : dataset.candidates[i].preferences) {
      auto it = ctx.role_index_.find(rid);
      if (it != ctx.role_index_.end()) {
        ctx.preference_(i, it->second) =
            PreferenceScore(dataset.candidates[i], rid);
      }
    }
  }
  for (const CategoryWeight& c : ctx.diversity_.categories) {
    ctx.category_codes_.push_back(CodesFor(dataset, c.category, c.labels));
    ctx.category_sizes_.push_back(static_cast<int>(c.labels.size()));
  }

  for (const CapacityConstraint& c : ctx.constraints_.capacities) {
    const int r = ctx.RoleIndex(c.role_id);
    if (r < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("capacity constraint on unknown role ", c.role_id));
    }
    ctx.capacity_[r] = c.capacity;
  }
  int64_t total_capacity = 0;
  for (int c : ctx.capacity_) total_capacity += std::max(c, 0);
  ctx.slots_ = static_cast<int>(std::min<int64_t>(total_capacity, n));
  ctx.id_order_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) ctx.id_order_[i] = static_cast<int>(i);
  std::sort(ctx.id_order_.begin(), ctx.id_order_.end(), [&](int a, int b) {
    return dataset.candidates[a].id < dataset.candidates[b].id;
  });
  ctx.capacity_ids_.assign(m, "");
  std::vector<bool> constrained(m, false);
  for (const CapacityConstraint& c : ctx.constraints_.capacities) {
    constrained[ctx.RoleIndex(c.role_id)] = true;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (constrained[j]) {
      ctx.capacity_ids_[j] = absl::StrCat("capacity:", dataset.roles[j].id);
    }
  }

  std::map<std::string, int> rule_category;
  auto add_rule = [&](const std::string& id, const std::string& category,
                      const std::string& label, int amount,
                      bool equality) -> absl::Status {
    auto vocab = dataset.demographic_categories.find(category);
    const int code = vocab == dataset.demographic_categories.end()
                         ? -1
                         : LabelCode(vocab->second, label);
    if (code < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("constraint ", id, " references unknown group ",
                       category, "=", label));
    }
    auto [it, inserted] = rule_category.emplace(
        category, static_cast<int>(ctx.rule_codes_.size()));
    if (inserted) {
      ctx.rule_codes_.push_back(CodesFor(dataset, category, vocab->second));
    }
    ctx.rules_.push_back({id, it->second, code, amount, equality});
    return absl::OkStatus();
  };
  for (const RepresentationFloor& f : ctx.constraints_.floors) {
    RETURN_IF_ERROR(add_rule(f.id, f.category, f.label, f.minimum, false));
  }
  for (const Quota& q : ctx.constraints_.quotas) {
    RETURN_IF_ERROR(add_rule(q.id, q.category, q.label, q.target, true));
  }
  return ctx;
}

int ObjectiveContext::CandidateIndex(const std::string& id) const {
  auto it = candidate_index_.find(id);
  return it == candidate_index_.end() ? -1 : it->second;
}

int ObjectiveContext::RoleIndex(const std::string& id) const {
  auto it = role_index_.find(id);
  return it == role_index_.end() ? -1 : it->second;
}

double ObjectiveContext::DiversityOf(const Genome& genome) const {
  double total = 0.0;
  std::vector<int> counts;
  for (size_t g = 0; g < category_codes_.size(); ++g) {
    counts.assign(category_sizes_[g], 0);
    const std::vector<int>& codes = category_codes_[g];
    for (size_t i = 0; i < genome.size(); ++i) {
      if (genome[i] >= 0 && codes[i] >= 0) ++counts[codes[i]];
    }
    total += diversity_.categories[g].weight * EntropyFromCounts(counts);
  }
  return total;
}

Evaluation ObjectiveContext::Evaluate(const Genome& genome) const {
  Evaluation out;
  std::vector<int> per_role(num_roles(), 0);
  double merit_sum = 0.0, pref_sum = 0.0;
  int assigned = 0;
  for (size_t i = 0; i < genome.size(); ++i) {
    const int r = genome[i];
    if (r < 0) continue;
    ++assigned;
    ++per_role[r];
    merit_sum += merit_(static_cast<Eigen::Index>(i), r);
    pref_sum += preference_(static_cast<Eigen::Index>(i), r);
  }
  if (assigned == 0) {
    out.degenerate = true;
  } else {
    const double denominator =
        aggregation_ == Aggregation::kPerAssignment
            ? assigned
            : std::max(slots_, assigned);
    out.objectives.merit = merit_sum / denominator;
    out.objectives.preference = pref_sum / denominator;
    out.objectives.diversity = DiversityOf(genome);
  }

  for (int r = 0; r < num_roles(); ++r) {
    if (!capacity_ids_[r].empty() && per_role[r] > capacity_[r]) {
      out.violations.push_back(
          {capacity_ids_[r], static_cast<double>(per_role[r] - capacity_[r])});
    }
  }
  for (const GroupRule& rule : rules_) {
    const std::vector<int>& codes = rule_codes_[rule.category];
    int count = 0;
    for (size_t i = 0; i < genome.size(); ++i) {
      if (genome[i] >= 0 && codes[i] == rule.label) ++count;
    }
    const int gap = rule.equality ? std::abs(count - rule.amount)
                                  : std::max(0, rule.amount - count);
    if (gap > 0) out.violations.push_back({rule.id, static_cast<double>(gap)});
  }
  return out;
}

absl::StatusOr<Genome> ObjectiveContext::ToGenome(
    const AllocationPlan& plan) const {
  Genome genome(num_candidates(), -1);
  for (const auto& [cid, rid] : plan.assignments) {
    const int c = CandidateIndex(cid);
    const int r = RoleIndex(rid);
    if (c < 0 || r < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("plan pair (", cid, ", ", rid, ") is unknown"));
    }
    genome[c] = r;
  }
  return genome;
}

AllocationPlan ObjectiveContext::ToPlan(const Genome& genome) const {
  AllocationPlan plan;
  for (size_t i = 0; i < genome.size(); ++i) {
    if (genome[i] >= 0) {
      plan.assignments.emplace(dataset_.candidates[i].id,
                               dataset_.roles[genome[i]].id);
    }
  }
  const Evaluation e = Evaluate(genome);
  plan.objective_values = e.objectives;
  plan.violations = e.violations;
  plan.infeasible = !e.violations.empty();
  return plan;
}

absl::StatusOr<AllocationPlan> ObjectiveContext::EvaluatePlan(
    const AllocationPlan& plan) const {
  ASSIGN_OR_RETURN(Genome genome, ToGenome(plan));
  return ToPlan(genome);
}

}  // namespace gesa::objectives
