#include "gesa/core/validate.h"

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace gesa {
namespace {

template <typename T>
std::set<std::string> CollectIds(const std::vector<T>& items,
                                 const char* kind,
                                 std::vector<ValidationIssue>& issues) {
  std::set<std::string> ids;
  for (const T& item : items) {
    if (item.id.empty()) {
      issues.push_back({kind, item.id, "empty id"});
      continue;
    }
    if (!ids.insert(item.id).second) {
      issues.push_back({kind, item.id, "duplicate id"});
    }
  }
  return ids;
}

void CheckOptionalRef(const std::string& ref, const std::set<std::string>& ids,
                      const char* kind, const std::string& owner,
                      const char* field, std::vector<ValidationIssue>& issues) {
  if (!ref.empty() && !ids.contains(ref)) {
    issues.push_back(
        {kind, owner, absl::StrCat(field, " '", ref, "' does not resolve")});
  }
}

}  // namespace

std::vector<ValidationIssue> ValidateDataset(const Dataset& dataset) {
  std::vector<ValidationIssue> issues;
  const auto candidate_ids =
      CollectIds(dataset.candidates, "candidate", issues);
  const auto role_ids = CollectIds(dataset.roles, "role", issues);
  const auto skill_ids = CollectIds(dataset.skills, "skill", issues);
  const auto org_ids = CollectIds(dataset.organizations, "organization", issues);
  const auto location_ids = CollectIds(dataset.locations, "location", issues);
  const auto domain_ids = CollectIds(dataset.domains, "domain", issues);

  for (const auto& [category, labels] : dataset.demographic_categories) {
    std::set<std::string> seen;
    for (const auto& label : labels) {
      if (!seen.insert(label).second) {
        issues.push_back({"demographic_category", category,
                          absl::StrCat("duplicate label '", label, "'")});
      }
    }
  }

  for (const Candidate& c : dataset.candidates) {
    for (const auto& s : c.skill_ids) {
      if (!skill_ids.contains(s)) {
        issues.push_back(
            {"candidate", c.id, absl::StrCat("skill '", s, "' does not resolve")});
      }
    }
    CheckOptionalRef(c.org_id, org_ids, "candidate", c.id, "org_id", issues);
    CheckOptionalRef(c.location_id, location_ids, "candidate", c.id,
                     "location_id", issues);
    CheckOptionalRef(c.domain_id, domain_ids, "candidate", c.id, "domain_id",
                     issues);
    std::set<std::string> prefs;
    for (const auto& r : c.preferences) {
      if (!prefs.insert(r).second) {
        issues.push_back({"candidate", c.id,
                          absl::StrCat("duplicate preference '", r, "'")});
      } else if (!role_ids.contains(r)) {
        issues.push_back({"candidate", c.id,
                          absl::StrCat("preference '", r, "' does not resolve")});
      }
    }
    for (const auto& [category, label] : c.demographics.group_memberships) {
      auto it = dataset.demographic_categories.find(category);
      if (it == dataset.demographic_categories.end()) {
        issues.push_back({"candidate", c.id,
                          absl::StrCat("undeclared demographic category '",
                                       category, "'")});
      } else if (std::find(it->second.begin(), it->second.end(), label) ==
                 it->second.end()) {
        issues.push_back({"candidate", c.id,
                          absl::StrCat("label '", label,
                                       "' not in vocabulary of '", category,
                                       "'")});
      }
    }
  }

  for (const Role& r : dataset.roles) {
    if (r.capacity < 1) {
      issues.push_back(
          {"role", r.id, absl::StrCat("capacity ", r.capacity, " < 1")});
    }
    if (r.required_skill_ids.empty()) {
      issues.push_back({"role", r.id, "no required skills"});
    }
    for (const auto& s : r.required_skill_ids) {
      if (!skill_ids.contains(s)) {
        issues.push_back(
            {"role", r.id, absl::StrCat("skill '", s, "' does not resolve")});
      }
    }
    CheckOptionalRef(r.org_id, org_ids, "role", r.id, "org_id", issues);
    CheckOptionalRef(r.location_id, location_ids, "role", r.id, "location_id",
                     issues);
    CheckOptionalRef(r.domain_id, domain_ids, "role", r.id, "domain_id",
                     issues);
  }

  for (size_t i = 0; i < dataset.interactions.size(); ++i) {
    const Interaction& x = dataset.interactions[i];
    const std::string id = absl::StrCat(x.candidate_id, "/", x.role_id);
    if (!candidate_ids.contains(x.candidate_id)) {
      issues.push_back({"interaction", id, "candidate does not resolve"});
    }
    if (!role_ids.contains(x.role_id)) {
      issues.push_back({"interaction", id, "role does not resolve"});
    }
    if (x.outcome != 0 && x.outcome != 1) {
      issues.push_back(
          {"interaction", id, absl::StrCat("outcome ", x.outcome, " not in {0,1}")});
    }
  }

  if (dataset.ground_truth) {
    for (const Match& m : *dataset.ground_truth) {
      const std::string id = absl::StrCat(m.candidate_id, "/", m.role_id);
      if (!candidate_ids.contains(m.candidate_id)) {
        issues.push_back({"ground_truth", id, "candidate does not resolve"});
      }
      if (!role_ids.contains(m.role_id)) {
        issues.push_back({"ground_truth", id, "role does not resolve"});
      }
    }
  }
  return issues;
}

std::string FormatIssues(const std::vector<ValidationIssue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    absl::StrAppend(&out, issue.entity_kind, " ", issue.entity_id, ": ",
                    issue.reason, "\n");
  }
  return out;
}

absl::StatusOr<ConstraintSet> BuildConstraintSet(
    const Dataset& dataset, std::vector<RepresentationFloor> floors,
    std::vector<Quota> quotas) {
  ConstraintSet out;
  long total_capacity = 0;
  for (const Role& r : dataset.roles) {
    out.capacities.push_back({r.id, r.capacity});
    total_capacity += r.capacity;
  }
  const long max_selection =
      std::min<long>(total_capacity, static_cast<long>(dataset.candidates.size()));

  auto check_group = [&](const std::string& id, const std::string& category,
                         const std::string& label) -> absl::Status {
    auto it = dataset.demographic_categories.find(category);
    if (it == dataset.demographic_categories.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("constraint ", id, ": unknown category '", category, "'"));
    }
    if (std::find(it->second.begin(), it->second.end(), label) ==
        it->second.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "constraint ", id, ": unknown label '", label, "' in '", category, "'"));
    }
    return absl::OkStatus();
  };

  for (auto& f : floors) {
    if (auto s = check_group(f.id, f.category, f.label); !s.ok()) return s;
    if (f.minimum < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("constraint ", f.id, ": negative floor"));
    }
    out.floors.push_back(std::move(f));
  }
  for (auto& q : quotas) {
    if (auto s = check_group(q.id, q.category, q.label); !s.ok()) return s;
    if (q.target < 0 || q.target > max_selection) {
      return absl::InvalidArgumentError(
          absl::StrCat("constraint ", q.id, ": quota target ", q.target,
                       " outside [0, ", max_selection, "]"));
    }
    out.quotas.push_back(std::move(q));
  }
  return out;
}

}  // namespace gesa
