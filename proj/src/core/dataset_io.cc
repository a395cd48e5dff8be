#include "gesa/core/dataset_io.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/status_macros.h"

namespace gesa {
namespace {

using nlohmann::json;

template <typename T>
void SortById(std::vector<T>& items) {
  std::stable_sort(items.begin(), items.end(),
                   [](const T& a, const T& b) { return a.id < b.id; });
}

absl::Status FormatError(const std::string& where, const std::string& what) {
  return absl::InvalidArgumentError(
      absl::StrCat("format error at ", where, ": ", what));
}

// Typed field access with a path-qualified error.
template <typename T>
absl::StatusOr<T> Field(const json& object, const char* key,
                        const std::string& where, bool required = true,
                        T fallback = T()) {
  if (!object.is_object()) return FormatError(where, "expected an object");
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) {
    if (required) return FormatError(where, absl::StrCat("missing '", key, "'"));
    return fallback;
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    return FormatError(absl::StrCat(where, ".", key), e.what());
  }
}

absl::StatusOr<std::vector<json>> ArrayField(const json& object,
                                             const char* key,
                                             const std::string& where,
                                             bool required) {
  if (!object.is_object()) return FormatError(where, "expected an object");
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) {
    if (required) return FormatError(where, absl::StrCat("missing '", key, "'"));
    return std::vector<json>{};
  }
  if (!it->is_array()) {
    return FormatError(absl::StrCat(where, ".", key), "expected an array");
  }
  return std::vector<json>(it->begin(), it->end());
}

json NamedToJson(const NamedEntity& e) {
  return json{{"id", e.id}, {"name", e.name}};
}

absl::StatusOr<NamedEntity> NamedFromJson(const json& j,
                                          const std::string& where) {
  NamedEntity e;
  ASSIGN_OR_RETURN(e.id, Field<std::string>(j, "id", where));
  ASSIGN_OR_RETURN(e.name, Field<std::string>(j, "name", where, false));
  return e;
}

absl::StatusOr<std::vector<NamedEntity>> NamedListFromJson(
    const json& document, const char* key) {
  ASSIGN_OR_RETURN(auto items, ArrayField(document, key, "$", false));
  std::vector<NamedEntity> out;
  for (size_t i = 0; i < items.size(); ++i) {
    ASSIGN_OR_RETURN(auto e,
                     NamedFromJson(items[i], absl::StrCat(key, "[", i, "]")));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

Dataset Canonicalize(Dataset dataset) {
  SortById(dataset.candidates);
  SortById(dataset.roles);
  SortById(dataset.skills);
  SortById(dataset.organizations);
  SortById(dataset.locations);
  SortById(dataset.domains);
  std::stable_sort(dataset.interactions.begin(), dataset.interactions.end(),
                   [](const Interaction& a, const Interaction& b) {
                     return std::tie(a.candidate_id, a.role_id, a.outcome) <
                            std::tie(b.candidate_id, b.role_id, b.outcome);
                   });
  if (dataset.ground_truth) {
    std::sort(dataset.ground_truth->begin(), dataset.ground_truth->end());
  }
  return dataset;
}

json DatasetToJson(const Dataset& dataset) {
  json doc = json::object();
  json candidates = json::array();
  for (const Candidate& c : dataset.candidates) {
    candidates.push_back(json{{"id", c.id},
                              {"skill_ids", c.skill_ids},
                              {"org_id", c.org_id},
                              {"location_id", c.location_id},
                              {"domain_id", c.domain_id},
                              {"free_text", c.free_text},
                              {"preferences", c.preferences},
                              {"demographics", c.demographics.group_memberships}});
  }
  doc["candidates"] = std::move(candidates);

  json roles = json::array();
  for (const Role& r : dataset.roles) {
    roles.push_back(json{{"id", r.id},
                         {"required_skill_ids", r.required_skill_ids},
                         {"org_id", r.org_id},
                         {"location_id", r.location_id},
                         {"domain_id", r.domain_id},
                         {"free_text", r.free_text},
                         {"capacity", r.capacity}});
  }
  doc["roles"] = std::move(roles);

  json skills = json::array();
  for (const Skill& s : dataset.skills) {
    skills.push_back(json{{"id", s.id}, {"name", s.name}, {"text", s.text}});
  }
  doc["skills"] = std::move(skills);

  auto named = [](const std::vector<NamedEntity>& list) {
    json out = json::array();
    for (const auto& e : list) out.push_back(NamedToJson(e));
    return out;
  };
  doc["organizations"] = named(dataset.organizations);
  doc["locations"] = named(dataset.locations);
  doc["domains"] = named(dataset.domains);
  doc["demographic_categories"] = dataset.demographic_categories;

  json interactions = json::array();
  for (const Interaction& i : dataset.interactions) {
    interactions.push_back(json{{"candidate_id", i.candidate_id},
                                {"role_id", i.role_id},
                                {"outcome", i.outcome}});
  }
  doc["interactions"] = std::move(interactions);

  if (dataset.ground_truth) {
    json truth = json::array();
    for (const Match& m : *dataset.ground_truth) {
      truth.push_back(
          json{{"candidate_id", m.candidate_id}, {"role_id", m.role_id}});
    }
    doc["ground_truth"] = std::move(truth);
  }
  return doc;
}

absl::StatusOr<Dataset> DatasetFromJson(const json& document) {
  if (!document.is_object()) {
    return FormatError("$", "dataset document must be an object");
  }
  Dataset dataset;

  ASSIGN_OR_RETURN(auto candidates,
                   ArrayField(document, "candidates", "$", true));
  for (size_t i = 0; i < candidates.size(); ++i) {
    const std::string where = absl::StrCat("candidates[", i, "]");
    const json& j = candidates[i];
    Candidate c;
    ASSIGN_OR_RETURN(c.id, Field<std::string>(j, "id", where));
    ASSIGN_OR_RETURN(c.skill_ids,
                     Field<std::vector<std::string>>(j, "skill_ids", where,
                                                     false));
    ASSIGN_OR_RETURN(c.org_id, Field<std::string>(j, "org_id", where, false));
    ASSIGN_OR_RETURN(c.location_id,
                     Field<std::string>(j, "location_id", where, false));
    ASSIGN_OR_RETURN(c.domain_id,
                     Field<std::string>(j, "domain_id", where, false));
    ASSIGN_OR_RETURN(c.free_text,
                     Field<std::string>(j, "free_text", where, false));
    ASSIGN_OR_RETURN(c.preferences,
                     Field<std::vector<std::string>>(j, "preferences", where,
                                                     false));
    using Memberships = std::map<std::string, std::string>;
    ASSIGN_OR_RETURN(c.demographics.group_memberships,
                     Field<Memberships>(j, "demographics", where, false));
    dataset.candidates.push_back(std::move(c));
  }

  ASSIGN_OR_RETURN(auto roles, ArrayField(document, "roles", "$", true));
  for (size_t i = 0; i < roles.size(); ++i) {
    const std::string where = absl::StrCat("roles[", i, "]");
    const json& j = roles[i];
    Role r;
    ASSIGN_OR_RETURN(r.id, Field<std::string>(j, "id", where));
    ASSIGN_OR_RETURN(r.required_skill_ids,
                     Field<std::vector<std::string>>(j, "required_skill_ids",
                                                     where, false));
    ASSIGN_OR_RETURN(r.org_id, Field<std::string>(j, "org_id", where, false));
    ASSIGN_OR_RETURN(r.location_id,
                     Field<std::string>(j, "location_id", where, false));
    ASSIGN_OR_RETURN(r.domain_id,
                     Field<std::string>(j, "domain_id", where, false));
    ASSIGN_OR_RETURN(r.free_text,
                     Field<std::string>(j, "free_text", where, false));
    ASSIGN_OR_RETURN(r.capacity, Field<int>(j, "capacity", where, false, 1));
    dataset.roles.push_back(std::move(r));
  }

  ASSIGN_OR_RETURN(auto skills, ArrayField(document, "skills", "$", true));
  for (size_t i = 0; i < skills.size(); ++i) {
    const std::string where = absl::StrCat("skills[", i, "]");
    Skill s;
    ASSIGN_OR_RETURN(s.id, Field<std::string>(skills[i], "id", where));
    ASSIGN_OR_RETURN(s.name,
                     Field<std::string>(skills[i], "name", where, false));
    ASSIGN_OR_RETURN(s.text,
                     Field<std::string>(skills[i], "text", where, false));
    dataset.skills.push_back(std::move(s));
  }

  ASSIGN_OR_RETURN(dataset.organizations,
                   NamedListFromJson(document, "organizations"));
  ASSIGN_OR_RETURN(dataset.locations, NamedListFromJson(document, "locations"));
  ASSIGN_OR_RETURN(dataset.domains, NamedListFromJson(document, "domains"));

  using Vocabularies = std::map<std::string, std::vector<std::string>>;
  ASSIGN_OR_RETURN(dataset.demographic_categories,
                   Field<Vocabularies>(document, "demographic_categories",
                                       "$", false));

  ASSIGN_OR_RETURN(auto interactions,
                   ArrayField(document, "interactions", "$", false));
  for (size_t i = 0; i < interactions.size(); ++i) {
    const std::string where = absl::StrCat("interactions[", i, "]");
    Interaction x;
    ASSIGN_OR_RETURN(x.candidate_id,
                     Field<std::string>(interactions[i], "candidate_id", where));
    ASSIGN_OR_RETURN(x.role_id,
                     Field<std::string>(interactions[i], "role_id", where));
    ASSIGN_OR_RETURN(x.outcome, Field<int>(interactions[i], "outcome", where));
    dataset.interactions.push_back(std::move(x));
  }

  if (document.contains("ground_truth") && !document["ground_truth"].is_null()) {
    ASSIGN_OR_RETURN(auto truth,
                     ArrayField(document, "ground_truth", "$", true));
    std::vector<Match> matches;
    for (size_t i = 0; i < truth.size(); ++i) {
      const std::string where = absl::StrCat("ground_truth[", i, "]");
      Match m;
      ASSIGN_OR_RETURN(m.candidate_id,
                       Field<std::string>(truth[i], "candidate_id", where));
      ASSIGN_OR_RETURN(m.role_id, Field<std::string>(truth[i], "role_id", where));
      matches.push_back(std::move(m));
    }
    dataset.ground_truth = std::move(matches);
  }
  return dataset;
}

std::string SerializeDataset(const Dataset& dataset) {
  return DatasetToJson(Canonicalize(dataset)).dump(2) + "\n";
}

absl::StatusOr<Dataset> ParseDataset(std::string_view text) {
  json document = json::parse(text.begin(), text.end(), nullptr,
                              /*allow_exceptions=*/false);
  if (document.is_discarded()) {
    return FormatError("$", "document is not valid JSON");
  }
  return DatasetFromJson(document);
}

absl::StatusOr<std::string> ReadFileToString(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteStringToFile(std::string_view contents,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ReadDataset(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFileToString(path));
  return ParseDataset(text);
}

absl::Status WriteDataset(const Dataset& dataset, const std::string& path) {
  return WriteStringToFile(SerializeDataset(dataset), path);
}

json PlanToJson(const AllocationPlan& plan) {
  json violations = json::array();
  for (const auto& v : plan.violations) {
    violations.push_back(
        json{{"constraint_id", v.constraint_id}, {"magnitude", v.magnitude}});
  }
  return json{{"assignments", plan.assignments},
              {"objectives",
               {{"merit", plan.objective_values.merit},
                {"diversity", plan.objective_values.diversity},
                {"preference", plan.objective_values.preference}}},
              {"violations", std::move(violations)},
              {"infeasible", plan.infeasible}};
}

absl::StatusOr<AllocationPlan> PlanFromJson(const json& document) {
  AllocationPlan plan;
  using Assignments = std::map<std::string, std::string>;
  ASSIGN_OR_RETURN(plan.assignments,
                   Field<Assignments>(document, "assignments", "plan"));
  if (document.contains("objectives")) {
    const json& o = document["objectives"];
    ASSIGN_OR_RETURN(plan.objective_values.merit,
                     Field<double>(o, "merit", "plan.objectives", false));
    ASSIGN_OR_RETURN(plan.objective_values.diversity,
                     Field<double>(o, "diversity", "plan.objectives", false));
    ASSIGN_OR_RETURN(plan.objective_values.preference,
                     Field<double>(o, "preference", "plan.objectives", false));
  }
  ASSIGN_OR_RETURN(auto violations,
                   ArrayField(document, "violations", "plan", false));
  for (const json& v : violations) {
    ConstraintViolation cv;
    ASSIGN_OR_RETURN(cv.constraint_id,
                     Field<std::string>(v, "constraint_id", "plan.violations"));
    ASSIGN_OR_RETURN(cv.magnitude,
                     Field<double>(v, "magnitude", "plan.violations"));
    plan.violations.push_back(std::move(cv));
  }
  ASSIGN_OR_RETURN(plan.infeasible,
                   Field<bool>(document, "infeasible", "plan", false, false));
  return plan;
}

json ConstraintSetToJson(const ConstraintSet& constraints) {
  json capacities = json::array();
  for (const auto& c : constraints.capacities) {
    capacities.push_back(json{{"role_id", c.role_id}, {"capacity", c.capacity}});
  }
  json floors = json::array();
  for (const auto& f : constraints.floors) {
    floors.push_back(json{{"id", f.id},
                          {"category", f.category},
                          {"label", f.label},
                          {"minimum", f.minimum}});
  }
  json quotas = json::array();
  for (const auto& q : constraints.quotas) {
    quotas.push_back(json{{"id", q.id},
                          {"category", q.category},
                          {"label", q.label},
                          {"target", q.target}});
  }
  return json{{"capacities", std::move(capacities)},
              {"floors", std::move(floors)},
              {"quotas", std::move(quotas)}};
}

absl::StatusOr<ConstraintSet> ConstraintSetFromJson(const json& document) {
  ConstraintSet out;
  ASSIGN_OR_RETURN(auto capacities,
                   ArrayField(document, "capacities", "constraints", false));
  for (const json& c : capacities) {
    CapacityConstraint cc;
    ASSIGN_OR_RETURN(cc.role_id, Field<std::string>(c, "role_id", "capacities"));
    ASSIGN_OR_RETURN(cc.capacity, Field<int>(c, "capacity", "capacities"));
    out.capacities.push_back(std::move(cc));
  }
  ASSIGN_OR_RETURN(auto floors,
                   ArrayField(document, "floors", "constraints", false));
  for (const json& f : floors) {
    RepresentationFloor rf;
    ASSIGN_OR_RETURN(rf.id, Field<std::string>(f, "id", "floors"));
    ASSIGN_OR_RETURN(rf.category, Field<std::string>(f, "category", "floors"));
    ASSIGN_OR_RETURN(rf.label, Field<std::string>(f, "label", "floors"));
    ASSIGN_OR_RETURN(rf.minimum, Field<int>(f, "minimum", "floors"));
    out.floors.push_back(std::move(rf));
  }
  ASSIGN_OR_RETURN(auto quotas,
                   ArrayField(document, "quotas", "constraints", false));
  for (const json& q : quotas) {
    Quota qq;
    ASSIGN_OR_RETURN(qq.id, Field<std::string>(q, "id", "quotas"));
    ASSIGN_OR_RETURN(qq.category, Field<std::string>(q, "category", "quotas"));
    ASSIGN_OR_RETURN(qq.label, Field<std::string>(q, "label", "quotas"));
    ASSIGN_OR_RETURN(qq.target, Field<int>(q, "target", "quotas"));
    out.quotas.push_back(std::move(qq));
  }
  return out;
}

}  // namespace gesa
