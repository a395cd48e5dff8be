#ifndef GESA_CORE_TYPES_H_
#define GESA_CORE_TYPES_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gesa {

// Category name (e.g. "gender") -> subcategory label. A std::map keeps each
// category unique and the serialized order stable.
struct DemographicProfile {
  std::map<std::string, std::string> group_memberships;

  bool operator==(const DemographicProfile&) const = default;
};

struct Candidate {
  std::string id;
  std::vector<std::string> skill_ids;
  // Empty string means "no reference".
  std::string org_id;
  std::string location_id;
  std::string domain_id;
  std::string free_text;
  // Role ids, most preferred first.
  std::vector<std::string> preferences;
  DemographicProfile demographics;

  bool operator==(const Candidate&) const = default;
};

struct Role {
  std::string id;
  std::vector<std::string> required_skill_ids;
  std::string org_id;
  std::string location_id;
  std::string domain_id;
  std::string free_text;
  int capacity = 1;

  bool operator==(const Role&) const = default;
};

struct Skill {
  std::string id;
  std::string name;
  std::string text;

  bool operator==(const Skill&) const = default;
};

// Organizations, locations and domains carry only an id and a display name.
struct NamedEntity {
  std::string id;
  std::string name;

  bool operator==(const NamedEntity&) const = default;
};

struct Interaction {
  std::string candidate_id;
  std::string role_id;
  int outcome = 0;

  bool operator==(const Interaction&) const = default;
};

struct Match {
  std::string candidate_id;
  std::string role_id;

  bool operator==(const Match&) const = default;
  auto operator<=>(const Match&) const = default;
};

struct Dataset {
  std::vector<Candidate> candidates;
  std::vector<Role> roles;
  std::vector<Skill> skills;
  std::vector<NamedEntity> organizations;
  std::vector<NamedEntity> locations;
  std::vector<NamedEntity> domains;
  // Category name -> allowed subcategory labels.
  std::map<std::string, std::vector<std::string>> demographic_categories;
  std::vector<Interaction> interactions;
  std::optional<std::vector<Match>> ground_truth;

  bool operator==(const Dataset&) const = default;
};

// Objective values of a plan; all three are maximized.
struct ObjectiveVector {
  double merit = 0.0;
  double diversity = 0.0;
  double preference = 0.0;

  bool operator==(const ObjectiveVector&) const = default;
};

struct ConstraintViolation {
  std::string constraint_id;
  double magnitude = 0.0;

  bool operator==(const ConstraintViolation&) const = default;
};

// Partial assignment candidate -> role. Candidates absent from `assignments`
// are unassigned.
struct AllocationPlan {
  std::map<std::string, std::string> assignments;
  ObjectiveVector objective_values;
  std::vector<ConstraintViolation> violations;
  bool infeasible = false;

  bool operator==(const AllocationPlan&) const = default;
};

struct CapacityConstraint {
  std::string role_id;
  int capacity = 1;
};

// Inequality: at least `minimum` assigned candidates carry `label` in
// `category`.
struct RepresentationFloor {
  std::string id;
  std::string category;
  std::string label;
  int minimum = 0;
};

// Equality: exactly `target` assigned candidates carry `label` in `category`.
struct Quota {
  std::string id;
  std::string category;
  std::string label;
  int target = 0;
};

struct ConstraintSet {
  std::vector<CapacityConstraint> capacities;
  std::vector<RepresentationFloor> floors;
  std::vector<Quota> quotas;

  // Number of inequality constraints (capacities and floors).
  size_t inequality_count() const { return capacities.size() + floors.size(); }
  size_t equality_count() const { return quotas.size(); }
};

}  // namespace gesa

#endif  // GESA_CORE_TYPES_H_
