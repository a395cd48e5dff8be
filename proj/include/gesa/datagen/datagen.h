#ifndef GESA_DATAGEN_DATAGEN_H_
#define GESA_DATAGEN_DATAGEN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gesa/core/types.h"
#include "nlohmann/json.hpp"

namespace gesa::datagen {

struct EntityCounts {
  int candidates = 100;
  int roles = 10;
  int skills = 30;
  int organizations = 5;
  int locations = 5;
  int domains = 3;
};

struct IntRange {
  int min = 1;
  int max = 1;
};

struct CategorySpec {
  std::string name;
  std::vector<std::string> labels;
  std::vector<double> probabilities;
};

// Members of `subgroup` in `category` hold cluster skills with probability
// baseline + strength; everyone else with probability baseline. The cluster
// is the first ceil(cluster_fraction * skills) skills.
struct BiasSpec {
  std::string category;
  std::string subgroup;
  double strength = 0.0;
  double baseline = 0.3;
  double cluster_fraction = 0.2;
};

struct GenSpec {
  EntityCounts counts;
  IntRange skills_per_candidate{3, 8};
  IntRange skills_per_role{2, 5};
  IntRange role_capacity{1, 3};
  std::vector<CategorySpec> categories;
  BiasSpec bias;
  int preference_length = 3;
  int interactions_per_candidate = 5;
  // Chance that each drawn skill comes from the entity's own domain.
  double domain_affinity = 0.8;
  uint64_t seed = 0;
};

absl::Status CheckGenSpec(const GenSpec& spec);

nlohmann::json GenSpecToJson(const GenSpec& spec);
absl::StatusOr<GenSpec> GenSpecFromJson(const nlohmann::json& document);

// A spec with gender/region/age categories and the given counts.
GenSpec DefaultSpec(EntityCounts counts, uint64_t seed);

absl::StatusOr<Dataset> GenerateDataset(const GenSpec& spec);

// Rule for a correct match: coverage >= 0.75 and the same domain.
bool IsPlantedMatch(const Candidate& candidate, const Role& role);

// Fraction of candidates holding at least one cluster skill, among those
// with and without `subgroup` in the bias category.
struct ClusterRates {
  double subgroup = 0.0;
  double others = 0.0;
};
ClusterRates MeasureClusterRates(const Dataset& dataset, const GenSpec& spec);

}  // namespace gesa::datagen

#endif  // GESA_DATAGEN_DATAGEN_H_
