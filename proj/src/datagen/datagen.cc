#include "gesa/datagen/datagen.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "gesa/core/dataset_io.h"
#include "gesa/core/random.h"
#include "gesa/core/status_macros.h"
#include "gesa/core/validate.h"

namespace gesa::datagen {
namespace {

constexpr const char* kWords[] = {
    "python",   "rust",      "statistics", "design",    "logistics", "finance",
    "teaching", "nursing",   "sql",        "cloud",     "security",  "writing",
    "research", "marketing", "sales",      "welding",   "carpentry", "spanish",
    "french",   "mandarin",  "biology",    "chemistry", "law",       "audit",
    "training", "outreach",  "translation", "ux",       "devops",    "ml"};
constexpr int kNumWords = sizeof(kWords) / sizeof(kWords[0]);

std::string SkillName(int j) {
  return j < kNumWords ? kWords[j] : absl::StrCat(kWords[j % kNumWords], "-", j / kNumWords);
}

int ClusterSize(const GenSpec& spec) {
  return static_cast<int>(std::ceil(spec.bias.cluster_fraction * spec.counts.skills));
}

// Draws `count` distinct skills. Each draw comes from `home` with
// probability `affinity` when it still has unused entries, else from `pool`.
std::vector<int> DrawSkills(int count, const std::vector<int>& home,
                            const std::vector<int>& pool, double affinity,
                            std::set<int>& taken, Rng& rng) {
  std::vector<int> out;
  while (static_cast<int>(out.size()) < count) {
    std::vector<int> options;
    const bool use_home = rng.Bernoulli(affinity);
    for (int s : use_home ? home : pool) {
      if (!taken.contains(s)) options.push_back(s);
    }
    if (options.empty()) {
      for (int s : pool) {
        if (!taken.contains(s)) options.push_back(s);
      }
    }
    if (options.empty()) break;
    const int s = options[rng.UniformInt(options.size())];
    taken.insert(s);
    out.push_back(s);
  }
  return out;
}

void CheckRange(const IntRange& r, const char* name, std::vector<std::string>& errors) {
  if (r.min < 1 || r.max < r.min) errors.push_back(absl::StrCat(name, " range invalid"));
}

}  // namespace

absl::Status CheckGenSpec(const GenSpec& spec) {
  std::vector<std::string> errors;
  const EntityCounts& c = spec.counts;
  for (int v : {c.candidates, c.roles, c.skills, c.organizations, c.locations, c.domains}) {
    if (v < 1) {
      errors.push_back("entity counts must be >= 1");
      break;
    }
  }
  CheckRange(spec.skills_per_candidate, "skills_per_candidate", errors);
  CheckRange(spec.skills_per_role, "skills_per_role", errors);
  CheckRange(spec.role_capacity, "role_capacity", errors);
  if (spec.skills_per_role.max > c.skills || spec.skills_per_candidate.max > c.skills) {
    errors.push_back("more skills requested per entity than skills exist");
  }
  std::set<std::string> names;
  for (const CategorySpec& cat : spec.categories) {
    if (cat.name.empty() || !names.insert(cat.name).second) {
      errors.push_back("category names must be unique and non-empty");
    }
    if (cat.labels.empty() || cat.labels.size() != cat.probabilities.size()) {
      errors.push_back(absl::StrCat("category ", cat.name, " needs one probability per label"));
      continue;
    }
    double total = 0.0;
    for (double p : cat.probabilities) {
      if (p < 0.0) errors.push_back(absl::StrCat("category ", cat.name, " has p < 0"));
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      errors.push_back(absl::StrCat("probabilities of ", cat.name, " must sum to 1"));
    }
  }
  const BiasSpec& b = spec.bias;
  if (!(b.strength >= 0.0 && b.strength <= 1.0)) errors.push_back("bias_strength must lie in [0, 1]");
  if (!(b.baseline >= 0.0 && b.baseline + b.strength <= 1.0)) {
    errors.push_back("bias baseline + strength must lie in [0, 1]");
  }
  if (!(b.cluster_fraction > 0.0 && b.cluster_fraction < 1.0)) {
    errors.push_back("cluster_fraction must lie in (0, 1)");
  }
  if (!b.category.empty()) {
    auto it = std::find_if(spec.categories.begin(), spec.categories.end(),
                           [&](const CategorySpec& cat) { return cat.name == b.category; });
    if (it == spec.categories.end() ||
        std::find(it->labels.begin(), it->labels.end(), b.subgroup) == it->labels.end()) {
      errors.push_back("bias subgroup must name a declared category label");
    }
  }
  if (spec.preference_length < 0 || spec.preference_length > c.roles) {
    errors.push_back("preference_length must lie in [0, roles]");
  }
  if (spec.interactions_per_candidate < 0 || spec.interactions_per_candidate > c.roles) {
    errors.push_back("interactions_per_candidate must lie in [0, roles]");
  }
  if (!(spec.domain_affinity >= 0.0 && spec.domain_affinity <= 1.0)) {
    errors.push_back("domain_affinity must lie in [0, 1]");
  }
  if (!errors.empty()) return absl::InvalidArgumentError(absl::StrJoin(errors, "; "));
  return absl::OkStatus();
}

nlohmann::json GenSpecToJson(const GenSpec& s) {
  nlohmann::json categories = nlohmann::json::array();
  for (const CategorySpec& c : s.categories) {
    categories.push_back(
        {{"name", c.name}, {"labels", c.labels}, {"probabilities", c.probabilities}});
  }
  auto range = [](const IntRange& r) { return nlohmann::json{{"min", r.min}, {"max", r.max}}; };
  return {{"counts",
           {{"candidates", s.counts.candidates},
            {"roles", s.counts.roles},
            {"skills", s.counts.skills},
            {"organizations", s.counts.organizations},
            {"locations", s.counts.locations},
            {"domains", s.counts.domains}}},
          {"skills_per_candidate", range(s.skills_per_candidate)},
          {"skills_per_role", range(s.skills_per_role)},
          {"role_capacity", range(s.role_capacity)},
          {"categories", categories},
          {"bias",
           {{"category", s.bias.category},
            {"subgroup", s.bias.subgroup},
            {"strength", s.bias.strength},
            {"baseline", s.bias.baseline},
            {"cluster_fraction", s.bias.cluster_fraction}}},
          {"preference_length", s.preference_length},
          {"interactions_per_candidate", s.interactions_per_candidate},
          {"domain_affinity", s.domain_affinity},
          {"seed", s.seed}};
}

absl::StatusOr<GenSpec> GenSpecFromJson(const nlohmann::json& d) {
  GenSpec s;
  try {
    if (!d.is_object()) return absl::InvalidArgumentError("spec must be an object");
    if (d.contains("counts")) {
      const auto& c = d.at("counts");
      s.counts.candidates = c.value("candidates", s.counts.candidates);
      s.counts.roles = c.value("roles", s.counts.roles);
      s.counts.skills = c.value("skills", s.counts.skills);
      s.counts.organizations = c.value("organizations", s.counts.organizations);
      s.counts.locations = c.value("locations", s.counts.locations);
      s.counts.domains = c.value("domains", s.counts.domains);
    }
    auto range = [&](const char* key, IntRange& r) {
      if (!d.contains(key)) return;
      r.min = d.at(key).value("min", r.min);
      r.max = d.at(key).value("max", r.max);
    };
    range("skills_per_candidate", s.skills_per_candidate);
    range("skills_per_role", s.skills_per_role);
    range("role_capacity", s.role_capacity);
    if (d.contains("categories")) {
      for (const auto& c : d.at("categories")) {
        s.categories.push_back({c.at("name").get<std::string>(),
                                c.at("labels").get<std::vector<std::string>>(),
                                c.at("probabilities").get<std::vector<double>>()});
      }
    }
    if (d.contains("bias")) {
      const auto& b = d.at("bias");
      s.bias.category = b.value("category", s.bias.category);
      s.bias.subgroup = b.value("subgroup", s.bias.subgroup);
      s.bias.strength = b.value("strength", s.bias.strength);
      s.bias.baseline = b.value("baseline", s.bias.baseline);
      s.bias.cluster_fraction = b.value("cluster_fraction", s.bias.cluster_fraction);
    }
    s.preference_length = d.value("preference_length", s.preference_length);
    s.interactions_per_candidate =
        d.value("interactions_per_candidate", s.interactions_per_candidate);
    s.domain_affinity = d.value("domain_affinity", s.domain_affinity);
    s.seed = d.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed spec: ", e.what()));
  }
  RETURN_IF_ERROR(CheckGenSpec(s));
  return s;
}

GenSpec DefaultSpec(EntityCounts counts, uint64_t seed) {
  GenSpec s;
  s.counts = counts;
  s.categories = {{"gender", {"female", "male", "nonbinary"}, {0.2, 0.7, 0.1}},
                  {"region", {"africa", "americas", "asia", "europe"}, {0.1, 0.2, 0.1, 0.6}},
                  {"age", {"under30", "30to50", "over50"}, {0.3, 0.5, 0.2}}};
  s.bias = {"gender", "male", 0.0, 0.3, 0.2};
  s.seed = seed;
  return s;
}

bool IsPlantedMatch(const Candidate& candidate, const Role& role) {
  if (candidate.domain_id.empty() || candidate.domain_id != role.domain_id) return false;
  const std::set<std::string> held(candidate.skill_ids.begin(), candidate.skill_ids.end());
  const std::set<std::string> required(role.required_skill_ids.begin(),
                                       role.required_skill_ids.end());
  if (required.empty()) return false;
  int covered = 0;
  for (const std::string& s : required) covered += held.contains(s) ? 1 : 0;
  return covered >= 0.75 * static_cast<double>(required.size());
}

absl::StatusOr<Dataset> GenerateDataset(const GenSpec& spec) {
  RETURN_IF_ERROR(CheckGenSpec(spec));
  const EntityCounts& n = spec.counts;
  Rng master(spec.seed);
  Rng role_rng(master.NextU64());
  Rng candidate_rng(master.NextU64());
  Rng preference_rng(master.NextU64());
  Rng interaction_rng(master.NextU64());

  Dataset d;
  for (int i = 0; i < n.domains; ++i) {
    d.domains.push_back({absl::StrFormat("d%03d", i), absl::StrCat("domain ", SkillName(i))});
  }
  for (int i = 0; i < n.organizations; ++i) {
    d.organizations.push_back({absl::StrFormat("o%03d", i), absl::StrCat("organization ", i)});
  }
  for (int i = 0; i < n.locations; ++i) {
    d.locations.push_back({absl::StrFormat("l%03d", i), absl::StrCat("location ", i)});
  }
  std::vector<std::vector<int>> domain_skills(n.domains);
  std::vector<int> all_skills, outside_cluster;
  const int cluster = spec.bias.category.empty() ? 0 : ClusterSize(spec);
  for (int j = 0; j < n.skills; ++j) {
    d.skills.push_back({absl::StrFormat("s%04d", j), SkillName(j),
                        absl::StrCat("skill in ", SkillName(j))});
    domain_skills[j % n.domains].push_back(j);
    all_skills.push_back(j);
    if (j >= cluster) outside_cluster.push_back(j);
  }
  for (const CategorySpec& c : spec.categories) d.demographic_categories[c.name] = c.labels;

  std::vector<int> role_domain(n.roles);
  for (int r = 0; r < n.roles; ++r) {
    Role role;
    role.id = absl::StrFormat("r%04d", r);
    role_domain[r] = static_cast<int>(role_rng.UniformInt(n.domains));
    role.domain_id = d.domains[role_domain[r]].id;
    role.org_id = d.organizations[role_rng.UniformInt(n.organizations)].id;
    role.location_id = d.locations[role_rng.UniformInt(n.locations)].id;
    const int k = static_cast<int>(
        role_rng.UniformRange(spec.skills_per_role.min, spec.skills_per_role.max));
    std::set<int> taken;
    std::vector<std::string> names;
    for (int s : DrawSkills(k, domain_skills[role_domain[r]], all_skills,
                            spec.domain_affinity, taken, role_rng)) {
      role.required_skill_ids.push_back(d.skills[s].id);
      names.push_back(d.skills[s].name);
    }
    role.capacity = static_cast<int>(
        role_rng.UniformRange(spec.role_capacity.min, spec.role_capacity.max));
    role.free_text = absl::StrCat(d.domains[role_domain[r]].name, " role requiring ",
                                  absl::StrJoin(names, " "));
    d.roles.push_back(std::move(role));
  }

  for (int i = 0; i < n.candidates; ++i) {
    Candidate c;
    c.id = absl::StrFormat("c%05d", i);
    for (const CategorySpec& cat : spec.categories) {
      c.demographics.group_memberships[cat.name] =
          cat.labels[candidate_rng.Categorical(cat.probabilities)];
    }
    const int domain = static_cast<int>(candidate_rng.UniformInt(n.domains));
    c.domain_id = d.domains[domain].id;
    c.org_id = d.organizations[candidate_rng.UniformInt(n.organizations)].id;
    c.location_id = d.locations[candidate_rng.UniformInt(n.locations)].id;
    const int k = static_cast<int>(candidate_rng.UniformRange(
        spec.skills_per_candidate.min, spec.skills_per_candidate.max));
    std::set<int> taken;
    std::vector<int> drawn;
    if (cluster > 0) {
      const bool member =
          c.demographics.group_memberships[spec.bias.category] == spec.bias.subgroup;
      const double p = spec.bias.baseline + (member ? spec.bias.strength : 0.0);
      if (candidate_rng.Bernoulli(p)) {
        const int s = static_cast<int>(candidate_rng.UniformInt(cluster));
        taken.insert(s);
        drawn.push_back(s);
        for (int t : DrawSkills(k - 1, domain_skills[domain], all_skills,
                                spec.domain_affinity, taken, candidate_rng)) {
          drawn.push_back(t);
        }
      } else {
        // Cluster skills are off limits.
        for (int s = 0; s < cluster; ++s) taken.insert(s);
        for (int t : DrawSkills(k, domain_skills[domain], outside_cluster,
                                spec.domain_affinity, taken, candidate_rng)) {
          drawn.push_back(t);
        }
      }
    } else {
      drawn = DrawSkills(k, domain_skills[domain], all_skills, spec.domain_affinity,
                         taken, candidate_rng);
    }
    std::sort(drawn.begin(), drawn.end());
    std::vector<std::string> names;
    for (int s : drawn) {
      c.skill_ids.push_back(d.skills[s].id);
      names.push_back(d.skills[s].name);
    }
    c.free_text = absl::StrCat(d.domains[domain].name, " professional skilled in ",
                               absl::StrJoin(names, " "));
    d.candidates.push_back(std::move(c));
  }

  // Preferences: roles ranked by coverage plus noise.
  auto coverage = [&](const Candidate& c, const Role& r) {
    const std::set<std::string> held(c.skill_ids.begin(), c.skill_ids.end());
    int covered = 0;
    for (const std::string& s : r.required_skill_ids) covered += held.contains(s) ? 1 : 0;
    return static_cast<double>(covered) / r.required_skill_ids.size();
  };
  for (Candidate& c : d.candidates) {
    std::vector<std::pair<double, int>> keyed;
    for (int r = 0; r < n.roles; ++r) {
      const double bonus = d.roles[r].domain_id == c.domain_id ? 0.3 : 0.0;
      keyed.emplace_back(coverage(c, d.roles[r]) + bonus + 0.3 * preference_rng.Uniform(), r);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int p = 0; p < spec.preference_length; ++p) {
      c.preferences.push_back(d.roles[keyed[p].second].id);
    }
  }

  // Historical outcomes: success grows with coverage and domain match.
  std::vector<int> role_order(n.roles);
  for (int r = 0; r < n.roles; ++r) role_order[r] = r;
  for (const Candidate& c : d.candidates) {
    interaction_rng.Shuffle(role_order);
    for (int t = 0; t < spec.interactions_per_candidate; ++t) {
      const Role& r = d.roles[role_order[t]];
      const double match = coverage(c, r) * (r.domain_id == c.domain_id ? 1.0 : 0.5);
      d.interactions.push_back(
          {c.id, r.id, interaction_rng.Bernoulli(0.05 + 0.9 * match) ? 1 : 0});
    }
  }

  std::vector<Match> truth;
  for (const Candidate& c : d.candidates) {
    for (const Role& r : d.roles) {
      if (IsPlantedMatch(c, r)) truth.push_back({c.id, r.id});
    }
  }
  d.ground_truth = std::move(truth);
  d = Canonicalize(std::move(d));
  const auto issues = ValidateDataset(d);
  if (!issues.empty()) {
    return absl::InternalError(absl::StrCat("generated dataset is invalid: ",
                                            FormatIssues(issues)));
  }
  return d;
}

ClusterRates MeasureClusterRates(const Dataset& d, const GenSpec& spec) {
  const int cluster = ClusterSize(spec);
  std::set<std::string> cluster_ids;
  for (int s = 0; s < cluster && s < static_cast<int>(d.skills.size()); ++s) {
    cluster_ids.insert(absl::StrFormat("s%04d", s));
  }
  int in_group = 0, in_group_hits = 0, out_group = 0, out_group_hits = 0;
  for (const Candidate& c : d.candidates) {
    bool hit = false;
    for (const std::string& s : c.skill_ids) hit |= cluster_ids.contains(s);
    auto it = c.demographics.group_memberships.find(spec.bias.category);
    const bool member = it != c.demographics.group_memberships.end() &&
                        it->second == spec.bias.subgroup;
    (member ? in_group : out_group) += 1;
    (member ? in_group_hits : out_group_hits) += hit ? 1 : 0;
  }
  return {in_group ? static_cast<double>(in_group_hits) / in_group : 0.0,
          out_group ? static_cast<double>(out_group_hits) / out_group : 0.0};
}

}  // namespace gesa::datagen
