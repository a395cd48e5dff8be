#include "gesa/hetgraph/graph.h"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/status_macros.h"
#include "gesa/core/validate.h"

namespace gesa::hetgraph {

const char* NodeTypeName(NodeType type) {
  switch (type) {
    case NodeType::kCandidate: return "candidate";
    case NodeType::kRole: return "role";
    case NodeType::kSkill: return "skill";
    case NodeType::kOrganization: return "organization";
    case NodeType::kLocation: return "location";
    case NodeType::kDomain: return "domain";
  }
  return "unknown";
}

const char* EdgeTypeName(EdgeType type) {
  switch (type) {
    case EdgeType::kHasSkill: return "has_skill";
    case EdgeType::kRequiresSkill: return "requires_skill";
    case EdgeType::kLocatedIn: return "located_in";
    case EdgeType::kAffiliatedWith: return "affiliated_with";
    case EdgeType::kDomainRelated: return "domain_related";
    case EdgeType::kSkillSimilarity: return "skill_similarity";
  }
  return "unknown";
}

bool EdgeTypeAllows(EdgeType type, NodeType src, NodeType dst) {
  const bool person_or_role =
      src == NodeType::kCandidate || src == NodeType::kRole;
  switch (type) {
    case EdgeType::kHasSkill:
      return src == NodeType::kCandidate && dst == NodeType::kSkill;
    case EdgeType::kRequiresSkill:
      return src == NodeType::kRole && dst == NodeType::kSkill;
    case EdgeType::kLocatedIn:
      return person_or_role && dst == NodeType::kLocation;
    case EdgeType::kAffiliatedWith:
      return person_or_role && dst == NodeType::kOrganization;
    case EdgeType::kDomainRelated:
      return person_or_role && dst == NodeType::kDomain;
    case EdgeType::kSkillSimilarity:
      return src == NodeType::kSkill && dst == NodeType::kSkill;
  }
  return false;
}

uint64_t HeteroGraph::PairKey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
         static_cast<uint32_t>(b);
}

absl::StatusOr<int> HeteroGraph::AddNode(std::string id, NodeType type,
                                         Eigen::VectorXd features) {
  if (id.empty()) return absl::InvalidArgumentError("empty node id");
  if (index_.contains(id)) {
    return absl::AlreadyExistsError(absl::StrCat("duplicate node id '", id, "'"));
  }
  if (nodes_.empty()) {
    feature_dim_ = static_cast<int>(features.size());
  } else if (features.size() != feature_dim_) {
    return absl::InvalidArgumentError(
        absl::StrCat("node ", id, " has feature dimension ", features.size(),
                     ", expected ", feature_dim_));
  }
  const int idx = static_cast<int>(nodes_.size());
  index_.emplace(id, idx);
  nodes_.push_back({std::move(id), type, std::move(features)});
  adjacency_.emplace_back();
  return idx;
}

absl::Status HeteroGraph::AddEdge(int src, int dst, EdgeType type,
                                  double weight) {
  const int n = static_cast<int>(nodes_.size());
  if (src < 0 || src >= n || dst < 0 || dst >= n) {
    return absl::InvalidArgumentError("edge endpoint does not exist");
  }
  if (src == dst) return absl::InvalidArgumentError("self loop");
  if (!EdgeTypeAllows(type, nodes_[src].type, nodes_[dst].type)) {
    return absl::InvalidArgumentError(absl::StrCat(
        EdgeTypeName(type), " edge cannot join ", NodeTypeName(nodes_[src].type),
        " ", nodes_[src].id, " to ", NodeTypeName(nodes_[dst].type), " ",
        nodes_[dst].id));
  }
  if (!(weight > 0.0 && weight <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("edge weight ", weight, " outside (0, 1]"));
  }
  const uint64_t key = PairKey(src, dst);
  auto& typed = typed_pairs_[key];
  if (typed[static_cast<int>(type)]) return absl::OkStatus();
  typed[static_cast<int>(type)] = true;

  edges_.push_back({src, dst, type, weight});
  adjacency_[src][static_cast<int>(type)].push_back({dst, weight});
  adjacency_[dst][static_cast<int>(type)].push_back({src, weight});
  auto [it, inserted] = pair_weight_.emplace(key, weight);
  if (!inserted) it->second = std::max(it->second, weight);
  return absl::OkStatus();
}

std::optional<int> HeteroGraph::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> HeteroGraph::AllNeighbors(int node) const {
  std::vector<int> out;
  for (const auto& list : adjacency_[node]) {
    for (const Neighbor& nb : list) out.push_back(nb.node);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<double> HeteroGraph::EdgeWeight(int a, int b) const {
  auto it = pair_weight_.find(PairKey(a, b));
  if (it == pair_weight_.end()) return std::nullopt;
  return it->second;
}

absl::Status HeteroGraph::CheckSchema() const {
  for (const Edge& e : edges_) {
    if (e.src < 0 || e.src >= static_cast<int>(nodes_.size()) || e.dst < 0 ||
        e.dst >= static_cast<int>(nodes_.size())) {
      return absl::InternalError("edge endpoint out of range");
    }
    if (!EdgeTypeAllows(e.type, nodes_[e.src].type, nodes_[e.dst].type)) {
      return absl::InternalError(
          absl::StrCat("schema violation on ", EdgeTypeName(e.type), " edge ",
                       nodes_[e.src].id, " -> ", nodes_[e.dst].id));
    }
    if (!(e.weight > 0.0 && e.weight <= 1.0)) {
      return absl::InternalError("edge weight outside (0, 1]");
    }
  }
  return absl::OkStatus();
}

namespace {

std::string NameOrId(const NamedEntity& e) {
  return e.name.empty() ? e.id : e.name;
}

std::string SkillNames(const Dataset& dataset,
                       const std::vector<std::string>& skill_ids) {
  std::map<std::string_view, const Skill*> by_id;
  for (const Skill& s : dataset.skills) by_id.emplace(s.id, &s);
  std::string out;
  for (const auto& id : skill_ids) {
    auto it = by_id.find(id);
    const std::string& name =
        (it == by_id.end() || it->second->name.empty()) ? id : it->second->name;
    absl::StrAppend(&out, out.empty() ? "" : " ", name);
  }
  return out;
}

std::string JoinNonEmpty(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return absl::StrCat(a, " ", b);
}

}  // namespace

// Free text followed by skill names; falls back to the id when both are
// empty so every entity embeds.
std::string CandidateText(const Dataset& dataset, const Candidate& candidate) {
  std::string text =
      JoinNonEmpty(candidate.free_text, SkillNames(dataset, candidate.skill_ids));
  return text.empty() ? candidate.id : text;
}

std::string RoleText(const Dataset& dataset, const Role& role) {
  std::string text =
      JoinNonEmpty(role.free_text, SkillNames(dataset, role.required_skill_ids));
  return text.empty() ? role.id : text;
}

std::string SkillText(const Skill& skill) {
  std::string text = JoinNonEmpty(skill.name, skill.text);
  return text.empty() ? skill.id : text;
}

absl::StatusOr<HeteroGraph> BuildGraph(const Dataset& dataset,
                                       const embed::EmbeddingProvider& provider,
                                       double skill_sim_threshold) {
  if (const auto issues = ValidateDataset(dataset); !issues.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid dataset:\n", FormatIssues(issues)));
  }
  if (!(skill_sim_threshold > 0.0 && skill_sim_threshold <= 1.0)) {
    return absl::InvalidArgumentError("skill similarity threshold outside (0, 1]");
  }
  HeteroGraph graph;
  auto add = [&](const std::string& id, NodeType type,
                 const std::string& text) -> absl::StatusOr<int> {
    ASSIGN_OR_RETURN(Eigen::VectorXd v, provider.Embed(text));
    return graph.AddNode(id, type, std::move(v));
  };

  for (const Candidate& c : dataset.candidates) {
    RETURN_IF_ERROR(
        add(c.id, NodeType::kCandidate, CandidateText(dataset, c)).status());
  }
  for (const Role& r : dataset.roles) {
    RETURN_IF_ERROR(add(r.id, NodeType::kRole, RoleText(dataset, r)).status());
  }
  std::vector<int> skill_nodes;
  for (const Skill& s : dataset.skills) {
    ASSIGN_OR_RETURN(int idx, add(s.id, NodeType::kSkill, SkillText(s)));
    skill_nodes.push_back(idx);
  }
  for (const NamedEntity& o : dataset.organizations) {
    RETURN_IF_ERROR(add(o.id, NodeType::kOrganization, NameOrId(o)).status());
  }
  for (const NamedEntity& l : dataset.locations) {
    RETURN_IF_ERROR(add(l.id, NodeType::kLocation, NameOrId(l)).status());
  }
  for (const NamedEntity& d : dataset.domains) {
    RETURN_IF_ERROR(add(d.id, NodeType::kDomain, NameOrId(d)).status());
  }

  auto link = [&](const std::string& src, const std::string& dst,
                  EdgeType type) -> absl::Status {
    if (dst.empty()) return absl::OkStatus();
    return graph.AddEdge(*graph.IndexOf(src), *graph.IndexOf(dst), type, 1.0);
  };
  for (const Candidate& c : dataset.candidates) {
    for (const auto& s : c.skill_ids) {
      RETURN_IF_ERROR(link(c.id, s, EdgeType::kHasSkill));
    }
    RETURN_IF_ERROR(link(c.id, c.location_id, EdgeType::kLocatedIn));
    RETURN_IF_ERROR(link(c.id, c.org_id, EdgeType::kAffiliatedWith));
    RETURN_IF_ERROR(link(c.id, c.domain_id, EdgeType::kDomainRelated));
  }
  for (const Role& r : dataset.roles) {
    for (const auto& s : r.required_skill_ids) {
      RETURN_IF_ERROR(link(r.id, s, EdgeType::kRequiresSkill));
    }
    RETURN_IF_ERROR(link(r.id, r.location_id, EdgeType::kLocatedIn));
    RETURN_IF_ERROR(link(r.id, r.org_id, EdgeType::kAffiliatedWith));
    RETURN_IF_ERROR(link(r.id, r.domain_id, EdgeType::kDomainRelated));
  }
  for (size_t i = 0; i < skill_nodes.size(); ++i) {
    for (size_t j = i + 1; j < skill_nodes.size(); ++j) {
      const auto& a = graph.nodes()[skill_nodes[i]].features;
      const auto& b = graph.nodes()[skill_nodes[j]].features;
      ASSIGN_OR_RETURN(double cosine, embed::CosineSimilarity(a, b));
      if (cosine >= skill_sim_threshold) {
        RETURN_IF_ERROR(graph.AddEdge(skill_nodes[i], skill_nodes[j],
                                      EdgeType::kSkillSimilarity,
                                      std::min(cosine, 1.0)));
      }
    }
  }
  return graph;
}

}  // namespace gesa::hetgraph
