#ifndef GESA_HETGRAPH_GRAPH_H_
#define GESA_HETGRAPH_GRAPH_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "gesa/core/types.h"
#include "gesa/embed/embedding.h"

namespace gesa::hetgraph {

enum class NodeType {
  kCandidate = 0,
  kRole,
  kSkill,
  kOrganization,
  kLocation,
  kDomain,
};
inline constexpr int kNumNodeTypes = 6;

enum class EdgeType {
  kHasSkill = 0,       // candidate -> skill
  kRequiresSkill,      // role -> skill
  kLocatedIn,          // candidate|role -> location
  kAffiliatedWith,     // candidate|role -> organization
  kDomainRelated,      // candidate|role -> domain
  kSkillSimilarity,    // skill -> skill
};
inline constexpr int kNumEdgeTypes = 6;

const char* NodeTypeName(NodeType type);
const char* EdgeTypeName(EdgeType type);

// Whether an edge of `type` may run from a `src` node to a `dst` node.
bool EdgeTypeAllows(EdgeType type, NodeType src, NodeType dst);

struct Node {
  std::string id;
  NodeType type;
  Eigen::VectorXd features;
};

struct Edge {
  int src;
  int dst;
  EdgeType type;
  double weight;
};

struct Neighbor {
  int node;
  double weight;
};

// Typed nodes and typed weighted edges. Edges are stored directed as the
// schema defines them; neighborhoods are the undirected view, so a skill sees
// the candidates holding it under kHasSkill.
class HeteroGraph {
 public:
  absl::StatusOr<int> AddNode(std::string id, NodeType type,
                              Eigen::VectorXd features);
  // Rejects unknown endpoints, schema violations, weights outside (0, 1] and
  // self loops. A repeated (src, dst, type) triple is ignored.
  absl::Status AddEdge(int src, int dst, EdgeType type, double weight);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  size_t num_nodes() const { return nodes_.size(); }
  int feature_dim() const { return feature_dim_; }

  std::optional<int> IndexOf(std::string_view id) const;

  const std::vector<Neighbor>& Neighbors(int node, EdgeType type) const {
    return adjacency_[node][static_cast<int>(type)];
  }
  // Distinct neighbors over all edge types, ascending by index.
  std::vector<int> AllNeighbors(int node) const;
  // Largest weight among edges joining a and b in either direction.
  std::optional<double> EdgeWeight(int a, int b) const;

  // Type-compatibility and weight-range check over every edge.
  absl::Status CheckSchema() const;

 private:
  static uint64_t PairKey(int a, int b);

  int feature_dim_ = 0;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::array<std::vector<Neighbor>, kNumEdgeTypes>> adjacency_;
  std::unordered_map<uint64_t, double> pair_weight_;
  std::unordered_map<uint64_t, std::array<bool, kNumEdgeTypes>> typed_pairs_;
};

inline constexpr double kDefaultSkillSimilarityThreshold = 0.5;

// One node per entity, reference edges with weight 1, and skill_similarity
// edges between skills whose embedding cosine is at least `threshold`.
// Entity ids must be unique across all entity classes.
absl::StatusOr<HeteroGraph> BuildGraph(
    const Dataset& dataset, const embed::EmbeddingProvider& provider,
    double skill_sim_threshold = kDefaultSkillSimilarityThreshold);

// Text fed to the embedding provider for each entity kind.
std::string CandidateText(const Dataset& dataset, const Candidate& candidate);
std::string RoleText(const Dataset& dataset, const Role& role);
std::string SkillText(const Skill& skill);

}  // namespace gesa::hetgraph

#endif  // GESA_HETGRAPH_GRAPH_H_
