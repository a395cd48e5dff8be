#ifndef GESA_HETGRAPH_PATHS_H_
#define GESA_HETGRAPH_PATHS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gesa/hetgraph/graph.h"

namespace gesa::hetgraph {

// Node sequence with the weight of each consecutive step.
struct Path {
  std::vector<int> nodes;
  std::vector<double> weights;

  bool operator==(const Path&) const = default;
  auto operator<=>(const Path&) const = default;
};

// Looks up step weights; fails when a consecutive pair is not joined by an
// edge or the sequence has fewer than two nodes.
absl::StatusOr<Path> MakePath(const HeteroGraph& graph,
                              const std::vector<int>& nodes);

// Product of step weights, after checking that every step is an edge of
// `graph` carrying the recorded weight.
absl::StatusOr<double> PathStrength(const HeteroGraph& graph, const Path& path);

struct WalkConfig {
  int max_length = 4;  // nodes per path, including both endpoints
  int walks = 256;
  uint64_t seed = 0;
};

// Seeded random walks from the candidate over the undirected view, never
// revisiting a node, keeping those that reach the role within max_length
// nodes. Deduplicated and sorted.
absl::StatusOr<std::vector<Path>> SamplePaths(const HeteroGraph& graph,
                                              const std::string& candidate_id,
                                              const std::string& role_id,
                                              const WalkConfig& config);

}  // namespace gesa::hetgraph

#endif  // GESA_HETGRAPH_PATHS_H_
