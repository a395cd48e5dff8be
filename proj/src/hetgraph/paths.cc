#include "gesa/hetgraph/paths.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/random.h"

namespace gesa::hetgraph {

absl::StatusOr<Path> MakePath(const HeteroGraph& graph,
                              const std::vector<int>& nodes) {
  if (nodes.size() < 2) {
    return absl::InvalidArgumentError("a path needs at least two nodes");
  }
  Path path;
  path.nodes = nodes;
  const int n = static_cast<int>(graph.num_nodes());
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i] < 0 || nodes[i] >= n || nodes[i + 1] < 0 ||
        nodes[i + 1] >= n) {
      return absl::InvalidArgumentError("path node out of range");
    }
    const auto w = graph.EdgeWeight(nodes[i], nodes[i + 1]);
    if (!w) {
      return absl::InvalidArgumentError(
          absl::StrCat("no edge between ", graph.nodes()[nodes[i]].id, " and ",
                       graph.nodes()[nodes[i + 1]].id));
    }
    path.weights.push_back(*w);
  }
  return path;
}

absl::StatusOr<double> PathStrength(const HeteroGraph& graph,
                                    const Path& path) {
  if (path.nodes.size() < 2 || path.weights.size() + 1 != path.nodes.size()) {
    return absl::InvalidArgumentError("malformed path");
  }
  double strength = 1.0;
  for (size_t i = 0; i < path.weights.size(); ++i) {
    const int a = path.nodes[i];
    const int b = path.nodes[i + 1];
    if (a < 0 || b < 0 || a >= static_cast<int>(graph.num_nodes()) ||
        b >= static_cast<int>(graph.num_nodes())) {
      return absl::InvalidArgumentError("path node out of range");
    }
    const auto w = graph.EdgeWeight(a, b);
    if (!w || *w != path.weights[i]) {
      return absl::InvalidArgumentError(
          absl::StrCat("step ", i, " is not an edge with the recorded weight"));
    }
    strength *= path.weights[i];
  }
  return strength;
}

absl::StatusOr<std::vector<Path>> SamplePaths(const HeteroGraph& graph,
                                              const std::string& candidate_id,
                                              const std::string& role_id,
                                              const WalkConfig& config) {
  const auto start = graph.IndexOf(candidate_id);
  const auto goal = graph.IndexOf(role_id);
  if (!start || !goal) {
    return absl::NotFoundError(
        absl::StrCat("unknown endpoint ", !start ? candidate_id : role_id));
  }
  if (config.max_length < 2 || config.walks < 0) {
    return absl::InvalidArgumentError("invalid walk config");
  }
  Rng rng(config.seed);
  std::set<std::vector<int>> found;
  for (int walk = 0; walk < config.walks; ++walk) {
    std::vector<int> nodes = {*start};
    std::set<int> visited = {*start};
    while (static_cast<int>(nodes.size()) < config.max_length) {
      std::vector<int> options;
      for (int u : graph.AllNeighbors(nodes.back())) {
        if (!visited.contains(u)) options.push_back(u);
      }
      if (options.empty()) break;
      const int next = options[rng.UniformInt(options.size())];
      nodes.push_back(next);
      visited.insert(next);
      if (next == *goal) {
        found.insert(nodes);
        break;
      }
    }
  }
  std::vector<Path> out;
  for (const auto& nodes : found) {
    auto path = MakePath(graph, nodes);
    if (!path.ok()) return path.status();
    out.push_back(*std::move(path));
  }
  return out;
}

}  // namespace gesa::hetgraph
