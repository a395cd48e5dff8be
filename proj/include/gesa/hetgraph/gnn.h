#ifndef GESA_HETGRAPH_GNN_H_
#define GESA_HETGRAPH_GNN_H_

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "gesa/embed/embedding.h"
#include "gesa/hetgraph/graph.h"

namespace gesa::hetgraph {

// Node representations of one layer, one column per node.
using LayerState = Eigen::MatrixXd;

// Parameters of one attention layer: a transformation per node type
// (out x in) and an attention vector per edge type (2 * in), split as
// [target half; neighbor half].
struct GnnLayer {
  std::array<Eigen::MatrixXd, kNumNodeTypes> transforms;
  std::array<Eigen::VectorXd, kNumEdgeTypes> attention;

  int input_dim() const { return static_cast<int>(transforms[0].cols()); }
  int output_dim() const { return static_cast<int>(transforms[0].rows()); }
};

struct GnnParams {
  std::vector<GnnLayer> layers;
  double leaky_slope = 0.2;

  // Shapes agree within each layer and chain between layers.
  absl::Status CheckShapes() const;
  // Same shapes, all zeros.
  GnnParams ZerosLike() const;
  // Flat views used by the optimizer and by gradient checks.
  std::vector<double*> MutableEntries();
  size_t NumEntries() const;
};

// Glorot-uniform transforms and small uniform attention vectors.
GnnParams InitGnnParams(int input_dim, int hidden_dim, int layers,
                        uint64_t seed, double leaky_slope = 0.2);

// Input features of every node as a LayerState.
LayerState InitialState(const HeteroGraph& graph);

// softmax over u in N_type(v) of LeakyReLU(a^T [z_v || z_u]). Fails when v
// has no neighbor under `type`.
absl::StatusOr<std::vector<std::pair<int, double>>> AttentionWeights(
    const HeteroGraph& graph, const GnnLayer& layer, double leaky_slope,
    const LayerState& state, int node, EdgeType type);

// One layer: z'_v = ELU(W_type(v) * sum_type sum_u alpha(v,u) z_u); a node
// without neighbors uses ELU(W_type(v) * z_v).
absl::StatusOr<LayerState> MessagePass(const HeteroGraph& graph,
                                       const GnnLayer& layer,
                                       double leaky_slope,
                                       const LayerState& state);

// All layers from the input features.
absl::StatusOr<LayerState> Forward(const HeteroGraph& graph,
                                   const GnnParams& params);

struct LinkSample {
  int u;
  int v;
  double label;  // 1 for an observed edge, 0 for a negative pair
};

// Mean binary cross-entropy of sigmoid(z_u . z_v) over `samples`. When
// `gradient` is non-null it receives d loss / d params (same shapes).
absl::StatusOr<double> LinkPredictionLoss(const HeteroGraph& graph,
                                          const GnnParams& params,
                                          const std::vector<LinkSample>& samples,
                                          GnnParams* gradient);

struct LinkPredictionConfig {
  int layers = 3;
  int hidden_dim = 32;
  int epochs = 100;
  double learning_rate = 0.01;
  double negative_ratio = 1.0;
  uint64_t seed = 0;
  double leaky_slope = 0.2;
};

struct LinkPredictionResult {
  GnnParams params;
  LayerState embeddings;
  std::vector<double> loss_history;
};

// Full-batch training with Adam steps. Negatives are drawn uniformly from
// non-adjacent node pairs, resampled every epoch from the seeded stream.
// Fails on an edgeless graph and reports the epoch of a non-finite loss.
absl::StatusOr<LinkPredictionResult> TrainLinkPrediction(
    const HeteroGraph& graph, const LinkPredictionConfig& config);

// Positive samples for every stored edge.
std::vector<LinkSample> EdgeSamples(const HeteroGraph& graph);

// Area under the ROC curve of z_u . z_v separating positives from negatives.
double LinkAuc(const LayerState& embeddings,
               const std::vector<std::pair<int, int>>& positives,
               const std::vector<std::pair<int, int>>& negatives);

embed::PrecomputedEmbeddings ExportEmbeddings(const HeteroGraph& graph,
                                              const LayerState& embeddings);

// "epoch,loss" with a header row; epochs start at 0.
std::string LossHistoryCsv(const std::vector<double>& loss_history);

// Cosine of the two trained embeddings rescaled to [0, 1] by (x + 1) / 2.
absl::StatusOr<double> GraphSimilarity(
    const embed::PrecomputedEmbeddings& embeddings,
    const std::string& candidate_id, const std::string& role_id);

}  // namespace gesa::hetgraph

#endif  // GESA_HETGRAPH_GNN_H_
