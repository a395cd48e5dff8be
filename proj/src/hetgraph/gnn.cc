#include "gesa/hetgraph/gnn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gesa/core/adam.h"
#include "gesa/core/metrics.h"
#include "gesa/core/random.h"
#include "gesa/core/status_macros.h"

namespace gesa::hetgraph {
namespace {

double LeakyRelu(double x, double slope) { return x > 0.0 ? x : slope * x; }
double Elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double EluGrad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// log(1 + exp(x)) without overflow.
double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Raw scores a^T [z_v || z_u] of v's neighbors under one edge type, then the
// softmax of their LeakyReLU.
struct AttentionScores {
  std::vector<double> raw;
  std::vector<double> alpha;
};

AttentionScores ComputeAttention(const std::vector<Neighbor>& neighbors,
                                 const Eigen::VectorXd& attention,
                                 double slope, const LayerState& state,
                                 int node) {
  const Eigen::Index d = state.rows();
  const double target_term = attention.head(d).dot(state.col(node));
  AttentionScores out;
  out.raw.resize(neighbors.size());
  out.alpha.resize(neighbors.size());
  double max_e = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < neighbors.size(); ++k) {
    out.raw[k] =
        target_term + attention.tail(d).dot(state.col(neighbors[k].node));
    max_e = std::max(max_e, LeakyRelu(out.raw[k], slope));
  }
  double total = 0.0;
  for (size_t k = 0; k < neighbors.size(); ++k) {
    out.alpha[k] = std::exp(LeakyRelu(out.raw[k], slope) - max_e);
    total += out.alpha[k];
  }
  for (double& a : out.alpha) a /= total;
  return out;
}

absl::Status CheckLayerAgainstState(const HeteroGraph& graph,
                                    const GnnLayer& layer,
                                    const LayerState& state) {
  if (state.cols() != static_cast<Eigen::Index>(graph.num_nodes())) {
    return absl::InvalidArgumentError(
        absl::StrCat("layer state covers ", state.cols(), " nodes, graph has ",
                     graph.num_nodes()));
  }
  if (state.rows() != layer.input_dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("layer expects input dimension ", layer.input_dim(),
                     ", state has ", state.rows()));
  }
  for (const auto& a : layer.attention) {
    if (a.size() != 2 * state.rows()) {
      return absl::InvalidArgumentError("attention vector shape mismatch");
    }
  }
  return absl::OkStatus();
}

// Intermediate values of one layer, kept for the backward pass.
struct LayerCache {
  LayerState input;       // z^(l)
  LayerState aggregated;  // attention-weighted neighbor sums (or z_v)
  LayerState pre;         // W * aggregated
};

LayerState Aggregate(const HeteroGraph& graph, const GnnLayer& layer,
                     double slope, const LayerState& state) {
  const int n = static_cast<int>(graph.num_nodes());
  LayerState aggregated = LayerState::Zero(state.rows(), n);
  for (int v = 0; v < n; ++v) {
    bool any = false;
    for (int t = 0; t < kNumEdgeTypes; ++t) {
      const auto& neighbors = graph.Neighbors(v, static_cast<EdgeType>(t));
      if (neighbors.empty()) continue;
      any = true;
      const AttentionScores scores =
          ComputeAttention(neighbors, layer.attention[t], slope, state, v);
      for (size_t k = 0; k < neighbors.size(); ++k) {
        aggregated.col(v) += scores.alpha[k] * state.col(neighbors[k].node);
      }
    }
    if (!any) aggregated.col(v) = state.col(v);
  }
  return aggregated;
}

LayerState Transform(const HeteroGraph& graph, const GnnLayer& layer,
                     const LayerState& aggregated) {
  const int n = static_cast<int>(graph.num_nodes());
  LayerState pre(layer.output_dim(), n);
  for (int v = 0; v < n; ++v) {
    pre.col(v) = layer.transforms[static_cast<int>(graph.nodes()[v].type)] *
                 aggregated.col(v);
  }
  return pre;
}

LayerState ApplyElu(const LayerState& pre) {
  return pre.unaryExpr([](double x) { return Elu(x); });
}

absl::StatusOr<std::vector<LayerCache>> ForwardWithCache(
    const HeteroGraph& graph, const GnnParams& params, LayerState* output) {
  RETURN_IF_ERROR(params.CheckShapes());
  std::vector<LayerCache> caches;
  LayerState state = InitialState(graph);
  for (const GnnLayer& layer : params.layers) {
    RETURN_IF_ERROR(CheckLayerAgainstState(graph, layer, state));
    LayerCache cache;
    cache.aggregated = Aggregate(graph, layer, params.leaky_slope, state);
    cache.pre = Transform(graph, layer, cache.aggregated);
    LayerState next = ApplyElu(cache.pre);
    cache.input = std::move(state);
    state = std::move(next);
    caches.push_back(std::move(cache));
  }
  *output = std::move(state);
  return caches;
}

// Backpropagates d loss / d z^(l+1) through one layer, accumulating parameter
// gradients into `grad` and returning d loss / d z^(l).
LayerState BackwardLayer(const HeteroGraph& graph, const GnnLayer& layer,
                         double slope, const LayerCache& cache,
                         const LayerState& d_output, GnnLayer& grad) {
  const int n = static_cast<int>(graph.num_nodes());
  const Eigen::Index d_in = cache.input.rows();
  LayerState d_pre = d_output;
  for (Eigen::Index j = 0; j < d_pre.cols(); ++j) {
    for (Eigen::Index i = 0; i < d_pre.rows(); ++i) {
      d_pre(i, j) *= EluGrad(cache.pre(i, j));
    }
  }
  LayerState d_aggregated(d_in, n);
  for (int v = 0; v < n; ++v) {
    const int t = static_cast<int>(graph.nodes()[v].type);
    grad.transforms[t].noalias() +=
        d_pre.col(v) * cache.aggregated.col(v).transpose();
    d_aggregated.col(v).noalias() =
        layer.transforms[t].transpose() * d_pre.col(v);
  }

  LayerState d_input = LayerState::Zero(d_in, n);
  const LayerState& z = cache.input;
  for (int v = 0; v < n; ++v) {
    bool any = false;
    for (int t = 0; t < kNumEdgeTypes; ++t) {
      const auto& neighbors = graph.Neighbors(v, static_cast<EdgeType>(t));
      if (neighbors.empty()) continue;
      any = true;
      const Eigen::VectorXd& a = layer.attention[t];
      const AttentionScores scores = ComputeAttention(neighbors, a, slope, z, v);
      const auto dh = d_aggregated.col(v);
      std::vector<double> d_alpha(neighbors.size());
      double weighted = 0.0;
      for (size_t k = 0; k < neighbors.size(); ++k) {
        const int u = neighbors[k].node;
        d_alpha[k] = dh.dot(z.col(u));
        weighted += scores.alpha[k] * d_alpha[k];
        d_input.col(u) += scores.alpha[k] * dh;
      }
      for (size_t k = 0; k < neighbors.size(); ++k) {
        const int u = neighbors[k].node;
        const double d_e = scores.alpha[k] * (d_alpha[k] - weighted);
        const double d_raw = d_e * (scores.raw[k] > 0.0 ? 1.0 : slope);
        grad.attention[t].head(d_in) += d_raw * z.col(v);
        grad.attention[t].tail(d_in) += d_raw * z.col(u);
        d_input.col(v) += d_raw * a.head(d_in);
        d_input.col(u) += d_raw * a.tail(d_in);
      }
    }
    if (!any) d_input.col(v) += d_aggregated.col(v);
  }
  return d_input;
}

}  // namespace

absl::Status GnnParams::CheckShapes() const {
  if (layers.empty()) return absl::InvalidArgumentError("GNN needs >= 1 layer");
  for (size_t l = 0; l < layers.size(); ++l) {
    const GnnLayer& layer = layers[l];
    const auto rows = layer.transforms[0].rows();
    const auto cols = layer.transforms[0].cols();
    for (const auto& w : layer.transforms) {
      if (w.rows() != rows || w.cols() != cols) {
        return absl::InvalidArgumentError(
            absl::StrCat("layer ", l, ": transform shapes disagree"));
      }
    }
    for (const auto& a : layer.attention) {
      if (a.size() != 2 * cols) {
        return absl::InvalidArgumentError(
            absl::StrCat("layer ", l, ": attention vector length ", a.size(),
                         ", expected ", 2 * cols));
      }
    }
    if (l > 0 && layers[l - 1].output_dim() != cols) {
      return absl::InvalidArgumentError(
          absl::StrCat("layer ", l, ": input dimension ", cols,
                       " does not match previous output ",
                       layers[l - 1].output_dim()));
    }
  }
  return absl::OkStatus();
}

GnnParams GnnParams::ZerosLike() const {
  GnnParams out = *this;
  for (GnnLayer& layer : out.layers) {
    for (auto& w : layer.transforms) w.setZero();
    for (auto& a : layer.attention) a.setZero();
  }
  return out;
}

std::vector<double*> GnnParams::MutableEntries() {
  std::vector<double*> out;
  for (GnnLayer& layer : layers) {
    for (auto& w : layer.transforms) {
      for (Eigen::Index i = 0; i < w.size(); ++i) out.push_back(w.data() + i);
    }
    for (auto& a : layer.attention) {
      for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a.data() + i);
    }
  }
  return out;
}

size_t GnnParams::NumEntries() const {
  size_t n = 0;
  for (const GnnLayer& layer : layers) {
    for (const auto& w : layer.transforms) n += w.size();
    for (const auto& a : layer.attention) n += a.size();
  }
  return n;
}

GnnParams InitGnnParams(int input_dim, int hidden_dim, int layers,
                        uint64_t seed, double leaky_slope) {
  Rng rng(seed);
  GnnParams params;
  params.leaky_slope = leaky_slope;
  int in = input_dim;
  for (int l = 0; l < layers; ++l) {
    GnnLayer layer;
    const double limit = std::sqrt(6.0 / (in + hidden_dim));
    for (auto& w : layer.transforms) {
      w.resize(hidden_dim, in);
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
          w(i, j) = rng.Uniform(-limit, limit);
        }
      }
    }
    const double a_limit = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& a : layer.attention) {
      a.resize(2 * in);
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        a[i] = rng.Uniform(-a_limit, a_limit);
      }
    }
    params.layers.push_back(std::move(layer));
    in = hidden_dim;
  }
  return params;
}

LayerState InitialState(const HeteroGraph& graph) {
  LayerState state(graph.feature_dim(), static_cast<Eigen::Index>(graph.num_nodes()));
  for (size_t v = 0; v < graph.num_nodes(); ++v) {
    state.col(static_cast<Eigen::Index>(v)) = graph.nodes()[v].features;
  }
  return state;
}

absl::StatusOr<std::vector<std::pair<int, double>>> AttentionWeights(
    const HeteroGraph& graph, const GnnLayer& layer, double leaky_slope,
    const LayerState& state, int node, EdgeType type) {
  RETURN_IF_ERROR(CheckLayerAgainstState(graph, layer, state));
  if (node < 0 || node >= static_cast<int>(graph.num_nodes())) {
    return absl::InvalidArgumentError("node index out of range");
  }
  const auto& neighbors = graph.Neighbors(node, type);
  if (neighbors.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("node ", graph.nodes()[node].id, " has no ",
                     EdgeTypeName(type), " neighbors"));
  }
  const AttentionScores scores = ComputeAttention(
      neighbors, layer.attention[static_cast<int>(type)], leaky_slope, state,
      node);
  std::vector<std::pair<int, double>> out;
  for (size_t k = 0; k < neighbors.size(); ++k) {
    out.emplace_back(neighbors[k].node, scores.alpha[k]);
  }
  return out;
}

absl::StatusOr<LayerState> MessagePass(const HeteroGraph& graph,
                                       const GnnLayer& layer,
                                       double leaky_slope,
                                       const LayerState& state) {
  RETURN_IF_ERROR(CheckLayerAgainstState(graph, layer, state));
  const LayerState aggregated = Aggregate(graph, layer, leaky_slope, state);
  return ApplyElu(Transform(graph, layer, aggregated));
}

absl::StatusOr<LayerState> Forward(const HeteroGraph& graph,
                                   const GnnParams& params) {
  LayerState out;
  RETURN_IF_ERROR(ForwardWithCache(graph, params, &out).status());
  return out;
}

absl::StatusOr<double> LinkPredictionLoss(
    const HeteroGraph& graph, const GnnParams& params,
    const std::vector<LinkSample>& samples, GnnParams* gradient) {
  if (samples.empty()) return absl::InvalidArgumentError("no link samples");
  LayerState z;
  ASSIGN_OR_RETURN(std::vector<LayerCache> caches,
                   ForwardWithCache(graph, params, &z));
  const double scale = 1.0 / static_cast<double>(samples.size());
  double loss = 0.0;
  LayerState d_z = LayerState::Zero(z.rows(), z.cols());
  for (const LinkSample& s : samples) {
    const double score = z.col(s.u).dot(z.col(s.v));
    loss += Softplus(score) - s.label * score;
    if (gradient != nullptr) {
      const double d_score = (Sigmoid(score) - s.label) * scale;
      d_z.col(s.u) += d_score * z.col(s.v);
      d_z.col(s.v) += d_score * z.col(s.u);
    }
  }
  loss *= scale;
  if (gradient != nullptr) {
    *gradient = params.ZerosLike();
    for (size_t l = caches.size(); l-- > 0;) {
      d_z = BackwardLayer(graph, params.layers[l], params.leaky_slope,
                          caches[l], d_z, gradient->layers[l]);
    }
  }
  return loss;
}

std::vector<LinkSample> EdgeSamples(const HeteroGraph& graph) {
  std::vector<LinkSample> out;
  out.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) out.push_back({e.src, e.dst, 1.0});
  return out;
}

absl::StatusOr<LinkPredictionResult> TrainLinkPrediction(
    const HeteroGraph& graph, const LinkPredictionConfig& config) {
  if (graph.num_nodes() < 2 || graph.edges().empty()) {
    return absl::FailedPreconditionError(
        "link prediction needs a graph with at least one edge");
  }
  if (config.layers < 1 || config.hidden_dim < 1 || config.epochs < 0 ||
      config.negative_ratio < 0.0 || !(config.learning_rate > 0.0)) {
    return absl::InvalidArgumentError("invalid link prediction config");
  }
  Rng rng(config.seed);
  LinkPredictionResult result;
  result.params =
      InitGnnParams(graph.feature_dim(), config.hidden_dim, config.layers,
                    rng.NextU64(), config.leaky_slope);

  const std::vector<LinkSample> positives = EdgeSamples(graph);
  const size_t n = graph.num_nodes();
  const size_t num_negatives = static_cast<size_t>(
      std::llround(config.negative_ratio * static_cast<double>(positives.size())));

  std::vector<double*> entries = result.params.MutableEntries();
  Adam adam(entries.size(), config.learning_rate);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<LinkSample> batch = positives;
    for (size_t k = 0; k < num_negatives; ++k) {
      // Bounded rejection; dense graphs may leave a few adjacent pairs.
      int u = 0, v = 0;
      for (int attempt = 0; attempt < 32; ++attempt) {
        u = static_cast<int>(rng.UniformInt(n));
        v = static_cast<int>(rng.UniformInt(n));
        if (u != v && !graph.EdgeWeight(u, v).has_value()) break;
      }
      if (u == v) continue;
      batch.push_back({u, v, 0.0});
    }
    GnnParams gradient;
    ASSIGN_OR_RETURN(double loss, LinkPredictionLoss(graph, result.params,
                                                     batch, &gradient));
    if (!std::isfinite(loss)) {
      return absl::InternalError(
          absl::StrCat("link prediction diverged at epoch ", epoch));
    }
    result.loss_history.push_back(loss);

    adam.Step(entries, gradient.MutableEntries());
  }
  ASSIGN_OR_RETURN(result.embeddings, Forward(graph, result.params));
  if (!result.embeddings.allFinite()) {
    return absl::InternalError("link prediction produced non-finite embeddings");
  }
  return result;
}

double LinkAuc(const LayerState& embeddings,
               const std::vector<std::pair<int, int>>& positives,
               const std::vector<std::pair<int, int>>& negatives) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& [u, v] : positives) {
    scores.push_back(embeddings.col(u).dot(embeddings.col(v)));
    labels.push_back(1);
  }
  for (const auto& [u, v] : negatives) {
    scores.push_back(embeddings.col(u).dot(embeddings.col(v)));
    labels.push_back(0);
  }
  return RocAuc(scores, labels);
}

embed::PrecomputedEmbeddings ExportEmbeddings(const HeteroGraph& graph,
                                              const LayerState& embeddings) {
  embed::PrecomputedEmbeddings out;
  for (size_t v = 0; v < graph.num_nodes(); ++v) {
    // Ids and vectors come from a validated graph, so Insert cannot fail.
    (void)out.Insert(graph.nodes()[v].id,
                     embeddings.col(static_cast<Eigen::Index>(v)));
  }
  return out;
}

std::string LossHistoryCsv(const std::vector<double>& loss_history) {
  std::string out = "epoch,loss\n";
  for (size_t i = 0; i < loss_history.size(); ++i) {
    absl::StrAppend(&out, i, ",", absl::StrFormat("%.17g", loss_history[i]),
                    "\n");
  }
  return out;
}

absl::StatusOr<double> GraphSimilarity(
    const embed::PrecomputedEmbeddings& embeddings,
    const std::string& candidate_id, const std::string& role_id) {
  ASSIGN_OR_RETURN(Eigen::VectorXd c, embeddings.Lookup(candidate_id));
  ASSIGN_OR_RETURN(Eigen::VectorXd r, embeddings.Lookup(role_id));
  ASSIGN_OR_RETURN(double cosine, embed::CosineSimilarity(c, r));
  return (cosine + 1.0) / 2.0;
}

}  // namespace gesa::hetgraph
