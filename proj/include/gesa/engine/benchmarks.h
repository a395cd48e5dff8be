#ifndef GESA_ENGINE_BENCHMARKS_H_
#define GESA_ENGINE_BENCHMARKS_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "gesa/core/types.h"
#include "gesa/datagen/datagen.h"
#include "gesa/debias/adversarial.h"
#include "gesa/engine/pipeline.h"

namespace gesa::engine {

// Seeded debiasing benchmark. A balanced binary gender category carries the
// bias: with strength b the "male" subgroup
//   - holds cluster skills with probability 0.3 + b (generator mechanism),
//   - has candidate embeddings with a proxy block drawn from N(+s * b * e, I)
//     against N(-s * b * e, I) for everyone else (e a fixed unit direction,
//     s = proxy_separation),
//   - gets historical interaction outcomes shifted by +favoritism * b, the
//     others by -favoritism * b.
// Inputs are hashed text vectors of the candidate and role text followed by
// the proxy block (zeros for roles); match labels are the biased outcomes.
struct DebiasBenchmarkConfig {
  datagen::EntityCounts counts{600, 40, 60, 5, 5, 4};
  double bias_strength = 0.4;
  double favoritism = 0.5;
  double proxy_separation = 5.0;
  int text_dim = 64;
  int proxy_dim = 8;
  // Share of candidates selected in the fairness audit.
  double selection_rate = 0.3;
  debias::DebiasConfig training;
  uint64_t seed = 1;
};

struct DebiasBenchmarkData {
  Dataset dataset;
  debias::DebiasData train;
  // Every candidate-role pair labelled by the planted matches.
  std::vector<debias::PairLabel> truth;
};

absl::StatusOr<DebiasBenchmarkData> MakeDebiasBenchmark(
    const DebiasBenchmarkConfig& config);

struct DebiasArm {
  double lambda = 0.0;
  double leakage = 0.0;
  // ROC AUC of sigmoid(z_c . z_r) against the planted matches.
  double auc = 0.0;
  // Composite fairness of selecting the top `selection_rate` candidates by
  // their best pair score; qualified = has a planted match.
  double fairness = 0.0;
};

absl::StatusOr<DebiasArm> RunDebiasArm(const DebiasBenchmarkData& data,
                                       const DebiasBenchmarkConfig& config,
                                       double lambda);

// Seeded 2,000 x 300 allocation instance; diversity is uniform over the
// declared categories.
struct DiversityBenchmarkConfig {
  datagen::EntityCounts counts{2000, 300, 120, 20, 20, 8};
  uint64_t seed = 1;
  optimizer::SelectionPolicy selection{1.0, 1.0, 0.0, {}};
};

struct DiversityBenchmarkResult {
  ObjectiveVector greedy;
  ObjectiveVector selected;
  int generations = 0;
  int front_size = 0;
};

absl::StatusOr<DiversityBenchmarkResult> RunDiversityBenchmark(
    const DiversityBenchmarkConfig& config);

}  // namespace gesa::engine

#endif  // GESA_ENGINE_BENCHMARKS_H_
