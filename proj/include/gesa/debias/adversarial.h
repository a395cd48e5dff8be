#ifndef GESA_DEBIAS_ADVERSARIAL_H_
#define GESA_DEBIAS_ADVERSARIAL_H_

#include <cstdint>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "gesa/debias/mlp.h"

namespace gesa::debias {

// Identity on the way forward; scales the incoming gradient by -lambda on
// the way back.
struct GradientReversal {
  static Eigen::MatrixXd Forward(const Eigen::MatrixXd& x) { return x; }
  static Eigen::MatrixXd Backward(const Eigen::MatrixXd& gradient,
                                  double lambda) {
    return -lambda * gradient;
  }
};

struct DebiasConfig {
  double lambda = 0.5;
  double beta = 0.1;
  int encoder_hidden = 64;
  int representation_dim = 32;
  int adversary_hidden = 32;
  int decoder_hidden = 64;
  int epochs = 300;
  double learning_rate = 0.005;
  uint64_t seed = 0;
};

struct PairLabel {
  int candidate;
  int role;
  double label;  // 1 match, 0 non-match
};

struct DebiasData {
  Eigen::MatrixXd candidates;   // input_dim x N
  Eigen::MatrixXd roles;        // input_dim x M
  std::vector<int> sensitive;   // class index per candidate
  int num_classes = 0;
  std::vector<PairLabel> pairs;
};

// The encoder maps candidate and role embeddings into the shared
// representation space. The adversary predicts the sensitive class from the
// candidate representations standardized per feature over the batch, so the
// encoder cannot hide the class by rescaling; the decoder reconstructs the
// encoder input.
struct DebiasedEncoder {
  Mlp encoder;
  Mlp adversary;
  Mlp decoder;

  DebiasedEncoder ZerosLike() const;
  std::vector<double*> MutableEntries();
  Eigen::MatrixXd Encode(const Eigen::MatrixXd& inputs) const;
};

struct LossBreakdown {
  double total = 0.0;
  double allocation = 0.0;
  double adversarial = 0.0;
  double reconstruction = 0.0;
};

// allocation: mean binary cross-entropy of sigmoid(z_i . z_j) over pairs.
// adversarial: mean softmax cross-entropy of the adversary on candidates.
// reconstruction: mean squared error of the decoder over candidate entries.
// total = allocation - lambda * adversarial + beta * reconstruction.
//
// When `gradient` is non-null, its encoder and decoder receive d total / d
// params (the adversarial term reaches the encoder through the reversal
// layer) and its adversary receives d adversarial / d params, the loss the
// adversary itself minimizes.
absl::StatusOr<LossBreakdown> DebiasLosses(const DebiasedEncoder& model,
                                           const DebiasData& data,
                                           double lambda, double beta,
                                           DebiasedEncoder* gradient);

struct DebiasResult {
  DebiasedEncoder model;
  std::vector<LossBreakdown> history;
};

// Seeded full-batch Adam on the joint objective. Fails on inconsistent
// shapes, single-class match labels, and a non-finite loss.
absl::StatusOr<DebiasResult> TrainAdversarial(const DebiasData& data,
                                              const DebiasConfig& config);

// Held-out accuracy of a fresh one-hidden-layer classifier predicting the
// sensitive class from `representations` (one column per candidate), trained
// on a seeded 80/20 split with standardized features.
absl::StatusOr<double> LeakageProbe(const Eigen::MatrixXd& representations,
                                    const std::vector<int>& labels,
                                    uint64_t seed);

// ROC AUC of sigmoid(z_i . z_j) on the given labelled pairs.
double AllocationAuc(const DebiasedEncoder& model, const DebiasData& data,
                     const std::vector<PairLabel>& pairs);

}  // namespace gesa::debias

#endif  // GESA_DEBIAS_ADVERSARIAL_H_
