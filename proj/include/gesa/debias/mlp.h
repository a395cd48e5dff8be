#ifndef GESA_DEBIAS_MLP_H_
#define GESA_DEBIAS_MLP_H_

#include <vector>

#include "Eigen/Dense"
#include "gesa/core/random.h"

namespace gesa::debias {

// x -> w2 * tanh(w1 * x + b1) + b2. Batches are matrices with one column per
// example.
struct Mlp {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int output_dim() const { return static_cast<int>(w2.rows()); }

  // Glorot-uniform weights, zero biases.
  static Mlp Init(int input_dim, int hidden_dim, int output_dim, Rng& rng);
  Mlp ZerosLike() const;
  std::vector<double*> MutableEntries();
  bool AllFinite() const;
};

struct MlpCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd hidden;  // post-tanh
};

Eigen::MatrixXd MlpForward(const Mlp& mlp, const Eigen::MatrixXd& x,
                           MlpCache* cache);

// Adds d loss / d params to *grad and returns d loss / d input.
Eigen::MatrixXd MlpBackward(const Mlp& mlp, const MlpCache& cache,
                            const Eigen::MatrixXd& d_out, Mlp* grad);

// Column-wise softmax cross-entropy against class indices, averaged over
// columns. When d_logits is non-null it receives the gradient.
double SoftmaxCrossEntropy(const Eigen::MatrixXd& logits,
                           const std::vector<int>& labels,
                           Eigen::MatrixXd* d_logits);

}  // namespace gesa::debias

#endif  // GESA_DEBIAS_MLP_H_
