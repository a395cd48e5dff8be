#include "gesa/debias/mlp.h"

#include <cmath>
#include <vector>

namespace gesa::debias {
namespace {

Eigen::MatrixXd Glorot(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.Uniform(-limit, limit);
  }
  return m;
}

void Append(Eigen::MatrixXd& m, std::vector<double*>& out) {
  for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
}

void Append(Eigen::VectorXd& v, std::vector<double*>& out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.data() + i);
}

}  // namespace

Mlp Mlp::Init(int input_dim, int hidden_dim, int output_dim, Rng& rng) {
  Mlp m;
  m.w1 = Glorot(hidden_dim, input_dim, rng);
  m.b1 = Eigen::VectorXd::Zero(hidden_dim);
  m.w2 = Glorot(output_dim, hidden_dim, rng);
  m.b2 = Eigen::VectorXd::Zero(output_dim);
  return m;
}

Mlp Mlp::ZerosLike() const {
  Mlp m;
  m.w1 = Eigen::MatrixXd::Zero(w1.rows(), w1.cols());
  m.b1 = Eigen::VectorXd::Zero(b1.size());
  m.w2 = Eigen::MatrixXd::Zero(w2.rows(), w2.cols());
  m.b2 = Eigen::VectorXd::Zero(b2.size());
  return m;
}

std::vector<double*> Mlp::MutableEntries() {
  std::vector<double*> out;
  Append(w1, out);
  Append(b1, out);
  Append(w2, out);
  Append(b2, out);
  return out;
}

bool Mlp::AllFinite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

Eigen::MatrixXd MlpForward(const Mlp& mlp, const Eigen::MatrixXd& x,
                           MlpCache* cache) {
  Eigen::MatrixXd hidden = ((mlp.w1 * x).colwise() + mlp.b1).array().tanh();
  Eigen::MatrixXd out = (mlp.w2 * hidden).colwise() + mlp.b2;
  if (cache != nullptr) {
    cache->input = x;
    cache->hidden = std::move(hidden);
  }
  return out;
}

Eigen::MatrixXd MlpBackward(const Mlp& mlp, const MlpCache& cache,
                            const Eigen::MatrixXd& d_out, Mlp* grad) {
  grad->w2 += d_out * cache.hidden.transpose();
  grad->b2 += d_out.rowwise().sum();
  const Eigen::MatrixXd d_pre =
      ((mlp.w2.transpose() * d_out).array() *
       (1.0 - cache.hidden.array().square()))
          .matrix();
  grad->w1 += d_pre * cache.input.transpose();
  grad->b1 += d_pre.rowwise().sum();
  return mlp.w1.transpose() * d_pre;
}

double SoftmaxCrossEntropy(const Eigen::MatrixXd& logits,
                           const std::vector<int>& labels,
                           Eigen::MatrixXd* d_logits) {
  const Eigen::Index n = logits.cols();
  if (d_logits != nullptr) d_logits->resize(logits.rows(), n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double max = logits.col(j).maxCoeff();
    const Eigen::VectorXd e = (logits.col(j).array() - max).exp();
    const double total = e.sum();
    loss += std::log(total) + max - logits(labels[j], j);
    if (d_logits != nullptr) {
      d_logits->col(j) = e / total;
      (*d_logits)(labels[j], j) -= 1.0;
    }
  }
  if (d_logits != nullptr) *d_logits /= static_cast<double>(n);
  return loss / static_cast<double>(n);
}

}  // namespace gesa::debias
