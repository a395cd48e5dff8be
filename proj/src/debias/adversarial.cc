#include "gesa/debias/adversarial.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/adam.h"
#include "gesa/core/metrics.h"
#include "gesa/core/random.h"
#include "gesa/core/status_macros.h"

namespace gesa::debias {
namespace {

double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

absl::Status CheckData(const DebiasData& data) {
  const Eigen::Index n = data.candidates.cols();
  const Eigen::Index m = data.roles.cols();
  if (n == 0 || m == 0) {
    return absl::InvalidArgumentError("debiasing needs candidates and roles");
  }
  if (data.roles.rows() != data.candidates.rows()) {
    return absl::InvalidArgumentError(
        "candidate and role embeddings differ in dimension");
  }
  if (static_cast<Eigen::Index>(data.sensitive.size()) != n) {
    return absl::InvalidArgumentError(
        "every candidate needs a sensitive label");
  }
  if (data.num_classes < 1) {
    return absl::InvalidArgumentError("num_classes must be >= 1");
  }
  for (int s : data.sensitive) {
    if (s < 0 || s >= data.num_classes) {
      return absl::InvalidArgumentError(
          absl::StrCat("sensitive label ", s, " outside [0, ",
                       data.num_classes, ")"));
    }
  }
  for (const PairLabel& p : data.pairs) {
    if (p.candidate < 0 || p.candidate >= n || p.role < 0 || p.role >= m) {
      return absl::InvalidArgumentError("pair index out of range");
    }
    if (p.label != 0.0 && p.label != 1.0) {
      return absl::InvalidArgumentError("pair label must be 0 or 1");
    }
  }
  return absl::OkStatus();
}

absl::Status CheckModel(const DebiasedEncoder& model, const DebiasData& data) {
  const int in = static_cast<int>(data.candidates.rows());
  const int rep = model.encoder.output_dim();
  if (model.encoder.input_dim() != in || model.adversary.input_dim() != rep ||
      model.adversary.output_dim() != data.num_classes ||
      model.decoder.input_dim() != rep || model.decoder.output_dim() != in) {
    return absl::InvalidArgumentError("model shapes do not match the data");
  }
  return absl::OkStatus();
}

constexpr double kStandardizeEpsilon = 1e-6;

// Each row shifted to zero mean and scaled to unit variance over the batch.
Eigen::MatrixXd Standardize(const Eigen::MatrixXd& z, Eigen::VectorXd* inv_sd) {
  const Eigen::VectorXd mean = z.rowwise().mean();
  const Eigen::MatrixXd centered = z.colwise() - mean;
  const Eigen::VectorXd var = centered.array().square().rowwise().mean();
  *inv_sd = (var.array() + kStandardizeEpsilon).rsqrt();
  return inv_sd->asDiagonal() * centered;
}

Eigen::MatrixXd StandardizeBackward(const Eigen::MatrixXd& d_out,
                                    const Eigen::MatrixXd& out,
                                    const Eigen::VectorXd& inv_sd) {
  const Eigen::VectorXd mean_d = d_out.rowwise().mean();
  const Eigen::VectorXd mean_dx = d_out.cwiseProduct(out).rowwise().mean();
  Eigen::MatrixXd d_in = d_out.colwise() - mean_d;
  d_in -= mean_dx.asDiagonal() * out;
  return inv_sd.asDiagonal() * d_in;
}

}  // namespace

DebiasedEncoder DebiasedEncoder::ZerosLike() const {
  return {encoder.ZerosLike(), adversary.ZerosLike(), decoder.ZerosLike()};
}

std::vector<double*> DebiasedEncoder::MutableEntries() {
  std::vector<double*> out = encoder.MutableEntries();
  for (double* p : adversary.MutableEntries()) out.push_back(p);
  for (double* p : decoder.MutableEntries()) out.push_back(p);
  return out;
}

Eigen::MatrixXd DebiasedEncoder::Encode(const Eigen::MatrixXd& inputs) const {
  return MlpForward(encoder, inputs, nullptr);
}

absl::StatusOr<LossBreakdown> DebiasLosses(const DebiasedEncoder& model,
                                           const DebiasData& data,
                                           double lambda, double beta,
                                           DebiasedEncoder* gradient) {
  RETURN_IF_ERROR(CheckData(data));
  RETURN_IF_ERROR(CheckModel(model, data));
  if (data.pairs.empty()) return absl::InvalidArgumentError("no pairs");

  MlpCache cand_cache, role_cache, adv_cache, dec_cache;
  const Eigen::MatrixXd zc = MlpForward(model.encoder, data.candidates, &cand_cache);
  const Eigen::MatrixXd zr = MlpForward(model.encoder, data.roles, &role_cache);

  LossBreakdown out;
  Eigen::MatrixXd d_zc = Eigen::MatrixXd::Zero(zc.rows(), zc.cols());
  Eigen::MatrixXd d_zr = Eigen::MatrixXd::Zero(zr.rows(), zr.cols());
  const double pair_scale = 1.0 / static_cast<double>(data.pairs.size());
  for (const PairLabel& p : data.pairs) {
    const double s = zc.col(p.candidate).dot(zr.col(p.role));
    out.allocation += Softplus(s) - p.label * s;
    if (gradient != nullptr) {
      const double d_s = (Sigmoid(s) - p.label) * pair_scale;
      d_zc.col(p.candidate) += d_s * zr.col(p.role);
      d_zr.col(p.role) += d_s * zc.col(p.candidate);
    }
  }
  out.allocation *= pair_scale;

  Eigen::VectorXd inv_sd;
  const Eigen::MatrixXd adv_input =
      Standardize(GradientReversal::Forward(zc), &inv_sd);
  const Eigen::MatrixXd logits =
      MlpForward(model.adversary, adv_input, &adv_cache);
  Eigen::MatrixXd d_logits;
  out.adversarial = SoftmaxCrossEntropy(logits, data.sensitive,
                                        gradient ? &d_logits : nullptr);

  const Eigen::MatrixXd recon = MlpForward(model.decoder, zc, &dec_cache);
  const Eigen::MatrixXd residual = recon - data.candidates;
  const double entries = static_cast<double>(residual.size());
  out.reconstruction = residual.squaredNorm() / entries;

  out.total = out.allocation - lambda * out.adversarial +
              beta * out.reconstruction;
  if (gradient == nullptr) return out;

  *gradient = model.ZerosLike();
  const Eigen::MatrixXd d_adv_input =
      MlpBackward(model.adversary, adv_cache, d_logits, &gradient->adversary);
  d_zc += GradientReversal::Backward(
      StandardizeBackward(d_adv_input, adv_input, inv_sd), lambda);
  const Eigen::MatrixXd d_recon = (2.0 * beta / entries) * residual;
  d_zc += MlpBackward(model.decoder, dec_cache, d_recon, &gradient->decoder);
  MlpBackward(model.encoder, cand_cache, d_zc, &gradient->encoder);
  MlpBackward(model.encoder, role_cache, d_zr, &gradient->encoder);
  return out;
}

absl::StatusOr<DebiasResult> TrainAdversarial(const DebiasData& data,
                                              const DebiasConfig& config) {
  if (!(config.lambda >= 0.0) || !(config.beta >= 0.0)) {
    return absl::InvalidArgumentError("lambda and beta must be >= 0");
  }
  if (config.epochs < 0 || config.encoder_hidden < 1 ||
      config.representation_dim < 1 || config.adversary_hidden < 1 ||
      config.decoder_hidden < 1 || !(config.learning_rate > 0.0)) {
    return absl::InvalidArgumentError("invalid debias config");
  }
  RETURN_IF_ERROR(CheckData(data));
  bool has_positive = false, has_negative = false;
  for (const PairLabel& p : data.pairs) {
    (p.label == 1.0 ? has_positive : has_negative) = true;
  }
  if (!has_positive || !has_negative) {
    return absl::InvalidArgumentError(
        "match labels need at least one positive and one negative pair");
  }

  Rng rng(config.seed);
  const int in = static_cast<int>(data.candidates.rows());
  DebiasResult result;
  result.model.encoder =
      Mlp::Init(in, config.encoder_hidden, config.representation_dim, rng);
  result.model.adversary = Mlp::Init(config.representation_dim,
                                     config.adversary_hidden,
                                     data.num_classes, rng);
  result.model.decoder =
      Mlp::Init(config.representation_dim, config.decoder_hidden, in, rng);

  std::vector<double*> params = result.model.MutableEntries();
  Adam adam(params.size(), config.learning_rate);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    DebiasedEncoder gradient;
    ASSIGN_OR_RETURN(LossBreakdown losses,
                     DebiasLosses(result.model, data, config.lambda,
                                  config.beta, &gradient));
    if (!std::isfinite(losses.total)) {
      return absl::InternalError(
          absl::StrCat("debiasing diverged at epoch ", epoch));
    }
    result.history.push_back(losses);
    adam.Step(params, gradient.MutableEntries());
  }
  return result;
}

absl::StatusOr<double> LeakageProbe(const Eigen::MatrixXd& representations,
                                    const std::vector<int>& labels,
                                    uint64_t seed) {
  const Eigen::Index n = representations.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    return absl::InvalidArgumentError("one label per representation required");
  }
  const std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) {
    return absl::InvalidArgumentError("leakage probe needs two or more classes");
  }
  if (*classes.begin() < 0) {
    return absl::InvalidArgumentError("negative class label");
  }
  const int num_classes = *classes.rbegin() + 1;

  Rng rng(seed);
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  const size_t train_size =
      std::max<size_t>(1, static_cast<size_t>(0.8 * static_cast<double>(n)));
  if (train_size >= static_cast<size_t>(n)) {
    return absl::InvalidArgumentError("too few examples for a held-out split");
  }
  const int dim = static_cast<int>(representations.rows());
  Eigen::MatrixXd train(dim, static_cast<Eigen::Index>(train_size));
  Eigen::MatrixXd test(dim, n - static_cast<Eigen::Index>(train_size));
  std::vector<int> train_labels, test_labels;
  for (size_t i = 0; i < order.size(); ++i) {
    if (i < train_size) {
      train.col(static_cast<Eigen::Index>(i)) = representations.col(order[i]);
      train_labels.push_back(labels[order[i]]);
    } else {
      test.col(static_cast<Eigen::Index>(i - train_size)) =
          representations.col(order[i]);
      test_labels.push_back(labels[order[i]]);
    }
  }
  const Eigen::VectorXd mean = train.rowwise().mean();
  Eigen::VectorXd scale =
      ((train.colwise() - mean).array().square().rowwise().mean()).sqrt();
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    scale[i] = scale[i] > 1e-12 ? 1.0 / scale[i] : 0.0;
  }
  train = scale.asDiagonal() * (train.colwise() - mean);
  test = scale.asDiagonal() * (test.colwise() - mean);

  constexpr int kHidden = 32;
  constexpr int kEpochs = 300;
  constexpr double kLearningRate = 0.01;
  Mlp probe = Mlp::Init(dim, kHidden, num_classes, rng);
  std::vector<double*> params = probe.MutableEntries();
  Adam adam(params.size(), kLearningRate);
  for (int epoch = 0; epoch < kEpochs; ++epoch) {
    MlpCache cache;
    const Eigen::MatrixXd logits = MlpForward(probe, train, &cache);
    Eigen::MatrixXd d_logits;
    SoftmaxCrossEntropy(logits, train_labels, &d_logits);
    Mlp gradient = probe.ZerosLike();
    MlpBackward(probe, cache, d_logits, &gradient);
    adam.Step(params, gradient.MutableEntries());
  }
  const Eigen::MatrixXd logits = MlpForward(probe, test, nullptr);
  int correct = 0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Eigen::Index best;
    logits.col(j).maxCoeff(&best);
    if (static_cast<int>(best) == test_labels[j]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.cols());
}

double AllocationAuc(const DebiasedEncoder& model, const DebiasData& data,
                     const std::vector<PairLabel>& pairs) {
  const Eigen::MatrixXd zc = model.Encode(data.candidates);
  const Eigen::MatrixXd zr = model.Encode(data.roles);
  std::vector<double> scores;
  std::vector<int> labels;
  for (const PairLabel& p : pairs) {
    scores.push_back(zc.col(p.candidate).dot(zr.col(p.role)));
    labels.push_back(p.label == 1.0 ? 1 : 0);
  }
  return RocAuc(scores, labels);
}

}  // namespace gesa::debias
