#include "gesa/recsys/factor.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "gesa/core/random.h"

namespace gesa::recsys {
namespace {

constexpr double kCfSharpness = 3.0;

int Find(const std::vector<std::string>& sorted, const std::string& id) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
  if (it == sorted.end() || *it != id) return -1;
  return static_cast<int>(it - sorted.begin());
}

struct Entry {
  int row;
  int col;
  double value;
};

// Solves every row of `target` against the fixed `other` factors.
void SolveSide(const std::vector<std::vector<const Entry*>>& by_row, bool rows_are_u,
               const Eigen::MatrixXd& other, double mu, Eigen::MatrixXd& target) {
  const int k = static_cast<int>(other.cols());
  Eigen::MatrixXd a(k, k);
  Eigen::VectorXd b(k);
  for (size_t r = 0; r < by_row.size(); ++r) {
    a.setZero();
    a.diagonal().setConstant(mu);
    b.setZero();
    for (const Entry* e : by_row[r]) {
      const auto f = other.row(rows_are_u ? e->col : e->row);
      a.noalias() += f.transpose() * f;
      b.noalias() += e->value * f.transpose();
    }
    if (mu <= 0.0 && by_row[r].empty()) continue;
    target.row(static_cast<Eigen::Index>(r)) = a.ldlt().solve(b).transpose();
  }
}

}  // namespace

std::vector<Rating> ToRatings(const std::vector<Interaction>& interactions) {
  std::vector<Rating> out;
  out.reserve(interactions.size());
  for (const Interaction& i : interactions) {
    out.push_back({i.candidate_id, i.role_id, static_cast<double>(i.outcome)});
  }
  return out;
}

int FactorModel::CandidateRow(const std::string& id) const {
  return Find(candidate_ids, id);
}

int FactorModel::RoleRow(const std::string& id) const { return Find(role_ids, id); }

double RegularizedLoss(const FactorModel& model, const std::vector<Rating>& ratings) {
  double loss = 0.0;
  for (const Rating& r : ratings) {
    const int c = model.CandidateRow(r.candidate_id);
    const int j = model.RoleRow(r.role_id);
    if (c < 0 || j < 0) continue;
    const double e = r.value - model.u.row(c).dot(model.v.row(j));
    loss += e * e;
  }
  return loss + model.mu * (model.u.squaredNorm() + model.v.squaredNorm());
}

absl::StatusOr<FactorModel> TrainMf(const std::vector<Rating>& ratings,
                                    const MfConfig& config) {
  if (ratings.empty()) return absl::InvalidArgumentError("no interactions to factorize");
  if (config.k < 1) return absl::InvalidArgumentError("latent dimension must be >= 1");
  if (config.mu < 0.0) return absl::InvalidArgumentError("regularization must be >= 0");
  if (config.sweeps < 0) return absl::InvalidArgumentError("sweeps must be >= 0");
  for (const Rating& r : ratings) {
    if (!std::isfinite(r.value)) return absl::InvalidArgumentError("non-finite rating");
  }
  FactorModel model;
  model.mu = config.mu;
  for (const Rating& r : ratings) {
    model.candidate_ids.push_back(r.candidate_id);
    model.role_ids.push_back(r.role_id);
  }
  for (auto* ids : {&model.candidate_ids, &model.role_ids}) {
    std::sort(ids->begin(), ids->end());
    ids->erase(std::unique(ids->begin(), ids->end()), ids->end());
  }
  const int n = static_cast<int>(model.candidate_ids.size());
  const int m = static_cast<int>(model.role_ids.size());
  std::vector<Entry> entries;
  for (const Rating& r : ratings) {
    entries.push_back({model.CandidateRow(r.candidate_id), model.RoleRow(r.role_id), r.value});
  }
  std::vector<std::vector<const Entry*>> by_candidate(n), by_role(m);
  for (const Entry& e : entries) {
    by_candidate[e.row].push_back(&e);
    by_role[e.col].push_back(&e);
  }

  Rng rng(config.seed);
  model.u.resize(n, config.k);
  model.v.resize(m, config.k);
  for (Eigen::MatrixXd* f : {&model.u, &model.v}) {
    for (Eigen::Index i = 0; i < f->size(); ++i) {
      f->data()[i] = config.init_scale * rng.Normal();
    }
  }
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    SolveSide(by_candidate, true, model.v, config.mu, model.u);
    model.loss_history.push_back(RegularizedLoss(model, ratings));
    SolveSide(by_role, false, model.u, config.mu, model.v);
    model.loss_history.push_back(RegularizedLoss(model, ratings));
  }
  if (!model.u.allFinite() || !model.v.allFinite()) {
    return absl::InternalError("factorization diverged");
  }
  return model;
}

std::optional<double> CfScore(const FactorModel& model, const std::string& candidate_id,
                              const std::string& role_id) {
  const int c = model.CandidateRow(candidate_id);
  const int r = model.RoleRow(role_id);
  if (c < 0 || r < 0) return std::nullopt;
  return 1.0 / (1.0 + std::exp(-kCfSharpness * model.u.row(c).dot(model.v.row(r))));
}

}  // namespace gesa::recsys
