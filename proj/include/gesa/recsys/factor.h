#ifndef GESA_RECSYS_FACTOR_H_
#define GESA_RECSYS_FACTOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "gesa/core/types.h"

namespace gesa::recsys {

struct Rating {
  std::string candidate_id;
  std::string role_id;
  double value = 0.0;
};

std::vector<Rating> ToRatings(const std::vector<Interaction>& interactions);

struct MfConfig {
  int k = 32;
  double mu = 0.1;
  int sweeps = 20;
  uint64_t seed = 0;
  double init_scale = 0.1;
};

struct FactorModel {
  std::vector<std::string> candidate_ids;  // row order of U, sorted
  std::vector<std::string> role_ids;       // row order of V, sorted
  Eigen::MatrixXd u;                       // N x k
  Eigen::MatrixXd v;                       // M x k
  double mu = 0.0;
  // Regularized loss after every half-sweep (U update, then V update).
  std::vector<double> loss_history;

  int CandidateRow(const std::string& id) const;  // -1 when unknown
  int RoleRow(const std::string& id) const;
};

// Sum of squared errors on observed entries plus mu (|U|^2 + |V|^2).
double RegularizedLoss(const FactorModel& model,
                       const std::vector<Rating>& ratings);

// Alternating least squares on the observed entries. Rows and columns are the distinct ids present, sorted. A repeated
// pair counts once per occurrence.
absl::StatusOr<FactorModel> TrainMf(const std::vector<Rating>& ratings,
                                    const MfConfig& config);

// logistic(3 U_c . V_r); nullopt when either id is cold.
std::optional<double> CfScore(const FactorModel& model,
                              const std::string& candidate_id,
                              const std::string& role_id);

}  // namespace gesa::recsys

#endif  // GESA_RECSYS_FACTOR_H_
