#include "gesa/core/adam.h"

#include <cmath>

namespace gesa {

Adam::Adam(size_t num_params, double learning_rate, double beta1,
           double beta2, double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      first_moment_(num_params, 0.0),
      second_moment_(num_params, 0.0) {}

void Adam::Step(const std::vector<double*>& params,
                const std::vector<double*>& grads) {
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1_, steps_);
  const double correction2 = 1.0 - std::pow(beta2_, steps_);
  for (size_t i = 0; i < first_moment_.size(); ++i) {
    const double g = *grads[i];
    first_moment_[i] = beta1_ * first_moment_[i] + (1.0 - beta1_) * g;
    second_moment_[i] = beta2_ * second_moment_[i] + (1.0 - beta2_) * g * g;
    *params[i] -= learning_rate_ * (first_moment_[i] / correction1) /
                  (std::sqrt(second_moment_[i] / correction2) + epsilon_);
  }
}

}  // namespace gesa
