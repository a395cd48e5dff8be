#ifndef GESA_CORE_ADAM_H_
#define GESA_CORE_ADAM_H_

#include <cstddef>
#include <vector>

namespace gesa {

// Adam over a fixed list of scalar parameters.
class Adam {
 public:
  Adam(size_t num_params, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-8);

  // params[i] -= update computed from grads[i]. Both lists must have the
  // length given at construction.
  void Step(const std::vector<double*>& params,
            const std::vector<double*>& grads);

  int steps() const { return steps_; }

 private:
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  int steps_ = 0;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
};

}  // namespace gesa

#endif  // GESA_CORE_ADAM_H_
