#ifndef GESA_CORE_METRICS_H_
#define GESA_CORE_METRICS_H_

#include <vector>

namespace gesa {

// Mann-Whitney estimate of ROC AUC with average ranks for ties. Labels are
// 1 for positive, anything else negative. Returns 0.5 when either class is
// empty.
double RocAuc(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace gesa

#endif  // GESA_CORE_METRICS_H_
