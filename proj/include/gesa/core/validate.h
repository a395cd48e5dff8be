#ifndef GESA_CORE_VALIDATE_H_
#define GESA_CORE_VALIDATE_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gesa/core/types.h"

namespace gesa {

struct ValidationIssue {
  std::string entity_kind;  // "candidate", "role", "interaction", ...
  std::string entity_id;
  std::string reason;

  bool operator==(const ValidationIssue&) const = default;
};

// Every broken invariant in `dataset`; empty means valid. Pure.
std::vector<ValidationIssue> ValidateDataset(const Dataset& dataset);

// Joins the issues into one line each, "kind id: reason".
std::string FormatIssues(const std::vector<ValidationIssue>& issues);

// Capacity constraints for every role plus the given floors and quotas.
// Fails when a floor or quota names an undeclared category/label, or when a
// quota target exceeds the largest possible selection.
absl::StatusOr<ConstraintSet> BuildConstraintSet(
    const Dataset& dataset, std::vector<RepresentationFloor> floors,
    std::vector<Quota> quotas);

}  // namespace gesa

#endif  // GESA_CORE_VALIDATE_H_
