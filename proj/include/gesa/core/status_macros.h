#ifndef GESA_CORE_STATUS_MACROS_H_
#define GESA_CORE_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define GESA_STATUS_CONCAT_INNER_(x, y) x##y
#define GESA_STATUS_CONCAT_(x, y) GESA_STATUS_CONCAT_INNER_(x, y)

// Returns early from the enclosing function if `expr` is not OK.
#define RETURN_IF_ERROR(expr)                 \
  do {                                        \
    const absl::Status _status = (expr);      \
    if (!_status.ok()) return _status;        \
  } while (0)

#define ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                           \
  if (!statusor.ok()) return statusor.status();      \
  lhs = std::move(statusor).value()

// Evaluates `rexpr` (a StatusOr) and assigns its value to `lhs`, or returns
// the error status.
#define ASSIGN_OR_RETURN(lhs, rexpr) \
  ASSIGN_OR_RETURN_IMPL_(GESA_STATUS_CONCAT_(_statusor_, __LINE__), lhs, rexpr)

#endif  // GESA_CORE_STATUS_MACROS_H_
