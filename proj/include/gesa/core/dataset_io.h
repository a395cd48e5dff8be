#ifndef GESA_CORE_DATASET_IO_H_
#define GESA_CORE_DATASET_IO_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "gesa/core/types.h"
#include "nlohmann/json.hpp"

namespace gesa {

// Returns a copy with every entity class sorted by id, interactions sorted by
// (candidate, role, outcome) and ground truth sorted by pair.
Dataset Canonicalize(Dataset dataset);

nlohmann::json DatasetToJson(const Dataset& dataset);

// Fails with InvalidArgument when the document does not follow the
// `.gesa.json` schema. Reference integrity is not checked here; see
// ValidateDataset.
absl::StatusOr<Dataset> DatasetFromJson(const nlohmann::json& document);

// Canonical text form: canonicalized entities, sorted keys, two-space indent,
// trailing newline.
std::string SerializeDataset(const Dataset& dataset);

absl::StatusOr<Dataset> ParseDataset(std::string_view text);

absl::StatusOr<Dataset> ReadDataset(const std::string& path);
absl::Status WriteDataset(const Dataset& dataset, const std::string& path);

nlohmann::json PlanToJson(const AllocationPlan& plan);
absl::StatusOr<AllocationPlan> PlanFromJson(const nlohmann::json& document);

nlohmann::json ConstraintSetToJson(const ConstraintSet& constraints);
absl::StatusOr<ConstraintSet> ConstraintSetFromJson(
    const nlohmann::json& document);

// Shared file helpers.
absl::StatusOr<std::string> ReadFileToString(const std::string& path);
absl::Status WriteStringToFile(std::string_view contents,
                               const std::string& path);

}  // namespace gesa

#endif  // GESA_CORE_DATASET_IO_H_
