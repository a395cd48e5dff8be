#ifndef GESA_SERVER_SERVICE_H_
#define GESA_SERVER_SERVICE_H_

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "gesa/core/types.h"
#include "gesa/engine/pipeline.h"
#include "gesa/objectives/objectives.h"
#include "gesa/optimizer/nsga2.h"
#include "nlohmann/json.hpp"

namespace gesa::server {

struct ObjectiveWeights {
  double merit = 1.0 / 3.0;
  double diversity = 1.0 / 3.0;
  double preference = 1.0 / 3.0;
};

// Non-negative, finite, summing to 1 within 1e-9.
absl::Status CheckSimplex(const ObjectiveWeights& w);

// (1 - eta) * old + eta * adjusted.
absl::StatusOr<ObjectiveWeights> ApplyFeedback(const ObjectiveWeights& old,
                                               const ObjectiveWeights& adjusted,
                                               double eta);

struct FeedbackState {
  ObjectiveWeights weights;
  std::map<std::string, int> override_counts;  // by reason category
  double eta = 0.2;
};

nlohmann::json FeedbackToJson(const FeedbackState& state);
absl::StatusOr<FeedbackState> FeedbackFromJson(const nlohmann::json& document);

enum class JobStatus { kQueued, kRunning, kDone, kFailed };
const char* JobStatusName(JobStatus status);

// Plan state of a finished job. `events` is the job's append-only log of
// "select" and "override" records.
struct JobPlanState {
  objectives::Genome original;
  objectives::Genome current;
  std::vector<nlohmann::json> events;
};

// Replays `events` over `original`: a select event replaces the plan with its
// assignments, an override moves one candidate. Fails on an event the plan
// cannot take.
absl::StatusOr<objectives::Genome> ReplayEvents(
    const objectives::ObjectiveContext& ctx, const objectives::Genome& original,
    const std::vector<nlohmann::json>& events);

// Dataset management, allocation jobs and the review loop over a
// persistence root:
//   <root>/feedback.json
//   <root>/datasets/<id>/dataset.gesa.json
//   <root>/datasets/<id>/jobs/<job>/{job.json, config.json, front.json,
//                                    plan.json, trace.csv, events.jsonl}
// Every mutating call takes an optional request token; a repeated token
// returns the first call's result without acting again. Jobs run one at a
// time on a worker thread. Datasets become read-only once a job uses them.
class Service {
 public:
  static absl::StatusOr<std::unique_ptr<Service>> Open(const std::string& root);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Body: a dataset document, or an empty object for an empty dataset.
  absl::StatusOr<nlohmann::json> CreateDataset(const nlohmann::json& body,
                                               const std::string& token = "");
  absl::StatusOr<nlohmann::json> GetDataset(const std::string& id) const;
  // Body: a generator spec with an explicit seed.
  absl::StatusOr<nlohmann::json> GenerateDataset(const std::string& id,
                                                 const nlohmann::json& spec,
                                                 const std::string& token = "");

  // Body: {"dataset_id": ..., "config": <allocation config>}. Without a
  // "selection" block the current feedback weights pick the plan.
  absl::StatusOr<nlohmann::json> SubmitAllocation(const nlohmann::json& body,
                                                  const std::string& token = "");
  absl::StatusOr<nlohmann::json> GetJob(const std::string& job) const;
  // Blocks until the job is done or failed, or the timeout passes.
  absl::StatusOr<nlohmann::json> WaitForJob(const std::string& job,
                                            std::chrono::milliseconds timeout);
  absl::StatusOr<nlohmann::json> GetFront(const std::string& job) const;

  // Body: {"member": i} or policy weights {merit_weight, diversity_weight,
  // preference_weight, mandatory}; empty uses the feedback weights.
  absl::StatusOr<nlohmann::json> Select(const std::string& job,
                                        const nlohmann::json& body,
                                        const std::string& token = "");

  // Body: {candidate_id, to_role (null unassigns), justification, actor,
  // reason}.
  absl::StatusOr<nlohmann::json> RecordOverride(const std::string& job,
                                                const nlohmann::json& body,
                                                const std::string& token = "");
  absl::StatusOr<nlohmann::json> ListOverrides(const std::string& job) const;
  absl::StatusOr<nlohmann::json> CurrentPlan(const std::string& job) const;
  absl::StatusOr<JobPlanState> PlanState(const std::string& job) const;

  absl::StatusOr<nlohmann::json> Explanation(const std::string& job,
                                             const std::string& candidate,
                                             const std::string& role) const;
  absl::StatusOr<nlohmann::json> FairnessReport(const std::string& job) const;

  // Body: {merit, diversity, preference} on the simplex, optional eta.
  absl::StatusOr<nlohmann::json> UpdateFeedback(const nlohmann::json& body,
                                                const std::string& token = "");
  nlohmann::json Feedback() const;

 private:
  struct DatasetEntry {
    Dataset dataset;
    std::vector<std::string> jobs;
  };
  struct Job {
    std::string id;
    std::string dataset_id;
    engine::AllocateConfig config;
    bool feedback_selection = false;
    JobStatus status = JobStatus::kQueued;
    std::string created, started, finished, error;
    std::shared_ptr<const engine::Workspace> workspace;
    optimizer::ParetoFront front;
    JobPlanState plan;
  };

  explicit Service(std::string root);

  absl::Status Load();
  absl::Status LoadJob(const std::string& dataset_id, const std::string& dir);
  void WorkerLoop();
  void RunJob(const std::string& id);

  std::string DatasetDir(const std::string& id) const;
  std::string JobDir(const Job& job) const;
  absl::Status WriteJobRecord(const Job& job) const;
  absl::Status WritePlan(const Job& job) const;
  nlohmann::json JobJson(const Job& job) const;
  absl::StatusOr<Job*> DoneJob(const std::string& id);
  absl::StatusOr<const Job*> DoneJob(const std::string& id) const;
  absl::StatusOr<nlohmann::json> PlanPayload(const Job& job) const;

  // Runs `fn` unless `token` was seen before under `scope`.
  absl::StatusOr<nlohmann::json> Once(
      const std::string& scope, const std::string& token,
      const std::function<absl::StatusOr<nlohmann::json>()>& fn);

  std::string root_;
  // Held across a whole mutating call; mu_ guards the state below.
  std::mutex write_mu_;
  mutable std::mutex mu_;
  std::condition_variable job_changed_;
  std::map<std::string, DatasetEntry> datasets_;
  std::map<std::string, std::unique_ptr<Job>> jobs_;
  std::deque<std::string> queue_;
  FeedbackState feedback_;
  std::map<std::string, absl::StatusOr<nlohmann::json>> replies_;
  int next_dataset_ = 1;
  int next_job_ = 1;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace gesa::server

#endif  // GESA_SERVER_SERVICE_H_
