#include "gesa/server/service.h"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "gesa/core/dataset_io.h"
#include "gesa/core/status_macros.h"
#include "gesa/core/validate.h"
#include "gesa/datagen/datagen.h"
#include "gesa/debias/fairness.h"
#include "gesa/explain/explain.h"

namespace gesa::server {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string NowUtc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string NumberedId(const char* prefix, int n) {
  return absl::StrFormat("%s-%04d", prefix, n);
}

// Suffix of "<prefix>-NNNN", or 0.
int IdNumber(const std::string& id) {
  const size_t dash = id.rfind('-');
  int n = 0;
  if (dash == std::string::npos || !absl::SimpleAtoi(id.substr(dash + 1), &n)) {
    return 0;
  }
  return n;
}

absl::StatusOr<json> ReadJsonFile(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFileToString(path));
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    return absl::DataLossError(absl::StrCat(path, ": malformed JSON"));
  }
  return doc;
}

absl::Status WriteJsonFile(const json& doc, const std::string& path) {
  return WriteStringToFile(doc.dump(2) + "\n", path);
}

absl::Status AppendLine(const std::string& line, const std::string& path) {
  std::ofstream f(path, std::ios::app | std::ios::binary);
  if (!f) return absl::InternalError(absl::StrCat("cannot open ", path));
  f << line << "\n";
  f.flush();
  if (!f) return absl::InternalError(absl::StrCat("cannot write ", path));
  return absl::OkStatus();
}

json DatasetSummary(const std::string& id, const Dataset& d,
                    const std::vector<std::string>& jobs) {
  json issues = json::array();
  for (const ValidationIssue& i : ValidateDataset(d)) {
    issues.push_back(
        {{"entity_kind", i.entity_kind}, {"entity_id", i.entity_id}, {"reason", i.reason}});
  }
  return {{"id", id},
          {"counts",
           {{"candidates", d.candidates.size()},
            {"roles", d.roles.size()},
            {"skills", d.skills.size()},
            {"organizations", d.organizations.size()},
            {"locations", d.locations.size()},
            {"domains", d.domains.size()},
            {"interactions", d.interactions.size()}}},
          {"valid", issues.empty()},
          {"issues", issues},
          {"jobs", jobs}};
}

absl::StatusOr<double> NumberField(const json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_number()) {
    return absl::InvalidArgumentError(absl::StrCat("\"", key, "\" must be a number"));
  }
  return body.at(key).get<double>();
}

absl::StatusOr<std::string> StringField(const json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string()) {
    return absl::InvalidArgumentError(absl::StrCat("\"", key, "\" must be a string"));
  }
  return body.at(key).get<std::string>();
}

absl::StatusOr<objectives::Genome> GenomeFromAssignments(
    const objectives::ObjectiveContext& ctx, const json& assignments) {
  AllocationPlan plan;
  try {
    plan.assignments = assignments.get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("assignments: ", e.what()));
  }
  return ctx.ToGenome(plan);
}

absl::StatusOr<optimizer::Individual> MemberFromJson(
    const objectives::ObjectiveContext& ctx, const json& m) {
  optimizer::Individual ind;
  ASSIGN_OR_RETURN(ind.genome, GenomeFromAssignments(ctx, m.at("assignments")));
  ind.evaluation = ctx.Evaluate(ind.genome);
  const json& p = m.at("penalized");
  ind.penalized = {p.at("merit").get<double>(), p.at("diversity").get<double>(),
                   p.at("preference").get<double>()};
  ind.rank = m.at("rank").get<int>();
  ind.crowding = m.at("crowding").is_null() ? std::numeric_limits<double>::infinity()
                                            : m.at("crowding").get<double>();
  return ind;
}

}  // namespace

absl::Status CheckSimplex(const ObjectiveWeights& w) {
  for (double v : {w.merit, w.diversity, w.preference}) {
    if (!std::isfinite(v) || v < 0.0) {
      return absl::InvalidArgumentError("weights must be finite and non-negative");
    }
  }
  const double sum = w.merit + w.diversity + w.preference;
  if (std::abs(sum - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(
        absl::StrCat("weights must sum to 1, got ", sum));
  }
  return absl::OkStatus();
}

absl::StatusOr<ObjectiveWeights> ApplyFeedback(const ObjectiveWeights& old,
                                               const ObjectiveWeights& adjusted,
                                               double eta) {
  RETURN_IF_ERROR(CheckSimplex(old));
  RETURN_IF_ERROR(CheckSimplex(adjusted));
  if (!(eta >= 0.0 && eta <= 1.0)) {
    return absl::InvalidArgumentError("eta must lie in [0, 1]");
  }
  return ObjectiveWeights{(1.0 - eta) * old.merit + eta * adjusted.merit,
                          (1.0 - eta) * old.diversity + eta * adjusted.diversity,
                          (1.0 - eta) * old.preference + eta * adjusted.preference};
}

json FeedbackToJson(const FeedbackState& s) {
  return {{"weights",
           {{"merit", s.weights.merit},
            {"diversity", s.weights.diversity},
            {"preference", s.weights.preference}}},
          {"override_counts", s.override_counts},
          {"eta", s.eta}};
}

absl::StatusOr<FeedbackState> FeedbackFromJson(const json& d) {
  FeedbackState s;
  try {
    const json& w = d.at("weights");
    s.weights = {w.at("merit").get<double>(), w.at("diversity").get<double>(),
                 w.at("preference").get<double>()};
    s.override_counts = d.at("override_counts").get<std::map<std::string, int>>();
    s.eta = d.at("eta").get<double>();
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("feedback state: ", e.what()));
  }
  RETURN_IF_ERROR(CheckSimplex(s.weights));
  return s;
}

const char* JobStatusName(JobStatus status) {
  switch (status) {
    case JobStatus::kQueued: return "queued";
    case JobStatus::kRunning: return "running";
    case JobStatus::kDone: return "done";
    case JobStatus::kFailed: return "failed";
  }
  return "unknown";
}

absl::StatusOr<objectives::Genome> ReplayEvents(
    const objectives::ObjectiveContext& ctx, const objectives::Genome& original,
    const std::vector<json>& events) {
  objectives::Genome g = original;
  for (const json& e : events) {
    const std::string type = e.value("type", "");
    if (type == "select") {
      ASSIGN_OR_RETURN(g, GenomeFromAssignments(ctx, e.at("assignments")));
      continue;
    }
    if (type != "override") {
      return absl::InvalidArgumentError(absl::StrCat("unknown event type ", type));
    }
    const std::string cid = e.at("candidate_id").get<std::string>();
    const int c = ctx.CandidateIndex(cid);
    if (c < 0) return absl::NotFoundError(absl::StrCat("unknown candidate ", cid));
    const int from = e.at("from_role").is_null()
                         ? -1
                         : ctx.RoleIndex(e.at("from_role").get<std::string>());
    if (g[c] != from) {
      return absl::FailedPreconditionError(
          absl::StrCat("override of ", cid, " does not match the plan"));
    }
    int to = -1;
    if (!e.at("to_role").is_null()) {
      const std::string rid = e.at("to_role").get<std::string>();
      to = ctx.RoleIndex(rid);
      if (to < 0) return absl::NotFoundError(absl::StrCat("unknown role ", rid));
      const int load = static_cast<int>(std::count(g.begin(), g.end(), to));
      if (load >= ctx.capacity(to)) {
        return absl::FailedPreconditionError(absl::StrCat(
            "role ", rid, " is at capacity (", load, "/", ctx.capacity(to), ")"));
      }
    }
    g[c] = to;
  }
  return g;
}

Service::Service(std::string root) : root_(std::move(root)) {}

Service::~Service() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stopping_ = true;
  }
  job_changed_.notify_all();
  if (worker_.joinable()) worker_.join();
}

absl::StatusOr<std::unique_ptr<Service>> Service::Open(const std::string& root) {
  std::error_code ec;
  fs::create_directories(fs::path(root) / "datasets", ec);
  if (ec) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot create ", root, ": ", ec.message()));
  }
  std::unique_ptr<Service> s(new Service(root));
  RETURN_IF_ERROR(s->Load());
  s->worker_ = std::thread([p = s.get()] { p->WorkerLoop(); });
  return s;
}

std::string Service::DatasetDir(const std::string& id) const {
  return (fs::path(root_) / "datasets" / id).string();
}

std::string Service::JobDir(const Job& job) const {
  return (fs::path(DatasetDir(job.dataset_id)) / "jobs" / job.id).string();
}

absl::Status Service::Load() {
  const fs::path feedback = fs::path(root_) / "feedback.json";
  if (fs::exists(feedback)) {
    ASSIGN_OR_RETURN(json doc, ReadJsonFile(feedback.string()));
    ASSIGN_OR_RETURN(feedback_, FeedbackFromJson(doc));
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(fs::path(root_) / "datasets")) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const fs::path& dir : dirs) {
    const std::string id = dir.filename().string();
    ASSIGN_OR_RETURN(Dataset d, ReadDataset((dir / "dataset.gesa.json").string()));
    datasets_[id].dataset = std::move(d);
    next_dataset_ = std::max(next_dataset_, IdNumber(id) + 1);
    if (!fs::exists(dir / "jobs")) continue;
    std::vector<fs::path> job_dirs;
    for (const auto& entry : fs::directory_iterator(dir / "jobs")) {
      if (entry.is_directory()) job_dirs.push_back(entry.path());
    }
    std::sort(job_dirs.begin(), job_dirs.end());
    for (const fs::path& j : job_dirs) RETURN_IF_ERROR(LoadJob(id, j.string()));
  }
  return absl::OkStatus();
}

absl::Status Service::LoadJob(const std::string& dataset_id, const std::string& dir) {
  const fs::path d(dir);
  ASSIGN_OR_RETURN(json record, ReadJsonFile((d / "job.json").string()));
  ASSIGN_OR_RETURN(json config, ReadJsonFile((d / "config.json").string()));
  auto job = std::make_unique<Job>();
  job->id = d.filename().string();
  job->dataset_id = dataset_id;
  job->feedback_selection = record.value("feedback_selection", false);
  ASSIGN_OR_RETURN(job->config, engine::AllocateConfigFromJson(config));
  job->created = record.value("created", "");
  job->started = record.value("started", "");
  job->finished = record.value("finished", "");
  job->error = record.value("error", "");
  const std::string status = record.value("status", "");
  next_job_ = std::max(next_job_, IdNumber(job->id) + 1);
  datasets_[dataset_id].jobs.push_back(job->id);

  if (status == "queued") {
    queue_.push_back(job->id);
  } else if (status == "running") {
    job->status = JobStatus::kFailed;
    job->error = "interrupted by a restart";
    job->finished = NowUtc();
    RETURN_IF_ERROR(WriteJobRecord(*job));
  } else if (status == "failed") {
    job->status = JobStatus::kFailed;
  } else if (status == "done") {
    ASSIGN_OR_RETURN(std::unique_ptr<engine::Workspace> ws,
                     engine::Prepare(datasets_[dataset_id].dataset, job->config));
    ASSIGN_OR_RETURN(json front, ReadJsonFile((d / "front.json").string()));
    ASSIGN_OR_RETURN(json selected, ReadJsonFile((d / "selected.json").string()));
    try {
      for (const json& m : front.at("members")) {
        ASSIGN_OR_RETURN(optimizer::Individual ind, MemberFromJson(ws->objectives, m));
        job->front.members.push_back(std::move(ind));
      }
      // Only the count of trace rows is kept in memory; trace.csv has them.
      job->front.trace.resize(front.at("generations").get<size_t>());
      job->front.diversity_weight = front.at("diversity_weight").get<double>();
      job->front.escalation_events = front.at("escalation_events").get<int>();
      job->front.feasible_found = front.at("feasible_found").get<bool>();
      ASSIGN_OR_RETURN(job->plan.original,
                       GenomeFromAssignments(ws->objectives, selected.at("assignments")));
    } catch (const json::exception& e) {
      return absl::DataLossError(absl::StrCat(dir, ": ", e.what()));
    }
    const fs::path events = d / "events.jsonl";
    if (fs::exists(events)) {
      ASSIGN_OR_RETURN(std::string text, ReadFileToString(events.string()));
      for (absl::string_view line : absl::StrSplit(text, '\n', absl::SkipEmpty())) {
        json e = json::parse(line, nullptr, false);
        if (e.is_discarded()) {
          return absl::DataLossError(absl::StrCat(events.string(), ": malformed line"));
        }
        job->plan.events.push_back(std::move(e));
      }
    }
    ASSIGN_OR_RETURN(job->plan.current, ReplayEvents(ws->objectives, job->plan.original,
                                                     job->plan.events));
    job->workspace = std::move(ws);
    job->status = JobStatus::kDone;
  } else {
    return absl::DataLossError(absl::StrCat(dir, ": unknown status ", status));
  }
  jobs_[job->id] = std::move(job);
  return absl::OkStatus();
}

absl::StatusOr<json> Service::Once(
    const std::string& scope, const std::string& token,
    const std::function<absl::StatusOr<json>()>& fn) {
  std::lock_guard<std::mutex> writes(write_mu_);
  if (token.empty()) return fn();
  const std::string key = absl::StrCat(scope, "\n", token);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = replies_.find(key);
    if (it != replies_.end()) return it->second;
  }
  absl::StatusOr<json> reply = fn();
  std::lock_guard<std::mutex> lock(mu_);
  replies_.emplace(key, reply);
  return reply;
}

absl::StatusOr<json> Service::CreateDataset(const json& body, const std::string& token) {
  return Once("POST /datasets", token, [&]() -> absl::StatusOr<json> {
    if (!body.is_object()) {
      return absl::InvalidArgumentError("body must be an object");
    }
    Dataset dataset;
    if (!body.empty()) {
      ASSIGN_OR_RETURN(dataset, DatasetFromJson(body));
    }
    std::lock_guard<std::mutex> lock(mu_);
    const std::string id = NumberedId("ds", next_dataset_);
    std::error_code ec;
    fs::create_directories(DatasetDir(id), ec);
    if (ec) return absl::InternalError(ec.message());
    RETURN_IF_ERROR(WriteDataset(
        dataset, (fs::path(DatasetDir(id)) / "dataset.gesa.json").string()));
    ++next_dataset_;
    datasets_[id].dataset = std::move(dataset);
    return DatasetSummary(id, datasets_[id].dataset, {});
  });
}

absl::StatusOr<json> Service::GetDataset(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = datasets_.find(id);
  if (it == datasets_.end()) {
    return absl::NotFoundError(absl::StrCat("unknown dataset ", id));
  }
  json out = DatasetSummary(id, it->second.dataset, it->second.jobs);
  out["dataset"] = DatasetToJson(Canonicalize(it->second.dataset));
  return out;
}

absl::StatusOr<json> Service::GenerateDataset(const std::string& id, const json& spec,
                                              const std::string& token) {
  return Once(absl::StrCat("POST /datasets/", id, "/generate"), token,
              [&]() -> absl::StatusOr<json> {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = datasets_.find(id);
      if (it == datasets_.end()) {
        return absl::NotFoundError(absl::StrCat("unknown dataset ", id));
      }
      if (!it->second.jobs.empty()) {
        return absl::FailedPreconditionError(
            absl::StrCat("dataset ", id, " is used by allocation jobs"));
      }
    }
    if (!spec.is_object() || !spec.contains("seed")) {
      return absl::InvalidArgumentError("the spec needs an explicit \"seed\"");
    }
    ASSIGN_OR_RETURN(datagen::GenSpec parsed, datagen::GenSpecFromJson(spec));
    ASSIGN_OR_RETURN(Dataset dataset, datagen::GenerateDataset(parsed));
    std::lock_guard<std::mutex> lock(mu_);
    DatasetEntry& entry = datasets_[id];
    RETURN_IF_ERROR(WriteDataset(
        dataset, (fs::path(DatasetDir(id)) / "dataset.gesa.json").string()));
    entry.dataset = std::move(dataset);
    return DatasetSummary(id, entry.dataset, entry.jobs);
  });
}

json Service::JobJson(const Job& job) const {
  json out = {{"id", job.id},
              {"dataset_id", job.dataset_id},
              {"status", JobStatusName(job.status)},
              {"created", job.created},
              {"started", job.started.empty() ? json(nullptr) : json(job.started)},
              {"finished", job.finished.empty() ? json(nullptr) : json(job.finished)},
              {"feedback_selection", job.feedback_selection},
              {"config", engine::AllocateConfigToJson(job.config)}};
  if (job.status == JobStatus::kFailed) out["error"] = job.error;
  if (job.status == JobStatus::kDone) {
    out["result"] = {{"front_size", job.front.members.size()},
                     {"generations", job.front.trace.size()},
                     {"events", job.plan.events.size()}};
  }
  return out;
}

absl::Status Service::WriteJobRecord(const Job& job) const {
  json record = JobJson(job);
  record.erase("config");
  record.erase("result");
  return WriteJsonFile(record, (fs::path(JobDir(job)) / "job.json").string());
}

absl::Status Service::WritePlan(const Job& job) const {
  const AllocationPlan plan = job.workspace->objectives.ToPlan(job.plan.current);
  return WriteJsonFile(PlanToJson(plan), (fs::path(JobDir(job)) / "plan.json").string());
}

absl::StatusOr<json> Service::SubmitAllocation(const json& body,
                                               const std::string& token) {
  return Once("POST /allocations", token, [&]() -> absl::StatusOr<json> {
    if (!body.is_object()) return absl::InvalidArgumentError("body must be an object");
    ASSIGN_OR_RETURN(std::string dataset_id, StringField(body, "dataset_id"));
    if (!body.contains("config")) return absl::InvalidArgumentError("missing \"config\"");
    const json& config = body.at("config");
    std::unique_lock<std::mutex> lock(mu_);
    auto it = datasets_.find(dataset_id);
    if (it == datasets_.end()) {
      return absl::NotFoundError(absl::StrCat("unknown dataset ", dataset_id));
    }
    const auto issues = ValidateDataset(it->second.dataset);
    if (!issues.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("dataset ", dataset_id, " is invalid: ", FormatIssues(issues)));
    }
    auto job = std::make_unique<Job>();
    job->id = NumberedId("job", next_job_);
    job->dataset_id = dataset_id;
    ASSIGN_OR_RETURN(job->config,
                     engine::AllocateConfigFromJson(config, DatasetDir(dataset_id)));
    if (!config.contains("selection")) {
      job->feedback_selection = true;
      job->config.selection.merit_weight = feedback_.weights.merit;
      job->config.selection.diversity_weight = feedback_.weights.diversity;
      job->config.selection.preference_weight = feedback_.weights.preference;
    }
    job->created = NowUtc();
    std::error_code ec;
    fs::create_directories(JobDir(*job), ec);
    if (ec) return absl::InternalError(ec.message());
    RETURN_IF_ERROR(WriteJsonFile(engine::AllocateConfigToJson(job->config),
                                  (fs::path(JobDir(*job)) / "config.json").string()));
    RETURN_IF_ERROR(WriteJobRecord(*job));
    ++next_job_;
    it->second.jobs.push_back(job->id);
    json out = JobJson(*job);
    queue_.push_back(job->id);
    jobs_[job->id] = std::move(job);
    lock.unlock();
    job_changed_.notify_all();
    return out;
  });
}

void Service::WorkerLoop() {
  while (true) {
    std::string id;
    {
      std::unique_lock<std::mutex> lock(mu_);
      job_changed_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
    }
    RunJob(id);
  }
}

void Service::RunJob(const std::string& id) {
  Dataset dataset;
  engine::AllocateConfig config;
  {
    std::lock_guard<std::mutex> lock(mu_);
    Job& job = *jobs_.at(id);
    job.status = JobStatus::kRunning;
    job.started = NowUtc();
    (void)WriteJobRecord(job);
    dataset = datasets_.at(job.dataset_id).dataset;
    config = job.config;
  }
  job_changed_.notify_all();

  absl::StatusOr<std::unique_ptr<engine::Workspace>> ws =
      engine::Prepare(dataset, config);
  absl::StatusOr<engine::AllocationResult> result =
      ws.ok() ? engine::Allocate(**ws) : absl::StatusOr<engine::AllocationResult>(ws.status());
  std::string front_text, selected_text, trace_text;
  if (result.ok()) {
    front_text = engine::FrontToJson(**ws, result->front).dump(2) + "\n";
    selected_text = PlanToJson(result->plan).dump(2) + "\n";
    trace_text = optimizer::TraceCsv(result->front.trace);
  }

  {
    std::lock_guard<std::mutex> lock(mu_);
    Job& job = *jobs_.at(id);
    const fs::path dir(JobDir(job));
    absl::Status status = result.status();
    if (status.ok()) status = WriteStringToFile(front_text, (dir / "front.json").string());
    if (status.ok()) {
      status = WriteStringToFile(selected_text, (dir / "selected.json").string());
    }
    if (status.ok()) status = WriteStringToFile(trace_text, (dir / "trace.csv").string());
    if (status.ok()) {
      job.workspace = std::move(*ws);
      job.front = std::move(result->front);
      job.plan.original = result->selected.genome;
      job.plan.current = result->selected.genome;
      status = WritePlan(job);
    }
    job.finished = NowUtc();
    if (status.ok()) {
      job.status = JobStatus::kDone;
    } else {
      job.status = JobStatus::kFailed;
      job.error = std::string(status.message());
      job.workspace.reset();
      job.front = {};
    }
    (void)WriteJobRecord(job);
  }
  job_changed_.notify_all();
}

absl::StatusOr<json> Service::GetJob(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return absl::NotFoundError(absl::StrCat("unknown job ", id));
  return JobJson(*it->second);
}

absl::StatusOr<json> Service::WaitForJob(const std::string& id,
                                         std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return absl::NotFoundError(absl::StrCat("unknown job ", id));
  const Job& job = *it->second;
  job_changed_.wait_for(lock, timeout, [&] {
    return job.status == JobStatus::kDone || job.status == JobStatus::kFailed;
  });
  return JobJson(job);
}

absl::StatusOr<Service::Job*> Service::DoneJob(const std::string& id) {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return absl::NotFoundError(absl::StrCat("unknown job ", id));
  if (it->second->status != JobStatus::kDone) {
    return absl::FailedPreconditionError(
        absl::StrCat("job ", id, " is ", JobStatusName(it->second->status)));
  }
  return it->second.get();
}

absl::StatusOr<const Service::Job*> Service::DoneJob(const std::string& id) const {
  return const_cast<Service*>(this)->DoneJob(id);
}

absl::StatusOr<json> Service::GetFront(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  ASSIGN_OR_RETURN(const Job* job, DoneJob(id));
  json out = engine::FrontToJson(*job->workspace, job->front);
  out["job_id"] = id;
  return out;
}

absl::StatusOr<json> Service::PlanPayload(const Job& job) const {
  const engine::Workspace& ws = *job.workspace;
  json out = {{"job_id", job.id},
              {"plan", PlanToJson(ws.objectives.ToPlan(job.plan.current))}};
  absl::StatusOr<debias::FairnessReport> report = engine::AuditPlan(ws, job.plan.current);
  out["fairness"] = report.ok() ? debias::FairnessReportToJson(*report)
                                : json{{"error", std::string(report.status().message())}};
  return out;
}

absl::StatusOr<json> Service::Select(const std::string& id, const json& body,
                                     const std::string& token) {
  return Once(absl::StrCat("POST /allocations/", id, "/select"), token,
              [&]() -> absl::StatusOr<json> {
    if (!body.is_object()) return absl::InvalidArgumentError("body must be an object");
    std::lock_guard<std::mutex> lock(mu_);
    ASSIGN_OR_RETURN(Job* job, DoneJob(id));
    const engine::Workspace& ws = *job->workspace;
    json event = {{"type", "select"}};
    objectives::Genome genome;
    try {
      if (body.contains("member")) {
        const int m = body.at("member").get<int>();
        if (m < 0 || m >= static_cast<int>(job->front.members.size())) {
          return absl::InvalidArgumentError(absl::StrCat("no front member ", m));
        }
        genome = job->front.members[m].genome;
        event["member"] = m;
      } else {
        optimizer::SelectionPolicy policy{feedback_.weights.merit,
                                          feedback_.weights.diversity,
                                          feedback_.weights.preference,
                                          {}};
        const bool explicit_weights = body.contains("merit_weight") ||
                                      body.contains("diversity_weight") ||
                                      body.contains("preference_weight");
        if (explicit_weights) {
          policy.merit_weight = body.value("merit_weight", 0.0);
          policy.diversity_weight = body.value("diversity_weight", 0.0);
          policy.preference_weight = body.value("preference_weight", 0.0);
        }
        if (body.contains("mandatory")) {
          policy.mandatory = body.at("mandatory").get<std::set<std::string>>();
        }
        for (double w : {policy.merit_weight, policy.diversity_weight,
                         policy.preference_weight}) {
          if (!std::isfinite(w) || w < 0.0) {
            return absl::InvalidArgumentError("policy weights must be non-negative");
          }
        }
        ASSIGN_OR_RETURN(engine::AllocationResult r,
                         engine::Reselect(ws, job->front, policy));
        genome = r.selected.genome;
        event["policy"] = {{"merit_weight", policy.merit_weight},
                           {"diversity_weight", policy.diversity_weight},
                           {"preference_weight", policy.preference_weight},
                           {"mandatory", policy.mandatory},
                           {"source", explicit_weights ? "request" : "feedback"}};
      }
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(e.what());
    }
    event["seq"] = job->plan.events.size();
    event["timestamp"] = NowUtc();
    event["assignments"] = ws.objectives.ToPlan(genome).assignments;
    RETURN_IF_ERROR(
        AppendLine(event.dump(), (fs::path(JobDir(*job)) / "events.jsonl").string()));
    job->plan.events.push_back(event);
    job->plan.current = std::move(genome);
    RETURN_IF_ERROR(WritePlan(*job));
    ASSIGN_OR_RETURN(json out, PlanPayload(*job));
    event.erase("assignments");
    out["event"] = event;
    return out;
  });
}

absl::StatusOr<json> Service::RecordOverride(const std::string& id, const json& body,
                                             const std::string& token) {
  return Once(absl::StrCat("POST /allocations/", id, "/overrides"), token,
              [&]() -> absl::StatusOr<json> {
    if (!body.is_object()) return absl::InvalidArgumentError("body must be an object");
    std::lock_guard<std::mutex> lock(mu_);
    ASSIGN_OR_RETURN(Job* job, DoneJob(id));
    const objectives::ObjectiveContext& ctx = job->workspace->objectives;
    ASSIGN_OR_RETURN(std::string cid, StringField(body, "candidate_id"));
    const int c = ctx.CandidateIndex(cid);
    if (c < 0) return absl::NotFoundError(absl::StrCat("unknown candidate ", cid));
    if (!body.contains("to_role")) {
      return absl::InvalidArgumentError("missing \"to_role\" (null unassigns)");
    }
    json to_role = body.at("to_role");
    if (!to_role.is_null()) {
      if (!to_role.is_string()) {
        return absl::InvalidArgumentError("\"to_role\" must be a string or null");
      }
      if (ctx.RoleIndex(to_role.get<std::string>()) < 0) {
        return absl::NotFoundError(
            absl::StrCat("unknown role ", to_role.get<std::string>()));
      }
    }
    const std::string justification =
        body.contains("justification") && body.at("justification").is_string()
            ? body.at("justification").get<std::string>()
            : "";
    if (absl::StripAsciiWhitespace(justification).empty()) {
      return absl::InvalidArgumentError("an override needs a non-empty justification");
    }
    const int from = job->plan.current[c];
    const json from_role =
        from < 0 ? json(nullptr) : json(ctx.dataset().roles[from].id);
    if (from_role == to_role) {
      return absl::InvalidArgumentError(
          absl::StrCat("candidate ", cid, " already has that assignment"));
    }
    const std::string reason = body.value("reason", "unspecified");
    json event = {{"type", "override"},
                  {"seq", job->plan.events.size()},
                  {"job_id", id},
                  {"candidate_id", cid},
                  {"from_role", from_role},
                  {"to_role", to_role},
                  {"justification", justification},
                  {"actor", body.value("actor", "")},
                  {"reason", reason},
                  {"timestamp", NowUtc()}};
    // Applying the event is the capacity check.
    ASSIGN_OR_RETURN(objectives::Genome next,
                     ReplayEvents(ctx, job->plan.current, std::vector<json>{event}));
    RETURN_IF_ERROR(
        AppendLine(event.dump(), (fs::path(JobDir(*job)) / "events.jsonl").string()));
    job->plan.events.push_back(event);
    job->plan.current = std::move(next);
    RETURN_IF_ERROR(WritePlan(*job));
    ++feedback_.override_counts[reason];
    RETURN_IF_ERROR(WriteJsonFile(FeedbackToJson(feedback_),
                                  (fs::path(root_) / "feedback.json").string()));
    ASSIGN_OR_RETURN(json out, PlanPayload(*job));
    out["override"] = event;
    return out;
  });
}

absl::StatusOr<json> Service::ListOverrides(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  ASSIGN_OR_RETURN(const Job* job, DoneJob(id));
  json list = json::array();
  for (const json& e : job->plan.events) {
    if (e.value("type", "") == "override") list.push_back(e);
  }
  return json{{"job_id", id}, {"overrides", list}};
}

absl::StatusOr<json> Service::CurrentPlan(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  ASSIGN_OR_RETURN(const Job* job, DoneJob(id));
  return PlanPayload(*job);
}

absl::StatusOr<JobPlanState> Service::PlanState(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  ASSIGN_OR_RETURN(const Job* job, DoneJob(id));
  return job->plan;
}

absl::StatusOr<json> Service::Explanation(const std::string& id,
                                          const std::string& candidate,
                                          const std::string& role) const {
  std::shared_ptr<const engine::Workspace> ws;
  objectives::Genome current;
  double multiplier = 1.0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    ASSIGN_OR_RETURN(const Job* job, DoneJob(id));
    ws = job->workspace;
    current = job->plan.current;
    multiplier = job->front.diversity_weight;
  }
  const int c = ws->objectives.CandidateIndex(candidate);
  if (c < 0) return absl::NotFoundError(absl::StrCat("unknown candidate ", candidate));
  const int r = ws->objectives.RoleIndex(role);
  if (r < 0) return absl::NotFoundError(absl::StrCat("unknown role ", role));
  ASSIGN_OR_RETURN(explain::ExplainContext ctx,
                   engine::MakeExplainContext(*ws, ws->objectives.ToPlan(current),
                                              multiplier));
  // Compared against up to three others holding the same role.
  std::vector<int> alternates;
  for (int i = 0; i < static_cast<int>(current.size()) && alternates.size() < 3; ++i) {
    if (i != c && current[i] == r) alternates.push_back(i);
  }
  ASSIGN_OR_RETURN(explain::ExplanationBundle bundle,
                   explain::ExplainAllocation(ctx, c, r, alternates));
  json out = explain::BundleToJson(bundle);
  out["job_id"] = id;
  out["assigned"] = current[c] == r;
  return out;
}

absl::StatusOr<json> Service::FairnessReport(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  ASSIGN_OR_RETURN(const Job* job, DoneJob(id));
  const engine::Workspace& ws = *job->workspace;
  ASSIGN_OR_RETURN(debias::FairnessReport report, engine::AuditPlan(ws, job->plan.current));
  const AllocationPlan plan = ws.objectives.ToPlan(job->plan.current);
  json out = PlanToJson(plan);
  out.erase("assignments");
  out["job_id"] = id;
  out["report"] = debias::FairnessReportToJson(report);
  return out;
}

absl::StatusOr<json> Service::UpdateFeedback(const json& body, const std::string& token) {
  return Once("POST /feedback/weights", token, [&]() -> absl::StatusOr<json> {
    if (!body.is_object()) return absl::InvalidArgumentError("body must be an object");
    ObjectiveWeights adjusted;
    ASSIGN_OR_RETURN(adjusted.merit, NumberField(body, "merit"));
    ASSIGN_OR_RETURN(adjusted.diversity, NumberField(body, "diversity"));
    ASSIGN_OR_RETURN(adjusted.preference, NumberField(body, "preference"));
    std::lock_guard<std::mutex> lock(mu_);
    double eta = feedback_.eta;
    if (body.contains("eta")) {
      ASSIGN_OR_RETURN(eta, NumberField(body, "eta"));
    }
    ASSIGN_OR_RETURN(ObjectiveWeights next,
                     ApplyFeedback(feedback_.weights, adjusted, eta));
    FeedbackState state = feedback_;
    state.weights = next;
    RETURN_IF_ERROR(WriteJsonFile(FeedbackToJson(state),
                                  (fs::path(root_) / "feedback.json").string()));
    feedback_ = std::move(state);
    return FeedbackToJson(feedback_);
  });
}

json Service::Feedback() const {
  std::lock_guard<std::mutex> lock(mu_);
  return FeedbackToJson(feedback_);
}

}  // namespace gesa::server
