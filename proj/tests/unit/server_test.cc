#include <algorithm>
#include <chrono>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "gesa/core/dataset_io.h"
#include "gesa/core/random.h"
#include "gesa/datagen/datagen.h"
#include "gesa/engine/pipeline.h"
#include "gesa/server/server.h"
#include "gesa/server/service.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "httplib.h"
#include "nlohmann/json.hpp"

namespace gesa::server {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using ::testing::HasSubstr;

constexpr auto kWait = std::chrono::minutes(5);

json SmallSpec(uint64_t seed = 2) {
  return datagen::GenSpecToJson(datagen::DefaultSpec({80, 12, 20, 3, 3, 3}, seed));
}

json QuickConfig(uint64_t seed = 4) {
  return {{"seed", seed},
          {"embedding_dim", 64},
          {"optimizer", {{"population", 30}, {"max_generations", 20}}}};
}

TEST(FeedbackTest, FixedPoint) {
  const ObjectiveWeights w{0.5, 0.3, 0.2};
  auto next = ApplyFeedback(w, w, 0.2);
  ASSERT_TRUE(next.ok());
  EXPECT_NEAR(next->merit, 0.5, 1e-15);
  EXPECT_NEAR(next->diversity, 0.3, 1e-15);
  EXPECT_NEAR(next->preference, 0.2, 1e-15);
}

TEST(FeedbackTest, FullStepTakesTheAdjustedWeights) {
  const ObjectiveWeights adjusted{0.1, 0.7, 0.2};
  auto next = ApplyFeedback({0.6, 0.2, 0.2}, adjusted, 1.0);
  ASSERT_TRUE(next.ok());
  EXPECT_EQ(next->merit, adjusted.merit);
  EXPECT_EQ(next->diversity, adjusted.diversity);
  EXPECT_EQ(next->preference, adjusted.preference);
}

TEST(FeedbackTest, SmoothedStep) {
  auto next = ApplyFeedback({0.6, 0.2, 0.2}, {0.2, 0.6, 0.2}, 0.2);
  ASSERT_TRUE(next.ok());
  EXPECT_NEAR(next->merit, 0.52, 1e-12);
  EXPECT_NEAR(next->diversity, 0.28, 1e-12);
  EXPECT_NEAR(next->preference, 0.2, 1e-12);
}

TEST(FeedbackTest, RejectsPointsOffTheSimplex) {
  const ObjectiveWeights ok;
  EXPECT_FALSE(ApplyFeedback(ok, {0.5, 0.5, 0.5}, 0.2).ok());
  EXPECT_FALSE(ApplyFeedback(ok, {1.2, -0.2, 0.0}, 0.2).ok());
  EXPECT_FALSE(ApplyFeedback(ok, {1.0, 0.0, 0.0}, 1.5).ok());
}

TEST(FeedbackTest, WeightsStayOnTheSimplexUnderLongSequences) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    ObjectiveWeights w;
    for (int step = 0; step < 500; ++step) {
      double a = rng.Uniform(), b = rng.Uniform(), c = rng.Uniform();
      const double s = a + b + c;
      ObjectiveWeights adj{a / s, b / s, 1.0 - a / s - b / s};
      if (adj.preference < 0.0) adj.preference = 0.0;
      auto next = ApplyFeedback(w, adj, rng.Uniform());
      ASSERT_TRUE(next.ok()) << next.status();
      w = *next;
      ASSERT_NEAR(w.merit + w.diversity + w.preference, 1.0, 1e-9);
      ASSERT_GE(std::min({w.merit, w.diversity, w.preference}), 0.0);
    }
  }
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("gesa_server_" + std::string(::testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::remove_all(root_);
    Reopen();
  }
  void TearDown() override {
    service_.reset();
    fs::remove_all(root_);
  }

  void Reopen() {
    service_.reset();
    auto s = Service::Open(root_.string());
    ASSERT_TRUE(s.ok()) << s.status();
    service_ = std::move(*s);
  }

  std::string NewDataset(uint64_t seed = 2) {
    auto created = service_->CreateDataset(json::object());
    EXPECT_TRUE(created.ok()) << created.status();
    const std::string id = created->at("id").get<std::string>();
    auto generated = service_->GenerateDataset(id, SmallSpec(seed));
    EXPECT_TRUE(generated.ok()) << generated.status();
    return id;
  }

  std::string FinishedJob(const std::string& dataset, const json& config = QuickConfig()) {
    auto job = service_->SubmitAllocation({{"dataset_id", dataset}, {"config", config}});
    EXPECT_TRUE(job.ok()) << job.status();
    const std::string id = job->at("id").get<std::string>();
    auto done = service_->WaitForJob(id, kWait);
    EXPECT_TRUE(done.ok());
    EXPECT_EQ(done->at("status"), "done") << done->dump();
    return id;
  }

  // Independent re-scoring of a plan payload.
  json Rescore(const std::string& dataset, const json& config, const json& plan) {
    auto d = service_->GetDataset(dataset);
    auto parsed = DatasetFromJson(d->at("dataset"));
    auto cfg = engine::AllocateConfigFromJson(config);
    auto ws = engine::Prepare(*parsed, *cfg);
    AllocationPlan p;
    p.assignments = plan.at("assignments").get<std::map<std::string, std::string>>();
    auto genome = (*ws)->objectives.ToGenome(p);
    const ObjectiveVector v = (*ws)->objectives.Evaluate(*genome).objectives;
    return {{"merit", v.merit}, {"diversity", v.diversity}, {"preference", v.preference}};
  }

  fs::path root_;
  std::unique_ptr<Service> service_;
};

TEST_F(ServiceTest, DatasetLifecycle) {
  auto created = service_->CreateDataset(json::object());
  ASSERT_TRUE(created.ok());
  const std::string id = created->at("id").get<std::string>();
  EXPECT_EQ(created->at("counts").at("candidates"), 0);
  auto generated = service_->GenerateDataset(id, SmallSpec());
  ASSERT_TRUE(generated.ok()) << generated.status();
  EXPECT_TRUE(generated->at("valid").get<bool>());
  auto got = service_->GetDataset(id);
  ASSERT_TRUE(got.ok());
  EXPECT_EQ(got->at("counts").at("candidates"), 80);
  EXPECT_EQ(got->at("dataset").at("candidates").size(), 80u);
  EXPECT_TRUE(fs::exists(root_ / "datasets" / id / "dataset.gesa.json"));
  EXPECT_EQ(service_->GetDataset("ds-9999").status().code(), absl::StatusCode::kNotFound);
}

TEST_F(ServiceTest, GenerateNeedsASeed) {
  auto created = service_->CreateDataset(json::object());
  json spec = SmallSpec();
  spec.erase("seed");
  EXPECT_EQ(service_->GenerateDataset(created->at("id"), spec).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST_F(ServiceTest, PostedDocumentBecomesTheDataset) {
  const Dataset d = *datagen::GenerateDataset(datagen::DefaultSpec({10, 6, 8, 2, 2, 2}, 1));
  auto created = service_->CreateDataset(DatasetToJson(d));
  ASSERT_TRUE(created.ok()) << created.status();
  EXPECT_EQ(created->at("counts").at("candidates"), 10);
  EXPECT_FALSE(service_->CreateDataset(json{{"candidates", 3}}).ok());
}

TEST_F(ServiceTest, SubmitErrors) {
  EXPECT_EQ(service_->SubmitAllocation({{"dataset_id", "ds-0404"}, {"config", QuickConfig()}})
                .status()
                .code(),
            absl::StatusCode::kNotFound);
  const std::string ds = NewDataset();
  EXPECT_EQ(service_->SubmitAllocation({{"dataset_id", ds}, {"config", {{"optimizer", {}}}}})
                .status()
                .code(),
            absl::StatusCode::kInvalidArgument);
  auto empty = service_->CreateDataset(json::object());
  // An empty dataset has nothing to allocate.
  auto job = service_->SubmitAllocation(
      {{"dataset_id", empty->at("id")}, {"config", QuickConfig()}});
  if (job.ok()) {
    auto done = service_->WaitForJob(job->at("id"), kWait);
    EXPECT_EQ(done->at("status"), "failed");
    EXPECT_FALSE(done->contains("result"));
  }
}

TEST_F(ServiceTest, JobRunsToDoneWithAFront) {
  const std::string ds = NewDataset();
  auto job = service_->SubmitAllocation({{"dataset_id", ds}, {"config", QuickConfig()}});
  ASSERT_TRUE(job.ok()) << job.status();
  EXPECT_EQ(job->at("status"), "queued");
  EXPECT_FALSE(job->contains("result"));
  const std::string id = job->at("id").get<std::string>();
  // Poll: statuses only move forward.
  const std::vector<std::string> order = {"queued", "running", "done", "failed"};
  int last = 0;
  for (int i = 0; i < 100000; ++i) {
    auto s = service_->GetJob(id);
    ASSERT_TRUE(s.ok());
    const int pos = static_cast<int>(
        std::find(order.begin(), order.end(), s->at("status").get<std::string>()) -
        order.begin());
    ASSERT_GE(pos, last);
    last = pos;
    if (pos >= 2) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  auto done = service_->WaitForJob(id, kWait);
  ASSERT_EQ(done->at("status"), "done");
  EXPECT_TRUE(done->contains("result"));
  auto front = service_->GetFront(id);
  ASSERT_TRUE(front.ok());
  EXPECT_FALSE(front->at("members").empty());
  for (const char* f : {"job.json", "config.json", "front.json", "plan.json", "trace.csv"}) {
    EXPECT_TRUE(fs::exists(root_ / "datasets" / ds / "jobs" / id / f)) << f;
  }
  // A dataset with jobs is frozen.
  EXPECT_EQ(service_->GenerateDataset(ds, SmallSpec(3)).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST_F(ServiceTest, IdenticalSubmitsGiveIdenticalFronts) {
  const std::string ds = NewDataset();
  const std::string a = FinishedJob(ds);
  const std::string b = FinishedJob(ds);
  ASSERT_NE(a, b);
  json fa = *service_->GetFront(a), fb = *service_->GetFront(b);
  fa.erase("job_id");
  fb.erase("job_id");
  EXPECT_EQ(fa, fb);
}

TEST_F(ServiceTest, OverrideRoundTrip) {
  const std::string ds = NewDataset();
  const std::string job = FinishedJob(ds);
  const json before = *service_->CurrentPlan(job);
  const auto& assignments = before.at("plan").at("assignments");
  ASSERT_FALSE(assignments.empty());
  const std::string cid = assignments.begin().key();

  auto ack = service_->RecordOverride(job, {{"candidate_id", cid},
                                            {"to_role", nullptr},
                                            {"justification", "declined the offer"},
                                            {"actor", "reviewer"},
                                            {"reason", "availability"}});
  ASSERT_TRUE(ack.ok()) << ack.status();
  EXPECT_EQ(ack->at("override").at("from_role"), assignments.begin().value());
  EXPECT_FALSE(ack->at("plan").at("assignments").contains(cid));
  EXPECT_EQ(ack->at("plan").at("objectives"),
            Rescore(ds, QuickConfig(), ack->at("plan")));
  EXPECT_TRUE(ack->contains("fairness"));

  auto list = service_->ListOverrides(job);
  ASSERT_TRUE(list.ok());
  ASSERT_EQ(list->at("overrides").size(), 1u);
  EXPECT_EQ(list->at("overrides")[0].at("candidate_id"), cid);
  EXPECT_EQ(list->at("overrides")[0].at("justification"), "declined the offer");
  EXPECT_EQ(service_->Feedback().at("override_counts").at("availability"), 1);
}

TEST_F(ServiceTest, OverrideRejections) {
  const std::string ds = NewDataset();
  const std::string job = FinishedJob(ds);
  const json plan = service_->CurrentPlan(job)->at("plan");
  std::map<std::string, int> load;
  for (const auto& [c, r] : plan.at("assignments").items()) ++load[r.get<std::string>()];
  auto d = service_->GetDataset(ds);
  std::string full_role;
  for (const json& r : d->at("dataset").at("roles")) {
    if (load[r.at("id").get<std::string>()] == r.at("capacity").get<int>()) {
      full_role = r.at("id").get<std::string>();
      break;
    }
  }
  ASSERT_FALSE(full_role.empty());
  std::string outsider;
  for (const json& c : d->at("dataset").at("candidates")) {
    const std::string id = c.at("id").get<std::string>();
    if (!plan.at("assignments").contains(id)) {
      outsider = id;
      break;
    }
  }
  ASSERT_FALSE(outsider.empty());

  auto full = service_->RecordOverride(
      job, {{"candidate_id", outsider}, {"to_role", full_role}, {"justification", "x"}});
  EXPECT_EQ(full.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(std::string(full.status().message()), HasSubstr("capacity"));

  auto blank = service_->RecordOverride(
      job, {{"candidate_id", outsider}, {"to_role", nullptr}, {"justification", "  \t"}});
  EXPECT_EQ(blank.status().code(), absl::StatusCode::kInvalidArgument);
  auto missing = service_->RecordOverride(
      job, {{"candidate_id", outsider}, {"to_role", full_role}});
  EXPECT_EQ(missing.status().code(), absl::StatusCode::kInvalidArgument);
  auto ghost = service_->RecordOverride(
      job, {{"candidate_id", "nobody"}, {"to_role", nullptr}, {"justification", "x"}});
  EXPECT_EQ(ghost.status().code(), absl::StatusCode::kNotFound);
  auto no_role = service_->RecordOverride(
      job, {{"candidate_id", outsider}, {"to_role", "r-none"}, {"justification", "x"}});
  EXPECT_EQ(no_role.status().code(), absl::StatusCode::kNotFound);
  EXPECT_TRUE(service_->ListOverrides(job)->at("overrides").empty());
  EXPECT_EQ(service_->ListOverrides("job-0404").status().code(),
            absl::StatusCode::kNotFound);
}

TEST_F(ServiceTest, ReplayReproducesTheCurrentPlan) {
  const std::string ds = NewDataset();
  const std::string job = FinishedJob(ds);
  Rng rng(3);
  const json dataset = service_->GetDataset(ds)->at("dataset");
  std::vector<std::string> candidates, roles;
  for (const json& c : dataset.at("candidates")) candidates.push_back(c.at("id"));
  for (const json& r : dataset.at("roles")) roles.push_back(r.at("id"));
  const int members = static_cast<int>(service_->GetFront(job)->at("members").size());
  int accepted = 0;
  for (int step = 0; step < 60; ++step) {
    if (step % 15 == 7) {
      ASSERT_TRUE(service_->Select(job, {{"member", static_cast<int>(rng.UniformInt(members))}}).ok());
      continue;
    }
    json to = rng.Bernoulli(0.5)
                  ? json(nullptr)
                  : json(roles[rng.UniformInt(roles.size())]);
    auto r = service_->RecordOverride(
        job, {{"candidate_id",
               candidates[rng.UniformInt(candidates.size())]},
              {"to_role", to},
              {"justification", "rebalancing"}});
    accepted += r.ok() ? 1 : 0;
  }
  EXPECT_GT(accepted, 5);
  auto state = service_->PlanState(job);
  ASSERT_TRUE(state.ok());
  auto d = DatasetFromJson(dataset);
  auto ws = engine::Prepare(*d, *engine::AllocateConfigFromJson(QuickConfig()));
  auto replayed = ReplayEvents((*ws)->objectives, state->original, state->events);
  ASSERT_TRUE(replayed.ok()) << replayed.status();
  EXPECT_EQ(*replayed, state->current);

  // The same state comes back from disk.
  const json plan = *service_->CurrentPlan(job);
  const json front = *service_->GetFront(job);
  Reopen();
  EXPECT_EQ(*service_->CurrentPlan(job), plan);
  EXPECT_EQ(*service_->GetFront(job), front);
  EXPECT_EQ(service_->ListOverrides(job)->at("overrides").size(),
            static_cast<size_t>(accepted));
}

TEST_F(ServiceTest, RequestTokensMakeRetriesIdempotent) {
  auto a = service_->CreateDataset(json::object(), "tok-1");
  auto b = service_->CreateDataset(json::object(), "tok-1");
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(*a, *b);
  EXPECT_NE(service_->CreateDataset(json::object(), "tok-2")->at("id"), a->at("id"));

  const std::string ds = NewDataset();
  const json submit = {{"dataset_id", ds}, {"config", QuickConfig()}};
  auto j1 = service_->SubmitAllocation(submit, "submit-1");
  auto j2 = service_->SubmitAllocation(submit, "submit-1");
  ASSERT_TRUE(j1.ok() && j2.ok());
  EXPECT_EQ(j1->at("id"), j2->at("id"));
  const std::string job = j1->at("id");
  ASSERT_EQ(service_->WaitForJob(job, kWait)->at("status"), "done");

  const std::string cid =
      service_->CurrentPlan(job)->at("plan").at("assignments").begin().key();
  const json body = {{"candidate_id", cid}, {"to_role", nullptr}, {"justification", "j"}};
  auto o1 = service_->RecordOverride(job, body, "ov-1");
  auto o2 = service_->RecordOverride(job, body, "ov-1");
  ASSERT_TRUE(o1.ok()) << o1.status();
  EXPECT_EQ(*o1, *o2);
  EXPECT_EQ(service_->ListOverrides(job)->at("overrides").size(), 1u);
  // A fresh token repeats the action, which is now a no-op and rejected.
  EXPECT_FALSE(service_->RecordOverride(job, body, "ov-2").ok());

  const json w = {{"merit", 0.2}, {"diversity", 0.6}, {"preference", 0.2}};
  auto f1 = service_->UpdateFeedback(w, "fb-1");
  auto f2 = service_->UpdateFeedback(w, "fb-1");
  ASSERT_TRUE(f1.ok());
  EXPECT_EQ(*f1, *f2);
  EXPECT_EQ(service_->Feedback().at("weights"), f1->at("weights"));
}

TEST_F(ServiceTest, FeedbackSteersLaterSelections) {
  const std::string ds = NewDataset();
  const std::string job = FinishedJob(ds);
  auto fb = service_->UpdateFeedback(
      {{"merit", 0.0}, {"diversity", 1.0}, {"preference", 0.0}, {"eta", 1.0}});
  ASSERT_TRUE(fb.ok()) << fb.status();
  EXPECT_EQ(fb->at("eta"), 0.2);
  auto sel = service_->Select(job, json::object());
  ASSERT_TRUE(sel.ok()) << sel.status();
  const json& policy = sel->at("event").at("policy");
  EXPECT_EQ(policy.at("diversity_weight"), 1.0);
  EXPECT_EQ(policy.at("merit_weight"), 0.0);
  EXPECT_EQ(policy.at("source"), "feedback");
  // The pick is the front's most diverse member.
  double best = -1.0;
  const json front = *service_->GetFront(job);
  for (const json& m : front.at("members")) {
    best = std::max(best, m.at("penalized").at("diversity").get<double>());
  }
  const ObjectiveVector chosen{sel->at("plan").at("objectives").at("merit"),
                               sel->at("plan").at("objectives").at("diversity"),
                               sel->at("plan").at("objectives").at("preference")};
  EXPECT_NEAR(chosen.diversity, best, 1e-12);
  EXPECT_FALSE(
      service_->UpdateFeedback({{"merit", 0.5}, {"diversity", 0.6}, {"preference", 0.0}})
          .ok());
  EXPECT_FALSE(service_->Select(job, {{"member", 9999}}).ok());
}

TEST_F(ServiceTest, ExplanationAndFairnessReport) {
  const std::string ds = NewDataset();
  const std::string job = FinishedJob(ds);
  const json plan = *service_->CurrentPlan(job);
  const json& a = plan.at("plan").at("assignments");
  const std::string c = a.begin().key(), r = a.begin().value();
  auto e = service_->Explanation(job, c, r);
  ASSERT_TRUE(e.ok()) << e.status();
  EXPECT_EQ(e->at("candidate_id"), c);
  EXPECT_TRUE(e->at("assigned").get<bool>());
  for (const char* key : {"summary", "detail", "comparative", "counterfactual"}) {
    EXPECT_TRUE(e->contains(key)) << key;
  }
  EXPECT_EQ(service_->Explanation(job, "nobody", r).status().code(),
            absl::StatusCode::kNotFound);
  auto f = service_->FairnessReport(job);
  ASSERT_TRUE(f.ok()) << f.status();
  EXPECT_TRUE(f->at("report").contains("composite"));
  EXPECT_TRUE(f->contains("objectives"));
}

class HttpTest : public ServiceTest {
 protected:
  void SetUp() override {
    ServiceTest::SetUp();
    http_ = std::make_unique<HttpServer>(service_.get());
    auto port = http_->Bind("127.0.0.1", 0);
    ASSERT_TRUE(port.ok()) << port.status();
    port_ = *port;
    thread_ = std::thread([this] { (void)http_->Listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int i = 0; i < 200; ++i) {
      if (client_->Get("/feedback/weights")) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  void TearDown() override {
    http_->Stop();
    if (thread_.joinable()) thread_.join();
    http_.reset();
    ServiceTest::TearDown();
  }

  std::pair<int, json> Post(const std::string& path, const json& body,
                            const std::string& token = "") {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Idempotency-Key", token);
    auto res = client_->Post(path.c_str(), h, body.dump(), "application/json");
    EXPECT_TRUE(res);
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> Get(const std::string& path) {
    auto res = client_->Get(path.c_str());
    EXPECT_TRUE(res);
    return {res->status, json::parse(res->body)};
  }

  std::unique_ptr<HttpServer> http_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpTest, ReviewFlow) {
  auto [code, ds] = Post("/datasets", json::object());
  ASSERT_EQ(code, 201);
  const std::string id = ds.at("id");
  EXPECT_EQ(Post("/datasets/" + id + "/generate", SmallSpec()).first, 200);
  EXPECT_EQ(Get("/datasets/" + id).second.at("counts").at("roles"), 12);
  EXPECT_EQ(Get("/datasets/nope").first, 404);

  auto [submitted, job] =
      Post("/allocations", {{"dataset_id", id}, {"config", QuickConfig()}});
  ASSERT_EQ(submitted, 202);
  const std::string jid = job.at("id");
  json status;
  for (int i = 0; i < 30000; ++i) {
    status = Get("/allocations/" + jid).second;
    if (status.at("status") == "done" || status.at("status") == "failed") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_EQ(status.at("status"), "done");
  auto [fc, front] = Get("/allocations/" + jid + "/front");
  EXPECT_EQ(fc, 200);
  EXPECT_FALSE(front.at("members").empty());
  auto [sc, sel] = Post("/allocations/" + jid + "/select", {{"member", 0}});
  EXPECT_EQ(sc, 200);
  const auto& a = sel.at("plan").at("assignments");
  ASSERT_FALSE(a.empty());
  const std::string c = a.begin().key(), r = a.begin().value();

  auto [bad, err] = Post("/allocations/" + jid + "/overrides",
                         {{"candidate_id", c}, {"to_role", nullptr}, {"justification", ""}});
  EXPECT_EQ(bad, 400);
  EXPECT_THAT(err.at("error").get<std::string>(), HasSubstr("justification"));
  const json body = {{"candidate_id", c}, {"to_role", nullptr}, {"justification", "ok"}};
  auto [oc, ov] = Post("/allocations/" + jid + "/overrides", body, "t-1");
  EXPECT_EQ(oc, 201);
  EXPECT_EQ(Post("/allocations/" + jid + "/overrides", body, "t-1"),
            std::make_pair(201, ov));
  EXPECT_EQ(Get("/allocations/" + jid + "/overrides").second.at("overrides").size(), 1u);
  EXPECT_EQ(Get("/allocations/" + jid + "/explanations/" + c + "/" + r).first, 200);
  EXPECT_EQ(Get("/allocations/" + jid + "/fairness-report").first, 200);
  EXPECT_EQ(Get("/allocations/job-0404/front").first, 404);

  auto [wc, w] = Post("/feedback/weights",
                      {{"merit", 0.6}, {"diversity", 0.2}, {"preference", 0.2}});
  EXPECT_EQ(wc, 200);
  EXPECT_TRUE(w.contains("weights"));
  auto res = client_->Post("/feedback/weights", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST(ServerOptionsTest, ReadsTheEnvironment) {
  setenv("GESA_DATA_DIR", "/tmp/somewhere", 1);
  setenv("GESA_PORT", "9191", 1);
  auto o = OptionsFromEnvironment();
  ASSERT_TRUE(o.ok());
  EXPECT_EQ(o->data_dir, "/tmp/somewhere");
  EXPECT_EQ(o->port, 9191);
  unsetenv("GESA_PORT");
  EXPECT_EQ(OptionsFromEnvironment()->port, 8080);
  setenv("GESA_PORT", "http", 1);
  EXPECT_FALSE(OptionsFromEnvironment().ok());
  unsetenv("GESA_PORT");
  unsetenv("GESA_DATA_DIR");
}

}  // namespace
}  // namespace gesa::server
