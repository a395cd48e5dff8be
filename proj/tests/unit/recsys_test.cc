#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gesa/core/random.h"
#include "gesa/recsys/factor.h"
#include "gesa/recsys/fusion.h"
#include "gesa/recsys/ivfpq.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace gesa::recsys {
namespace {

VectorSet Small(int n, int d, uint64_t seed) {
  return GaussianMixtureVectors(n, d, 8, 0.5, seed);
}

double Recall(const std::vector<Neighbor>& got, const std::vector<Neighbor>& truth) {
  std::set<std::string> want;
  for (const Neighbor& n : truth) want.insert(n.id);
  int hit = 0;
  for (const Neighbor& n : got) hit += want.contains(n.id) ? 1 : 0;
  return static_cast<double>(hit) / truth.size();
}

TEST(IvfPqTest, SingleListHoldsEverything) {
  const VectorSet v = Small(300, 16, 1);
  auto index = IvfPqIndex::Build(v, {1, 4, 5, 1});
  ASSERT_TRUE(index.ok()) << index.status();
  ASSERT_EQ(index->lists().size(), 1u);
  EXPECT_EQ(index->lists()[0].size(), 300u);
}

TEST(IvfPqTest, DeterministicBuild) {
  const VectorSet v = Small(500, 16, 2);
  auto a = IvfPqIndex::Build(v, {8, 4, 10, 3});
  auto b = IvfPqIndex::Build(v, {8, 4, 10, 3});
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_TRUE(*a == *b);
  EXPECT_EQ(a->Serialize(), b->Serialize());
}

TEST(IvfPqTest, EveryIdInExactlyOneList) {
  const VectorSet v = GaussianMixtureVectors(10000, 64, 100, 1.0, 3);
  auto index = IvfPqIndex::Build(v, {64, 8, 5, 3});
  ASSERT_TRUE(index.ok());
  std::vector<int> seen(10000, 0);
  for (const auto& list : index->lists()) {
    for (int i : list) ++seen[i];
  }
  EXPECT_THAT(seen, ::testing::Each(1));
}

TEST(IvfPqTest, DefaultNlistIsRootCount) {
  const VectorSet v = Small(400, 8, 4);
  auto index = IvfPqIndex::Build(v, {0, 2, 3, 1});
  ASSERT_TRUE(index.ok());
  EXPECT_EQ(index->nlist(), 20);
  EXPECT_EQ(index->ksub(), 256);
}

TEST(IvfPqTest, SelfMatchAndFullRanking) {
  const VectorSet v = Small(600, 16, 5);
  auto index = IvfPqIndex::Build(v, {10, 4, 10, 5});
  ASSERT_TRUE(index.ok());
  for (int i : {0, 17, 599}) {
    auto r = index->Query(v.data.row(i).transpose(), 1, 10, true);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->neighbors[0].id, v.ids[i]);
    EXPECT_EQ(r->neighbors[0].distance, 0.0);
  }
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd q(16);
    for (int j = 0; j < 16; ++j) q[j] = rng.Normal();
    auto ann = index->Query(q, 600, 10, true);
    auto exact = ExactKnn(v, q, 600);
    ASSERT_TRUE(ann.ok() && exact.ok());
    EXPECT_EQ(ann->neighbors, exact->neighbors);
  }
}

TEST(IvfPqTest, TiesBreakByAscendingId) {
  VectorSet v;
  v.ids = {"b", "a", "c", "d"};
  v.data.resize(4, 2);
  v.data << 1, 0,  //
      1, 0,        //
      0, 1,        //
      5, 5;
  auto exact = ExactKnn(v, Eigen::Vector2d(1, 0), 2);
  ASSERT_TRUE(exact.ok());
  EXPECT_EQ(exact->neighbors[0].id, "a");
  EXPECT_EQ(exact->neighbors[1].id, "b");
  auto index = IvfPqIndex::Build(v, {1, 1, 3, 1});
  ASSERT_TRUE(index.ok());
  auto ann = index->Query(Eigen::Vector2d(1, 0), 4, 1, true);
  EXPECT_EQ(ann->neighbors, ExactKnn(v, Eigen::Vector2d(1, 0), 4)->neighbors);
}

TEST(IvfPqTest, RecallNonDecreasingInNprobe) {
  const VectorSet v = GaussianMixtureVectors(3000, 32, 40, 1.0, 7);
  auto index = IvfPqIndex::Build(v, {0, 8, 10, 7});
  ASSERT_TRUE(index.ok());
  Rng rng(8);
  std::vector<Eigen::VectorXd> queries;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd q = v.data.row(rng.UniformInt(3000)).transpose();
    for (int j = 0; j < 32; ++j) q[j] += rng.Normal();
    queries.push_back(q);
  }
  double previous = 0.0;
  for (int nprobe : {1, 2, 4, 8, 16}) {
    double recall = 0.0;
    for (const auto& q : queries) {
      recall += Recall(index->Query(q, 10, nprobe, true)->neighbors,
                       ExactKnn(v, q, 10)->neighbors);
    }
    recall /= queries.size();
    EXPECT_GE(recall, previous) << "nprobe " << nprobe;
    previous = recall;
  }
  EXPECT_GT(previous, 0.9);
}

TEST(IvfPqTest, Errors) {
  const VectorSet v = Small(50, 10, 9);
  EXPECT_FALSE(IvfPqIndex::Build(v, {4, 3, 5, 1}).ok());    // 10 % 3 != 0
  EXPECT_FALSE(IvfPqIndex::Build(v, {51, 2, 5, 1}).ok());   // too few vectors
  auto index = IvfPqIndex::Build(v, {4, 2, 5, 1});
  ASSERT_TRUE(index.ok());
  const Eigen::VectorXd q = v.data.row(0).transpose();
  EXPECT_FALSE(index->Query(q, 0, 1, false).ok());
  EXPECT_FALSE(index->Query(q, 5, 5, false).ok());
  auto all = index->Query(q, 80, 4, true);
  ASSERT_TRUE(all.ok());
  EXPECT_TRUE(all->truncated);
  EXPECT_EQ(all->neighbors.size(), 50u);
  auto exact = ExactKnn(v, q, 80);
  EXPECT_TRUE(exact->truncated);
}

TEST(IvfPqTest, FileRoundTrip) {
  const VectorSet v = Small(300, 16, 10);
  auto index = IvfPqIndex::Build(v, {6, 4, 5, 10});
  ASSERT_TRUE(index.ok());
  const std::string path =
      (std::filesystem::temp_directory_path() / "gesa_ivfpq_test.bin").string();
  ASSERT_TRUE(index->Save(path).ok());
  auto back = IvfPqIndex::Load(path);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_TRUE(*back == *index);
  const std::string bytes = index->Serialize();
  EXPECT_EQ(bytes.substr(0, 8), "GESAIVF1");
  EXPECT_FALSE(IvfPqIndex::Deserialize(bytes.substr(0, bytes.size() - 3)).ok());
  EXPECT_FALSE(IvfPqIndex::Deserialize("GESAIVF2" + bytes.substr(8)).ok());
  EXPECT_FALSE(IvfPqIndex::Deserialize(bytes + "x").ok());
  std::filesystem::remove(path);
}

TEST(ExactKnnTest, Examples) {
  VectorSet v;
  v.ids = {"p", "q"};
  v.data.resize(2, 2);
  v.data << 0, 0,  //
      3, 4;
  auto r = ExactKnn(v, Eigen::Vector2d(3, 4), 2);
  EXPECT_EQ(r->neighbors[0].id, "q");
  EXPECT_EQ(r->neighbors[0].distance, 0.0);
  EXPECT_EQ(r->neighbors[1].distance, 5.0);
  EXPECT_EQ(ExactKnn(v, Eigen::Vector2d(1, 1), 1)->neighbors[0].id, "p");
}

std::vector<Rating> RankOne(int n, int m, uint64_t seed, Eigen::VectorXd* a_out = nullptr,
                            Eigen::VectorXd* b_out = nullptr) {
  Rng rng(seed);
  Eigen::VectorXd a(n), b(m);
  for (int i = 0; i < n; ++i) a[i] = rng.Uniform(0.5, 1.5);
  for (int j = 0; j < m; ++j) b[j] = rng.Uniform(0.5, 1.5);
  std::vector<Rating> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      out.push_back({absl::StrFormat("c%04d", i), absl::StrFormat("r%04d", j), a[i] * b[j]});
    }
  }
  if (a_out) *a_out = a;
  if (b_out) *b_out = b;
  return out;
}

double Rmse(const FactorModel& model, const std::vector<Rating>& ratings) {
  double s = 0;
  for (const Rating& r : ratings) {
    const double e = r.value - model.u.row(model.CandidateRow(r.candidate_id))
                                   .dot(model.v.row(model.RoleRow(r.role_id)));
    s += e * e;
  }
  return std::sqrt(s / ratings.size());
}

TEST(TrainMfTest, RankOneReconstruction) {
  const auto ratings = RankOne(200, 150, 11);
  MfConfig config;
  config.sweeps = 20;
  config.seed = 1;
  auto model = TrainMf(ratings, config);
  ASSERT_TRUE(model.ok());
  EXPECT_LE(Rmse(*model, ratings), 1e-3);
  EXPECT_EQ(model->u.rows(), 200);
  EXPECT_EQ(model->v.cols(), 32);
  EXPECT_EQ(model->loss_history.size(), 40u);
}

TEST(TrainMfTest, LossNeverIncreases) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rating> ratings;
    for (int e = 0; e < 400; ++e) {
      ratings.push_back({absl::StrCat("c", rng.UniformInt(40)),
                         absl::StrCat("r", rng.UniformInt(25)),
                         static_cast<double>(rng.Bernoulli(0.3))});
    }
    MfConfig config;
    config.k = 1 + static_cast<int>(rng.UniformInt(16));
    config.mu = rng.Uniform(0.01, 1.0);
    config.seed = trial;
    auto model = TrainMf(ratings, config);
    ASSERT_TRUE(model.ok());
    for (size_t i = 1; i < model->loss_history.size(); ++i) {
      EXPECT_LE(model->loss_history[i], model->loss_history[i - 1] * (1 + 1e-12));
    }
  }
}

TEST(TrainMfTest, DeterministicAndErrors) {
  const auto ratings = RankOne(20, 10, 13);
  MfConfig config;
  config.seed = 4;
  auto a = TrainMf(ratings, config);
  auto b = TrainMf(ratings, config);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->u, b->u);
  EXPECT_EQ(a->v, b->v);
  EXPECT_FALSE(TrainMf({}, config).ok());
}

TEST(CfScoreTest, Examples) {
  FactorModel zero;
  zero.candidate_ids = {"c"};
  zero.role_ids = {"r"};
  zero.u = Eigen::MatrixXd::Zero(1, 4);
  zero.v = Eigen::MatrixXd::Zero(1, 4);
  EXPECT_EQ(*CfScore(zero, "c", "r"), 0.5);
  EXPECT_FALSE(CfScore(zero, "cold", "r").has_value());
  EXPECT_FALSE(CfScore(zero, "c", "cold").has_value());

  std::vector<Rating> ones;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 20; ++j) {
      ones.push_back({absl::StrCat("c", i), absl::StrCat("r", j), 1.0});
    }
  }
  auto model = TrainMf(ones, {});
  ASSERT_TRUE(model.ok());
  EXPECT_GT(*CfScore(*model, "c3", "r7"), 0.9);
}

TEST(HybridScoreTest, Examples) {
  EXPECT_EQ(*HybridScore({0.3, 0.9, 0.1}, {1, 0, 0}), 0.3);
  EXPECT_NEAR(*HybridScore({0.5, 1.0, 0.0}, {0.4, 0.4, 0.2}), 0.6, 1e-12);
  EXPECT_NEAR(*HybridScore({0.7, 0.7, 0.7}, {0.2, 0.5, 0.3}), 0.7, 1e-12);
  EXPECT_FALSE(HybridScore({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}).ok());
  EXPECT_FALSE(HybridScore({0.5, 0.5, 0.5}, {1.2, -0.2, 0.0}).ok());
  EXPECT_FALSE(HybridScore({1.5, 0.5, 0.5}, {1, 0, 0}).ok());
}

TEST(HybridScoreTest, WithinComponentRange) {
  Rng rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const ComponentScores s{rng.Uniform(), rng.Uniform(), rng.Uniform()};
    double a = rng.Uniform(), b = rng.Uniform(), g = rng.Uniform();
    const double sum = a + b + g;
    const FusionWeights w{a / sum, b / sum, 1.0 - a / sum - b / sum};
    if (w.gamma < 0) continue;
    const double h = *HybridScore(s, w);
    EXPECT_GE(h, std::min({s.content, s.collaborative, s.graph}) - 1e-12);
    EXPECT_LE(h, std::max({s.content, s.collaborative, s.graph}) + 1e-12);
  }
}

TEST(FitFusionWeightsTest, ContentSeparableGivesContentOnly) {
  Rng rng(15);
  std::vector<FusionExample> history;
  for (int i = 0; i < 200; ++i) {
    const bool y = rng.Bernoulli(0.5);
    history.push_back({{y ? rng.Uniform(0.6, 1.0) : rng.Uniform(0.0, 0.4),
                        rng.Uniform(), rng.Uniform()},
                       y});
  }
  auto fit = FitFusionWeights(history, {});
  ASSERT_TRUE(fit.ok());
  EXPECT_EQ(fit->weights, (FusionWeights{1, 0, 0}));
  EXPECT_EQ(fit->mean_auc, 1.0);
  EXPECT_EQ(fit->grid_points, 231);
}

TEST(FitFusionWeightsTest, UninformativeTiesGoToContent) {
  std::vector<FusionExample> history;
  for (int i = 0; i < 20; ++i) history.push_back({{0.5, 0.5, 0.5}, i % 2 == 0});
  auto fit = FitFusionWeights(history, {});
  ASSERT_TRUE(fit.ok());
  EXPECT_EQ(fit->weights, (FusionWeights{1, 0, 0}));
}

TEST(FitFusionWeightsTest, DeterministicAndBalanceChecked) {
  Rng rng(16);
  std::vector<FusionExample> history;
  for (int i = 0; i < 100; ++i) {
    const ComponentScores s{rng.Uniform(), rng.Uniform(), rng.Uniform()};
    history.push_back({s, rng.Bernoulli(0.3 + 0.2 * s.collaborative + 0.3 * s.graph)});
  }
  FusionFitConfig config;
  config.seed = 5;
  EXPECT_EQ(FitFusionWeights(history, config)->weights,
            FitFusionWeights(history, config)->weights);
  std::vector<FusionExample> few(history.begin(), history.begin() + 6);
  for (auto& e : few) e.outcome = false;
  few[0].outcome = true;
  EXPECT_EQ(FitFusionWeights(few, config).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

}  // namespace
}  // namespace gesa::recsys
