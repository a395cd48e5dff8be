#ifndef GESA_OBJECTIVES_OBJECTIVES_H_
#define GESA_OBJECTIVES_OBJECTIVES_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "gesa/core/types.h"

namespace gesa::objectives {

// Convex weights of the semantic, graph and skill terms of merit.
struct MeritWeights {
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;
  double gamma = 1.0 / 3.0;
};

struct Similarities {
  double semantic = 0.0;
  double graph = 0.0;
  double skill = 0.0;
};

absl::Status CheckMeritWeights(const MeritWeights& weights);

// Fraction of the role's required skills the candidate holds.
absl::StatusOr<double> SkillMatchScore(const Candidate& candidate,
                                       const Role& role);

absl::StatusOr<double> Merit(const MeritWeights& weights,
                             const Similarities& sims);

// Merit of every (candidate, role) pair, candidates as rows in dataset
// order. `semantic` and `graph` hold the precomputed similarities in the same
// layout; skill coverage is computed here.
absl::StatusOr<Eigen::MatrixXd> MeritMatrix(const Dataset& dataset,
                                            const MeritWeights& weights,
                                            const Eigen::MatrixXd& semantic,
                                            const Eigen::MatrixXd& graph);

struct CategoryWeight {
  std::string category;
  double weight = 0.0;
  std::vector<std::string> labels;
};

struct DiversitySpec {
  std::vector<CategoryWeight> categories;
};

absl::Status CheckDiversitySpec(const DiversitySpec& spec);

// Equal weight on every declared category, labels from the vocabulary.
DiversitySpec UniformDiversitySpec(const Dataset& dataset);

// Shannon entropy (natural log) of the label distribution given as counts.
// Zero counts contribute nothing; all-zero counts give 0.
double EntropyFromCounts(const std::vector<int>& counts);

// Entropy of the subcategory proportions among `labels`. Fails when empty.
absl::StatusOr<double> GroupEntropy(const std::vector<std::string>& labels);

// sum_g w_g * H_g over the assigned candidates. Candidates without a label
// in a category do not count toward that category.
absl::StatusOr<double> Diversity(const AllocationPlan& plan,
                                 const Dataset& dataset,
                                 const DiversitySpec& spec);

// 1 - (rank - 1) / (L - 1) when `role_id` is at 1-based `rank` of the
// candidate's length-L preference list, 1 when L = 1 and matched, else 0.
double PreferenceScore(const Candidate& candidate, const std::string& role_id);

// Mean PreferenceScore over assigned candidates; 0 for an empty plan.
double PreferenceSatisfaction(const AllocationPlan& plan,
                              const Dataset& dataset);

// Violated constraints only. Capacity ids are "capacity:<role_id>"; floors
// and quotas use their own ids.
absl::StatusOr<std::vector<ConstraintViolation>> EvaluateConstraints(
    const AllocationPlan& plan, const ConstraintSet& constraints,
    const Dataset& dataset);

// Role index per candidate (dataset order), -1 when unassigned.
using Genome = std::vector<int>;

struct Evaluation {
  ObjectiveVector objectives;
  std::vector<ConstraintViolation> violations;
  bool degenerate = false;  // empty plan

  double TotalViolation() const;
};

// How f1 and f3 aggregate per-pair values. kPerAssignment divides by the
// number of assigned candidates; kPerSlot divides by the fixed slot count
// min(total capacity, candidates), so an unfilled slot counts as zero.
enum class Aggregation { kPerAssignment, kPerSlot };

// Dataset indexed for repeated plan evaluation. Immutable once built, so a
// context may be shared across threads.
class ObjectiveContext {
 public:
  static absl::StatusOr<ObjectiveContext> Create(const Dataset& dataset,
                                                 Eigen::MatrixXd merit,
                                                 DiversitySpec diversity,
                                                 ConstraintSet constraints,
                                                 Aggregation aggregation =
                                                     Aggregation::kPerSlot);

  int num_candidates() const { return static_cast<int>(merit_.rows()); }
  int num_roles() const { return static_cast<int>(merit_.cols()); }
  const Dataset& dataset() const { return dataset_; }
  const Eigen::MatrixXd& merit() const { return merit_; }
  double preference(int candidate, int role) const {
    return preference_(candidate, role);
  }
  const DiversitySpec& diversity_spec() const { return diversity_; }
  const ConstraintSet& constraints() const { return constraints_; }
  int capacity(int role) const { return capacity_[role]; }
  int slots() const { return slots_; }
  Aggregation aggregation() const { return aggregation_; }
  // Candidate indices sorted by id.
  const std::vector<int>& id_order() const { return id_order_; }

  // f1 = mean merit, f2 = diversity, f3 = preference satisfaction, with the
  // violated constraints.
  Evaluation Evaluate(const Genome& genome) const;

  // Diversity term of the plan alone.
  double DiversityOf(const Genome& genome) const;

  absl::StatusOr<Genome> ToGenome(const AllocationPlan& plan) const;
  AllocationPlan ToPlan(const Genome& genome) const;
  // ToGenome + Evaluate, with values and violations written into the plan.
  absl::StatusOr<AllocationPlan> EvaluatePlan(const AllocationPlan& plan) const;

  int CandidateIndex(const std::string& id) const;  // -1 when unknown
  int RoleIndex(const std::string& id) const;       // -1 when unknown

  // Category codes per candidate (-1 when unlabelled), parallel to the
  // diversity spec's categories.
  const std::vector<std::vector<int>>& category_codes() const {
    return category_codes_;
  }

 private:
  struct GroupRule {
    std::string id;
    int category;  // index into rule_codes_
    int label;
    int amount;
    bool equality;
  };

  Dataset dataset_;
  Aggregation aggregation_ = Aggregation::kPerSlot;
  int slots_ = 0;
  std::vector<int> id_order_;
  Eigen::MatrixXd merit_;
  Eigen::MatrixXd preference_;
  DiversitySpec diversity_;
  ConstraintSet constraints_;
  std::vector<int> capacity_;
  std::vector<std::string> capacity_ids_;
  std::vector<std::vector<int>> category_codes_;
  std::vector<int> category_sizes_;
  std::vector<std::vector<int>> rule_codes_;
  std::vector<GroupRule> rules_;
  std::unordered_map<std::string, int> candidate_index_;
  std::unordered_map<std::string, int> role_index_;
};

}  // namespace gesa::objectives

#endif  // GESA_OBJECTIVES_OBJECTIVES_H_
