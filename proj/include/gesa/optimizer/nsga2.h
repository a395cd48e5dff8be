#ifndef GESA_OPTIMIZER_NSGA2_H_
#define GESA_OPTIMIZER_NSGA2_H_

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "gesa/core/random.h"
#include "gesa/core/types.h"
#include "gesa/objectives/objectives.h"

namespace gesa::optimizer {

using objectives::Genome;
using objectives::ObjectiveContext;

// Objective values as a point; all components maximized.
using Point = std::vector<double>;

Point ToPoint(const ObjectiveVector& v);

// a >= b everywhere and a > b somewhere.
bool Dominates(const Point& a, const Point& b);

// Fronts of indices, best first; members listed in ascending index order.
std::vector<std::vector<int>> NonDominatedSort(const std::vector<Point>& points);

// Crowding distance of each member of one front, in the order given.
std::vector<double> CrowdingDistance(const std::vector<Point>& front);

// Volume dominated by `points` and bounded below by `reference`, three
// objectives. Points not strictly above the reference in every component
// contribute nothing.
double Hypervolume3d(const std::vector<Point>& points, const Point& reference);

// Uniform per-candidate exchange, then capacity repair on both children.
std::pair<Genome, Genome> Crossover(const ObjectiveContext& ctx,
                                    const Genome& a, const Genome& b, Rng& rng);

// Unassigns overflow candidates of every over-capacity role, keeping those
// with the smallest ids.
void RepairCapacity(const ObjectiveContext& ctx, Genome& genome);

// Each candidate, with probability `rate`, moves to a uniformly drawn option
// among the roles with spare capacity and "unassigned".
Genome Mutate(const ObjectiveContext& ctx, const Genome& genome, double rate,
              Rng& rng);

struct OptimizerConfig {
  int population = 100;
  int max_generations = 200;
  double crossover_rate = 0.9;
  double mutation_rate = 0.002;
  double penalty = 1.0;
  double rho = 0.25;
  int stagnation_window = 10;
  double stagnation_tolerance = 1e-6;
  uint64_t seed = 0;
};

absl::Status CheckConfig(const OptimizerConfig& config);

struct Individual {
  Genome genome;
  objectives::Evaluation evaluation;
  ObjectiveVector penalized;
  int rank = 0;
  double crowding = 0.0;
};

// Trace row. front1_size and hypervolume describe the non-dominated archive
// of every individual evaluated so far, so the hypervolume never decreases.
struct GenerationStats {
  int generation = 0;
  int front1_size = 0;
  double hypervolume = 0.0;
  double diversity_weight = 1.0;
  int violations = 0;  // violating individuals in P_t and Q_t
  bool escalated = false;
};

struct ParetoFront {
  // Non-dominated archive over all evaluated individuals, unique genomes.
  std::vector<Individual> members;
  // Final population P_T.
  std::vector<Individual> population;
  std::vector<GenerationStats> trace;
  // Multiplier on the diversity weight after all escalations.
  double diversity_weight = 1.0;
  int escalation_events = 0;
  bool feasible_found = false;
};

// Hard-constraint feasibility check that needs no search: each floor and
// quota must be reachable with the candidates and seats available.
absl::Status CheckFeasible(const ObjectiveContext& ctx);

struct GreedyWeights {
  double merit = 1.0;
  double diversity = 0.0;
  double preference = 0.0;
};

// Fills the slots one candidate at a time, taking the candidate whose best
// open role maximizes merit * w.merit + preference * w.preference plus
// w.diversity * slots * (diversity gain of adding the candidate). Per-
// candidate Gumbel noise scaled by `temperature` perturbs the order.
Genome WeightedGreedy(const ObjectiveContext& ctx, const GreedyWeights& w,
                      double temperature, Rng& rng);

// Starting population: weighted greedy fills, individual 0 by merit alone,
// the rest with diversity weights rising across the population and random
// preference weights and noise.
std::vector<Genome> InitialPopulation(const ObjectiveContext& ctx, int size,
                                      Rng& rng);

absl::StatusOr<ParetoFront> RunNsga2(const ObjectiveContext& ctx,
                                     const OptimizerConfig& config);

// "generation,front1_size,hypervolume,diversity_weight,violations".
std::string TraceCsv(const std::vector<GenerationStats>& trace);

struct SelectionPolicy {
  double merit_weight = 1.0;
  double diversity_weight = 1.0;
  double preference_weight = 1.0;
  // Constraint ids a returned plan must not violate. "*" means every
  // constraint.
  std::set<std::string> mandatory;
};

// Weighted sum over penalized objectives with the diversity weight scaled by
// the front's escalation multiplier. Ties within 1e-12 go to the higher
// diversity, then to the lexicographically smaller plan encoding.
absl::StatusOr<Individual> SelectSolution(const ObjectiveContext& ctx,
                                          const ParetoFront& front,
                                          const SelectionPolicy& policy);

// Greedy max-merit plan: pairs in descending merit order, each candidate at
// most once, capacities respected.
Genome GreedyMaxMerit(const ObjectiveContext& ctx);

}  // namespace gesa::optimizer

#endif  // GESA_OPTIMIZER_NSGA2_H_
