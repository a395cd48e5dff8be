#include "gesa/optimizer/nsga2.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gesa/core/status_macros.h"

namespace gesa::optimizer {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double Hypervolume2d(std::vector<std::pair<double, double>> points, double rx,
                     double ry) {
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double area = 0.0;
  double max_y = ry;
  for (size_t i = 0; i < points.size(); ++i) {
    max_y = std::max(max_y, points[i].second);
    const double next_x = i + 1 < points.size() ? points[i + 1].first : rx;
    area += (points[i].first - next_x) * (max_y - ry);
  }
  return area;
}

ObjectiveVector Penalize(const ObjectiveVector& raw, double amount) {
  return {raw.merit - amount, raw.diversity - amount, raw.preference - amount};
}

void Score(const ObjectiveContext& ctx, double penalty, Individual& ind) {
  ind.evaluation = ctx.Evaluate(ind.genome);
  ind.penalized = Penalize(ind.evaluation.objectives,
                           penalty * ind.evaluation.TotalViolation());
}

// Rank and crowding for every individual; returns the fronts.
std::vector<std::vector<int>> RankAndCrowd(std::vector<Individual>& pop) {
  std::vector<Point> points;
  points.reserve(pop.size());
  for (const Individual& ind : pop) points.push_back(ToPoint(ind.penalized));
  std::vector<std::vector<int>> fronts = NonDominatedSort(points);
  for (size_t f = 0; f < fronts.size(); ++f) {
    std::vector<Point> members;
    for (int i : fronts[f]) members.push_back(points[i]);
    const std::vector<double> crowding = CrowdingDistance(members);
    for (size_t k = 0; k < fronts[f].size(); ++k) {
      pop[fronts[f][k]].rank = static_cast<int>(f) + 1;
      pop[fronts[f][k]].crowding = crowding[k];
    }
  }
  return fronts;
}

bool Better(const Individual& a, const Individual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

const Individual& Tournament(const std::vector<Individual>& pop, Rng& rng) {
  const Individual& a = pop[rng.UniformInt(pop.size())];
  const Individual& b = pop[rng.UniformInt(pop.size())];
  return Better(b, a) ? b : a;
}

// Keeps `archive` the non-dominated set of everything offered so far. A
// newcomer equal in objectives to a member is dropped.
void UpdateArchive(std::vector<Individual>& archive, const Individual& ind) {
  const Point p = ToPoint(ind.penalized);
  for (const Individual& member : archive) {
    const Point q = ToPoint(member.penalized);
    if (q == p || Dominates(q, p)) return;
  }
  std::erase_if(archive, [&](const Individual& member) {
    return Dominates(p, ToPoint(member.penalized));
  });
  archive.push_back(ind);
}

double ArchiveHypervolume(const std::vector<Individual>& archive) {
  std::vector<Point> points;
  for (const Individual& ind : archive) points.push_back(ToPoint(ind.penalized));
  return Hypervolume3d(points, {0.0, 0.0, 0.0});
}

std::vector<int> RoleLoads(const ObjectiveContext& ctx, const Genome& genome) {
  std::vector<int> load(ctx.num_roles(), 0);
  for (int r : genome) {
    if (r >= 0) ++load[r];
  }
  return load;
}

}  // namespace

Point ToPoint(const ObjectiveVector& v) {
  return {v.merit, v.diversity, v.preference};
}

bool Dominates(const Point& a, const Point& b) {
  bool strictly = false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strictly = true;
  }
  return strictly;
}

std::vector<std::vector<int>> NonDominatedSort(const std::vector<Point>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<std::vector<int>> dominated(n);
  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<int>> fronts(1);
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      if (Dominates(points[p], points[q])) {
        dominated[p].push_back(q);
        ++domination_count[q];
      } else if (Dominates(points[q], points[p])) {
        dominated[q].push_back(p);
        ++domination_count[p];
      }
    }
  }
  for (int p = 0; p < n; ++p) {
    if (domination_count[p] == 0) fronts[0].push_back(p);
  }
  while (!fronts.back().empty()) {
    std::vector<int> next;
    for (int p : fronts.back()) {
      for (int q : dominated[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> CrowdingDistance(const std::vector<Point>& front) {
  const size_t n = front.size();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  std::vector<int> order(n);
  for (size_t m = 0; m < front[0].size(); ++m) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return front[a][m] < front[b][m];
    });
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    const double range = front[order.back()][m] - front[order.front()][m];
    if (range <= 0.0) continue;
    for (size_t k = 1; k + 1 < n; ++k) {
      distance[order[k]] +=
          (front[order[k + 1]][m] - front[order[k - 1]][m]) / range;
    }
  }
  return distance;
}

double Hypervolume3d(const std::vector<Point>& points, const Point& reference) {
  std::vector<Point> kept;
  for (const Point& p : points) {
    if (p[0] > reference[0] && p[1] > reference[1] && p[2] > reference[2]) {
      kept.push_back(p);
    }
  }
  std::sort(kept.begin(), kept.end(),
            [](const Point& a, const Point& b) { return a[2] > b[2]; });
  double volume = 0.0;
  std::vector<std::pair<double, double>> slice;
  for (size_t i = 0; i < kept.size(); ++i) {
    slice.emplace_back(kept[i][0], kept[i][1]);
    const double next_z = i + 1 < kept.size() ? kept[i + 1][2] : reference[2];
    const double depth = kept[i][2] - next_z;
    if (depth > 0.0) {
      volume += depth * Hypervolume2d(slice, reference[0], reference[1]);
    }
  }
  return volume;
}

void RepairCapacity(const ObjectiveContext& ctx, Genome& genome) {
  std::vector<int> load(ctx.num_roles(), 0);
  for (int c : ctx.id_order()) {
    const int r = genome[c];
    if (r < 0) continue;
    if (load[r] < ctx.capacity(r)) {
      ++load[r];
    } else {
      genome[c] = -1;
    }
  }
}

std::pair<Genome, Genome> Crossover(const ObjectiveContext& ctx,
                                    const Genome& a, const Genome& b,
                                    Rng& rng) {
  Genome child_a = a;
  Genome child_b = b;
  for (size_t i = 0; i < a.size(); ++i) {
    if (rng.Bernoulli(0.5)) std::swap(child_a[i], child_b[i]);
  }
  RepairCapacity(ctx, child_a);
  RepairCapacity(ctx, child_b);
  return {std::move(child_a), std::move(child_b)};
}

Genome Mutate(const ObjectiveContext& ctx, const Genome& genome, double rate,
              Rng& rng) {
  Genome out = genome;
  if (rate <= 0.0) return out;
  std::vector<int> load = RoleLoads(ctx, out);
  std::vector<int> options;
  for (size_t i = 0; i < out.size(); ++i) {
    if (!rng.Bernoulli(rate)) continue;
    options.clear();
    for (int r = 0; r < ctx.num_roles(); ++r) {
      if (load[r] < ctx.capacity(r)) options.push_back(r);
    }
    options.push_back(-1);
    const int choice = options[rng.UniformInt(options.size())];
    if (out[i] >= 0) --load[out[i]];
    if (choice >= 0) ++load[choice];
    out[i] = choice;
  }
  return out;
}

absl::Status CheckConfig(const OptimizerConfig& c) {
  if (c.population < 4 || c.population % 2 != 0) {
    return absl::InvalidArgumentError("population must be even and >= 4");
  }
  if (c.max_generations < 1) {
    return absl::InvalidArgumentError("max_generations must be >= 1");
  }
  if (!(c.crossover_rate >= 0.0 && c.crossover_rate <= 1.0) ||
      !(c.mutation_rate >= 0.0 && c.mutation_rate <= 1.0)) {
    return absl::InvalidArgumentError("rates must lie in [0, 1]");
  }
  if (!(c.rho > 0.0)) return absl::InvalidArgumentError("rho must be > 0");
  if (!(c.penalty >= 0.0)) return absl::InvalidArgumentError("penalty must be >= 0");
  if (c.stagnation_window < 1) {
    return absl::InvalidArgumentError("stagnation_window must be >= 1");
  }
  return absl::OkStatus();
}

absl::Status CheckFeasible(const ObjectiveContext& ctx) {
  const Dataset& d = ctx.dataset();
  auto available = [&](const std::string& category, const std::string& label) {
    int count = 0;
    for (const Candidate& c : d.candidates) {
      auto it = c.demographics.group_memberships.find(category);
      if (it != c.demographics.group_memberships.end() && it->second == label) {
        ++count;
      }
    }
    return count;
  };
  std::map<std::string, int> demanded;  // per category
  for (const RepresentationFloor& f : ctx.constraints().floors) {
    if (available(f.category, f.label) < f.minimum || f.minimum > ctx.slots()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "infeasible: floor ", f.id, " needs ", f.minimum, " candidates with ",
          f.category, "=", f.label));
    }
    demanded[f.category] += f.minimum;
  }
  for (const Quota& q : ctx.constraints().quotas) {
    if (available(q.category, q.label) < q.target || q.target > ctx.slots()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "infeasible: quota ", q.id, " needs ", q.target, " candidates with ",
          q.category, "=", q.label));
    }
    demanded[q.category] += q.target;
  }
  for (const auto& [category, total] : demanded) {
    if (total > ctx.slots()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "infeasible: constraints on ", category, " demand ", total,
          " seats, only ", ctx.slots(), " exist"));
    }
  }
  return absl::OkStatus();
}

Genome WeightedGreedy(const ObjectiveContext& ctx, const GreedyWeights& w,
                      double temperature, Rng& rng) {
  const int n = ctx.num_candidates();
  const int m = ctx.num_roles();
  const auto& codes = ctx.category_codes();
  const auto& categories = ctx.diversity_spec().categories;
  const int num_categories = static_cast<int>(codes.size());

  auto gumbel = [&]() {
    double u = rng.Uniform();
    while (u <= 0.0) u = rng.Uniform();
    return -std::log(-std::log(u));
  };
  std::vector<int> load(m, 0);
  auto role_value = [&](int c, int r) {
    return w.merit * ctx.merit()(c, r) + w.preference * ctx.preference(c, r);
  };
  // Best open role of c, or -1.
  auto best_role = [&](int c) {
    int best = -1;
    double value = -kInf;
    for (int r = 0; r < m; ++r) {
      if (load[r] >= ctx.capacity(r)) continue;
      const double v = role_value(c, r);
      if (v > value) {
        value = v;
        best = r;
      }
    }
    return best;
  };

  // Candidates sharing every category label form one group; a group's
  // diversity gain depends only on the current label counts.
  std::map<std::vector<int>, int> group_of;
  std::vector<std::vector<int>> group_labels;
  std::vector<int> group(n);
  for (int c = 0; c < n; ++c) {
    std::vector<int> key(num_categories);
    for (int g = 0; g < num_categories; ++g) key[g] = codes[g][c];
    auto [it, inserted] = group_of.emplace(key, static_cast<int>(group_labels.size()));
    if (inserted) group_labels.push_back(key);
    group[c] = it->second;
  }
  std::vector<double> noise(n, 0.0);
  if (temperature > 0.0) {
    for (int c = 0; c < n; ++c) noise[c] = temperature * gumbel();
  }
  // Max-heaps of (value, -candidate); entries go stale when the role fills.
  using Entry = std::tuple<double, int, int>;  // value, -candidate, role
  std::vector<std::vector<Entry>> heaps(group_labels.size());
  for (int c = 0; c < n; ++c) {
    const int r = best_role(c);
    if (r < 0) continue;
    heaps[group[c]].emplace_back(role_value(c, r) + noise[c], -c, r);
  }
  for (auto& h : heaps) std::make_heap(h.begin(), h.end());

  std::vector<std::vector<int>> counts(num_categories);
  for (int g = 0; g < num_categories; ++g) {
    counts[g].assign(categories[g].labels.size(), 0);
  }
  auto diversity_gain = [&](const std::vector<int>& labels) {
    double gain = 0.0;
    for (int g = 0; g < num_categories; ++g) {
      if (labels[g] < 0 || categories[g].weight == 0.0) continue;
      std::vector<int>& k = counts[g];
      const double before = objectives::EntropyFromCounts(k);
      ++k[labels[g]];
      const double after = objectives::EntropyFromCounts(k);
      --k[labels[g]];
      gain += categories[g].weight * (after - before);
    }
    return gain;
  };

  Genome genome(n, -1);
  const double slots = ctx.slots();
  for (int filled = 0; filled < ctx.slots(); ++filled) {
    int pick_group = -1;
    double pick_value = -kInf;
    for (size_t h = 0; h < heaps.size(); ++h) {
      std::vector<Entry>& heap = heaps[h];
      // Refresh stale tops.
      while (!heap.empty()) {
        auto [value, neg_c, r] = heap.front();
        if (load[r] < ctx.capacity(r)) break;
        std::pop_heap(heap.begin(), heap.end());
        heap.pop_back();
        const int c = -neg_c;
        const int next = best_role(c);
        if (next < 0) continue;
        heap.emplace_back(role_value(c, next) + noise[c], neg_c, next);
        std::push_heap(heap.begin(), heap.end());
      }
      if (heap.empty()) continue;
      const double value = std::get<0>(heap.front()) +
                           w.diversity * slots * diversity_gain(group_labels[h]);
      if (value > pick_value) {
        pick_value = value;
        pick_group = static_cast<int>(h);
      }
    }
    if (pick_group < 0) break;
    std::vector<Entry>& heap = heaps[pick_group];
    std::pop_heap(heap.begin(), heap.end());
    const auto [value, neg_c, r] = heap.back();
    heap.pop_back();
    genome[-neg_c] = r;
    ++load[r];
    for (int g = 0; g < num_categories; ++g) {
      if (group_labels[pick_group][g] >= 0) ++counts[g][group_labels[pick_group][g]];
    }
  }
  return genome;
}

std::vector<Genome> InitialPopulation(const ObjectiveContext& ctx, int size,
                                      Rng& rng) {
  constexpr double kMaxDiversityWeight = 2.0;
  constexpr double kMaxPreferenceWeight = 1.0;
  constexpr double kMaxTemperature = 0.1;
  std::vector<Genome> out;
  for (int k = 0; k < size; ++k) {
    const double u = size == 1 ? 0.0 : k / static_cast<double>(size - 1);
    GreedyWeights w;
    double temperature = 0.0;
    if (k > 0) {
      w.diversity = kMaxDiversityWeight * u;
      w.preference = kMaxPreferenceWeight * rng.Uniform();
      temperature = kMaxTemperature * rng.Uniform();
    }
    out.push_back(WeightedGreedy(ctx, w, temperature, rng));
  }
  return out;
}

absl::StatusOr<ParetoFront> RunNsga2(const ObjectiveContext& ctx,
                                     const OptimizerConfig& config) {
  RETURN_IF_ERROR(CheckConfig(config));
  if (ctx.num_candidates() == 0 || ctx.num_roles() == 0) {
    return absl::InvalidArgumentError("problem has no candidates or roles");
  }
  RETURN_IF_ERROR(CheckFeasible(ctx));

  Rng rng(config.seed);
  std::vector<Individual> pop;
  for (Genome& g : InitialPopulation(ctx, config.population, rng)) {
    Individual ind;
    ind.genome = std::move(g);
    Score(ctx, config.penalty, ind);
    pop.push_back(std::move(ind));
  }
  RankAndCrowd(pop);
  std::vector<Individual> archive;
  for (const Individual& ind : pop) UpdateArchive(archive, ind);

  ParetoFront result;
  std::vector<double> hv_history;
  for (int t = 1; t <= config.max_generations; ++t) {
    std::vector<Individual> offspring;
    while (static_cast<int>(offspring.size()) < config.population) {
      const Individual& pa = Tournament(pop, rng);
      const Individual& pb = Tournament(pop, rng);
      std::pair<Genome, Genome> children =
          rng.Bernoulli(config.crossover_rate)
              ? Crossover(ctx, pa.genome, pb.genome, rng)
              : std::make_pair(pa.genome, pb.genome);
      for (Genome* child : {&children.first, &children.second}) {
        Individual ind;
        ind.genome = Mutate(ctx, *child, config.mutation_rate, rng);
        Score(ctx, config.penalty, ind);
        UpdateArchive(archive, ind);
        offspring.push_back(std::move(ind));
      }
    }

    std::vector<Individual> combined = std::move(pop);
    for (Individual& ind : offspring) combined.push_back(std::move(ind));
    int violating = 0;
    for (const Individual& ind : combined) {
      if (!ind.evaluation.violations.empty()) ++violating;
    }
    const bool escalate = violating > 0;
    if (escalate) {
      result.diversity_weight *= 1.0 + config.rho;
      ++result.escalation_events;
    }

    const std::vector<std::vector<int>> fronts = RankAndCrowd(combined);
    pop.clear();
    for (const std::vector<int>& front : fronts) {
      if (pop.size() + front.size() <= static_cast<size_t>(config.population)) {
        for (int i : front) pop.push_back(combined[i]);
        continue;
      }
      std::vector<int> sorted = front;
      std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        return combined[a].crowding > combined[b].crowding;
      });
      for (int i : sorted) {
        if (pop.size() == static_cast<size_t>(config.population)) break;
        pop.push_back(combined[i]);
      }
      break;
    }

    GenerationStats stats;
    stats.generation = t;
    stats.front1_size = static_cast<int>(archive.size());
    stats.hypervolume = ArchiveHypervolume(archive);
    stats.diversity_weight = result.diversity_weight;
    stats.violations = violating;
    stats.escalated = escalate;
    result.trace.push_back(stats);
    hv_history.push_back(stats.hypervolume);

    const int w = config.stagnation_window;
    if (static_cast<int>(hv_history.size()) > w) {
      const double before = hv_history[hv_history.size() - 1 - w];
      const double change = std::abs(stats.hypervolume - before);
      if (change <= config.stagnation_tolerance * std::max(std::abs(before), 1e-300)) {
        break;
      }
    }
  }

  for (Individual& ind : archive) {
    ind.rank = 1;
    if (ind.evaluation.violations.empty()) result.feasible_found = true;
  }
  std::vector<Point> points;
  for (const Individual& ind : archive) points.push_back(ToPoint(ind.penalized));
  const std::vector<double> crowding = CrowdingDistance(points);
  for (size_t i = 0; i < archive.size(); ++i) archive[i].crowding = crowding[i];
  result.members = std::move(archive);
  result.population = std::move(pop);
  return result;
}

std::string TraceCsv(const std::vector<GenerationStats>& trace) {
  std::string out = "generation,front1_size,hypervolume,diversity_weight,violations\n";
  for (const GenerationStats& s : trace) {
    absl::StrAppend(&out, s.generation, ",", s.front1_size, ",",
                    absl::StrFormat("%.17g", s.hypervolume), ",",
                    absl::StrFormat("%.17g", s.diversity_weight), ",",
                    s.violations, "\n");
  }
  return out;
}

absl::StatusOr<Individual> SelectSolution(const ObjectiveContext& ctx,
                                          const ParetoFront& front,
                                          const SelectionPolicy& policy) {
  if (front.members.empty()) {
    return absl::InvalidArgumentError("empty Pareto front");
  }
  const bool all_mandatory = policy.mandatory.contains("*");
  auto compliant = [&](const Individual& ind) {
    for (const ConstraintViolation& v : ind.evaluation.violations) {
      if (all_mandatory || policy.mandatory.contains(v.constraint_id)) {
        return false;
      }
    }
    return true;
  };
  auto score = [&](const Individual& ind) {
    return policy.merit_weight * ind.penalized.merit +
           policy.diversity_weight * front.diversity_weight *
               ind.penalized.diversity +
           policy.preference_weight * ind.penalized.preference;
  };
  const Individual* best = nullptr;
  for (const Individual& ind : front.members) {
    if (!compliant(ind)) continue;
    if (best == nullptr) {
      best = &ind;
      continue;
    }
    const double a = score(ind);
    const double b = score(*best);
    if (a > b + 1e-12) {
      best = &ind;
    } else if (a >= b - 1e-12) {
      const double da = ind.evaluation.objectives.diversity;
      const double db = best->evaluation.objectives.diversity;
      if (da > db || (da == db && ctx.ToPlan(ind.genome).assignments <
                                      ctx.ToPlan(best->genome).assignments)) {
        best = &ind;
      }
    }
  }
  if (best == nullptr) {
    return absl::NotFoundError(
        "no Pareto-front member satisfies the mandatory constraints");
  }
  return *best;
}

Genome GreedyMaxMerit(const ObjectiveContext& ctx) {
  const int n = ctx.num_candidates();
  const int m = ctx.num_roles();
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n) * m);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < m; ++r) pairs.emplace_back(c, r);
  }
  const Eigen::MatrixXd& merit = ctx.merit();
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    return merit(a.first, a.second) > merit(b.first, b.second);
  });
  Genome genome(n, -1);
  std::vector<int> load(m, 0);
  for (const auto& [c, r] : pairs) {
    if (genome[c] >= 0 || load[r] >= ctx.capacity(r)) continue;
    genome[c] = r;
    ++load[r];
  }
  return genome;
}

}  // namespace gesa::optimizer
