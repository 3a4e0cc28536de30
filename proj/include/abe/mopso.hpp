#pragma once

// Multi-objective particle swarm optimizer with a crowding-distance archive.
// All objectives are minimized.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abe/error.hpp"
#include "abe/parallel.hpp"
#include "abe/rng.hpp"

namespace abe::mopso {

using ObjectiveVector = std::vector<double>;

// Pareto dominance under minimization: a is no worse everywhere and strictly
// better somewhere.
inline bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dominates: objective vectors differ in length");
  bool strictly_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly_better = true;
  }
  return strictly_better;
}

// Per objective, sorted ascending: interior entries accumulate the gap
// between their neighbours, the two extremes receive the objective's
// maximum (max(f_max, f_max - f_min), which equals f_max whenever f_min >= 0
// and keeps extremes on top when objectives go negative). Summed over
// objectives.
inline std::vector<double> crowding_distances(std::span<const ObjectiveVector> fitness) {
  const std::size_t n = fitness.size();
  std::vector<double> cd(n, 0.0);
  if (n == 0) return cd;
  const std::size_t objectives = fitness[0].size();
  std::vector<std::size_t> order(n);
  for (std::size_t m = 0; m < objectives; ++m) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a][m] < fitness[b][m]; });
    const double lo = fitness[order.front()][m];
    const double hi = fitness[order.back()][m];
    const double boundary = std::max(hi, hi - lo);
    for (std::size_t i = 1; i + 1 < n; ++i) cd[order[i]] += fitness[order[i + 1]][m] - fitness[order[i - 1]][m];
    cd[order.front()] += boundary;
    if (n > 1) cd[order.back()] += boundary;
  }
  return cd;
}

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> velocity_max;  // velocity_min = -velocity_max

  Bounds() = default;

  // Velocity caps default to a quarter of each dimension's range.
  Bounds(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
    velocity_max.resize(lower.size());
    for (std::size_t d = 0; d < lower.size() && d < upper.size(); ++d) velocity_max[d] = 0.25 * (upper[d] - lower[d]);
    validate();
  }

  Bounds(std::vector<double> lo, std::vector<double> hi, std::vector<double> vmax)
      : lower(std::move(lo)), upper(std::move(hi)), velocity_max(std::move(vmax)) {
    validate();
  }

  static Bounds box(std::size_t dims, double lo, double hi) {
    return Bounds(std::vector<double>(dims, lo), std::vector<double>(dims, hi));
  }

  std::size_t size() const noexcept { return lower.size(); }

  bool contains(std::span<const double> x) const {
    if (x.size() != size()) return false;
    for (std::size_t d = 0; d < size(); ++d)
      if (!(x[d] >= lower[d] && x[d] <= upper[d])) return false;
    return true;
  }

  void validate() const {
    if (lower.size() != upper.size() || lower.size() != velocity_max.size())
      throw InvalidArgument("bounds: lower, upper and velocity caps differ in length");
    if (lower.empty()) throw InvalidArgument("bounds: zero dimensions");
    for (std::size_t d = 0; d < lower.size(); ++d) {
      if (!(lower[d] < upper[d]))
        throw InvalidArgument("bounds: lower must be below upper in dimension " + std::to_string(d));
      if (!(velocity_max[d] > 0.0)) throw InvalidArgument("bounds: velocity cap must be positive");
    }
  }
};

enum class MutationRule {
  AsPrinted,  // delta(t, y) = y * (1 - r * (t/T)^b)
  Classical,  // delta(t, y) = y * (1 - r^((1 - t/T)^b))
};

struct MopsoConfig {
  std::size_t pop_size = 100;
  std::size_t max_iter = 100;
  double inertia_start = 0.9;
  double inertia_end = 0.4;
  double c1 = 2.0;
  double c2 = 2.0;
  double mutation_fraction = 0.5;  // mutate while t < T * fraction
  double mutation_exponent = 5.0;
  std::size_t archive_capacity = 100;
  double leader_fraction = 0.10;
  std::uint64_t seed = 0;
  MutationRule mutation_rule = MutationRule::AsPrinted;
  unsigned threads = 1;  // evaluation workers; never affects results

  void validate() const {
    if (pop_size < 2) throw ConfigError("mopso: pop_size must be at least 2");
    if (max_iter < 1) throw ConfigError("mopso: max_iter must be at least 1");
    if (!(mutation_fraction >= 0.0 && mutation_fraction <= 1.0))
      throw ConfigError("mopso: mutation fraction must be in [0, 1]");
    if (archive_capacity < 1) throw ConfigError("mopso: archive capacity must be at least 1");
    if (!(leader_fraction > 0.0 && leader_fraction <= 1.0)) throw ConfigError("mopso: leader fraction must be in (0, 1]");
    if (!(c1 >= 0.0 && c2 >= 0.0)) throw ConfigError("mopso: c1 and c2 must be non-negative");
  }
};

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  ObjectiveVector fitness;
  std::vector<double> pbest_position;
  ObjectiveVector pbest_fitness;
};

struct ArchiveEntry {
  std::vector<double> position;
  ObjectiveVector objectives;
  double crowding = 0.0;
  std::uint64_t serial = 0;  // insertion order
};

struct Candidate {
  std::span<const double> position;
  std::span<const double> objectives;
};

// Bounded set of mutually non-dominated solutions.
class Archive {
 public:
  explicit Archive(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw InvalidArgument("archive capacity must be at least 1");
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
  const ArchiveEntry& operator[](std::size_t i) const { return entries_.at(i); }

  // Adds the non-dominated candidates, evicts entries they dominate, then
  // trims to capacity by repeatedly dropping the most crowded entry.
  // Returns the number of candidates accepted.
  std::size_t update(std::span<const Candidate> candidates) {
    std::size_t accepted = 0;
    for (const Candidate& c : candidates) {
      bool rejected = false;
      for (const ArchiveEntry& e : entries_) {
        if (dominates(e.objectives, c.objectives) ||
            std::equal(e.objectives.begin(), e.objectives.end(), c.objectives.begin(), c.objectives.end())) {
          rejected = true;
          break;
        }
      }
      if (rejected) continue;
      std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(c.objectives, e.objectives); });
      entries_.push_back({std::vector<double>(c.position.begin(), c.position.end()),
                          ObjectiveVector(c.objectives.begin(), c.objectives.end()), 0.0, next_serial_++});
      ++accepted;
    }
    while (entries_.size() > capacity_) {
      refresh_crowding();
      auto victim = std::min_element(entries_.begin(), entries_.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        return a.crowding < b.crowding || (a.crowding == b.crowding && a.serial > b.serial);
      });
      entries_.erase(victim);
    }
    refresh_crowding();
    return accepted;
  }

  void refresh_crowding() {
    std::vector<ObjectiveVector> f;
    f.reserve(entries_.size());
    for (const auto& e : entries_) f.push_back(e.objectives);
    const auto cd = crowding_distances(f);
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i].crowding = cd[i];
  }

  // Indices of the least crowded ceil(fraction * size) entries, largest
  // crowding distance first (ties by insertion order).
  std::vector<std::size_t> leaders(double fraction) const {
    if (entries_.empty()) throw InvalidArgument("leader selection from an empty archive");
    std::vector<std::size_t> idx(entries_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = entries_[a];
      const auto& y = entries_[b];
      return x.crowding > y.crowding || (x.crowding == y.crowding && x.serial < y.serial);
    });
    const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(entries_.size()) - 1e-12));
    idx.resize(std::clamp<std::size_t>(count, 1, entries_.size()));
    return idx;
  }

 private:
  std::size_t capacity_;
  std::vector<ArchiveEntry> entries_;
  std::uint64_t next_serial_ = 0;
};

inline std::size_t update_archive(Archive& archive, std::span<const Candidate> candidates) {
  return archive.update(candidates);
}

inline std::span<const double> select_gbest(const Archive& archive, double leader_fraction, Rng& rng) {
  const auto pool = archive.leaders(leader_fraction);
  return archive[pool[rng.below(pool.size())]].position;
}

// Linear decay from inertia_start at t = 0 to inertia_end at t = T - 1.
inline double inertia(const MopsoConfig& cfg, std::size_t t) {
  if (cfg.max_iter <= 1) return cfg.inertia_start;
  const double frac = static_cast<double>(t) / static_cast<double>(cfg.max_iter - 1);
  return cfg.inertia_start - (cfg.inertia_start - cfg.inertia_end) * frac;
}

// New velocity; a component leaving [-vmax, vmax] is negated and then
// clamped into the cap.
inline std::vector<double> update_velocity(const Particle& p, std::span<const double> gbest, double inertia_weight,
                                           const MopsoConfig& cfg, const Bounds& bounds, Rng& rng) {
  const std::size_t dims = p.position.size();
  if (gbest.size() != dims || p.velocity.size() != dims || p.pbest_position.size() != dims || bounds.size() != dims)
    throw InvalidArgument("update_velocity: dimension mismatch");
  std::vector<double> v(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const double r1 = rng.uniform();
    const double r2 = rng.uniform();
    double next = inertia_weight * p.velocity[d] + cfg.c1 * r1 * (p.pbest_position[d] - p.position[d]) +
                  cfg.c2 * r2 * (gbest[d] - p.position[d]);
    const double cap = bounds.velocity_max[d];
    if (next > cap || next < -cap) next = -next;
    v[d] = std::clamp(next, -cap, cap);
  }
  return v;
}

// x += v per dimension; on leaving the box the velocity is negated and added
// again, then the coordinate is clamped to the nearest bound.
inline void update_position(Particle& p, const Bounds& bounds) {
  for (std::size_t d = 0; d < p.position.size(); ++d) {
    double x = p.position[d] + p.velocity[d];
    if (x > bounds.upper[d] || x < bounds.lower[d]) {
      p.velocity[d] = -p.velocity[d];
      x += p.velocity[d];
    }
    p.position[d] = std::clamp(x, bounds.lower[d], bounds.upper[d]);
  }
}

inline double mutation_delta(std::size_t t, std::size_t max_iter, double y, double r, double b, MutationRule rule) {
  const double progress = static_cast<double>(t) / static_cast<double>(max_iter);
  if (rule == MutationRule::Classical) return y * (1.0 - std::pow(r, std::pow(1.0 - progress, b)));
  return y * (1.0 - r * std::pow(progress, b));
}

// Non-uniform mutation; each dimension is hit with probability 1/D. A zero
// bit moves toward the upper bound, a one bit toward the lower bound.
inline void mutate(std::vector<double>& position, std::size_t t, const MopsoConfig& cfg, const Bounds& bounds,
                   Rng& rng) {
  const std::size_t dims = position.size();
  const double rate = 1.0 / static_cast<double>(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    if (rng.uniform() >= rate) continue;
    const bool toward_lower = rng.coin();
    const double r = rng.uniform();
    double& x = position[d];
    if (!toward_lower)
      x += mutation_delta(t, cfg.max_iter, bounds.upper[d] - x, r, cfg.mutation_exponent, cfg.mutation_rule);
    else
      x -= mutation_delta(t, cfg.max_iter, x - bounds.lower[d], r, cfg.mutation_exponent, cfg.mutation_rule);
    x = std::clamp(x, bounds.lower[d], bounds.upper[d]);
  }
}

// Current replaces pbest if it dominates it, never if dominated, otherwise on
// a fair coin.
inline void update_pbest(Particle& p, Rng& rng) {
  bool replace = false;
  if (dominates(p.fitness, p.pbest_fitness))
    replace = true;
  else if (!dominates(p.pbest_fitness, p.fitness))
    replace = rng.coin();
  if (replace) {
    p.pbest_position = p.position;
    p.pbest_fitness = p.fitness;
  }
}

struct NoObserver {
  void operator()(std::size_t, const std::vector<Particle>&, const Archive&) const {}
};

namespace detail {

template <class Evaluator>
void evaluate_swarm(std::vector<Particle>& swarm, Evaluator& evaluate, unsigned threads, std::size_t iteration,
                    std::size_t& objectives) {
  parallel_for(swarm.size(), threads, [&](std::size_t i) {
    ObjectiveVector f = evaluate(std::span<const double>(swarm[i].position));
    for (double v : f)
      if (!std::isfinite(v))
        throw EvaluationError("non-finite objective value at iteration " + std::to_string(iteration) + ", particle " +
                              std::to_string(i));
    swarm[i].fitness = std::move(f);
  });
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    if (objectives == 0) objectives = swarm[i].fitness.size();
    if (swarm[i].fitness.size() != objectives || objectives == 0)
      throw EvaluationError("evaluator returned an inconsistent objective count at iteration " +
                            std::to_string(iteration) + ", particle " + std::to_string(i));
  }
}

inline void archive_swarm(Archive& archive, const std::vector<Particle>& swarm) {
  std::vector<Candidate> candidates;
  candidates.reserve(swarm.size());
  for (const Particle& p : swarm) candidates.push_back({p.position, p.fitness});
  archive.update(candidates);
}

}  // namespace detail

// Runs the optimizer. `evaluate(std::span<const double>)` must return an
// ObjectiveVector and be safe to call concurrently when cfg.threads > 1.
// `observe(t, swarm, archive)` is called after every iteration.
template <class Evaluator, class Observer = NoObserver>
Archive run(const Bounds& bounds, Evaluator&& evaluate, const MopsoConfig& cfg, Observer&& observe = {}) {
  cfg.validate();
  bounds.validate();
  const std::size_t dims = bounds.size();

  std::vector<Rng> rngs;
  rngs.reserve(cfg.pop_size);
  for (std::size_t i = 0; i < cfg.pop_size; ++i) rngs.emplace_back(derive_seed(cfg.seed, i));

  std::vector<Particle> swarm(cfg.pop_size);
  for (std::size_t i = 0; i < cfg.pop_size; ++i) {
    Particle& p = swarm[i];
    p.position.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) p.position[d] = rngs[i].uniform(bounds.lower[d], bounds.upper[d]);
    p.velocity.assign(dims, 0.0);
  }
  std::size_t objectives = 0;
  detail::evaluate_swarm(swarm, evaluate, cfg.threads, 0, objectives);
  for (Particle& p : swarm) {
    p.pbest_position = p.position;
    p.pbest_fitness = p.fitness;
  }

  Archive archive(cfg.archive_capacity);
  detail::archive_swarm(archive, swarm);

  const double mutation_horizon = static_cast<double>(cfg.max_iter) * cfg.mutation_fraction;
  for (std::size_t t = 0; t < cfg.max_iter; ++t) {
    const auto leaders = archive.leaders(cfg.leader_fraction);
    const double w = inertia(cfg, t);
    for (std::size_t i = 0; i < cfg.pop_size; ++i) {
      Particle& p = swarm[i];
      Rng& rng = rngs[i];
      const auto& gbest = archive[leaders[rng.below(leaders.size())]].position;
      p.velocity = update_velocity(p, gbest, w, cfg, bounds, rng);
      update_position(p, bounds);
      if (static_cast<double>(t) < mutation_horizon) mutate(p.position, t, cfg, bounds, rng);
    }
    detail::evaluate_swarm(swarm, evaluate, cfg.threads, t + 1, objectives);
    detail::archive_swarm(archive, swarm);
    for (std::size_t i = 0; i < cfg.pop_size; ++i) update_pbest(swarm[i], rngs[i]);
    observe(t, swarm, archive);
  }
  return archive;
}

}  // namespace abe::mopso
