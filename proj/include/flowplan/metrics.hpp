#ifndef FLOWPLAN_METRICS_HPP
#define FLOWPLAN_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowplan/barrier.hpp"
#include "flowplan/environment.hpp"
#include "flowplan/path.hpp"

namespace flowplan {

// Per-run evaluation row. Every field except time_per_step_ms is a pure
// function of (seed, config), so records replay bit for bit; the timing
// field is measured and excluded from deterministic artifacts.
struct RunRecord {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<double> min_barrier;  // one entry per constraint
  double score = 0.0;               // in [0, 1]
  bool trap = false;
  double curvature = 0.0;           // mean radians per interior joint
  double acceleration = 0.0;        // mean squared second difference
  double convergence_time = 0.0;    // latest certified reach time, else NaN
  double time_per_step_ms = 0.0;    // measured, not replayable

  void check() const;
};

// min over runs and waypoints of b at the final paths
double barrier_safety(const std::vector<Path>& runs, const BarrierSpec& spec);

// (H - k*)/H for the earliest goal hit k* with no trap segment before it,
// else 0; an open-loop surrogate for a closed-loop rollout score
double score_proxy(const Path& path, const Environment& env);

// mean unsigned turn angle between consecutive segments, H >= 2;
// zero-length segments contribute zero angle but still count
double curvature(const Path& path);

// mean squared second-difference magnitude, H >= 2
double acceleration(const Path& path);

// total elapsed milliseconds averaged over prediction plus correction steps
double time_per_step(double total_elapsed_ms, int t_pred, int t_corr);

}  // namespace flowplan

#endif  // FLOWPLAN_METRICS_HPP
