#ifndef FLOWPLAN_ENVIRONMENT_HPP
#define FLOWPLAN_ENVIRONMENT_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "flowplan/barrier.hpp"
#include "flowplan/fields.hpp"
#include "flowplan/path.hpp"

namespace flowplan {

struct Region {
  Eigen::Vector2d center{0.0, 0.0};
  double radius = 0.0;

  bool contains(const Eigen::Vector2d& p) const {
    return (p - center).norm() <= radius;
  }
};

// Planar workspace: axis-aligned bounds, up to two obstacles, start and goal
// discs that clear every obstacle by at least the robust margin.
struct Environment {
  std::string name;
  Eigen::Vector2d bounds_min{0.0, 0.0};
  Eigen::Vector2d bounds_max{1.0, 1.0};
  std::vector<BarrierSpec> barriers;
  Region start;
  Region goal;
  int waypoints = 32;          // H + 1
  double control_spread = 0.5; // lateral std of dataset control points
  double zeta = 0.0;           // trap threshold, 4x median dataset spacing

  void validate(double delta) const;
};

// two-obstacle workspace with a diagonal corridor between the obstacles
Environment corridor_environment();

struct PathDataset {
  std::string environment;
  std::uint64_t generator_seed = 0;
  double jitter_scale = 0.25;  // waypoint noise std as a fraction of spacing
  std::vector<Path> paths;

  int waypoints() const { return paths.empty() ? 0 : paths[0].waypoints(); }
  void check() const;
};

// Smooth random paths: endpoints drawn in the start/goal discs, a cubic
// spline through three laterally jittered control points, resampled to
// env.waypoints points, interior waypoints perturbed by Gaussian noise with
// std jitter_scale x the mean spacing. Obstacles are ignored on purpose;
// grazing paths are what the filter has to correct.
PathDataset generate_dataset(const Environment& env, int n_paths,
                             std::uint64_t seed, double jitter_scale = 0.25);

// k-means (fixed 50 Lloyd iterations, seeded from the dataset) over flattened
// paths; component weights are cluster fractions and one shared isotropic std
// is the RMS within-cluster deviation. Empty clusters re-seed once.
GmmTarget fit_gmm_target(const PathDataset& dataset, int components = 4);

// median inter-waypoint spacing over every segment in the dataset
double median_spacing(const PathDataset& dataset);

// 4x the median spacing of a fixed probe dataset drawn from the environment
double default_zeta(const Environment& env);

}  // namespace flowplan

#endif  // FLOWPLAN_ENVIRONMENT_HPP
