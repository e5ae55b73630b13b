#include "flowplan/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {
constexpr std::uint64_t kZetaProbeSeed = 0x5eedf00d;
constexpr int kZetaProbePaths = 64;
constexpr int kLloydIterations = 50;

double region_barrier_min(const Region& region, const BarrierSpec& spec) {
  // sampled minimum over the disc: center plus a dense boundary sweep
  double lo = barrier_eval(spec, region.center).value;
  const int n = 256;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * 3.14159265358979323846 * i / n;
    Eigen::Vector2d p = region.center;
    p[0] += region.radius * std::cos(th);
    p[1] += region.radius * std::sin(th);
    lo = std::min(lo, barrier_eval(spec, p).value);
  }
  return lo;
}
}  // namespace

void Environment::validate(double delta) const {
  if (name.empty()) throw ValidationError("environment needs a name");
  if (!(bounds_min[0] < bounds_max[0]) || !(bounds_min[1] < bounds_max[1]))
    throw ValidationError("environment bounds are empty");
  if (barriers.size() > 2)
    throw ValidationError("environment supports at most 2 barriers");
  for (const BarrierSpec& spec : barriers) spec.validate(2);
  if (waypoints < 2 || waypoints > 256)
    throw ValidationError("environment waypoint count out of range");
  if (!(control_spread > 0.0))
    throw ValidationError("control spread must be > 0");
  for (const Region* r : {&start, &goal}) {
    if (!(r->radius > 0.0)) throw ValidationError("region radius must be > 0");
    for (int c = 0; c < 2; ++c) {
      if (!(r->center[c] - r->radius > bounds_min[c]) ||
          !(r->center[c] + r->radius < bounds_max[c]))
        throw ValidationError("region must lie strictly inside the bounds");
    }
    for (const BarrierSpec& spec : barriers) {
      if (spec.kind == BarrierSpec::Kind::halfspace_velocity) continue;
      if (region_barrier_min(*r, spec) < delta)
        throw ValidationError("region intersects an inflated unsafe set");
    }
  }
}

Environment corridor_environment() {
  Environment env;
  env.name = "corridor";
  env.bounds_min = {0.0, 0.0};
  env.bounds_max = {8.0, 8.0};
  BarrierSpec round;
  round.kind = BarrierSpec::Kind::ellipse;
  round.center = {3.0, 4.0};
  round.ax = round.ay = 0.8;
  BarrierSpec boxy;
  boxy.kind = BarrierSpec::Kind::quartic;
  boxy.center = {5.5, 2.5};
  boxy.ax = boxy.ay = 0.9;
  env.barriers = {round, boxy};
  // start and goal straddle the diagonal gap between the two obstacles
  env.start = {{2.81, 0.85}, 0.45};
  env.goal = {{5.69, 5.65}, 0.45};
  env.waypoints = 32;
  env.control_spread = 0.5;
  env.zeta = default_zeta(env);
  return env;
}

void PathDataset::check() const {
  if (paths.empty()) throw ValidationError("dataset is empty");
  for (const Path& p : paths) {
    p.check();
    if (p.dim() != paths[0].dim() || p.waypoints() != paths[0].waypoints())
      throw ValidationError("dataset paths must share one shape");
  }
}

namespace {

Eigen::Vector2d sample_disc(const Region& region, Rng& rng) {
  const double r = region.radius * std::sqrt(rng.uniform());
  const double th = 2.0 * 3.14159265358979323846 * rng.uniform();
  return region.center + r * Eigen::Vector2d(std::cos(th), std::sin(th));
}

// Control points are resampled until they clear every positional obstacle.
// Whole paths are never filtered: spline sag and jitter may still graze, but
// no route aims through an obstacle, so fitted cluster means stay safe.
constexpr double kControlClearance = 0.5;
constexpr int kControlAttempts = 64;

double position_clearance(const Environment& env, const Eigen::Vector2d& p) {
  double lo = std::numeric_limits<double>::infinity();
  for (const BarrierSpec& spec : env.barriers) {
    if (spec.kind == BarrierSpec::Kind::halfspace_velocity) continue;
    lo = std::min(lo, barrier_eval(spec, p).value);
  }
  return lo;
}

// uniform Catmull-Rom spline through the knots, endpoints duplicated
Eigen::Vector2d spline_eval(const std::vector<Eigen::Vector2d>& knots,
                            double s) {
  const int segs = static_cast<int>(knots.size()) - 1;
  const double x = std::min(std::max(s, 0.0), 1.0) * segs;
  int seg = std::min(static_cast<int>(x), segs - 1);
  const double u = x - seg;
  auto at = [&](int i) {
    return knots[static_cast<std::size_t>(
        std::min(std::max(i, 0), segs))];
  };
  const Eigen::Vector2d p0 = at(seg - 1), p1 = at(seg), p2 = at(seg + 1),
                        p3 = at(seg + 2);
  const double u2 = u * u, u3 = u2 * u;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * u +
                (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u3);
}

}  // namespace

PathDataset generate_dataset(const Environment& env, int n_paths,
                             std::uint64_t seed, double jitter_scale) {
  if (n_paths < 1) throw ValidationError("dataset needs >= 1 path");
  if (!(jitter_scale >= 0.0)) throw ValidationError("jitter must be >= 0");
  const int wp = env.waypoints;
  const int horizon = wp - 1;

  PathDataset out;
  out.environment = env.name;
  out.generator_seed = seed;
  out.jitter_scale = jitter_scale;
  out.paths.reserve(static_cast<std::size_t>(n_paths));

  const Rng base(seed, 0x6da7a5e7);
  for (int pth = 0; pth < n_paths; ++pth) {
    Rng rng = base.derive(static_cast<std::uint64_t>(pth));
    const Eigen::Vector2d s = sample_disc(env.start, rng);
    const Eigen::Vector2d g = sample_disc(env.goal, rng);
    Eigen::Vector2d dir = g - s;
    const double len = dir.norm();
    Eigen::Vector2d perp(0.0, 0.0);
    if (len > 0.0) {
      dir /= len;
      perp = Eigen::Vector2d(-dir[1], dir[0]);
    }

    std::vector<Eigen::Vector2d> knots;
    knots.push_back(s);
    for (double f : {0.25, 0.5, 0.75}) {
      Eigen::Vector2d best = s + f * (g - s);
      double best_clear = -std::numeric_limits<double>::infinity();
      for (int attempt = 0; attempt < kControlAttempts; ++attempt) {
        Eigen::Vector2d c =
            s + f * (g - s) + env.control_spread * rng.normal() * perp;
        for (int i = 0; i < 2; ++i) {
          const double margin = 0.02 * (env.bounds_max[i] - env.bounds_min[i]);
          c[i] = std::min(std::max(c[i], env.bounds_min[i] + margin),
                          env.bounds_max[i] - margin);
        }
        const double clear = position_clearance(env, c);
        if (clear > best_clear) {
          best_clear = clear;
          best = c;
        }
        if (clear >= kControlClearance) break;
      }
      knots.push_back(best);
    }
    knots.push_back(g);

    Path path(2, horizon);
    for (int k = 0; k <= horizon; ++k)
      path.data().col(k) = spline_eval(knots, static_cast<double>(k) / horizon);

    double mean_seg = 0.0;
    for (int k = 1; k <= horizon; ++k)
      mean_seg += (path.data().col(k) - path.data().col(k - 1)).norm();
    mean_seg /= horizon;

    // endpoints stay inside their regions by construction: only interior
    // waypoints get jitter
    const double jitter = jitter_scale * mean_seg;
    for (int k = 1; k < horizon; ++k)
      for (int i = 0; i < 2; ++i) path.data()(i, k) += jitter * rng.normal();

    path.check();
    out.paths.push_back(std::move(path));
  }
  return out;
}

GmmTarget fit_gmm_target(const PathDataset& dataset, int components) {
  dataset.check();
  const int n_paths = static_cast<int>(dataset.paths.size());
  if (components < 1) throw ValidationError("components must be >= 1");
  if (n_paths < components)
    throw ValidationError("dataset smaller than component count");

  const int n = dataset.paths[0].dim() * dataset.paths[0].waypoints();
  Eigen::MatrixXd data(n, n_paths);
  for (int i = 0; i < n_paths; ++i)
    data.col(i) = dataset.paths[static_cast<std::size_t>(i)].flatten();

  const Rng base(dataset.generator_seed, 0xf17a11);
  auto attempt = [&](Rng rng, Eigen::MatrixXd* centers_out,
                     std::vector<int>* assign_out) -> bool {
    // init: distinct random data points
    std::vector<int> picks;
    while (static_cast<int>(picks.size()) < components) {
      const int cand = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_paths)));
      if (std::find(picks.begin(), picks.end(), cand) == picks.end())
        picks.push_back(cand);
    }
    Eigen::MatrixXd centers(n, components);
    for (int c = 0; c < components; ++c)
      centers.col(c) = data.col(picks[static_cast<std::size_t>(c)]);

    std::vector<int> assign(static_cast<std::size_t>(n_paths), 0);
    for (int it = 0; it < kLloydIterations; ++it) {
      bool changed = false;
      for (int i = 0; i < n_paths; ++i) {
        int best = 0;
        double best_d = (data.col(i) - centers.col(0)).squaredNorm();
        for (int c = 1; c < components; ++c) {
          const double d = (data.col(i) - centers.col(c)).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        if (assign[static_cast<std::size_t>(i)] != best) changed = true;
        assign[static_cast<std::size_t>(i)] = best;
      }
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, components);
      std::vector<int> counts(static_cast<std::size_t>(components), 0);
      for (int i = 0; i < n_paths; ++i) {
        sums.col(assign[static_cast<std::size_t>(i)]) += data.col(i);
        ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < components; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) return false;
        centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
      }
      if (!changed) break;
    }
    *centers_out = std::move(centers);
    *assign_out = std::move(assign);
    return true;
  };

  Eigen::MatrixXd centers;
  std::vector<int> assign;
  if (!attempt(base.derive(0), &centers, &assign) &&
      !attempt(base.derive(1), &centers, &assign))
    throw ValidationError("k-means produced an empty cluster twice");

  GmmTarget gmm;
  double sq_dev = 0.0;
  std::vector<int> counts(static_cast<std::size_t>(components), 0);
  for (int i = 0; i < n_paths; ++i) {
    const int c = assign[static_cast<std::size_t>(i)];
    ++counts[static_cast<std::size_t>(c)];
    sq_dev += (data.col(i) - centers.col(c)).squaredNorm();
  }
  // floored so the marginal stays well defined on degenerate datasets
  const double s = std::max(
      std::sqrt(sq_dev /
                (static_cast<double>(n_paths) * static_cast<double>(n))),
      1e-9);
  for (int c = 0; c < components; ++c) {
    gmm.weights.push_back(static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                          n_paths);
    gmm.means.push_back(
        Path::unflatten(centers.col(c), dataset.paths[0].dim()));
    gmm.stds.push_back(s);
  }
  gmm.validate();
  return gmm;
}

double median_spacing(const PathDataset& dataset) {
  dataset.check();
  std::vector<double> seg;
  for (const Path& p : dataset.paths)
    for (int k = 1; k < p.waypoints(); ++k)
      seg.push_back((p.data().col(k) - p.data().col(k - 1)).norm());
  std::sort(seg.begin(), seg.end());
  return seg[seg.size() / 2];
}

double default_zeta(const Environment& env) {
  const PathDataset probe = generate_dataset(env, kZetaProbePaths, kZetaProbeSeed);
  return 4.0 * median_spacing(probe);
}

}  // namespace flowplan
