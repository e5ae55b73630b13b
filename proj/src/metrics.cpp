#include "flowplan/metrics.hpp"

#include <cmath>

#include "flowplan/certificates.hpp"
#include "flowplan/errors.hpp"

namespace flowplan {

void RunRecord::check() const {
  if (!(score >= 0.0 && score <= 1.0))
    throw ValidationError("score must lie in [0, 1]");
  if (!(curvature >= 0.0)) throw ValidationError("curvature must be >= 0");
  if (!(acceleration >= 0.0))
    throw ValidationError("acceleration must be >= 0");
  if (!(time_per_step_ms > 0.0))
    throw ValidationError("time per step must be > 0");
}

double barrier_safety(const std::vector<Path>& runs, const BarrierSpec& spec) {
  if (runs.empty()) throw ValidationError("barrier_safety needs >= 1 run");
  double lo = std::numeric_limits<double>::infinity();
  for (const Path& p : runs) {
    spec.validate(p.dim());
    for (int k = 0; k < p.waypoints(); ++k)
      lo = std::min(lo, barrier_eval(spec, p.waypoint(k)).value);
  }
  return lo;
}

double score_proxy(const Path& path, const Environment& env) {
  path.check();
  if (path.dim() != 2) throw ValidationError("score proxy expects planar paths");
  const int h = path.horizon();
  for (int k = 0; k <= h; ++k) {
    if (k > 0 &&
        (path.data().col(k) - path.data().col(k - 1)).norm() > env.zeta)
      return 0.0;  // trapped before any goal hit
    if (env.goal.contains(path.data().col(k)))
      return static_cast<double>(h - k) / h;
  }
  return 0.0;
}

double curvature(const Path& path) {
  path.check();
  if (path.horizon() < 2)
    throw ValidationError("curvature needs at least two segments");
  double sum = 0.0;
  int joints = 0;
  for (int k = 1; k < path.horizon(); ++k) {
    const Eigen::VectorXd a = path.data().col(k) - path.data().col(k - 1);
    const Eigen::VectorXd b = path.data().col(k + 1) - path.data().col(k);
    ++joints;
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) continue;  // angle defined as zero
    // half-angle form on unit vectors: accurate near 0 and pi, any dimension
    const Eigen::VectorXd ua = a / na, ub = b / nb;
    sum += 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
  }
  return sum / joints;
}

double acceleration(const Path& path) {
  path.check();
  if (path.horizon() < 2)
    throw ValidationError("acceleration needs at least two segments");
  double sum = 0.0;
  int terms = 0;
  for (int k = 1; k < path.horizon(); ++k) {
    sum += (path.data().col(k + 1) - 2.0 * path.data().col(k) +
            path.data().col(k - 1))
               .squaredNorm();
    ++terms;
  }
  return sum / terms;
}

double time_per_step(double total_elapsed_ms, int t_pred, int t_corr) {
  if (!(total_elapsed_ms > 0.0))
    throw ValidationError("elapsed time must be > 0");
  if (t_pred < 1 || t_corr < 1)
    throw ValidationError("step counts must be >= 1");
  return total_elapsed_ms / (t_pred + t_corr);
}

}  // namespace flowplan
