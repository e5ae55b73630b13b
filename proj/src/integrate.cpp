#include "flowplan/integrate.hpp"

#include <string>

#include "flowplan/errors.hpp"

namespace flowplan {

Path euler_integrate(const VectorField& field, const TimeGrid& grid,
                     const Path& start, std::vector<double>* field_norms) {
  if (start.dim() != field.dim() || start.waypoints() != field.waypoints())
    throw ValidationError("start shape does not match the field");
  if (field_norms) field_norms->clear();
  Eigen::MatrixXd tau = start.data();
  for (int i = 0; i < grid.steps(); ++i) {
    const Eigen::MatrixXd v = field.eval(tau, grid.time(i));
    if (!v.allFinite())
      throw IntegrationError(
          "non-finite field value at step " + std::to_string(i), i);
    if (field_norms) field_norms->push_back(v.norm());
    tau += grid.dt(i) * v;
    if (!tau.allFinite())
      throw IntegrationError(
          "non-finite state after step " + std::to_string(i), i);
  }
  return Path(std::move(tau));
}

PredictionResult predict(const VectorField& field, int t_pred, Rng& rng) {
  if (t_pred < 1) throw ValidationError("prediction needs >= 1 step");
  const Path prior = sample_prior(field.dim(), field.waypoints() - 1, rng);
  PredictionResult out;
  out.steps = t_pred;
  out.path = euler_integrate(field, TimeGrid::uniform(t_pred), prior,
                             &out.field_norms);
  return out;
}

VtfdField::VtfdField(const VectorField& base, double alpha)
    : base_(&base), alpha_(alpha) {
  if (!(alpha >= 1.0)) throw ValidationError("alpha must be >= 1");
}

Eigen::MatrixXd VtfdField::eval(const Eigen::MatrixXd& tau, double t) const {
  return alpha_ * base_->scaled_eval(tau, t);
}

Eigen::MatrixXd VtfdField::scaled_eval(const Eigen::MatrixXd& tau,
                                       double t) const {
  return (1.0 - t) * eval(tau, t);
}

const Path& CorrectionTrace::final_path() const {
  if (snapshots.empty()) throw ValidationError("empty trace");
  return snapshots.back().path;
}

void CorrectionTrace::check() const {
  if (snapshots.size() < 2) throw ValidationError("trace needs >= 2 snapshots");
  if (snapshots.front().t != 0.0) throw ValidationError("trace must start at 0");
  if (snapshots.back().t != 1.0) throw ValidationError("trace must end at 1");
  for (std::size_t i = 1; i < snapshots.size(); ++i)
    if (!(snapshots[i].t > snapshots[i - 1].t))
      throw ValidationError("trace times must strictly increase");
  for (const CorrectionSnapshot& s : snapshots) {
    s.path.check();
    if (s.barriers.cols() != s.path.waypoints() && s.barriers.size() != 0)
      throw ValidationError("trace barrier shape mismatch");
  }
}

CorrectionTrace run_filtered_flow(const VectorField& reference,
                                  const TimeGrid& grid, const Path& start,
                                  const SafetyFilter* filter,
                                  const std::vector<BarrierSpec>* log_barriers) {
  if (start.dim() != reference.dim() ||
      start.waypoints() != reference.waypoints())
    throw ValidationError("start shape does not match the field");
  const std::vector<BarrierSpec>* specs =
      filter ? &filter->barriers : log_barriers;
  if (filter) filter->params.validate(false);

  const int wp = start.waypoints();
  const int nb = specs ? static_cast<int>(specs->size()) : 0;

  auto barrier_values = [&](const Eigen::MatrixXd& tau) {
    Eigen::MatrixXd values(nb, wp);
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < wp; ++k)
        values(j, k) =
            barrier_eval((*specs)[static_cast<std::size_t>(j)], tau.col(k)).value;
    return values;
  };

  CorrectionTrace trace;
  trace.snapshots.reserve(static_cast<std::size_t>(grid.steps()) + 1);
  Eigen::MatrixXd tau = start.data();

  for (int i = 0; i < grid.steps(); ++i) {
    const double t = grid.time(i);
    CorrectionSnapshot snap;
    snap.t = t;
    snap.path = Path(tau);
    snap.barriers = barrier_values(tau);

    const Eigen::MatrixXd v = reference.eval(tau, t);
    if (!v.allFinite())
      throw IntegrationError(
          "non-finite field value at step " + std::to_string(i), i);
    Eigen::MatrixXd u = v;
    if (filter) {
      snap.qp.resize(static_cast<std::size_t>(wp));
      for (int k = 0; k < wp; ++k) {
        const QpSolution sol = filter->apply(v.col(k), tau.col(k), t);
        u.col(k) = sol.u;
        WaypointQp& q = snap.qp[static_cast<std::size_t>(k)];
        q.slack = sol.slack;
        q.multipliers = sol.multipliers;
        q.degenerate = sol.degenerate;
      }
    }
    trace.snapshots.push_back(std::move(snap));
    tau += grid.dt(i) * u;
    if (!tau.allFinite())
      throw IntegrationError(
          "non-finite state after step " + std::to_string(i), i);
  }

  CorrectionSnapshot last;
  last.t = grid.time(grid.steps());
  last.path = Path(tau);
  last.barriers = barrier_values(tau);
  trace.snapshots.push_back(std::move(last));
  trace.check();
  return trace;
}

CorrectionTrace run_correction(const VectorField& field, double alpha,
                               int t_corr, const Path& start,
                               const SafetyFilter* filter,
                               const std::vector<BarrierSpec>* log_barriers) {
  const VtfdField damped(field, alpha);
  return run_filtered_flow(damped, TimeGrid::uniform(t_corr), start, filter,
                           log_barriers);
}

}  // namespace flowplan
