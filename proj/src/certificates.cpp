#include "flowplan/certificates.hpp"

#include <cmath>
#include <limits>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {
constexpr double kTiny = 1e-12;
const double kNan = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double lyapunov_value(double b, double delta) {
  if (!std::isfinite(b) || !std::isfinite(delta))
    throw ValidationError("lyapunov inputs must be finite");
  return std::max(delta - b, 0.0);
}

double comparison_solution(double v0, const CbfParams& params, double t) {
  params.validate(false);
  if (!(v0 >= 0.0)) throw ValidationError("v0 must be >= 0");
  if (!(t >= params.t_w))
    throw ValidationError("comparison solution defined for t >= t_w");
  const double p = 1.0 - params.rho;
  const double core = std::pow(v0, p) - p * params.epsilon * (t - params.t_w);
  if (core <= 0.0) return 0.0;
  return std::pow(core, 1.0 / p);
}

double convergence_bound(double b_at_tw, const CbfParams& params) {
  params.validate(false);
  if (!std::isfinite(b_at_tw)) throw ValidationError("barrier value not finite");
  const double p = 1.0 - params.rho;
  const double v0 = std::max(params.delta - b_at_tw, 0.0);
  return params.t_w + std::pow(v0, p) / (params.epsilon * p);
}

TrapCheck detect_trap(const Path& path, double zeta) {
  if (!(zeta > 0.0)) throw ValidationError("zeta must be > 0");
  path.check();
  TrapCheck out;
  for (int k = 1; k < path.waypoints(); ++k) {
    if ((path.data().col(k) - path.data().col(k - 1)).norm() > zeta) {
      out.trapped = true;
      out.segments.push_back(k);
    }
  }
  return out;
}

CertificateReport verify_invariance(const CorrectionTrace& trace,
                                    const CbfParams& params,
                                    const std::vector<BarrierSpec>& specs) {
  params.validate(true);
  trace.check();
  const int nb = static_cast<int>(specs.size());
  const int ns = static_cast<int>(trace.snapshots.size());
  const int wp = trace.snapshots.front().path.waypoints();

  // prefer recorded barrier values; recompute when the trace has none
  std::vector<Eigen::MatrixXd> values(static_cast<std::size_t>(ns));
  const bool recorded = trace.barrier_count() == nb;
  for (int i = 0; i < ns; ++i) {
    if (recorded) {
      values[static_cast<std::size_t>(i)] =
        trace.snapshots[static_cast<std::size_t>(i)].barriers;
    } else {
      Eigen::MatrixXd m(nb, wp);
      for (int j = 0; j < nb; ++j)
        for (int k = 0; k < wp; ++k)
          m(j, k) = barrier_eval(
              specs[static_cast<std::size_t>(j)],
              trace.snapshots[static_cast<std::size_t>(i)].path.waypoint(k)).value;
      values[static_cast<std::size_t>(i)] = std::move(m);
    }
  }

  double max_dt = 0.0;
  for (int i = 0; i + 1 < ns; ++i)
    max_dt = std::max(max_dt, trace.snapshots[static_cast<std::size_t>(i) + 1].t -
                                  trace.snapshots[static_cast<std::size_t>(i)].t);

  CertificateReport report;
  report.tolerance.assign(static_cast<std::size_t>(nb), 0.0);
  for (int j = 0; j < nb; ++j) {
    double rate = 0.0;
    for (int i = 0; i + 1 < ns; ++i) {
      const double dt = trace.snapshots[static_cast<std::size_t>(i) + 1].t -
                        trace.snapshots[static_cast<std::size_t>(i)].t;
      for (int k = 0; k < wp; ++k)
        rate = std::max(rate,
                        std::abs(values[static_cast<std::size_t>(i) + 1](j, k) -
                                 values[static_cast<std::size_t>(i)](j, k)) / dt);
    }
    report.tolerance[static_cast<std::size_t>(j)] = rate * max_dt + kTiny;
  }

  int tw_idx = ns - 1;
  for (int i = 0; i < ns; ++i) {
    if (trace.snapshots[static_cast<std::size_t>(i)].t >= params.t_w) {
      tw_idx = i;
      break;
    }
  }

  bool all_ok = true;
  report.max_reach_time = nb > 0 ? 0.0 : kNan;
  for (int j = 0; j < nb; ++j) {
    const double tol = report.tolerance[static_cast<std::size_t>(j)];
    for (int k = 0; k < wp; ++k) {
      WaypointCertificate row;
      row.barrier = j;
      row.waypoint = k;
      row.b_at_tw = values[static_cast<std::size_t>(tw_idx)](j, k);
      row.bound = convergence_bound(row.b_at_tw, params);
      row.reach_time = kNan;

      int reach_idx = -1;
      for (int i = tw_idx; i < ns; ++i) {
        if (values[static_cast<std::size_t>(i)](j, k) >= params.delta - tol) {
          reach_idx = i;
          break;
        }
      }
      row.reached = reach_idx >= 0;
      if (row.reached) {
        row.reach_time = trace.snapshots[static_cast<std::size_t>(reach_idx)].t;
        if (row.reach_time > row.bound + max_dt + kTiny) {
          report.violations.push_back({"reach", j, k, reach_idx, row.reach_time,
                                       row.reach_time, row.bound + max_dt});
          row.reached = false;
        }
      } else {
        report.violations.push_back({"reach", j, k, ns - 1, 1.0, kNan,
                                     row.bound + max_dt});
      }

      row.invariant = true;
      row.max_post_reach_drop = 0.0;
      if (reach_idx >= 0) {
        for (int i = reach_idx; i < ns; ++i) {
          const double b = values[static_cast<std::size_t>(i)](j, k);
          row.max_post_reach_drop =
              std::max(row.max_post_reach_drop, params.delta - b);
          if (b < params.delta - tol) {
            row.invariant = false;
            report.violations.push_back(
                {"invariance", j, k, i,
                 trace.snapshots[static_cast<std::size_t>(i)].t, b,
                 params.delta - tol});
          }
        }
      }

      row.comparison_ok = true;
      const double v0 = lyapunov_value(row.b_at_tw, params.delta);
      for (int i = tw_idx; i < ns; ++i) {
        const double t = trace.snapshots[static_cast<std::size_t>(i)].t;
        const double v =
            lyapunov_value(values[static_cast<std::size_t>(i)](j, k), params.delta);
        const double phi = comparison_solution(v0, params, t);
        if (v > phi + tol) {
          row.comparison_ok = false;
          report.violations.push_back({"comparison", j, k, i, t, v, phi + tol});
        }
      }

      all_ok = all_ok && row.reached && row.invariant && row.comparison_ok;
      if (row.reached && std::isfinite(row.reach_time))
        report.max_reach_time = std::max(report.max_reach_time, row.reach_time);
      report.rows.push_back(std::move(row));
    }
  }

  report.pass = all_ok;
  report.trap = detect_trap(trace.final_path(), params.zeta);
  return report;
}

EnvelopeFit fit_error_envelope(const CorrectionTrace& trace, const Path& target,
                               double alpha) {
  trace.check();
  target.check();
  const int ns = static_cast<int>(trace.snapshots.size());
  if (trace.snapshots.front().path.dim() != target.dim() ||
      trace.snapshots.front().path.waypoints() != target.waypoints())
    throw ValidationError("target shape does not match the trace");

  std::vector<double> err(static_cast<std::size_t>(ns));
  for (int i = 0; i < ns; ++i)
    err[static_cast<std::size_t>(i)] =
        (trace.snapshots[static_cast<std::size_t>(i)].path.data() -
         target.data()).norm();

  // anchor the fit at the start and near t = 0.125, both well before decay ends
  const int ia = 0;
  int ib = 1;
  for (int i = 1; i < ns - 1; ++i) {
    if (trace.snapshots[static_cast<std::size_t>(i)].t >= 0.125) {
      ib = i;
      break;
    }
    ib = i;
  }

  EnvelopeFit fit;
  const double ta = trace.snapshots[static_cast<std::size_t>(ia)].t;
  const double tb = trace.snapshots[static_cast<std::size_t>(ib)].t;
  const double a11 = std::exp(-alpha * ta), a12 = (1.0 - ta) * (1.0 - ta);
  const double a21 = std::exp(-alpha * tb), a22 = (1.0 - tb) * (1.0 - tb);
  const double det = a11 * a22 - a12 * a21;
  if (std::abs(det) < 1e-14) return fit;
  fit.c1 = (err[static_cast<std::size_t>(ia)] * a22 -
            a12 * err[static_cast<std::size_t>(ib)]) / det;
  fit.c2 = (a11 * err[static_cast<std::size_t>(ib)] -
            err[static_cast<std::size_t>(ia)] * a21) / det;
  fit.fitted = true;
  fit.max_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < ns; ++i) {
    const double t = trace.snapshots[static_cast<std::size_t>(i)].t;
    const double env =
        fit.c1 * std::exp(-alpha * t) + fit.c2 * (1.0 - t) * (1.0 - t);
    fit.max_excess = std::max(fit.max_excess,
                              err[static_cast<std::size_t>(i)] - env);
  }
  return fit;
}

}  // namespace flowplan
