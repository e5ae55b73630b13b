#ifndef FLOWPLAN_CBF_HPP
#define FLOWPLAN_CBF_HPP

#include <Eigen/Core>
#include <array>
#include <vector>

#include "flowplan/barrier.hpp"

namespace flowplan {

// Parameters of the finite-time barrier filter.
//   epsilon: gain of the signed-power correction term, > 0
//   rho:     power, in (0, 1); the sign convention is sgn(0) = 0
//   delta:   robust margin, > 0; the filter certifies {b >= delta}
//   t_w:     end of the relaxation window, in [0, 1); weight is 0 from t_w on
//   w0:      initial slack weight, >= 0
//   zeta:    discontinuity threshold for trap detection, > 0 once resolved;
//            0 means "take the environment default"
struct CbfParams {
  double epsilon = 10.0;
  double rho = 0.5;
  double delta = 0.01;
  double t_w = 0.5;
  double w0 = 1.0;
  double zeta = 0.0;

  void validate(bool require_zeta = true) const;
};

// w0 * max(0, 1 - t / t_w); identically 0 when t_w == 0
double weight_schedule(double t, double t_w, double w0);

// One linear constraint row grad' u + offset + weight * r >= 0 on the
// waypoint velocity u and the shared slack r.
struct CbfRow {
  Eigen::VectorXd grad;  // gradient of b at the waypoint
  double offset = 0.0;   // epsilon * sgn(b - delta) * |b - delta|^rho
  double weight = 0.0;   // slack weight at this time
  double barrier = 0.0;  // b value, kept for tracing
};

CbfRow cbf_row(const BarrierSpec& spec, const CbfParams& params,
               const Eigen::VectorXd& waypoint, double t);

struct QpSolution {
  Eigen::VectorXd u;
  double slack = 0.0;                        // 0 exactly when weight == 0
  std::array<double, 2> multipliers{0.0, 0.0};
  bool degenerate = false;                   // near-parallel fallback taken
  double barrier_min = 0.0;                  // min row barrier, for tracing
};

// min ||u - v_ref||^2 + r^2 subject to the rows; closed-form active-set
// enumeration over at most 2 rows. Throws InfeasibleError when every row
// gradient vanishes while a row is violated.
QpSolution qp_project(const std::vector<CbfRow>& rows,
                      const Eigen::VectorXd& v_ref);

// builds one row per barrier at the waypoint and projects v_ref
QpSolution filter_step(const Eigen::VectorXd& v_ref,
                       const std::vector<BarrierSpec>& specs,
                       const CbfParams& params,
                       const Eigen::VectorXd& waypoint, double t);

// Barrier set plus parameters, applied per waypoint.
struct SafetyFilter {
  std::vector<BarrierSpec> barriers;
  CbfParams params;

  QpSolution apply(const Eigen::VectorXd& v_ref,
                   const Eigen::VectorXd& waypoint, double t) const {
    return filter_step(v_ref, barriers, params, waypoint, t);
  }
};

}  // namespace flowplan

#endif  // FLOWPLAN_CBF_HPP
