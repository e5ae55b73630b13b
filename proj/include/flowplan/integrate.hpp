#ifndef FLOWPLAN_INTEGRATE_HPP
#define FLOWPLAN_INTEGRATE_HPP

#include <array>
#include <vector>

#include "flowplan/cbf.hpp"
#include "flowplan/fields.hpp"
#include "flowplan/path.hpp"
#include "flowplan/rng.hpp"
#include "flowplan/time_grid.hpp"

namespace flowplan {

// Explicit Euler transport of `start` along the field over the grid. The
// field is evaluated at t_0 .. t_{T-1} only, never at the terminal time.
// Records per-step Frobenius field norms when `field_norms` is given.
Path euler_integrate(const VectorField& field, const TimeGrid& grid,
                     const Path& start,
                     std::vector<double>* field_norms = nullptr);

struct PredictionResult {
  Path path;
  int steps = 0;
  std::vector<double> field_norms;
};

// Draws a prior path from the rng, then runs t_pred unconstrained Euler steps.
PredictionResult predict(const VectorField& field, int t_pred, Rng& rng);

// alpha * (1 - t) * v_t: bounded on all of [0, 1]; for fields with an exact
// (1 - t) denominator the cancellation is algebraic, so t = 1 is regular.
// Non-owning view: `base` must outlive the wrapper.
class VtfdField final : public VectorField {
 public:
  VtfdField(const VectorField& base, double alpha);

  int dim() const override { return base_->dim(); }
  int waypoints() const override { return base_->waypoints(); }
  double alpha() const { return alpha_; }

  Eigen::MatrixXd eval(const Eigen::MatrixXd& tau, double t) const override;
  Eigen::MatrixXd scaled_eval(const Eigen::MatrixXd& tau,
                              double t) const override;

 private:
  const VectorField* base_;
  double alpha_;
};

inline VtfdField vtfd_field(const VectorField& base, double alpha) {
  return VtfdField(base, alpha);
}

// per-waypoint filter outputs recorded at a snapshot time
struct WaypointQp {
  double slack = 0.0;
  std::array<double, 2> multipliers{0.0, 0.0};
  bool degenerate = false;
};

struct CorrectionSnapshot {
  double t = 0.0;
  Path path;
  Eigen::MatrixXd barriers;     // one row per barrier, one column per waypoint
  std::vector<WaypointQp> qp;   // empty on the terminal snapshot
};

struct CorrectionTrace {
  std::vector<CorrectionSnapshot> snapshots;

  int barrier_count() const {
    return snapshots.empty() ? 0
                             : static_cast<int>(snapshots.front().barriers.rows());
  }
  const Path& final_path() const;
  void check() const;  // times strictly increasing from 0 to 1
};

// Euler transport with the filter projecting every waypoint velocity; the
// reference field is used as-is (pass a VtfdField for damped correction).
// Snapshots cover t_0 = 0 through t_T = 1; barrier values are recorded
// whenever specs are available (from the filter or `log_barriers`).
CorrectionTrace run_filtered_flow(const VectorField& reference,
                                  const TimeGrid& grid, const Path& start,
                                  const SafetyFilter* filter,
                                  const std::vector<BarrierSpec>* log_barriers
                                  = nullptr);

// correction phase: damped dynamics alpha * (1 - t) * v_t with the clock
// restarted at 0 from `start`
CorrectionTrace run_correction(const VectorField& field, double alpha,
                               int t_corr, const Path& start,
                               const SafetyFilter* filter,
                               const std::vector<BarrierSpec>* log_barriers
                               = nullptr);

}  // namespace flowplan

#endif  // FLOWPLAN_INTEGRATE_HPP
