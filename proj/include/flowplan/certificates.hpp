#ifndef FLOWPLAN_CERTIFICATES_HPP
#define FLOWPLAN_CERTIFICATES_HPP

#include <string>
#include <vector>

#include "flowplan/cbf.hpp"
#include "flowplan/integrate.hpp"
#include "flowplan/path.hpp"

namespace flowplan {

// distance below the robust margin: max(delta - b, 0)
double lyapunov_value(double b, double delta);

// closed-form majorant of the Lyapunov value after t_w:
// phi(t) = (v0^(1-rho) - (1-rho) * epsilon * (t - t_w))^(1/(1-rho)), clamped
// to 0 once it extinguishes; requires t >= t_w
double comparison_solution(double v0, const CbfParams& params, double t);

// absolute time by which b must have reached delta:
// t_w + max(delta - b_at_tw, 0)^(1-rho) / (epsilon * (1-rho))
double convergence_bound(double b_at_tw, const CbfParams& params);

struct TrapCheck {
  bool trapped = false;
  std::vector<int> segments;  // indices k with ||tau_k - tau_{k-1}|| > zeta
};

TrapCheck detect_trap(const Path& path, double zeta);

struct CertificateViolation {
  std::string kind;  // "reach" | "invariance" | "comparison"
  int barrier = 0;
  int waypoint = 0;
  int snapshot = 0;
  double time = 0.0;
  double value = 0.0;  // offending barrier / Lyapunov value
  double limit = 0.0;  // bound it had to satisfy
};

struct WaypointCertificate {
  int barrier = 0;
  int waypoint = 0;
  double b_at_tw = 0.0;
  double bound = 0.0;       // absolute reach deadline
  double reach_time = 0.0;  // NaN when never reached
  bool reached = false;
  bool invariant = false;
  bool comparison_ok = false;
  double max_post_reach_drop = 0.0;  // max(delta - b) after first reach
};

struct EnvelopeFit {
  bool fitted = false;
  double c1 = 0.0;
  double c2 = 0.0;
  double max_excess = 0.0;  // max of error minus envelope over the trace
};

struct CertificateReport {
  bool pass = false;  // every row reached, invariant and below the majorant
  std::vector<double> tolerance;  // per-barrier discretization allowance
  std::vector<WaypointCertificate> rows;
  std::vector<CertificateViolation> violations;
  TrapCheck trap;
  EnvelopeFit envelope;
  double max_reach_time = 0.0;  // NaN when nothing was certified
};

// Checks the stored trace against the finite-time reach bound, forward
// invariance after first reach, and the comparison majorant, all beyond t_w.
// The discretization allowance per barrier is L * max dt with L the largest
// observed |db/dt| for that barrier.
CertificateReport verify_invariance(const CorrectionTrace& trace,
                                    const CbfParams& params,
                                    const std::vector<BarrierSpec>& specs);

// Fits ||path_t - target||_F = c1 * exp(-alpha t) + c2 * (1 - t)^2 at two
// early snapshots and reports the worst excess over the whole trace.
EnvelopeFit fit_error_envelope(const CorrectionTrace& trace, const Path& target,
                               double alpha);

}  // namespace flowplan

#endif  // FLOWPLAN_CERTIFICATES_HPP
