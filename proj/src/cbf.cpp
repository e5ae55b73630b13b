#include "flowplan/cbf.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {
constexpr double kSignSnap = 1e-12;   // |b - delta| below this counts as 0
constexpr double kZeroGrad = 1e-14;   // gradient norm below this counts as 0
constexpr double kFeasTol = 1e-9;
constexpr double kDualTol = 1e-12;
constexpr double kCondLimit = 1e12;
}  // namespace

void CbfParams::validate(bool require_zeta) const {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (!(rho > 0.0) || !(rho < 1.0)) throw ValidationError("rho must be in (0, 1)");
  if (!(delta > 0.0)) throw ValidationError("delta must be > 0");
  if (!(t_w >= 0.0) || !(t_w < 1.0)) throw ValidationError("t_w must be in [0, 1)");
  if (!(w0 >= 0.0)) throw ValidationError("w0 must be >= 0");
  if (require_zeta) {
    if (!(zeta > 0.0)) throw ValidationError("zeta must be > 0");
  } else if (zeta < 0.0) {
    throw ValidationError("zeta must be >= 0");
  }
}

double weight_schedule(double t, double t_w, double w0) {
  if (!(t >= 0.0)) throw ValidationError("weight schedule needs t >= 0");
  if (!(t_w >= 0.0) || !(t_w < 1.0)) throw ValidationError("t_w must be in [0, 1)");
  if (!(w0 >= 0.0)) throw ValidationError("w0 must be >= 0");
  if (t_w == 0.0) return 0.0;
  return w0 * std::max(0.0, 1.0 - t / t_w);
}

CbfRow cbf_row(const BarrierSpec& spec, const CbfParams& params,
               const Eigen::VectorXd& waypoint, double t) {
  params.validate(false);
  const BarrierEval eval = barrier_eval(spec, waypoint);
  CbfRow row;
  row.grad = eval.grad;
  row.barrier = eval.value;
  const double m = eval.value - params.delta;
  if (std::abs(m) < kSignSnap) {
    row.offset = 0.0;
  } else {
    const double s = m > 0.0 ? 1.0 : -1.0;
    row.offset = params.epsilon * s * std::pow(std::abs(m), params.rho);
  }
  row.weight = weight_schedule(t, params.t_w, params.w0);
  return row;
}

namespace {

struct Candidate {
  Eigen::VectorXd u;
  double slack;
  std::array<double, 2> multipliers;  // indexed by original row position
  double objective;
};

double objective_of(const Eigen::VectorXd& u, const Eigen::VectorXd& v_ref,
                    double r) {
  return (u - v_ref).squaredNorm() + r * r;
}

// The 2x2 Gram system is admitted up to condition 1e12, where a double
// Cramer solve loses ~eps * condition of the multipliers. Widening just this
// solve keeps the KKT residual at evaluation precision.
#if defined(__SIZEOF_FLOAT128__)
using Wide = __float128;
#else
using Wide = long double;
#endif

Wide wide_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Wide acc = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    acc += static_cast<Wide>(a[i]) * static_cast<Wide>(b[i]);
  return acc;
}

}  // namespace

QpSolution qp_project(const std::vector<CbfRow>& rows,
                      const Eigen::VectorXd& v_ref) {
  if (rows.empty() || rows.size() > 2)
    throw ValidationError("qp_project expects 1 or 2 rows");
  if (!v_ref.allFinite()) throw ValidationError("v_ref not finite");
  const double w = rows[0].weight;
  if (!(w >= 0.0)) throw ValidationError("slack weight must be >= 0");
  for (const CbfRow& row : rows) {
    if (row.grad.size() != v_ref.size())
      throw ValidationError("row gradient dimension mismatch");
    if (std::abs(row.weight - w) > 0.0)
      throw ValidationError("rows must share one slack weight");
  }

  QpSolution out;
  out.barrier_min = std::numeric_limits<double>::infinity();
  for (const CbfRow& row : rows)
    out.barrier_min = std::min(out.barrier_min, row.barrier);

  // rows with a vanishing gradient are unservable: satisfied ones drop out,
  // violated ones certify infeasibility
  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].grad.norm() < kZeroGrad) {
      if (rows[j].grad.dot(v_ref) + rows[j].offset < -kFeasTol)
        throw InfeasibleError("constraint violated with zero gradient");
      continue;
    }
    live.push_back(j);
  }

  if (live.empty()) {
    out.u = v_ref;
    return out;
  }

  bool all_ok = true;
  for (std::size_t j : live)
    if (rows[j].grad.dot(v_ref) + rows[j].offset < -kFeasTol) all_ok = false;
  if (all_ok) {
    out.u = v_ref;
    return out;
  }

  // single-row KKT candidate, feasible for the remaining rows
  auto single_active = [&](std::size_t j) -> std::optional<Candidate> {
    const CbfRow& row = rows[j];
    const double denom = row.grad.squaredNorm() + w * w;
    const double res = row.grad.dot(v_ref) + row.offset;
    const double lambda = -2.0 * res / denom;
    if (lambda < -kDualTol) return std::nullopt;
    Candidate c;
    c.u = v_ref - row.grad * (res / denom);
    c.slack = -w * res / denom;
    c.multipliers = {0.0, 0.0};
    c.multipliers[j] = lambda;
    for (std::size_t i : live) {
      if (i == j) continue;
      const double other = rows[i].grad.dot(c.u) + rows[i].offset + w * c.slack;
      if (other < -kFeasTol) return std::nullopt;
    }
    c.objective = objective_of(c.u, v_ref, c.slack);
    return c;
  };

  std::vector<Candidate> candidates;
  for (std::size_t j : live) {
    auto c = single_active(j);
    if (c) candidates.push_back(std::move(*c));
  }

  if (live.size() == 2) {
    const CbfRow& r1 = rows[live[0]];
    const CbfRow& r2 = rows[live[1]];
    const Wide ww = static_cast<Wide>(w) * static_cast<Wide>(w);
    const Wide g11 = wide_dot(r1.grad, r1.grad) + ww;
    const Wide g22 = wide_dot(r2.grad, r2.grad) + ww;
    const Wide g12 = wide_dot(r1.grad, r2.grad) + ww;
    const Wide det = g11 * g22 - g12 * g12;
    const double tr = static_cast<double>(g11 + g22);
    const double disc =
        std::sqrt(std::max(0.0, tr * tr - 4.0 * static_cast<double>(det)));
    const double emax = 0.5 * (tr + disc);
    const double emin = emax > 0.0 ? static_cast<double>(det) / emax : 0.0;
    if (emin > 0.0 && emax / emin <= kCondLimit) {
      const Wide q1 = wide_dot(r1.grad, v_ref) + static_cast<Wide>(r1.offset);
      const Wide q2 = wide_dot(r2.grad, v_ref) + static_cast<Wide>(r2.offset);
      const Wide wl1 = -2 * (g22 * q1 - g12 * q2) / det;
      const Wide wl2 = -2 * (g11 * q2 - g12 * q1) / det;
      const double l1 = static_cast<double>(wl1);
      const double l2 = static_cast<double>(wl2);
      if (l1 >= -kDualTol && l2 >= -kDualTol) {
        Candidate c;
        // near-parallel rows give large cancelling multipliers; assembling u
        // in double would leak eps * |lambda| into the active residuals
        c.u.resize(v_ref.size());
        for (Eigen::Index i = 0; i < v_ref.size(); ++i)
          c.u[i] = static_cast<double>(static_cast<Wide>(v_ref[i]) +
                                       (wl1 * static_cast<Wide>(r1.grad[i]) +
                                        wl2 * static_cast<Wide>(r2.grad[i])) /
                                           2);
        c.slack = static_cast<double>(static_cast<Wide>(w) * (wl1 + wl2) / 2);
        c.multipliers = {0.0, 0.0};
        c.multipliers[live[0]] = l1;
        c.multipliers[live[1]] = l2;
        c.objective = objective_of(c.u, v_ref, c.slack);
        candidates.push_back(std::move(c));
      }
    }
  }

  const Candidate* best = nullptr;
  for (const Candidate& c : candidates)
    if (best == nullptr || c.objective < best->objective) best = &c;

  if (best == nullptr) {
    // near-parallel rows: enforce the more violated one and flag it
    std::size_t worst = live[0];
    double worst_res = std::numeric_limits<double>::infinity();
    for (std::size_t j : live) {
      const double res = rows[j].grad.dot(v_ref) + rows[j].offset;
      if (res < worst_res) {
        worst_res = res;
        worst = j;
      }
    }
    const CbfRow& row = rows[worst];
    const double denom = row.grad.squaredNorm() + w * w;
    const double res = row.grad.dot(v_ref) + row.offset;
    out.u = v_ref - row.grad * (res / denom);
    out.slack = -w * res / denom;
    out.multipliers[worst] = std::max(0.0, -2.0 * res / denom);
    out.degenerate = true;
    if (w == 0.0) out.slack = 0.0;
    return out;
  }

  out.u = best->u;
  out.slack = best->slack;
  out.multipliers = best->multipliers;
  if (w == 0.0) out.slack = 0.0;
  return out;
}

QpSolution filter_step(const Eigen::VectorXd& v_ref,
                       const std::vector<BarrierSpec>& specs,
                       const CbfParams& params,
                       const Eigen::VectorXd& waypoint, double t) {
  if (specs.empty() || specs.size() > 2)
    throw ValidationError("filter_step expects 1 or 2 barriers");
  std::vector<CbfRow> rows;
  rows.reserve(specs.size());
  for (const BarrierSpec& spec : specs)
    rows.push_back(cbf_row(spec, params, waypoint, t));
  return qp_project(rows, v_ref);
}

}  // namespace flowplan
