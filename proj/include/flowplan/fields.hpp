#ifndef FLOWPLAN_FIELDS_HPP
#define FLOWPLAN_FIELDS_HPP

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

#include "flowplan/path.hpp"
#include "flowplan/rng.hpp"

namespace flowplan {

// evaluations at t >= 1 - kTimeGuard are refused where the field is singular
inline constexpr double kTimeGuard = 1e-9;

// Time-dependent velocity field over whole waypoint matrices.
class VectorField {
 public:
  virtual ~VectorField() = default;

  virtual int dim() const = 0;
  virtual int waypoints() const = 0;

  // v_t(tau); may be singular as t -> 1
  virtual Eigen::MatrixXd eval(const Eigen::MatrixXd& tau, double t) const = 0;

  // (1 - t) * v_t(tau), continuously extended to t = 1. Fields whose
  // denominator is exactly (1 - t) override this with the cancelled form.
  virtual Eigen::MatrixXd scaled_eval(const Eigen::MatrixXd& tau,
                                      double t) const;

 protected:
  void check_input(const Eigen::MatrixXd& tau, double t) const;
};

// (target - tau) / (1 - t): transports any point onto `target` at t = 1
class OtConditionalField final : public VectorField {
 public:
  explicit OtConditionalField(Path target);

  int dim() const override { return target_.dim(); }
  int waypoints() const override { return target_.waypoints(); }
  const Path& target() const { return target_; }

  Eigen::MatrixXd eval(const Eigen::MatrixXd& tau, double t) const override;
  Eigen::MatrixXd scaled_eval(const Eigen::MatrixXd& tau,
                              double t) const override;

 private:
  Path target_;
};

// Isotropic Gaussian mixture over paths: weights sum to 1, one shared shape.
struct GmmTarget {
  std::vector<double> weights;
  std::vector<Path> means;
  std::vector<double> stds;

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : means[0].dim(); }
  int waypoints() const { return means.empty() ? 0 : means[0].waypoints(); }

  void validate() const;
  Path sample(Rng& rng) const;
  Path mean() const;  // mixture mean
};

// Closed-form marginal velocity field of the straight-line transport applied
// to a GmmTarget: the time-t state is Gaussian per component with mean t*mu_i
// and per-coordinate variance (t*s_i)^2 + (1-t)^2.
class GmmMarginalField final : public VectorField {
 public:
  explicit GmmMarginalField(GmmTarget target);

  int dim() const override { return target_.dim(); }
  int waypoints() const override { return target_.waypoints(); }
  const GmmTarget& target() const { return target_; }

  // softmax of component log-posteriors; sums to 1
  Eigen::VectorXd posterior_weights(const Eigen::MatrixXd& tau, double t) const;
  // E[tau_1 | tau_t = tau], defined on all of [0, 1]
  Eigen::MatrixXd posterior_mean(const Eigen::MatrixXd& tau, double t) const;

  Eigen::MatrixXd eval(const Eigen::MatrixXd& tau, double t) const override;
  Eigen::MatrixXd scaled_eval(const Eigen::MatrixXd& tau,
                              double t) const override;

 private:
  GmmTarget target_;
};

// velocity of the straight-line transport toward a fixed endpoint
Eigen::MatrixXd ot_conditional(const Path& target, const Eigen::MatrixXd& tau,
                               double t);
// marginal field of the mixture target
Eigen::MatrixXd gmm_marginal(const GmmTarget& target, const Eigen::MatrixXd& tau,
                             double t);

// adapter for ad-hoc fields in tests and baselines
class FunctionField final : public VectorField {
 public:
  using Fn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, double)>;
  FunctionField(int dim, int waypoints, Fn fn)
      : dim_(dim), waypoints_(waypoints), fn_(std::move(fn)) {}

  int dim() const override { return dim_; }
  int waypoints() const override { return waypoints_; }
  Eigen::MatrixXd eval(const Eigen::MatrixXd& tau, double t) const override {
    return fn_(tau, t);
  }

 private:
  int dim_;
  int waypoints_;
  Fn fn_;
};

using ProbeSet = std::vector<std::pair<Path, double>>;

// root mean square of ||a - b||_F over the probe set
double field_distance(const VectorField& a, const VectorField& b,
                      const ProbeSet& probes);

}  // namespace flowplan

#endif  // FLOWPLAN_FIELDS_HPP
