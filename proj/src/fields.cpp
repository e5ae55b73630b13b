#include "flowplan/fields.hpp"

#include <cmath>
#include <string>

#include "flowplan/errors.hpp"

namespace flowplan {

void VectorField::check_input(const Eigen::MatrixXd& tau, double t) const {
  if (tau.rows() != dim() || tau.cols() != waypoints())
    throw ValidationError("field input shape mismatch");
  if (!tau.allFinite()) throw ValidationError("field input not finite");
  if (!(t >= 0.0) || !(t <= 1.0))
    throw ValidationError("field time must be in [0, 1], got " +
                          std::to_string(t));
}

Eigen::MatrixXd VectorField::scaled_eval(const Eigen::MatrixXd& tau,
                                         double t) const {
  check_input(tau, t);
  const double tc = std::min(t, 1.0 - kTimeGuard);
  return (1.0 - t) * eval(tau, tc);
}

OtConditionalField::OtConditionalField(Path target) : target_(std::move(target)) {
  target_.check();
}

Eigen::MatrixXd OtConditionalField::eval(const Eigen::MatrixXd& tau,
                                         double t) const {
  check_input(tau, t);
  if (t >= 1.0 - kTimeGuard)
    throw SingularTimeError("conditional field is singular at t = 1");
  return (target_.data() - tau) / (1.0 - t);
}

Eigen::MatrixXd OtConditionalField::scaled_eval(const Eigen::MatrixXd& tau,
                                                double t) const {
  check_input(tau, t);
  return target_.data() - tau;
}

void GmmTarget::validate() const {
  if (weights.empty()) throw ValidationError("mixture needs >= 1 component");
  if (means.size() != weights.size() || stds.size() != weights.size())
    throw ValidationError("mixture component counts disagree");
  double sum = 0.0;
  for (double wgt : weights) {
    if (!(wgt >= 0.0)) throw ValidationError("mixture weights must be >= 0");
    sum += wgt;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ValidationError("mixture weights must sum to 1");
  for (const Path& m : means) {
    m.check();
    if (m.dim() != means[0].dim() || m.waypoints() != means[0].waypoints())
      throw ValidationError("mixture means must share one shape");
  }
  for (double s : stds)
    if (!(s > 0.0)) throw ValidationError("mixture stds must be > 0");
}

Path GmmTarget::sample(Rng& rng) const {
  validate();
  const double u = rng.uniform();
  std::size_t pick = weights.size() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  Path out = means[pick];
  const double s = stds[pick];
  for (int k = 0; k < out.waypoints(); ++k)
    for (int i = 0; i < out.dim(); ++i) out.data()(i, k) += s * rng.normal();
  return out;
}

Path GmmTarget::mean() const {
  validate();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(means[0].dim(), means[0].waypoints());
  for (std::size_t i = 0; i < weights.size(); ++i)
    acc += weights[i] * means[i].data();
  return Path(std::move(acc));
}

GmmMarginalField::GmmMarginalField(GmmTarget target) : target_(std::move(target)) {
  target_.validate();
}

Eigen::VectorXd GmmMarginalField::posterior_weights(const Eigen::MatrixXd& tau,
                                                    double t) const {
  check_input(tau, t);
  const int n = static_cast<int>(tau.size());
  const int nc = target_.components();
  Eigen::VectorXd logp(nc);
  for (int i = 0; i < nc; ++i) {
    const double s = target_.stds[static_cast<std::size_t>(i)];
    const double var = (t * s) * (t * s) + (1.0 - t) * (1.0 - t);
    const double sq = (tau - t * target_.means[static_cast<std::size_t>(i)].data())
                          .squaredNorm();
    logp[i] = std::log(target_.weights[static_cast<std::size_t>(i)]) -
              0.5 * n * std::log(var) - 0.5 * sq / var;
  }
  const double top = logp.maxCoeff();
  Eigen::VectorXd out = (logp.array() - top).exp();
  out /= out.sum();
  return out;
}

Eigen::MatrixXd GmmMarginalField::posterior_mean(const Eigen::MatrixXd& tau,
                                                 double t) const {
  const Eigen::VectorXd gamma = posterior_weights(tau, t);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(tau.rows(), tau.cols());
  for (int i = 0; i < target_.components(); ++i) {
    const Eigen::MatrixXd& mu = target_.means[static_cast<std::size_t>(i)].data();
    const double s = target_.stds[static_cast<std::size_t>(i)];
    const double var = (t * s) * (t * s) + (1.0 - t) * (1.0 - t);
    // Gaussian conditioning of tau_1 on tau_t within one component
    acc += gamma[i] * (mu + (t * s * s / var) * (tau - t * mu));
  }
  return acc;
}

Eigen::MatrixXd GmmMarginalField::eval(const Eigen::MatrixXd& tau,
                                       double t) const {
  check_input(tau, t);
  if (t >= 1.0 - kTimeGuard)
    throw SingularTimeError("marginal field is singular at t = 1");
  return (posterior_mean(tau, t) - tau) / (1.0 - t);
}

Eigen::MatrixXd GmmMarginalField::scaled_eval(const Eigen::MatrixXd& tau,
                                              double t) const {
  return posterior_mean(tau, t) - tau;
}

Eigen::MatrixXd ot_conditional(const Path& target, const Eigen::MatrixXd& tau,
                               double t) {
  return OtConditionalField(target).eval(tau, t);
}

Eigen::MatrixXd gmm_marginal(const GmmTarget& target, const Eigen::MatrixXd& tau,
                             double t) {
  return GmmMarginalField(target).eval(tau, t);
}

double field_distance(const VectorField& a, const VectorField& b,
                      const ProbeSet& probes) {
  if (probes.empty()) throw ValidationError("probe set must not be empty");
  double acc = 0.0;
  for (const auto& [path, t] : probes) {
    const Eigen::MatrixXd da = a.eval(path.data(), t);
    const Eigen::MatrixXd db = b.eval(path.data(), t);
    acc += (da - db).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(probes.size()));
}

}  // namespace flowplan
