#ifndef FLOWPLAN_BARRIER_HPP
#define FLOWPLAN_BARRIER_HPP

#include <Eigen/Core>
#include <string>

namespace flowplan {

// Scalar safety function b over a single waypoint; the safe set is {b >= 0}
// and the robust safe set is {b >= delta}.
struct BarrierSpec {
  enum class Kind { ellipse, quartic, halfspace_velocity };

  Kind kind = Kind::ellipse;

  // ellipse / quartic: obstacle centred at `center` with semi-axes ax, ay
  Eigen::Vector2d center{0.0, 0.0};
  double ax = 1.0;
  double ay = 1.0;

  // halfspace_velocity: b = roof - x[pos_index] - vel_scale * x[vel_index]
  double roof = 1.0;
  double vel_scale = 0.1;
  int pos_index = 0;
  int vel_index = 1;

  void validate(int dim) const;
};

struct BarrierEval {
  double value = 0.0;
  Eigen::VectorXd grad;
};

BarrierEval barrier_eval(const BarrierSpec& spec, const Eigen::VectorXd& waypoint);

std::string barrier_kind_name(BarrierSpec::Kind kind);
BarrierSpec::Kind barrier_kind_from_name(const std::string& name);

}  // namespace flowplan

#endif  // FLOWPLAN_BARRIER_HPP
