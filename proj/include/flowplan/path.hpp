#ifndef FLOWPLAN_PATH_HPP
#define FLOWPLAN_PATH_HPP

#include <Eigen/Core>

#include "flowplan/rng.hpp"

namespace flowplan {

// Waypoint matrix, one column per waypoint: d x (H+1), column-major so a
// flattened view lists waypoint 0 first. Entries are finite at every exposed
// boundary; horizon H >= 1.
class Path {
 public:
  Path() = default;
  Path(int dim, int horizon);
  explicit Path(Eigen::MatrixXd data);

  int dim() const { return static_cast<int>(data_.rows()); }
  int horizon() const { return static_cast<int>(data_.cols()) - 1; }
  int waypoints() const { return static_cast<int>(data_.cols()); }

  Eigen::MatrixXd& data() { return data_; }
  const Eigen::MatrixXd& data() const { return data_; }

  Eigen::VectorXd waypoint(int k) const;
  void set_waypoint(int k, const Eigen::VectorXd& value);

  // flattened column-major copy, length d*(H+1)
  Eigen::VectorXd flatten() const;
  static Path unflatten(const Eigen::VectorXd& flat, int dim);

  void check() const;  // throws ValidationError on shape or non-finite entries

 private:
  Eigen::MatrixXd data_;
};

// i.i.d. standard normal entries, filled column by column (waypoint-major)
Path sample_prior(int dim, int horizon, Rng& rng);

}  // namespace flowplan

#endif  // FLOWPLAN_PATH_HPP
