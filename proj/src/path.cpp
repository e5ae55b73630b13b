#include "flowplan/path.hpp"

#include <string>

#include "flowplan/errors.hpp"

namespace flowplan {

Path::Path(int dim, int horizon) {
  if (dim < 1) throw ValidationError("path dim must be >= 1");
  if (horizon < 1) throw ValidationError("path horizon must be >= 1");
  data_ = Eigen::MatrixXd::Zero(dim, horizon + 1);
}

Path::Path(Eigen::MatrixXd data) : data_(std::move(data)) { check(); }

Eigen::VectorXd Path::waypoint(int k) const {
  if (k < 0 || k >= waypoints())
    throw ValidationError("waypoint index out of range: " + std::to_string(k));
  return data_.col(k);
}

void Path::set_waypoint(int k, const Eigen::VectorXd& value) {
  if (k < 0 || k >= waypoints())
    throw ValidationError("waypoint index out of range: " + std::to_string(k));
  if (value.size() != data_.rows())
    throw ValidationError("waypoint dimension mismatch");
  if (!value.allFinite()) throw ValidationError("waypoint has non-finite entries");
  data_.col(k) = value;
}

Eigen::VectorXd Path::flatten() const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data(), data_.size());
}

Path Path::unflatten(const Eigen::VectorXd& flat, int dim) {
  if (dim < 1 || flat.size() % dim != 0)
    throw ValidationError("flat size not divisible by dim");
  Eigen::MatrixXd m =
      Eigen::Map<const Eigen::MatrixXd>(flat.data(), dim, flat.size() / dim);
  return Path(std::move(m));
}

void Path::check() const {
  if (data_.rows() < 1) throw ValidationError("path dim must be >= 1");
  if (data_.cols() < 2) throw ValidationError("path needs at least 2 waypoints");
  if (!data_.allFinite()) throw ValidationError("path has non-finite entries");
}

Path sample_prior(int dim, int horizon, Rng& rng) {
  Path p(dim, horizon);
  for (int k = 0; k < p.waypoints(); ++k)
    for (int i = 0; i < dim; ++i) p.data()(i, k) = rng.normal();
  return p;
}

}  // namespace flowplan
