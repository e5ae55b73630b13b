#include "flowplan/time_grid.hpp"

#include "flowplan/errors.hpp"

namespace flowplan {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ValidationError("time grid needs >= 2 nodes");
  if (times_.front() != 0.0) throw ValidationError("time grid must start at 0");
  if (times_.back() != 1.0) throw ValidationError("time grid must end at 1");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw ValidationError("time grid must be strictly increasing");
}

TimeGrid TimeGrid::uniform(int steps) {
  if (steps < 1) throw ValidationError("uniform grid needs >= 1 step");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i)
    t[static_cast<std::size_t>(i)] = static_cast<double>(i) / steps;
  t.back() = 1.0;
  return TimeGrid(std::move(t));
}

}  // namespace flowplan
