#ifndef FLOWPLAN_TIME_GRID_HPP
#define FLOWPLAN_TIME_GRID_HPP

#include <vector>

namespace flowplan {

// Strictly increasing times t_0 = 0 < ... < t_T = 1.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  // t_i = i / steps; rejects steps == 0
  static TimeGrid uniform(int steps);

  int steps() const { return static_cast<int>(times_.size()) - 1; }
  double time(int i) const { return times_[static_cast<std::size_t>(i)]; }
  double dt(int i) const {
    return times_[static_cast<std::size_t>(i) + 1] -
           times_[static_cast<std::size_t>(i)];
  }
  const std::vector<double>& times() const { return times_; }

 private:
  std::vector<double> times_;
};

}  // namespace flowplan

#endif  // FLOWPLAN_TIME_GRID_HPP
