#pragma once

#include <cstddef>
#include <vector>

namespace confcurv {

/// Uniform tensor grid on the cube center ± half_width. Only the active
/// axes are sampled; inactive coordinates stay at the center value, which
/// gives lower-dimensional "effective" grids for fields depending on few
/// coordinates. Points are enumerated in row-major order (last active axis
/// fastest).
class Grid {
 public:
  /// All axes active. Throws std::invalid_argument unless half_width > 0
  /// and points_per_axis is odd and >= 3.
  Grid(std::vector<double> center, double half_width, int points_per_axis);
  Grid(std::vector<double> center, double half_width, int points_per_axis, std::vector<bool> active_axes);

  int dim() const noexcept { return static_cast<int>(center_.size()); }
  const std::vector<double>& center() const noexcept { return center_; }
  double half_width() const noexcept { return half_width_; }
  int points_per_axis() const noexcept { return points_; }
  const std::vector<bool>& active_axes() const noexcept { return active_; }
  int active_count() const;

  std::size_t size() const noexcept { return size_; }
  std::vector<double> point(std::size_t index) const;
  /// Coordinate values sampled along one axis.
  std::vector<double> axis_values(int axis) const;

 private:
  std::vector<double> center_;
  double half_width_;
  int points_;
  std::vector<bool> active_;
  std::size_t size_ = 1;
};

}  // namespace confcurv
