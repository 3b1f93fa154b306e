#include "confcurv/grid.hpp"

#include <stdexcept>

namespace confcurv {

Grid::Grid(std::vector<double> center, double half_width, int points_per_axis)
    : Grid(center, half_width, points_per_axis, std::vector<bool>(center.size(), true)) {}

Grid::Grid(std::vector<double> center, double half_width, int points_per_axis, std::vector<bool> active_axes)
    : center_(std::move(center)), half_width_(half_width), points_(points_per_axis), active_(std::move(active_axes)) {
  if (!(half_width_ > 0.0)) throw std::invalid_argument("grid half_width must be positive");
  if (points_ < 3 || points_ % 2 == 0) throw std::invalid_argument("grid points_per_axis must be odd and >= 3");
  if (active_.size() != center_.size()) throw std::invalid_argument("active axis mask has wrong length");
  if (active_count() == 0) throw std::invalid_argument("grid needs at least one active axis");
  for (int a = 0; a < active_count(); ++a) size_ *= static_cast<std::size_t>(points_);
}

int Grid::active_count() const {
  int c = 0;
  for (bool b : active_) c += b ? 1 : 0;
  return c;
}

std::vector<double> Grid::axis_values(int axis) const {
  const double c = center_[static_cast<std::size_t>(axis)];
  if (!active_[static_cast<std::size_t>(axis)]) return {c};
  std::vector<double> v(static_cast<std::size_t>(points_));
  const int half = points_ / 2;
  for (int k = 0; k < points_; ++k) v[static_cast<std::size_t>(k)] = c + half_width_ * (k - half) / half;
  return v;
}

std::vector<double> Grid::point(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("grid index out of range");
  std::vector<double> p = center_;
  const int half = points_ / 2;
  for (int axis = dim() - 1; axis >= 0; --axis) {
    if (!active_[static_cast<std::size_t>(axis)]) continue;
    const int k = static_cast<int>(index % static_cast<std::size_t>(points_));
    index /= static_cast<std::size_t>(points_);
    p[static_cast<std::size_t>(axis)] += half_width_ * (k - half) / half;
  }
  return p;
}

}  // namespace confcurv
