#ifndef TASOLVE_GRID_HPP_
#define TASOLVE_GRID_HPP_

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace tasolve {

/// Dense row-major matrix of doubles.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool same_shape(const Grid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Uniform time discretisation of [0, horizon).
struct TimeGrid {
  double dt = 5.0;  // seconds
  std::size_t steps = 0;

  double horizon() const { return dt * static_cast<double>(steps); }
  double time_at(std::size_t k) const { return dt * static_cast<double>(k); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

}  // namespace tasolve

#endif  // TASOLVE_GRID_HPP_
