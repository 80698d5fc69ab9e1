#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace cevoi {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

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

  std::vector<double> col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Three-way array laid out [k][sim][column] so that all values for one
/// willingness-to-pay point are contiguous.
class Cube {
 public:
  Cube() = default;
  Cube(std::size_t n_k, std::size_t n_sim, std::size_t n_col)
      : n_k_(n_k), n_sim_(n_sim), n_col_(n_col), data_(n_k * n_sim * n_col, 0.0) {}

  std::size_t n_k() const noexcept { return n_k_; }
  std::size_t n_sim() const noexcept { return n_sim_; }
  std::size_t n_col() const noexcept { return n_col_; }

  double& at(std::size_t k, std::size_t s, std::size_t c) {
    assert(k < n_k_ && s < n_sim_ && c < n_col_);
    return data_[(k * n_sim_ + s) * n_col_ + c];
  }
  double at(std::size_t k, std::size_t s, std::size_t c) const {
    assert(k < n_k_ && s < n_sim_ && c < n_col_);
    return data_[(k * n_sim_ + s) * n_col_ + c];
  }

  /// Row of all columns for (k, s).
  std::span<const double> cell(std::size_t k, std::size_t s) const {
    return {data_.data() + (k * n_sim_ + s) * n_col_, n_col_};
  }

  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Cube&, const Cube&) = default;

 private:
  std::size_t n_k_ = 0;
  std::size_t n_sim_ = 0;
  std::size_t n_col_ = 0;
  std::vector<double> data_;
};

}  // namespace cevoi
