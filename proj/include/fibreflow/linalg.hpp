#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fibreflow {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::vector<double> multiply(std::span<const double> x) const;
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// LU factorization with partial pivoting.
class DenseLU {
 public:
  /// Throws SingularMatrixError when a pivot falls below n * eps * max|A|.
  explicit DenseLU(DenseMatrix a);

  std::vector<double> solve(std::span<const double> rhs) const;
  void solve_in_place(std::span<double> x) const;
  std::size_t size() const noexcept { return lu_.rows(); }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

std::vector<double> solve_dense(DenseMatrix a, std::span<const double> rhs);

/// Banded LU with partial pivoting (kl sub-, ku super-diagonals); the fill
/// from row exchanges is kept in kl extra super-diagonals.
class BandedLU {
 public:
  BandedLU(std::size_t n, std::size_t kl, std::size_t ku);

  /// Entry (i, j) with -kl <= j - i <= ku, before factorization.
  double& at(std::size_t i, std::size_t j) noexcept {
    return band_[i * width_ + (j + kl_ - i)];
  }

  void factor();
  void solve_in_place(std::span<double> x) const;
  std::size_t size() const noexcept { return n_; }

 private:
  double& ref(std::size_t i, std::size_t j) noexcept { return band_[i * width_ + (j + kl_ - i)]; }
  double get(std::size_t i, std::size_t j) const noexcept { return band_[i * width_ + (j + kl_ - i)]; }

  std::size_t n_, kl_, ku_, width_;
  std::vector<double> band_;
  std::vector<std::size_t> pivots_;
  bool factored_ = false;
};

/// Square matrix whose non-zeros satisfy |i - j| <= w modulo n (periodic band).
class CyclicBandedMatrix {
 public:
  CyclicBandedMatrix(std::size_t n, std::size_t half_width);

  std::size_t size() const noexcept { return n_; }
  std::size_t half_width() const noexcept { return w_; }

  /// Adds `value` to entry (i, j); j must be within the periodic band of i.
  void add(std::size_t i, std::size_t j, double value);
  double get(std::size_t i, std::size_t j) const;
  void set_zero();

  std::vector<double> multiply(std::span<const double> x) const;
  DenseMatrix to_dense() const;

 private:
  std::size_t offset_slot(std::size_t i, std::size_t j) const;

  std::size_t n_, w_;
  std::vector<double> data_;  // n rows x (2w + 1) offsets
};

/// Solves a periodic banded system by bordering: the leading n - w unknowns
/// form a plain banded block, the trailing w unknowns a dense Schur
/// complement. Falls back to dense LU if the banded block is singular.
std::vector<double> solve_cyclic_banded(const CyclicBandedMatrix& a,
                                        std::span<const double> rhs);

}  // namespace fibreflow
