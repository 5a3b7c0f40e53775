#include "fibreflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fibreflow/errors.hpp"

namespace fibreflow {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = &data_[i * cols_];
    double acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

DenseLU::DenseLU(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
  const std::size_t n = lu_.rows();
  if (lu_.cols() != n) throw ConfigError("DenseLU: matrix is not square");
  const double threshold =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * lu_.max_abs();
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    }
    if (!(best > threshold)) throw SingularMatrixError(k);
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(perm_[k], perm_[p]);
    }
    const double inv = 1.0 / lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = lu_(i, k) * inv;
      lu_(i, k) = l;
      if (l == 0.0) continue;
      double* row_i = &lu_(i, 0);
      const double* row_k = &lu_(k, 0);
      for (std::size_t j = k + 1; j < n; ++j) row_i[j] -= l * row_k[j];
    }
  }
}

void DenseLU::solve_in_place(std::span<double> x) const {
  const std::size_t n = lu_.rows();
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = x[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * b[j];
    b[i] = acc;
  }
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(i, j) * b[j];
    b[i] = acc / lu_(i, i);
  }
  std::copy(b.begin(), b.end(), x.begin());
}

std::vector<double> DenseLU::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

std::vector<double> solve_dense(DenseMatrix a, std::span<const double> rhs) {
  if (rhs.size() != a.rows()) throw ConfigError("solve_dense: size mismatch");
  return DenseLU(std::move(a)).solve(rhs);
}

// ---------------------------------------------------------------------------
// BandedLU

BandedLU::BandedLU(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), band_(n * width_, 0.0), pivots_(n) {}

void BandedLU::factor() {
  double scale = 0.0;
  for (double v : band_) scale = std::max(scale, std::abs(v));
  const double threshold =
      static_cast<double>(n_) * std::numeric_limits<double>::epsilon() * scale;

  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t last_row = std::min(n_ - 1, k + kl_);
    const std::size_t last_col = std::min(n_ - 1, k + ku_ + kl_);
    std::size_t p = k;
    double best = std::abs(get(k, k));
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      if (std::abs(get(i, k)) > best) {
        best = std::abs(get(i, k));
        p = i;
      }
    }
    if (!(best > threshold)) throw SingularMatrixError(k);
    pivots_[k] = p;
    if (p != k)
      for (std::size_t j = k; j <= last_col; ++j) std::swap(ref(k, j), ref(p, j));
    const double inv = 1.0 / get(k, k);
    for (std::size_t i = k + 1; i <= last_row; ++i) {
      const double l = get(i, k) * inv;
      ref(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j <= last_col; ++j) ref(i, j) -= l * get(k, j);
    }
  }
  factored_ = true;
}

void BandedLU::solve_in_place(std::span<double> x) const {
  if (!factored_) throw Error("BandedLU::solve called before factor()");
  for (std::size_t k = 0; k < n_; ++k) {
    if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
    const std::size_t last_row = std::min(n_ - 1, k + kl_);
    for (std::size_t i = k + 1; i <= last_row; ++i) x[i] -= get(i, k) * x[k];
  }
  for (std::size_t i = n_; i-- > 0;) {
    const std::size_t last_col = std::min(n_ - 1, i + ku_ + kl_);
    double acc = x[i];
    for (std::size_t j = i + 1; j <= last_col; ++j) acc -= get(i, j) * x[j];
    x[i] = acc / get(i, i);
  }
}

// ---------------------------------------------------------------------------
// CyclicBandedMatrix

CyclicBandedMatrix::CyclicBandedMatrix(std::size_t n, std::size_t half_width)
    : n_(n), w_(half_width), data_(n * (2 * half_width + 1), 0.0) {
  if (n < 2 * half_width + 1)
    throw ConfigError("CyclicBandedMatrix: size too small for the band width");
}

std::size_t CyclicBandedMatrix::offset_slot(std::size_t i, std::size_t j) const {
  // Signed periodic offset in [-w, w].
  auto off = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i);
  const auto n = static_cast<std::ptrdiff_t>(n_);
  const auto w = static_cast<std::ptrdiff_t>(w_);
  if (off > w) off -= n;
  if (off < -w) off += n;
  if (off > w || off < -w) throw Error("CyclicBandedMatrix: entry outside the band");
  return i * (2 * w_ + 1) + static_cast<std::size_t>(off + w);
}

void CyclicBandedMatrix::add(std::size_t i, std::size_t j, double value) {
  data_[offset_slot(i, j)] += value;
}

double CyclicBandedMatrix::get(std::size_t i, std::size_t j) const {
  return data_[offset_slot(i, j)];
}

void CyclicBandedMatrix::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

std::vector<double> CyclicBandedMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  const std::size_t stride = 2 * w_ + 1;
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < stride; ++s) {
      const std::size_t j = (i + n_ + s - w_) % n_;
      acc += data_[i * stride + s] * x[j];
    }
    y[i] = acc;
  }
  return y;
}

DenseMatrix CyclicBandedMatrix::to_dense() const {
  DenseMatrix out(n_, n_);
  const std::size_t stride = 2 * w_ + 1;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t s = 0; s < stride; ++s)
      out(i, (i + n_ + s - w_) % n_) += data_[i * stride + s];
  return out;
}

std::vector<double> solve_cyclic_banded(const CyclicBandedMatrix& a,
                                        std::span<const double> rhs) {
  const std::size_t n = a.size();
  const std::size_t w = a.half_width();
  if (rhs.size() != n) throw ConfigError("solve_cyclic_banded: size mismatch");
  const std::size_t m = w;       // border size
  const std::size_t ni = n - m;  // interior size
  if (ni <= 2 * w) return solve_dense(a.to_dense(), rhs);

  const std::size_t stride = 2 * w + 1;
  BandedLU interior(ni, w, w);
  DenseMatrix a12(ni, m), a21(m, ni), a22(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < stride; ++s) {
      const std::size_t j = (i + n + s - w) % n;
      const double v = a.get(i, j);
      if (v == 0.0) continue;
      if (i < ni && j < ni) {
        interior.at(i, j) = v;
      } else if (i < ni) {
        a12(i, j - ni) += v;
      } else if (j < ni) {
        a21(i - ni, j) += v;
      } else {
        a22(i - ni, j - ni) += v;
      }
    }
  }

  try {
    interior.factor();
  } catch (const SingularMatrixError&) {
    return solve_dense(a.to_dense(), rhs);
  }

  // Y = A11^{-1} A12, column by column.
  std::vector<std::vector<double>> y(m, std::vector<double>(ni));
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < ni; ++i) y[c][i] = a12(i, c);
    interior.solve_in_place(y[c]);
  }
  DenseMatrix schur = a22;
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < ni; ++k) acc += a21(r, k) * y[c][k];
      schur(r, c) -= acc;
    }

  std::vector<double> x1(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(ni));
  interior.solve_in_place(x1);
  std::vector<double> b2(m);
  for (std::size_t r = 0; r < m; ++r) {
    double acc = rhs[ni + r];
    for (std::size_t k = 0; k < ni; ++k) acc -= a21(r, k) * x1[k];
    b2[r] = acc;
  }
  const std::vector<double> x2 = solve_dense(std::move(schur), b2);

  std::vector<double> x(n);
  for (std::size_t i = 0; i < ni; ++i) {
    double acc = x1[i];
    for (std::size_t c = 0; c < m; ++c) acc -= y[c][i] * x2[c];
    x[i] = acc;
  }
  for (std::size_t r = 0; r < m; ++r) x[ni + r] = x2[r];
  return x;
}

}  // namespace fibreflow
