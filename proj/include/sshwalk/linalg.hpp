#pragma once

// Small dense complex linear systems: LU with partial pivoting and an exact
// one-norm condition number (the inverse is cheap at these sizes).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include "sshwalk/errors.hpp"

namespace sshwalk::linalg {

using cplx = std::complex<double>;

template <std::size_t N>
using Vector = std::array<cplx, N>;

/// Row-major N x N complex matrix.
template <std::size_t N>
struct Matrix {
  std::array<cplx, N * N> data{};

  cplx& operator()(std::size_t r, std::size_t c) { return data[r * N + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data[r * N + c]; }

  static constexpr std::size_t size() { return N; }
};

template <std::size_t N>
Vector<N> multiply(const Matrix<N>& a, const Vector<N>& x) {
  Vector<N> y{};
  for (std::size_t r = 0; r < N; ++r) {
    cplx acc = 0.0;
    for (std::size_t c = 0; c < N; ++c) acc += a(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

/// max_c sum_r |a_rc|
template <std::size_t N>
double one_norm(const Matrix<N>& a) {
  double best = 0.0;
  for (std::size_t c = 0; c < N; ++c) {
    double col = 0.0;
    for (std::size_t r = 0; r < N; ++r) col += std::abs(a(r, c));
    best = std::max(best, col);
  }
  return best;
}

template <std::size_t N>
class LU {
 public:
  explicit LU(Matrix<N> a) : lu_(std::move(a)), norm_(one_norm(lu_)) {
    for (std::size_t i = 0; i < N; ++i) perm_[i] = i;
    for (std::size_t k = 0; k < N; ++k) {
      std::size_t pivot = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < N; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          pivot = i;
        }
      }
      if (best == 0.0) {
        singular_ = true;
        return;
      }
      if (pivot != k) {
        for (std::size_t c = 0; c < N; ++c) std::swap(lu_(k, c), lu_(pivot, c));
        std::swap(perm_[k], perm_[pivot]);
      }
      for (std::size_t i = k + 1; i < N; ++i) {
        const cplx f = lu_(i, k) / lu_(k, k);
        lu_(i, k) = f;
        for (std::size_t c = k + 1; c < N; ++c) lu_(i, c) -= f * lu_(k, c);
      }
    }
  }

  bool singular() const { return singular_; }

  Vector<N> solve(const Vector<N>& b) const {
    if (singular_) throw SingularSystem("matrix is exactly singular");
    Vector<N> x{};
    for (std::size_t i = 0; i < N; ++i) {
      cplx acc = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc;
    }
    for (std::size_t ii = N; ii-- > 0;) {
      cplx acc = x[ii];
      for (std::size_t j = ii + 1; j < N; ++j) acc -= lu_(ii, j) * x[j];
      x[ii] = acc / lu_(ii, ii);
    }
    return x;
  }

  Matrix<N> inverse() const {
    Matrix<N> inv;
    for (std::size_t c = 0; c < N; ++c) {
      Vector<N> e{};
      e[c] = 1.0;
      const Vector<N> col = solve(e);
      for (std::size_t r = 0; r < N; ++r) inv(r, c) = col[r];
    }
    return inv;
  }

  /// ||A||_1 ||A^-1||_1, infinite when singular.
  double condition() const {
    if (singular_) return std::numeric_limits<double>::infinity();
    return norm_ * one_norm(inverse());
  }

 private:
  Matrix<N> lu_;
  std::array<std::size_t, N> perm_{};
  double norm_ = 0.0;
  bool singular_ = false;
};

template <std::size_t N>
struct Solution {
  Vector<N> x;
  double condition;
};

/// Solves A x = b, throwing SingularSystem when cond_1(A) exceeds max_condition.
template <std::size_t N>
Solution<N> solve(const Matrix<N>& a, const Vector<N>& b, double max_condition = 1e12) {
  const LU<N> lu(a);
  const double cond = lu.condition();
  if (!(cond <= max_condition))
    throw SingularSystem("linear system is ill-conditioned (cond_1 = " + std::to_string(cond) +
                         ")");
  return {lu.solve(b), cond};
}

}  // namespace sshwalk::linalg
