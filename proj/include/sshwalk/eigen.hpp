#pragma once

// Real symmetric eigensolver: Householder reduction to tridiagonal form followed
// by implicit-shift QL iteration with eigenvector accumulation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "sshwalk/errors.hpp"

namespace sshwalk::eigen {

/// Eigenvalues ascending; eigenvector j occupies vectors[j*n .. j*n + n).
struct EigenSystem {
  std::size_t n = 0;
  std::vector<double> eigenvalues;
  std::vector<double> vectors;

  std::span<const double> vector(std::size_t j) const {
    return std::span<const double>(vectors).subspan(j * n, n);
  }
  double operator()(std::size_t i, std::size_t j) const { return vectors[j * n + i]; }
};

namespace detail {

// QL with implicit Wilkinson-type shifts. d: diagonal, e[i]: coupling (i, i+1),
// z: column-major basis that gets rotated (identity for a bare tridiagonal matrix).
inline void implicit_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                        std::size_t n, int max_iterations) {
  if (n == 0) return;
  e.resize(n, 0.0);
  e[n - 1] = 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (iter++ == max_iterations)
        throw ConvergenceFailure("QL iteration did not converge");

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool deflated = false;
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        double* zi = z.data() + i * n;
        double* zi1 = z.data() + (i + 1) * n;
        for (std::size_t k = 0; k < n; ++k) {
          f = zi1[k];
          zi1[k] = s * zi[k] + c * f;
          zi[k] = c * zi[k] - s * f;
        }
      }
      if (deflated) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (true);
  }
}

inline EigenSystem sorted(std::vector<double> d, std::vector<double> z, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  EigenSystem out;
  out.n = n;
  out.eigenvalues.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = d[order[j]];
    std::copy_n(z.begin() + order[j] * n, n, out.vectors.begin() + j * n);
  }
  return out;
}

}  // namespace detail

inline constexpr int kDefaultMaxIterations = 60;

/// Eigendecomposition of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (off[i] couples i and i+1).
inline EigenSystem tridiagonal(std::vector<double> diag, std::vector<double> off,
                               int max_iterations = kDefaultMaxIterations) {
  const std::size_t n = diag.size();
  if (n > 0 && off.size() + 1 < n) throw InvalidParameter("off-diagonal too short");
  std::vector<double> z(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
  off.resize(n);
  detail::implicit_ql(diag, off, z, n, max_iterations);
  return detail::sorted(std::move(diag), std::move(z), n);
}

/// Dense symmetric matrix (row-major, n x n). Reduced to tridiagonal form by
/// Householder reflections whose product seeds the QL eigenvector basis.
inline EigenSystem symmetric(std::vector<double> a, std::size_t n,
                             int max_iterations = kDefaultMaxIterations) {
  if (a.size() != n * n) throw InvalidParameter("matrix size mismatch");
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };

  // q is column-major: q[c * n + r]
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;

  std::vector<double> u(n), p(n), qu(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += at(i, k) * at(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (at(k + 1, k) > 0.0) alpha = -alpha;

    std::fill(u.begin(), u.end(), 0.0);
    for (std::size_t i = k + 1; i < n; ++i) u[i] = at(i, k);
    u[k + 1] -= alpha;
    double unorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) unorm += u[i] * u[i];
    unorm = std::sqrt(unorm);
    if (unorm == 0.0) continue;
    for (std::size_t i = k + 1; i < n; ++i) u[i] /= unorm;

    // A <- (I - 2uu^T) A (I - 2uu^T) = A - 2 u q^T - 2 q u^T, q = p - (u.p) u, p = A u
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t c = k + 1; c < n; ++c) acc += at(r, c) * u[c];
      p[r] = acc;
    }
    double up = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) up += u[i] * p[i];
    for (std::size_t i = 0; i < n; ++i) p[i] -= up * u[i];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) at(r, c) -= 2.0 * (u[r] * p[c] + p[r] * u[c]);

    // Q <- Q (I - 2uu^T)
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t c = k + 1; c < n; ++c) acc += q[c * n + r] * u[c];
      qu[r] = acc;
    }
    for (std::size_t c = k + 1; c < n; ++c) {
      const double uc = 2.0 * u[c];
      double* col = q.data() + c * n;
      for (std::size_t r = 0; r < n; ++r) col[r] -= qu[r] * uc;
    }
  }

  std::vector<double> d(n), e(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = at(i + 1, i);
  detail::implicit_ql(d, e, q, n, max_iterations);
  return detail::sorted(std::move(d), std::move(q), n);
}

}  // namespace sshwalk::eigen
