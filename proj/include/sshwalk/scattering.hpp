#pragma once

// Scattering of a Bloch wave at the boundary between an SSH region (v, w) on the
// left (cells n <= 0) and the interchanged region (w, v) on the right (n >= 1).
// The boundary passes through B_0: bonds up to A_0-B_0 belong to the left chain,
// bonds from B_0-A_1 on to the right chain.
//
// Ansatz (common 1/sqrt(2N) dropped):
//   n <= -1 : e^{ikn} (1, l_in) + r e^{-ikn} (1, l_ref)
//   n >=  2 : t e^{ikn} (1, l_tr)
//   n = 0,1 : free amplitudes a0, b0, a1, b1
// The six eigenvalue conditions on B_{-1}, A_0, B_0, A_1, B_1, A_2 fix the six
// unknowns; every other site is satisfied by the Bloch forms.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sshwalk/bloch.hpp"
#include "sshwalk/errors.hpp"
#include "sshwalk/linalg.hpp"

namespace sshwalk {

/// Hopping between local sites s and s+1; local site 2n + (0 for A, 1 for B) is
/// in cell n, counted from the boundary cell 0.
inline double interface_bond(const HoppingPair& left, const HoppingPair& right, std::int64_t s) {
  const bool even = ((s % 2) + 2) % 2 == 0;
  if (s <= 0) return even ? left.v() : left.w();
  return even ? right.v() : right.w();
}

inline constexpr double kEndpointMargin = 1e-4;
inline constexpr double kMaxCondition = 1e12;

class BoundaryProblem {
 public:
  BoundaryProblem(HoppingPair left, double k, Band band = Band::plus)
      : left_(left), k_(k), band_(band) {
    if (!(k > 0.0 && k < pi))
      throw InvalidParameter("boundary problem needs 0 < k < pi (k = " + std::to_string(k) + ")");
  }

  const HoppingPair& left() const { return left_; }
  HoppingPair right() const { return left_.swapped(); }
  double k() const { return k_; }
  Band band() const { return band_; }

  double energy_magnitude() const { return dispersion(left_, k_); }
  double energy() const { return band_sign(band_) * energy_magnitude(); }
  double theta() const { return phase_theta(left_, k_); }
  /// x = e^{-i theta_k}
  cplx x() const { return std::polar(1.0, -theta()); }
  /// y = e^{ik/2}
  cplx y() const { return std::polar(1.0, 0.5 * k_); }

 private:
  HoppingPair left_;
  double k_;
  Band band_;
};

enum Unknown : std::size_t { kA0 = 0, kB0, kA1, kB1, kR, kT };

using System6 = linalg::Matrix<6>;
using Vector6 = linalg::Vector<6>;

struct LinearSystem {
  System6 matrix;
  Vector6 rhs;
};

namespace detail {

// Site amplitude as constant + sum_j coeff[j] * unknown[j].
struct AffineAmplitude {
  cplx constant{0.0, 0.0};
  Vector6 coeff{};
};

struct ScatteringModes {
  cplx incident;     // B/A ratio of the incident mode (left chain, +k)
  cplx reflected;    // left chain, -k
  cplx transmitted;  // right chain, +k
};

inline ScatteringModes scattering_modes(const BoundaryProblem& bp) {
  const BlochMode in = bloch_mode(bp.left(), bp.k(), bp.band());
  const BlochMode ref = bloch_mode(bp.left(), -bp.k(), bp.band());
  const BlochMode tr = bloch_mode(bp.right(), bp.k(), bp.band());
  return {in.lower / in.upper, ref.lower / ref.upper, tr.lower / tr.upper};
}

inline AffineAmplitude ansatz(const BoundaryProblem& bp, const ScatteringModes& modes,
                              std::int64_t s) {
  const std::int64_t n = s >= 0 ? s / 2 : -((-s + 1) / 2);
  const bool is_b = s - 2 * n == 1;
  const double k = bp.k();
  const double cell = static_cast<double>(n);
  AffineAmplitude amp;
  if (n <= -1) {
    amp.constant = std::polar(1.0, k * cell) * (is_b ? modes.incident : cplx(1.0));
    amp.coeff[kR] = std::polar(1.0, -k * cell) * (is_b ? modes.reflected : cplx(1.0));
  } else if (n >= 2) {
    amp.coeff[kT] = std::polar(1.0, k * cell) * (is_b ? modes.transmitted : cplx(1.0));
  } else {
    amp.coeff[static_cast<std::size_t>(s)] = 1.0;
  }
  return amp;
}

}  // namespace detail

/// Derives the six site equations (H Psi)_s = E Psi_s for s = B_{-1} .. A_2 from
/// the two-region bond rule and the ansatz. Unknown order: a0, b0, a1, b1, r, t.
inline LinearSystem build_system(const BoundaryProblem& bp) {
  const HoppingPair left = bp.left();
  const HoppingPair right = bp.right();
  const double energy = bp.energy();
  const detail::ScatteringModes modes = detail::scattering_modes(bp);

  LinearSystem sys;
  for (std::size_t row = 0; row < 6; ++row) {
    const std::int64_t s = static_cast<std::int64_t>(row) - 1;
    const detail::AffineAmplitude self = detail::ansatz(bp, modes, s);
    const detail::AffineAmplitude lower = detail::ansatz(bp, modes, s - 1);
    const detail::AffineAmplitude upper = detail::ansatz(bp, modes, s + 1);
    const double hop_lower = interface_bond(left, right, s - 1);
    const double hop_upper = interface_bond(left, right, s);
    for (std::size_t j = 0; j < 6; ++j)
      sys.matrix(row, j) = hop_lower * lower.coeff[j] + hop_upper * upper.coeff[j] -
                           energy * self.coeff[j];
    sys.rhs[row] = -(hop_lower * lower.constant + hop_upper * upper.constant -
                     energy * self.constant);
  }
  return sys;
}

enum class Denominator {
  /// Normalization rederived from the 6x6 system.
  corrected,
  /// Normalization as commonly quoted; its terms are misgrouped and it breaks
  /// |r|^2 + |t|^2 = 1. Kept as a diagnostic.
  quoted,
};

/// Closed-form a0, b0, a1, b1, r_k, t_k (upper band) in terms of E = E_k,
/// x = e^{-i theta_k} and y = e^{ik/2}.
inline Vector6 closed_form(const BoundaryProblem& bp, Denominator form = Denominator::corrected) {
  if (bp.band() != Band::plus) throw InvalidParameter("closed form covers the upper band only");
  const double v = bp.left().v(), w = bp.left().w();
  const double e = bp.energy_magnitude();
  const cplx x = bp.x(), y = bp.y();
  const double v2 = v * v, w2 = w * w, e2 = e * e, e4 = e2 * e2, e6 = e4 * e2;
  const cplx x2 = x * x, y2 = y * y, y3 = y2 * y;

  const double p6 = e6 - v2 * v2 * w2 + e2 * (v2 + w2) * (2.0 * v2 + w2) - e4 * (3.0 * v2 + 2.0 * w2);
  const double q4 = e4 + v2 * w2 - e2 * (2.0 * v2 + w2);
  const double s2 = e2 - 2.0 * v2 - w2;

  cplx d_inv;
  if (form == Denominator::corrected) {
    d_inv = x * y2 * (p6 + v * w * q4 * y2) -
            e * y3 * s2 * ((e2 - w2) * w + (e2 - v2) * v * x2);
  } else {
    d_inv = y2 * (p6 * x + (e2 - v2) * v * x2) * y -
            e * s2 * ((e2 - w2) * w + v * w * q4 * x * y2);
  }
  const cplx d = 1.0 / d_inv;
  const cplx edge = x2 * y2 - 1.0;

  Vector6 out;
  out[kA0] = -d * (v * w * ((e4 + v2 * v2 - e2 * (2.0 * v2 + w2)) * x + e * w * (-e2 + v2 + w2) * y) * edge);
  out[kB0] = d * (v2 * w * (-e2 * e * x + e * (v2 + w2) * x + e2 * w * y - w2 * w * y) * edge);
  out[kA1] = d * (v2 * v * w * (-e2 * x + v2 * x + e * w * y) * edge);
  out[kB1] = d * (v2 * v * w2 * (-e * x + w * y) * edge);
  out[kR] = d / y *
            (x * (e * v * (v2 - e2) * (-e2 + 2.0 * v2 + w2) * x -
                  (e6 * x2 + v2 * v * w2 * (w - v * x2) + e2 * (2.0 * v2 + w2) * (-v * w + (v2 + w2) * x2) +
                   e4 * (v * w - (3.0 * v2 + 2.0 * w2) * x2)) *
                      y +
                  e * w * (e2 - w2) * s2 * x * y2));
  out[kT] = d / (y2 * y2) * (v2 * v2 * w2 * x * (1.0 - x2 * y2));
  return out;
}

struct ScatteringSolution {
  cplx a0, b0, a1, b1;
  cplx r, t;
  double reflectance = 0.0;
  double transmittance = 0.0;
  double condition = 0.0;
  double energy = 0.0;

  /// Upper band only: closed-form amplitudes and their largest deviation from
  /// the linear solve (relative to max(1, |amplitude|)).
  std::optional<Vector6> closed_form;
  double closed_form_deviation = 0.0;
  /// |t|^2 from the quoted normalization minus the linear-solve |t|^2.
  std::optional<Vector6> quoted_form;
  double quoted_transmittance_deviation = 0.0;

  Vector6 unknowns() const { return {a0, b0, a1, b1, r, t}; }
};

inline ScatteringSolution solve_boundary(const BoundaryProblem& bp) {
  const LinearSystem sys = build_system(bp);
  const auto sol = linalg::solve(sys.matrix, sys.rhs, kMaxCondition);
  ScatteringSolution out;
  out.a0 = sol.x[kA0];
  out.b0 = sol.x[kB0];
  out.a1 = sol.x[kA1];
  out.b1 = sol.x[kB1];
  out.r = sol.x[kR];
  out.t = sol.x[kT];
  out.reflectance = std::norm(out.r);
  out.transmittance = std::norm(out.t);
  out.condition = sol.condition;
  out.energy = bp.energy();

  if (bp.band() == Band::plus) {
    out.closed_form = closed_form(bp, Denominator::corrected);
    double dev = 0.0;
    for (std::size_t j = 0; j < 6; ++j)
      dev = std::max(dev, std::abs((*out.closed_form)[j] - sol.x[j]) /
                              std::max(1.0, std::abs(sol.x[j])));
    out.closed_form_deviation = dev;
    out.quoted_form = closed_form(bp, Denominator::quoted);
    out.quoted_transmittance_deviation = std::norm((*out.quoted_form)[kT]) - out.transmittance;
  }
  return out;
}

/// Scattering state on cells -(cells_left - 1) .. cells_right, in site order.
inline std::vector<cplx> embed_solution(const BoundaryProblem& bp, const ScatteringSolution& sol,
                                        std::int64_t cells_left, std::int64_t cells_right) {
  const detail::ScatteringModes modes = detail::scattering_modes(bp);
  const Vector6 unknowns = sol.unknowns();
  std::vector<cplx> psi;
  psi.reserve(static_cast<std::size_t>(2 * (cells_left + cells_right)));
  for (std::int64_t s = -2 * (cells_left - 1); s < 2 * (cells_right + 1); ++s) {
    const detail::AffineAmplitude amp = detail::ansatz(bp, modes, s);
    cplx value = amp.constant;
    for (std::size_t j = 0; j < 6; ++j) value += amp.coeff[j] * unknowns[j];
    psi.push_back(value);
  }
  return psi;
}

/// ||H Psi - E Psi|| / ||Psi|| over interior sites of an embedded chain with
/// `sites` sites split evenly around the boundary (chain ends are excluded).
inline double embedding_residual(const BoundaryProblem& bp, const ScatteringSolution& sol,
                                 std::int64_t sites = 400) {
  if (sites < 8 || sites % 4 != 0) throw InvalidParameter("embedding needs a multiple of 4 sites");
  const std::int64_t half_cells = sites / 4;
  const std::vector<cplx> psi = embed_solution(bp, sol, half_cells, half_cells);
  const std::int64_t first = -2 * (half_cells - 1);
  const HoppingPair left = bp.left(), right = bp.right();
  double res = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) norm += std::norm(psi[i]);
  for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
    const std::int64_t s = first + static_cast<std::int64_t>(i);
    const cplx h = interface_bond(left, right, s - 1) * psi[i - 1] +
                   interface_bond(left, right, s) * psi[i + 1];
    res += std::norm(h - sol.energy * psi[i]);
  }
  return std::sqrt(res / norm);
}

struct CurvePoint {
  double k = 0.0;
  double t2 = 0.0;
  double r2 = 0.0;
  double cond = 0.0;
  /// Set when k lies within kEndpointMargin of 0 or pi and the limiting values were
  /// reported instead of a solve.
  bool endpoint_limit = false;
  /// Non-empty when the solve failed at this point.
  std::string error;
};

/// |t_k|^2 and |r_k|^2 on a grid inside (0, pi). Failed points are recorded, not thrown.
inline std::vector<CurvePoint> transmission_curve(const HoppingPair& p, std::span<const double> ks,
                                                  Band band = Band::plus) {
  std::vector<CurvePoint> out;
  out.reserve(ks.size());
  const bool equal = p.v() == p.w();
  for (double k : ks) {
    if (!(k > 0.0 && k < pi)) throw InvalidParameter("curve grid must lie strictly inside (0, pi)");
    CurvePoint pt;
    pt.k = k;
    if (k < kEndpointMargin || k > pi - kEndpointMargin) {
      pt.endpoint_limit = true;
      pt.t2 = equal ? 1.0 : 0.0;
      pt.r2 = 1.0 - pt.t2;
      out.push_back(pt);
      continue;
    }
    try {
      const ScatteringSolution s = solve_boundary(BoundaryProblem(p, k, band));
      pt.t2 = s.transmittance;
      pt.r2 = s.reflectance;
      pt.cond = s.condition;
    } catch (const Error& e) {
      pt.error = e.what();
      pt.t2 = std::numeric_limits<double>::quiet_NaN();
      pt.r2 = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(pt);
  }
  return out;
}

/// n points spaced evenly on [kEndpointMargin, pi - kEndpointMargin].
inline std::vector<double> open_zone_grid(std::size_t n) {
  if (n < 2) throw InvalidParameter("grid needs at least two points");
  std::vector<double> ks(n);
  const double lo = kEndpointMargin, hi = pi - kEndpointMargin;
  for (std::size_t i = 0; i < n; ++i)
    ks[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return ks;
}

struct PeakTransmission {
  double k = 0.0;
  double t2 = 0.0;
};

/// max_k |t_k|^2: coarse grid, then golden-section refinement around the best point.
inline PeakTransmission t_max(const HoppingPair& p, std::size_t coarse_points = 181) {
  auto t2_at = [&](double k) {
    try {
      return solve_boundary(BoundaryProblem(p, k)).transmittance;
    } catch (const Error&) {
      return -1.0;
    }
  };
  const std::vector<double> ks = open_zone_grid(coarse_points);
  std::size_t best = 0;
  double best_t2 = -1.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double t2 = t2_at(ks[i]);
    if (t2 > best_t2) {
      best_t2 = t2;
      best = i;
    }
  }
  double a = ks[best == 0 ? 0 : best - 1];
  double b = ks[std::min(best + 1, ks.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = t2_at(c), fd = t2_at(d);
  while (b - a > 1e-10) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = t2_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = t2_at(d);
    }
  }
  PeakTransmission peak{ks[best], best_t2};
  const double mid = 0.5 * (a + b);
  const double f_mid = t2_at(mid);
  if (f_mid > peak.t2) peak = {mid, f_mid};
  return peak;
}

/// Summary of how the closed forms compare with the linear solve over a batch.
struct ClosedFormReport {
  std::size_t problems = 0;
  double max_corrected_deviation = 0.0;
  double max_quoted_transmittance_deviation = 0.0;
  double max_quoted_flux_error = 0.0;
  /// Largest relative mismatch of |t/r| between quoted forms and the solve;
  /// small values mean only the shared normalization is off.
  double max_quoted_ratio_mismatch = 0.0;

  bool quoted_consistent(double tol) const {
    return max_quoted_transmittance_deviation <= tol;
  }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(6);
    os << "closed-form vs linear-solve diagnostic over " << problems << " problems\n"
       << "  corrected normalization: max amplitude deviation " << max_corrected_deviation << "\n"
       << "  quoted normalization: max |t|^2 deviation " << max_quoted_transmittance_deviation
       << ", max | |r|^2+|t|^2-1 | " << max_quoted_flux_error << "\n"
       << "  quoted |t/r| vs linear solve: max relative mismatch "
       << max_quoted_ratio_mismatch << "\n";
    if (max_quoted_ratio_mismatch < 1e-6 && max_quoted_flux_error > 1e-6)
      os << "  => numerators agree; the quoted common denominator D^-1 is inconsistent\n";
    return os.str();
  }
};

inline ClosedFormReport closed_form_report(std::span<const ScatteringSolution> solutions) {
  ClosedFormReport rep;
  for (const ScatteringSolution& s : solutions) {
    if (!s.closed_form || !s.quoted_form) continue;
    ++rep.problems;
    rep.max_corrected_deviation = std::max(rep.max_corrected_deviation, s.closed_form_deviation);
    rep.max_quoted_transmittance_deviation =
        std::max(rep.max_quoted_transmittance_deviation,
                 std::abs(s.quoted_transmittance_deviation));
    const cplx pr = (*s.quoted_form)[kR], pt = (*s.quoted_form)[kT];
    rep.max_quoted_flux_error =
        std::max(rep.max_quoted_flux_error, std::abs(std::norm(pr) + std::norm(pt) - 1.0));
    if (std::abs(s.r) > 0.0 && std::abs(pr) > 0.0) {
      const double ratio_pub = std::abs(pt / pr), ratio_lin = std::abs(s.t / s.r);
      rep.max_quoted_ratio_mismatch =
          std::max(rep.max_quoted_ratio_mismatch,
                   std::abs(ratio_pub - ratio_lin) / std::max(ratio_lin, 1e-300));
    }
  }
  return rep;
}

}  // namespace sshwalk
