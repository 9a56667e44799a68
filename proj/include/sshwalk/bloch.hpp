#pragma once

// Fixed-k quantities of a homogeneous SSH chain.
//
// Site convention: cell n holds A at n - 1/4 and B at n + 1/4, v couples A_n-B_n
// and w couples B_n-A_{n+1}. A Bloch amplitude e^{ikn} then sees the 2x2 block
//
//     H(k) = [ 0   z ]      z = v + w e^{-ik} = E_k e^{i theta_k - ik/2}
//            [ z*  0 ]

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "sshwalk/errors.hpp"

namespace sshwalk {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Intracell (v) and intercell (w) hopping amplitudes of one homogeneous region.
/// Both are non-negative and not both zero; negative inputs are rejected.
class HoppingPair {
 public:
  HoppingPair(double v, double w) : v_(v), w_(w) {
    if (!std::isfinite(v) || !std::isfinite(w))
      throw InvalidParameter("hopping amplitudes must be finite");
    if (v < 0.0 || w < 0.0)
      throw InvalidParameter("hopping amplitudes must be non-negative (v=" +
                             std::to_string(v) + ", w=" + std::to_string(w) + ")");
    if (v == 0.0 && w == 0.0)
      throw InvalidParameter("hopping amplitudes v and w are both zero");
  }

  double v() const { return v_; }
  double w() const { return w_; }

  /// The pair with intra- and intercell roles interchanged (v' = w, w' = v).
  HoppingPair swapped() const { return {w_, v_}; }

  /// |v - w| / (v + w)
  double asymmetry() const { return std::abs(v_ - w_) / (v_ + w_); }

  friend bool operator==(const HoppingPair&, const HoppingPair&) = default;

 private:
  double v_;
  double w_;
};

/// Maps any real k into the first Brillouin zone (-pi, pi].
inline double wrap_to_zone(double k) {
  double r = std::remainder(k, 2.0 * pi);  // [-pi, pi]
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

/// Quasimomentum in (-pi, pi], optionally backed by an index of the N-point grid.
class Quasimomentum {
 public:
  explicit Quasimomentum(double k) : k_(k) {
    if (!(k > -pi && k <= pi))
      throw InvalidParameter("quasimomentum " + std::to_string(k) +
                             " outside the zone (-pi, pi]");
  }

  /// k_n = 2 pi (n - ceil(N/2)) / N for n = 1..N. For even N this is 2 pi n/N - pi;
  /// for odd N it is the shifted set compatible with a periodic ring.
  static Quasimomentum from_index(std::int64_t n, std::int64_t cells) {
    if (cells < 1) throw InvalidParameter("grid needs at least one cell");
    if (n < 1 || n > cells) throw InvalidParameter("momentum index out of range");
    const std::int64_t shift = (cells + 1) / 2;
    Quasimomentum q(2.0 * pi * static_cast<double>(n - shift) / static_cast<double>(cells));
    q.index_ = n;
    return q;
  }

  double value() const { return k_; }
  std::optional<std::int64_t> index() const { return index_; }

 private:
  double k_;
  std::optional<std::int64_t> index_;
};

enum class Band { plus, minus };

inline double band_sign(Band b) { return b == Band::plus ? 1.0 : -1.0; }

inline const char* to_string(Band b) { return b == Band::plus ? "+" : "-"; }

/// Off-diagonal element z = v + w e^{-ik} of H(k).
inline cplx coupling(const HoppingPair& p, double k) {
  return p.v() + p.w() * std::polar(1.0, -k);
}

/// E_k = sqrt(v^2 + w^2 + 2 v w cos k), clamped at zero against round-off.
inline double dispersion(const HoppingPair& p, double k) {
  const double v = p.v(), w = p.w();
  const double e2 = v * v + w * w + 2.0 * v * w * std::cos(k);
  return e2 > 0.0 ? std::sqrt(e2) : 0.0;
}

inline double dispersion(const HoppingPair& p, Quasimomentum k) {
  return dispersion(p, k.value());
}

/// dE_+/dk = -v w sin k / E_k. The lower band has the opposite sign.
inline double group_velocity(const HoppingPair& p, double k, Band band = Band::plus) {
  const double e = dispersion(p, k);
  if (e == 0.0) return 0.0;
  return -band_sign(band) * p.v() * p.w() * std::sin(k) / e;
}

/// max_k |dE/dk| = min(v, w): attained where cos k = -min(v, w) / max(v, w).
inline double max_group_speed(const HoppingPair& p) { return std::min(p.v(), p.w()); }

namespace detail {

inline bool gap_closed(const HoppingPair& p, double k) {
  return p.v() == p.w() && std::abs(wrap_to_zone(k)) == pi;
}

}  // namespace detail

/// theta_k = atan2((v - w) sin(k/2), (v + w) cos(k/2)), continuous on (-pi, pi).
/// Throws GapClosure at v = w, k = pi.
inline double phase_theta(const HoppingPair& p, double k) {
  const double im = (p.v() - p.w()) * std::sin(0.5 * k);
  const double re = (p.v() + p.w()) * std::cos(0.5 * k);
  if (detail::gap_closed(p, k))
    throw GapClosure("phase undefined: gap closes at v = w, k = pi");
  return std::atan2(im, re);
}

inline double phase_theta(const HoppingPair& p, Quasimomentum k) {
  return phase_theta(p, k.value());
}

struct BlochMode {
  double k;
  Band band;
  double energy;  // +E_k or -E_k
  double theta;
  cplx upper;  // A component
  cplx lower;  // B component
};

/// Normalized eigenvector (1, +-e^{-i(theta_k - k/2)}) / sqrt(2) of H(k).
inline BlochMode bloch_mode(const HoppingPair& p, double k, Band band) {
  const double theta = phase_theta(p, k);
  const double s = band_sign(band);
  const double norm = 1.0 / std::numbers::sqrt2;
  return BlochMode{k, band, s * dispersion(p, k), theta, cplx(norm, 0.0),
                   s * norm * std::polar(1.0, -(theta - 0.5 * k))};
}

inline BlochMode bloch_mode(const HoppingPair& p, Quasimomentum k, Band band) {
  return bloch_mode(p, k.value(), band);
}

/// Pauli decomposition H(k) = d0 I + dx sx + dy sy + dz sz.
struct DVector {
  double d0 = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
};

/// dx + i dy = v + w e^{+ik} (the lower-left block), so the upper-right block
/// dx - i dy reproduces z.
inline DVector d_vector(const HoppingPair& p, double k) {
  return DVector{0.0, p.v() + p.w() * std::cos(k), p.w() * std::sin(k), 0.0};
}

inline DVector d_vector(const HoppingPair& p, Quasimomentum k) { return d_vector(p, k.value()); }

/// Explicit 2x2 Bloch block, row-major.
struct Matrix2 {
  cplx a00, a01, a10, a11;
};

inline Matrix2 bloch_hamiltonian(const HoppingPair& p, double k) {
  const cplx z = coupling(p, k);
  return {0.0, z, std::conj(z), 0.0};
}

inline Matrix2 from_pauli(const DVector& d) {
  const cplx i(0.0, 1.0);
  return {d.d0 + d.dz, d.dx - i * d.dy, d.dx + i * d.dy, d.d0 - d.dz};
}

/// Relative gap tolerance: the winding number is undefined for |v - w| <= tol (v + w).
inline constexpr double kWindingGapTolerance = 1e-9;

/// Total change of arg z(k) over a sweep of the zone, in units of 2 pi.
/// `conjugate` sweeps z* instead, which reverses the orientation.
inline double winding_sweep(const HoppingPair& p, int points = 4096, bool conjugate = false) {
  if (points < 3) throw InvalidParameter("winding sweep needs at least 3 points");
  auto arg_at = [&](int j) {
    const double k = -pi + 2.0 * pi * static_cast<double>(j) / points;
    const cplx z = coupling(p, k);
    return std::arg(conjugate ? std::conj(z) : z);
  };
  double total = 0.0;
  double prev = arg_at(0);
  for (int j = 1; j <= points; ++j) {
    const double cur = arg_at(j);
    total += std::remainder(cur - prev, 2.0 * pi);
    prev = cur;
  }
  return total / (2.0 * pi);
}

/// nu = 0 for v > w, 1 for v < w, obtained from the arg z(k) sweep.
inline int winding_number(const HoppingPair& p, int points = 4096) {
  if (std::abs(p.v() - p.w()) <= kWindingGapTolerance * (p.v() + p.w()))
    throw WindingUndefined("winding number undefined: |v - w| within gap tolerance");
  const double turns = winding_sweep(p, points);
  const double nearest = std::round(turns);
  if (std::abs(turns - nearest) > 1e-6)
    throw WindingUndefined("winding sweep did not converge to an integer (" +
                           std::to_string(turns) + ")");
  return static_cast<int>(std::abs(nearest));
}

}  // namespace sshwalk
