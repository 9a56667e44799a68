#pragma once

// Site-basis (Wannier) wavefunctions on a finite SSH chain and their spectral
// decomposition into Bloch eigenstates of the periodic homogeneous chain.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include "sshwalk/bloch.hpp"
#include "sshwalk/errors.hpp"

namespace sshwalk {

enum class Sublattice { A = 0, B = 1 };

inline const char* to_string(Sublattice s) { return s == Sublattice::A ? "A" : "B"; }

enum class BoundaryCondition { periodic, open };

/// Chain of N >= 2 cells numbered 1..N. Site (n, A) sits at n - 1/4, (n, B) at n + 1/4.
/// Sites are stored in the order A_1, B_1, A_2, B_2, ...
class LatticeSpec {
 public:
  explicit LatticeSpec(std::int64_t cells,
                       BoundaryCondition boundary = BoundaryCondition::periodic)
      : cells_(cells), boundary_(boundary) {
    if (cells < 2) throw InvalidParameter("lattice needs at least 2 cells");
  }

  std::int64_t cells() const { return cells_; }
  std::size_t sites() const { return static_cast<std::size_t>(2 * cells_); }
  BoundaryCondition boundary() const { return boundary_; }
  bool periodic() const { return boundary_ == BoundaryCondition::periodic; }

  std::size_t site(std::int64_t cell, Sublattice s) const {
    if (cell < 1 || cell > cells_)
      throw InvalidParameter("cell index " + std::to_string(cell) + " outside 1.." +
                             std::to_string(cells_));
    return static_cast<std::size_t>(2 * (cell - 1) + static_cast<int>(s));
  }
  static std::int64_t cell_of(std::size_t site) { return static_cast<std::int64_t>(site / 2) + 1; }
  static Sublattice sublattice_of(std::size_t site) {
    return site % 2 == 0 ? Sublattice::A : Sublattice::B;
  }
  static double position_of(std::size_t site) {
    return static_cast<double>(cell_of(site)) + (site % 2 == 0 ? -0.25 : 0.25);
  }

  /// Allowed momenta of the periodic ring, ascending in (-pi, pi].
  std::vector<double> momenta() const {
    std::vector<double> ks;
    ks.reserve(static_cast<std::size_t>(cells_));
    for (std::int64_t n = 1; n <= cells_; ++n)
      ks.push_back(Quasimomentum::from_index(n, cells_).value());
    return ks;
  }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;

 private:
  std::int64_t cells_;
  BoundaryCondition boundary_;
};

/// Complex amplitude per site.
class StateVector {
 public:
  explicit StateVector(LatticeSpec lattice)
      : lattice_(lattice), amplitudes_(lattice.sites(), cplx(0.0, 0.0)) {}
  StateVector(LatticeSpec lattice, std::vector<cplx> amplitudes)
      : lattice_(lattice), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != lattice_.sites())
      throw InvalidParameter("amplitude count does not match lattice");
  }

  static StateVector localized(LatticeSpec lattice, std::int64_t cell, Sublattice s) {
    StateVector psi(lattice);
    psi.amplitudes_[lattice.site(cell, s)] = 1.0;
    return psi;
  }

  const LatticeSpec& lattice() const { return lattice_; }
  std::span<const cplx> amplitudes() const { return amplitudes_; }
  std::span<cplx> amplitudes() { return amplitudes_; }
  std::size_t size() const { return amplitudes_.size(); }

  cplx& operator[](std::size_t i) { return amplitudes_[i]; }
  const cplx& operator[](std::size_t i) const { return amplitudes_[i]; }
  cplx at(std::int64_t cell, Sublattice s) const { return amplitudes_[lattice_.site(cell, s)]; }

  double norm_squared() const {
    double acc = 0.0;
    for (const cplx& a : amplitudes_) acc += std::norm(a);
    return acc;
  }

 private:
  LatticeSpec lattice_;
  std::vector<cplx> amplitudes_;
};

/// |amplitude|^2 per site, in storage order.
inline std::vector<double> probability_profile(const StateVector& s) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::norm(s[i]);
  return out;
}

/// Sum of A and B probabilities per cell (index 0 is cell 1).
inline std::vector<double> cell_profile(const StateVector& s) {
  std::vector<double> out(s.size() / 2, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) out[i / 2] += std::norm(s[i]);
  return out;
}

/// Expectation of the site position in cell units.
inline double mean_position(const StateVector& s) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = std::norm(s[i]);
    num += p * LatticeSpec::position_of(i);
    den += p;
  }
  return num / den;
}

inline cplx inner_product(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw InvalidParameter("states live on different lattices");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

/// H psi for the homogeneous chain (periodic adds the B_N - A_1 bond).
inline std::vector<cplx> apply_hamiltonian(const HoppingPair& p, const StateVector& s) {
  const std::size_t n = s.size();
  std::vector<cplx> out(n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double hop = i % 2 == 0 ? p.v() : p.w();
    out[i] += hop * s[i + 1];
    out[i + 1] += hop * s[i];
  }
  if (s.lattice().periodic()) {
    out[n - 1] += p.w() * s[0];
    out[0] += p.w() * s[n - 1];
  }
  return out;
}

inline double energy_expectation(const HoppingPair& p, const StateVector& s) {
  const std::vector<cplx> hs = apply_hamiltonian(p, s);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += std::conj(s[i]) * hs[i];
  return acc.real() / s.norm_squared();
}

/// Plane-wave eigenstate of the periodic chain:
/// (n, A) = e^{ikn} / sqrt(2N), (n, B) = +-e^{ikn} e^{-i theta_k + ik/2} / sqrt(2N).
inline StateVector bloch_state(const LatticeSpec& lattice, const HoppingPair& p, Quasimomentum k,
                               Band band) {
  if (!lattice.periodic()) throw InvalidParameter("Bloch states need a periodic lattice");
  const BlochMode mode = bloch_mode(p, k, band);
  const double scale = 1.0 / std::sqrt(static_cast<double>(lattice.sites()));
  const cplx ratio = mode.lower / mode.upper;
  StateVector psi(lattice);
  for (std::int64_t n = 1; n <= lattice.cells(); ++n) {
    const cplx phase = std::polar(scale, k.value() * static_cast<double>(n));
    psi[lattice.site(n, Sublattice::A)] = phase;
    psi[lattice.site(n, Sublattice::B)] = phase * ratio;
  }
  return psi;
}

namespace detail {

// B/A amplitude ratio of the upper-band Bloch vector, e^{-i theta_k + ik/2}. At the
// gap-closing point the two bands are degenerate and the theta -> 0 limit is used.
inline cplx bloch_ratio(const HoppingPair& p, double k) {
  const double theta = detail::gap_closed(p, k) ? 0.0 : phase_theta(p, k);
  return std::polar(1.0, -theta + 0.5 * k);
}

}  // namespace detail

/// Coefficients A_{k,+-} of a state in the Bloch basis of a periodic homogeneous chain.
/// Storage: coefficient(k index j, band) at 2j + (band == minus).
class SpectralDecomposition {
 public:
  SpectralDecomposition(LatticeSpec lattice, HoppingPair hopping)
      : lattice_(lattice),
        hopping_(hopping),
        momenta_(lattice.momenta()),
        coefficients_(lattice.sites(), cplx(0.0, 0.0)) {
    if (!lattice.periodic())
      throw InvalidParameter("spectral decomposition needs a periodic lattice");
    ratios_.reserve(momenta_.size());
    energies_.reserve(momenta_.size());
    for (double k : momenta_) {
      ratios_.push_back(detail::bloch_ratio(hopping_, k));
      energies_.push_back(dispersion(hopping_, k));
    }
  }

  /// Particle on (n0, A): A_{k,+} = A_{k,-} = e^{-ik n0} / sqrt(2N).
  static SpectralDecomposition localized_A(LatticeSpec lattice, HoppingPair p, std::int64_t n0) {
    lattice.site(n0, Sublattice::A);
    SpectralDecomposition dec(lattice, p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(lattice.sites()));
    for (std::size_t j = 0; j < dec.momenta_.size(); ++j) {
      const cplx c = std::polar(scale, -dec.momenta_[j] * static_cast<double>(n0));
      dec.coefficients_[2 * j] = c;
      dec.coefficients_[2 * j + 1] = c;
    }
    return dec;
  }

  /// Particle on (n0, B): A_{k,+-} = +-e^{-ik n0} e^{i(theta_k - k/2)} / sqrt(2N).
  static SpectralDecomposition localized_B(LatticeSpec lattice, HoppingPair p, std::int64_t n0) {
    lattice.site(n0, Sublattice::B);
    SpectralDecomposition dec(lattice, p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(lattice.sites()));
    for (std::size_t j = 0; j < dec.momenta_.size(); ++j) {
      const cplx c = std::polar(scale, -dec.momenta_[j] * static_cast<double>(n0)) *
                     std::conj(dec.ratios_[j]);
      dec.coefficients_[2 * j] = c;
      dec.coefficients_[2 * j + 1] = -c;
    }
    return dec;
  }

  /// Single-band Gaussian packet centred on cell `center` with mean momentum k0.
  /// sigma_k is the standard deviation of |A_k|^2.
  static SpectralDecomposition wavepacket(LatticeSpec lattice, HoppingPair p, double k0,
                                          double sigma_k, Band band, double center) {
    if (!(sigma_k > 0.0)) throw InvalidParameter("packet width sigma_k must be positive");
    SpectralDecomposition dec(lattice, p);
    double total = 0.0;
    for (std::size_t j = 0; j < dec.momenta_.size(); ++j) {
      const double k = dec.momenta_[j];
      const double dk = wrap_to_zone(k - k0);
      const double weight = std::exp(-dk * dk / (4.0 * sigma_k * sigma_k));
      const cplx c = std::polar(weight, -k * center);
      dec.coefficients_[2 * j + (band == Band::minus ? 1 : 0)] = c;
      total += weight * weight;
    }
    if (total == 0.0) throw InvalidParameter("packet has no support on the momentum grid");
    const double scale = 1.0 / std::sqrt(total);
    for (cplx& c : dec.coefficients_) c *= scale;
    return dec;
  }

  /// Projection of a site-basis state onto the Bloch basis.
  static SpectralDecomposition from_state(const StateVector& s, HoppingPair p) {
    SpectralDecomposition dec(s.lattice(), p);
    const auto& lat = dec.lattice_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(lat.sites()));
    for (std::size_t j = 0; j < dec.momenta_.size(); ++j) {
      const double k = dec.momenta_[j];
      const cplx g = std::conj(dec.ratios_[j]);
      cplx plus = 0.0, minus = 0.0;
      for (std::int64_t n = 1; n <= lat.cells(); ++n) {
        const cplx phase = std::polar(scale, -k * static_cast<double>(n));
        const cplx a = s[lat.site(n, Sublattice::A)];
        const cplx b = g * s[lat.site(n, Sublattice::B)];
        plus += phase * (a + b);
        minus += phase * (a - b);
      }
      dec.coefficients_[2 * j] = plus;
      dec.coefficients_[2 * j + 1] = minus;
    }
    return dec;
  }

  const LatticeSpec& lattice() const { return lattice_; }
  const HoppingPair& hopping() const { return hopping_; }
  std::span<const double> momenta() const { return momenta_; }
  std::span<const double> energies() const { return energies_; }

  cplx coefficient(std::size_t k_index, Band band) const {
    return coefficients_[2 * k_index + (band == Band::minus ? 1 : 0)];
  }
  std::span<const cplx> coefficients() const { return coefficients_; }

  double norm_squared() const {
    double acc = 0.0;
    for (const cplx& c : coefficients_) acc += std::norm(c);
    return acc;
  }

  /// sum over bands of |A_{k,+-}|^2, per k.
  std::vector<double> momentum_distribution() const {
    std::vector<double> out(momenta_.size());
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = std::norm(coefficients_[2 * j]) + std::norm(coefficients_[2 * j + 1]);
    return out;
  }

  /// Coefficients after time t: A_{k,+} e^{-iE_k t}, A_{k,-} e^{+iE_k t}.
  SpectralDecomposition advanced(double t) const {
    SpectralDecomposition out = *this;
    for (std::size_t j = 0; j < momenta_.size(); ++j) {
      const cplx phase = std::polar(1.0, -energies_[j] * t);
      out.coefficients_[2 * j] *= phase;
      out.coefficients_[2 * j + 1] *= std::conj(phase);
    }
    return out;
  }

  /// Site amplitudes: (n, A) = sum_k (A_+ + A_-) e^{ikn} / sqrt(2N),
  /// (n, B) = sum_k (A_+ - A_-) e^{ikn} e^{-i theta_k + ik/2} / sqrt(2N).
  /// Direct sum in a fixed order, so results are reproducible bit for bit.
  StateVector to_state() const {
    StateVector psi(lattice_);
    const double scale = 1.0 / std::sqrt(static_cast<double>(lattice_.sites()));
    for (std::int64_t n = 1; n <= lattice_.cells(); ++n) {
      cplx a = 0.0, b = 0.0;
      for (std::size_t j = 0; j < momenta_.size(); ++j) {
        const cplx phase = std::polar(scale, momenta_[j] * static_cast<double>(n));
        const cplx plus = coefficients_[2 * j];
        const cplx minus = coefficients_[2 * j + 1];
        a += phase * (plus + minus);
        b += phase * ratios_[j] * (plus - minus);
      }
      psi[lattice_.site(n, Sublattice::A)] = a;
      psi[lattice_.site(n, Sublattice::B)] = b;
    }
    return psi;
  }

 private:
  LatticeSpec lattice_;
  HoppingPair hopping_;
  std::vector<double> momenta_;
  std::vector<cplx> ratios_;
  std::vector<double> energies_;
  std::vector<cplx> coefficients_;
};

/// Analytic time evolution of a spectral decomposition, returned in the site basis.
inline StateVector evolve(const SpectralDecomposition& dec, double t) {
  return dec.advanced(t).to_state();
}

inline SpectralDecomposition localized_A(const LatticeSpec& lattice, const HoppingPair& p,
                                         std::int64_t n0) {
  return SpectralDecomposition::localized_A(lattice, p, n0);
}

inline SpectralDecomposition localized_B(const LatticeSpec& lattice, const HoppingPair& p,
                                         std::int64_t n0) {
  return SpectralDecomposition::localized_B(lattice, p, n0);
}

}  // namespace sshwalk
