#pragma once

// Brute-force reference: dense real-symmetric SSH Hamiltonians (homogeneous or with
// an interchanged region), full eigendecomposition and exact time evolution.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sshwalk/bloch.hpp"
#include "sshwalk/eigen.hpp"
#include "sshwalk/errors.hpp"
#include "sshwalk/lattice_state.hpp"
#include "sshwalk/scattering.hpp"

namespace sshwalk {

inline constexpr std::size_t kDefaultSiteCap = 4096;

/// Zero-diagonal tridiagonal (plus optional corner) Hamiltonian of a 2N-site chain.
class DenseHamiltonian {
 public:
  DenseHamiltonian(LatticeSpec lattice, std::vector<double> couplings, double corner,
                   std::optional<std::int64_t> boundary_cell)
      : lattice_(lattice),
        couplings_(std::move(couplings)),
        corner_(corner),
        boundary_cell_(boundary_cell) {
    if (couplings_.size() + 1 != lattice_.sites())
      throw InvalidParameter("coupling count must be sites - 1");
  }

  const LatticeSpec& lattice() const { return lattice_; }
  std::size_t size() const { return lattice_.sites(); }
  /// couplings()[i] joins sites i and i+1.
  std::span<const double> couplings() const { return couplings_; }
  /// B_N - A_1 bond; zero for open chains.
  double corner() const { return corner_; }
  std::optional<std::int64_t> boundary_cell() const { return boundary_cell_; }
  /// Global site index of B_b, the last site of the left region.
  std::optional<std::size_t> boundary_site() const {
    if (!boundary_cell_) return std::nullopt;
    return lattice_.site(*boundary_cell_, Sublattice::B);
  }

  /// Row-major dense matrix.
  std::vector<double> dense() const {
    const std::size_t n = size();
    std::vector<double> h(n * n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i * n + i + 1] = couplings_[i];
      h[(i + 1) * n + i] = couplings_[i];
    }
    if (lattice_.periodic()) {
      h[(n - 1) * n] += corner_;
      h[n - 1] += corner_;
    }
    return h;
  }

  std::vector<cplx> apply(std::span<const cplx> psi) const {
    const std::size_t n = size();
    if (psi.size() != n) throw InvalidParameter("state size does not match Hamiltonian");
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      out[i] += couplings_[i] * psi[i + 1];
      out[i + 1] += couplings_[i] * psi[i];
    }
    if (lattice_.periodic()) {
      out[0] += corner_ * psi[n - 1];
      out[n - 1] += corner_ * psi[0];
    }
    return out;
  }

 private:
  LatticeSpec lattice_;
  std::vector<double> couplings_;
  double corner_;
  std::optional<std::int64_t> boundary_cell_;
};

/// Homogeneous chain with `left`, or, with a boundary cell b, `left` up to A_b-B_b
/// and `right` (default: interchanged pair) from B_b-A_{b+1} on.
inline DenseHamiltonian build_dense(const LatticeSpec& lattice, const HoppingPair& left,
                                    std::optional<std::int64_t> boundary_cell = std::nullopt,
                                    std::optional<HoppingPair> right = std::nullopt) {
  const std::size_t n = lattice.sites();
  std::vector<double> couplings(n - 1);
  double corner = 0.0;
  if (!boundary_cell) {
    for (std::size_t i = 0; i + 1 < n; ++i) couplings[i] = i % 2 == 0 ? left.v() : left.w();
    if (lattice.periodic()) corner = left.w();
  } else {
    const std::int64_t b = *boundary_cell;
    if (b < 1 || b > lattice.cells()) throw InvalidParameter("boundary cell outside the lattice");
    const HoppingPair r = right.value_or(left.swapped());
    for (std::size_t i = 0; i + 1 < n; ++i)
      couplings[i] = interface_bond(left, r, static_cast<std::int64_t>(i) + 2 - 2 * b);
    if (lattice.periodic()) corner = r.w();
  }
  return DenseHamiltonian(lattice, std::move(couplings), corner, boundary_cell);
}

using eigen::EigenSystem;

inline EigenSystem diagonalize(const DenseHamiltonian& h, std::size_t site_cap = kDefaultSiteCap) {
  if (h.size() > site_cap)
    throw InvalidParameter("Hamiltonian has " + std::to_string(h.size()) +
                           " sites, above the cap of " + std::to_string(site_cap));
  if (!h.lattice().periodic() || h.corner() == 0.0) {
    std::vector<double> off(h.couplings().begin(), h.couplings().end());
    return eigen::tridiagonal(std::vector<double>(h.size(), 0.0), std::move(off));
  }
  return eigen::symmetric(h.dense(), h.size());
}

/// psi(t) = Q e^{-i Lambda t} Q^T psi0 for a fixed initial state, reusable across times.
class DenseEvolution {
 public:
  DenseEvolution(const EigenSystem& es, std::span<const cplx> psi0)
      : es_(&es), projections_(es.n, cplx(0.0, 0.0)) {
    if (psi0.size() != es.n) throw InvalidParameter("state size does not match eigensystem");
    for (std::size_t j = 0; j < es.n; ++j) {
      const auto q = es.vector(j);
      cplx acc = 0.0;
      for (std::size_t i = 0; i < es.n; ++i) acc += q[i] * psi0[i];
      projections_[j] = acc;
    }
  }

  std::vector<cplx> at(double t) const {
    const std::size_t n = es_->n;
    std::vector<cplx> psi(n, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
      const cplx c = projections_[j] * std::polar(1.0, -es_->eigenvalues[j] * t);
      const auto q = es_->vector(j);
      for (std::size_t i = 0; i < n; ++i) psi[i] += q[i] * c;
    }
    return psi;
  }

 private:
  const EigenSystem* es_;
  std::vector<cplx> projections_;
};

inline StateVector evolve_dense(const DenseHamiltonian& h, const EigenSystem& es,
                                const StateVector& psi0, double t) {
  if (psi0.size() != h.size()) throw InvalidParameter("state does not match Hamiltonian");
  return StateVector(psi0.lattice(), DenseEvolution(es, psi0.amplitudes()).at(t));
}

inline StateVector evolve_dense(const DenseHamiltonian& h, const StateVector& psi0, double t) {
  return evolve_dense(h, diagonalize(h), psi0, t);
}

struct WavepacketOptions {
  std::int64_t cells = 500;
  /// Boundary cell b; 0 selects N / 2.
  std::int64_t boundary_cell = 0;
  /// Initial packet centre; 0 selects N / 5.
  std::int64_t start_cell = 0;
  std::int64_t buffer_cells = 10;
  /// Multiple of the boundary arrival time at which mass is measured.
  double time_factor = 1.5;
  /// Explicit measurement time; <= 0 selects the group-velocity heuristic.
  double t_final = 0.0;
};

struct WavepacketResult {
  double transmitted = 0.0;   // cells > b + buffer
  double reflected = 0.0;     // cells < b - buffer
  double edge = 0.0;          // cells within the buffer around b
  double t_final = 0.0;
  double incident_k = 0.0;    // mean momentum of the packet
  double group_speed = 0.0;
  std::int64_t boundary_cell = 0;
  std::int64_t start_cell = 0;

  double total() const { return transmitted + reflected + edge; }
};

/// Scatters a +band Gaussian packet (|k| = k0, moving toward +x) off the interchange
/// boundary of an open chain and partitions the final probability.
inline WavepacketResult wavepacket_transmission(const HoppingPair& left, double k0, double sigma_k,
                                                const WavepacketOptions& opt = {}) {
  if (!(k0 > 0.0 && k0 < pi)) throw InvalidParameter("k0 must lie in (0, pi)");
  const std::int64_t n_cells = opt.cells;
  const std::int64_t b = opt.boundary_cell > 0 ? opt.boundary_cell : n_cells / 2;
  const std::int64_t start = opt.start_cell > 0 ? opt.start_cell : n_cells / 5;
  const double width = 1.0 / (2.0 * sigma_k);  // position std of the packet
  if (start - 5.0 * width < 1.0 || start + 5.0 * width > static_cast<double>(b - opt.buffer_cells) ||
      b + opt.buffer_cells >= n_cells)
    throw GeometryError("packet, buffer and boundary overlap (start " + std::to_string(start) +
                        ", width " + std::to_string(width) + ", boundary " + std::to_string(b) +
                        ")");

  const double k_inc = group_velocity(left, k0) > 0.0 ? k0 : -k0;
  const double speed = group_velocity(left, k_inc);
  if (!(speed > 0.0)) throw GeometryError("packet has zero group velocity");

  double t_final = opt.t_final;
  if (t_final <= 0.0) {
    const double distance = static_cast<double>(b - start);
    t_final = opt.time_factor * distance / speed;
    // wide packets need extra time for their trailing tail to clear the buffer
    const double clearance = distance + static_cast<double>(opt.buffer_cells) + 6.0 * width;
    t_final = std::max(t_final, clearance / speed);
    // keep the outgoing packets away from the chain ends
    const double room = static_cast<double>(std::min(b, n_cells - b)) - 5.0 * width;
    t_final = std::min(t_final, (distance + room) / speed);
  }

  const LatticeSpec ring(n_cells, BoundaryCondition::periodic);
  const StateVector packet =
      SpectralDecomposition::wavepacket(ring, left, k_inc, sigma_k, Band::plus,
                                        static_cast<double>(start))
          .to_state();
  const LatticeSpec chain(n_cells, BoundaryCondition::open);
  const DenseHamiltonian h = build_dense(chain, left, b);
  const EigenSystem es = diagonalize(h);
  const std::vector<cplx> psi = DenseEvolution(es, packet.amplitudes()).at(t_final);

  WavepacketResult res;
  res.t_final = t_final;
  res.incident_k = k_inc;
  res.group_speed = speed;
  res.boundary_cell = b;
  res.start_cell = start;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const std::int64_t cell = LatticeSpec::cell_of(i);
    const double p = std::norm(psi[i]);
    if (cell > b + opt.buffer_cells)
      res.transmitted += p;
    else if (cell < b - opt.buffer_cells)
      res.reflected += p;
    else
      res.edge += p;
  }
  return res;
}

}  // namespace sshwalk
