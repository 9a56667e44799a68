#pragma once

// Text serialization of states, transmission curves and spectra. Numbers are written
// with 12 significant digits; state files start with a versioned header line.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sshwalk/eigen.hpp"
#include "sshwalk/errors.hpp"
#include "sshwalk/lattice_state.hpp"
#include "sshwalk/scattering.hpp"
#include "sshwalk/version.hpp"

namespace sshwalk {

/// Raised when a file cannot be opened, written or parsed.
struct IoError : Error {
  using Error::Error;
};

namespace io {

inline constexpr int kPrecision = 12;

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // no "-0" in tables
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kPrecision, x);
  return buf;
}

inline std::string state_header() {
  return "# sshwalk-state format " + std::to_string(kFormatVersion);
}

inline void write_state_csv(std::ostream& os, const StateVector& s) {
  os << state_header() << "\n";
  os << "n,sublattice,re,im,prob\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << LatticeSpec::cell_of(i) << ',' << to_string(LatticeSpec::sublattice_of(i)) << ','
       << format_number(s[i].real()) << ',' << format_number(s[i].imag()) << ','
       << format_number(std::norm(s[i])) << '\n';
  }
}

/// Reads a state written by write_state_csv. The boundary condition is not part of
/// the file and must be supplied.
inline StateVector read_state_csv(std::istream& is,
                                  BoundaryCondition boundary = BoundaryCondition::periodic) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# sshwalk-state format ", 0) != 0)
    throw IoError("missing state header line");
  const int version = std::stoi(line.substr(line.rfind(' ') + 1));
  if (version != kFormatVersion)
    throw IoError("unsupported state format version " + std::to_string(version));
  if (!std::getline(is, line) || line != "n,sublattice,re,im,prob")
    throw IoError("unexpected state column header");
  std::vector<cplx> amps;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string n, sub, re, im;
    if (!std::getline(row, n, ',') || !std::getline(row, sub, ',') ||
        !std::getline(row, re, ',') || !std::getline(row, im, ','))
      throw IoError("malformed state row: " + line);
    const std::size_t expected = amps.size();
    if (std::stoll(n) != LatticeSpec::cell_of(expected) ||
        sub != to_string(LatticeSpec::sublattice_of(expected)))
      throw IoError("state rows out of order at: " + line);
    amps.emplace_back(std::stod(re), std::stod(im));
  }
  if (amps.size() < 4 || amps.size() % 2 != 0) throw IoError("state has an invalid site count");
  const LatticeSpec lattice(static_cast<std::int64_t>(amps.size() / 2), boundary);
  return StateVector(lattice, std::move(amps));
}

inline nlohmann::ordered_json state_to_json(const StateVector& s) {
  nlohmann::ordered_json j;
  j["format"] = "sshwalk-state";
  j["version"] = kFormatVersion;
  j["cells"] = s.lattice().cells();
  j["boundary"] = s.lattice().periodic() ? "periodic" : "open";
  auto sites = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    sites.push_back({{"n", LatticeSpec::cell_of(i)},
                     {"sublattice", to_string(LatticeSpec::sublattice_of(i))},
                     {"re", s[i].real()},
                     {"im", s[i].imag()},
                     {"prob", std::norm(s[i])}});
  }
  j["sites"] = std::move(sites);
  return j;
}

inline void write_curve_csv(std::ostream& os, std::span<const CurvePoint> curve) {
  os << "k,t2,r2,cond\n";
  for (const CurvePoint& p : curve)
    os << format_number(p.k) << ',' << format_number(p.t2) << ',' << format_number(p.r2) << ','
       << format_number(p.cond) << '\n';
}

inline nlohmann::ordered_json curve_to_json(std::span<const CurvePoint> curve) {
  auto arr = nlohmann::ordered_json::array();
  for (const CurvePoint& p : curve) {
    nlohmann::ordered_json row = {{"k", p.k}, {"t2", p.t2}, {"r2", p.r2}, {"cond", p.cond}};
    if (p.endpoint_limit) row["endpoint_limit"] = true;
    if (!p.error.empty()) row["error"] = p.error;
    arr.push_back(std::move(row));
  }
  return arr;
}

inline void write_spectrum_csv(std::ostream& os, const eigen::EigenSystem& es) {
  os << "index,energy\n";
  for (std::size_t j = 0; j < es.eigenvalues.size(); ++j)
    os << j << ',' << format_number(es.eigenvalues[j]) << '\n';
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

inline std::string frame_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu.csv", index);
  return buf;
}

/// One probability-profile CSV per snapshot (frame_000000.csv, ...), plus an index
/// file mapping frame numbers to times.
inline void write_frames(const std::filesystem::path& dir,
                         std::span<const std::pair<double, StateVector>> frames) {
  std::ofstream index = open_output(dir / "frames.csv");
  index << "frame,t\n";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& [t, state] = frames[f];
    std::ofstream os = open_output(dir / frame_name(f));
    write_state_csv(os, state);
    if (!os) throw IoError("failed writing " + (dir / frame_name(f)).string());
    index << f << ',' << format_number(t) << '\n';
  }
  if (!index) throw IoError("failed writing frame index in " + dir.string());
}

}  // namespace io
}  // namespace sshwalk
