// Command-line front end: bands, winding, evolve, scatter, tmax and figure pipelines.
//
// Exit codes: 0 success, 1 a figure assertion failed, 2 invalid input,
// 3 I/O failure, 4 winding number undefined.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "sshwalk/sshwalk.hpp"

namespace {

using namespace sshwalk;

constexpr int kExitAssertion = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;
constexpr int kExitUndefined = 4;

void emit(const std::string& out, const std::function<void(std::ostream&)>& body) {
  if (out.empty() || out == "-") {
    body(std::cout);
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::ofstream os = io::open_output(out);
  body(os);
  os.flush();
  if (!os) throw IoError("failed writing " + out);
}

/// Fills options that were not given on the command line from a key=value file.
void apply_config_file(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  const ExperimentConfig file = ExperimentConfig::from_file(sub->get_name(), path);
  for (const auto& [key, value] : file.params()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw InvalidParameter("config key '" + key + "' is not an option of " + sub->get_name());
    if (opt->count() == 0) {
      opt->add_result(value);
      opt->run_callback();
    }
  }
}

struct Physical {
  double v = 0.1;
  double w = 0.9;
};

void add_hopping(CLI::App* sub, Physical& p) {
  sub->add_option("--v", p.v, "intracell hopping v >= 0")->capture_default_str();
  sub->add_option("--w", p.w, "intercell hopping w >= 0")->capture_default_str();
}

Band parse_band(const std::string& s) {
  if (s == "plus" || s == "+") return Band::plus;
  if (s == "minus" || s == "-") return Band::minus;
  throw InvalidParameter("band must be plus or minus");
}

void cmd_bands(const Physical& ph, int points, const std::string& out) {
  const HoppingPair p(ph.v, ph.w);
  if (points < 2) throw InvalidParameter("--points must be at least 2");
  emit(out, [&](std::ostream& os) {
    os << "k,E_plus,E_minus,theta\n";
    for (int j = 1; j <= points; ++j) {
      const double k = -pi + 2.0 * pi * j / points;
      const double e = dispersion(p, k);
      double theta = std::numeric_limits<double>::quiet_NaN();
      try {
        theta = phase_theta(p, k);
      } catch (const GapClosure&) {
      }
      os << io::format_number(k) << ',' << io::format_number(e) << ',' << io::format_number(-e)
         << ',' << io::format_number(theta) << '\n';
    }
  });
}

struct EvolveArgs {
  Physical ph;
  std::int64_t cells = 500;
  std::int64_t n0 = 70;
  std::string sublattice = "A";
  double t = 0.0;
  std::int64_t boundary = 0;
  std::string format = "csv";
  std::string frames;
  double t_max = 0.0;
  double t_step = 1.0;
  std::string out;
};

void cmd_evolve(const EvolveArgs& a) {
  const HoppingPair p(a.ph.v, a.ph.w);
  const Sublattice sub = detail::parse_sublattice(a.sublattice);
  if (a.format != "csv" && a.format != "json") throw InvalidParameter("--format is csv or json");

  // Homogeneous runs use the Bloch-sum evolution; a boundary switches to the dense oracle.
  std::function<StateVector(double)> state_at;
  std::optional<SpectralDecomposition> dec;
  std::optional<EigenSystem> es;
  std::optional<DenseEvolution> dense;
  std::optional<LatticeSpec> chain;
  if (a.boundary == 0) {
    const LatticeSpec lattice(a.cells, BoundaryCondition::periodic);
    dec = sub == Sublattice::A ? SpectralDecomposition::localized_A(lattice, p, a.n0)
                               : SpectralDecomposition::localized_B(lattice, p, a.n0);
    state_at = [&](double t) { return evolve(*dec, t); };
  } else {
    chain.emplace(a.cells, BoundaryCondition::open);
    const StateVector psi0 = StateVector::localized(*chain, a.n0, sub);
    es = diagonalize(build_dense(*chain, p, a.boundary));
    dense.emplace(*es, psi0.amplitudes());
    state_at = [&](double t) { return StateVector(*chain, dense->at(t)); };
  }

  if (!a.frames.empty()) {
    if (!(a.t_step > 0.0) || !(a.t_max >= 0.0))
      throw InvalidParameter("--t-max must be >= 0 and --t-step > 0");
    std::vector<std::pair<double, StateVector>> frames;
    const auto steps = static_cast<std::int64_t>(std::floor(a.t_max / a.t_step + 1e-9));
    for (std::int64_t m = 0; m <= steps; ++m) {
      const double t = static_cast<double>(m) * a.t_step;
      frames.emplace_back(t, state_at(t));
    }
    io::write_frames(a.frames, frames);
    return;
  }
  const StateVector s = state_at(a.t);
  emit(a.out, [&](std::ostream& os) {
    if (a.format == "json")
      os << io::state_to_json(s).dump(2) << '\n';
    else
      io::write_state_csv(os, s);
  });
}

struct ScatterArgs {
  Physical ph;
  double k = 0.0;
  int points = 501;
  std::string band = "plus";
  std::string format = "csv";
  std::string out;
};

void cmd_scatter(const ScatterArgs& a, bool single) {
  const HoppingPair p(a.ph.v, a.ph.w);
  if (a.format != "csv" && a.format != "json") throw InvalidParameter("--format is csv or json");
  std::vector<double> ks;
  if (single) {
    if (!(a.k > 0.0 && a.k < pi)) throw InvalidParameter("--k must lie strictly inside (0, pi)");
    ks.push_back(a.k);
  } else {
    ks = open_zone_grid(static_cast<std::size_t>(std::max(a.points, 2)));
  }
  const std::vector<CurvePoint> curve = transmission_curve(p, ks, parse_band(a.band));
  if (single && !curve.front().error.empty()) throw SingularSystem(curve.front().error);
  emit(a.out, [&](std::ostream& os) {
    if (a.format == "json")
      os << io::curve_to_json(curve).dump(2) << '\n';
    else
      io::write_curve_csv(os, curve);
  });
}

void cmd_tmax(const Physical& ph, const std::string& out) {
  const HoppingPair p(ph.v, ph.w);
  const PeakTransmission peak = t_max(p);
  emit(out, [&](std::ostream& os) {
    os << "v,w,k_peak,t_max\n"
       << io::format_number(p.v()) << ',' << io::format_number(p.w()) << ','
       << io::format_number(peak.k) << ',' << io::format_number(peak.t2) << '\n';
  });
}

int cmd_figure(const std::string& name, const std::string& config_path,
               const std::vector<std::string>& sets, const std::string& out) {
  ExperimentConfig cfg = config_path.empty() ? ExperimentConfig(name)
                                             : ExperimentConfig::from_file(name, config_path);
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidParameter("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  const ResultBundle bundle = run_experiment(cfg);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path("out") / name : std::filesystem::path(out);
  bundle.write(dir);
  for (const Assertion& a : bundle.assertions)
    std::cerr << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << '\n';
  std::cout << (dir / "summary.json").string() << '\n';
  return bundle.passed() ? 0 : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SSH chain toolkit: bands, winding, quantum walks and boundary scattering"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       std::string("sshwalk ") + kToolkitVersion + " (format " +
                           std::to_string(kFormatVersion) + ")");

  Physical bands_ph;
  int bands_points = 201;
  std::string bands_out, bands_config;
  auto* bands = app.add_subcommand("bands", "dispersion and phase over the Brillouin zone");
  add_hopping(bands, bands_ph);
  bands->add_option("--points", bands_points, "number of k points")->capture_default_str();
  bands->add_option("--out", bands_out, "output CSV (default stdout)");
  bands->add_option("--config", bands_config, "key=value defaults file");

  Physical wind_ph;
  std::string wind_config;
  auto* winding = app.add_subcommand("winding", "winding number of v + w e^{-ik}");
  add_hopping(winding, wind_ph);
  winding->add_option("--config", wind_config, "key=value defaults file");

  EvolveArgs ev;
  std::string ev_config;
  auto* evolve_cmd = app.add_subcommand("evolve", "evolve a particle inserted on one site");
  add_hopping(evolve_cmd, ev.ph);
  evolve_cmd->add_option("--N", ev.cells, "number of cells")->capture_default_str();
  evolve_cmd->add_option("--n0", ev.n0, "initial cell")->capture_default_str();
  evolve_cmd->add_option("--sublattice", ev.sublattice, "A or B")->capture_default_str();
  evolve_cmd->add_option("--t", ev.t, "evaluation time")->capture_default_str();
  evolve_cmd->add_option("--boundary", ev.boundary,
                         "interchange boundary cell (open chain, dense evolution); 0 = none");
  evolve_cmd->add_option("--format", ev.format, "csv or json")->capture_default_str();
  evolve_cmd->add_option("--frames", ev.frames, "write frame_%06d.csv snapshots into DIR");
  evolve_cmd->add_option("--t-max", ev.t_max, "last snapshot time (with --frames)");
  evolve_cmd->add_option("--t-step", ev.t_step, "snapshot spacing (with --frames)");
  evolve_cmd->add_option("--out", ev.out, "output file (default stdout)");
  evolve_cmd->add_option("--config", ev_config, "key=value defaults file");

  ScatterArgs sc;
  std::string sc_config;
  auto* scatter = app.add_subcommand("scatter", "reflection and transmission at an interchange boundary");
  add_hopping(scatter, sc.ph);
  auto* k_opt = scatter->add_option("--k", sc.k, "single incident momentum in (0, pi)");
  scatter->add_option("--points", sc.points, "grid size when --k is absent")->capture_default_str();
  scatter->add_option("--band", sc.band, "plus or minus")->capture_default_str();
  scatter->add_option("--format", sc.format, "csv or json")->capture_default_str();
  scatter->add_option("--out", sc.out, "output file (default stdout)");
  scatter->add_option("--config", sc_config, "key=value defaults file");

  Physical tm_ph;
  std::string tm_out, tm_config;
  auto* tmax = app.add_subcommand("tmax", "peak transmission over k");
  add_hopping(tmax, tm_ph);
  tmax->add_option("--out", tm_out, "output CSV (default stdout)");
  tmax->add_option("--config", tm_config, "key=value defaults file");

  std::string fig_name, fig_config, fig_out;
  std::vector<std::string> fig_sets;
  auto* figure = app.add_subcommand("figure", "run an experiment pipeline");
  std::vector<std::string> names;
  for (const auto& [n, fn] : experiment_registry()) names.push_back(n);
  figure->add_option("name", fig_name, "experiment name")->required()->check(CLI::IsMember(names));
  figure->add_option("--config", fig_config, "key=value parameter file");
  figure->add_option("--set", fig_sets, "parameter override key=value (repeatable, wins over --config)");
  figure->add_option("--out", fig_out, "output directory (default out/<name>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*bands) {
      apply_config_file(bands, bands_config);
      cmd_bands(bands_ph, bands_points, bands_out);
    } else if (*winding) {
      apply_config_file(winding, wind_config);
      std::cout << winding_number(HoppingPair(wind_ph.v, wind_ph.w)) << '\n';
    } else if (*evolve_cmd) {
      apply_config_file(evolve_cmd, ev_config);
      cmd_evolve(ev);
    } else if (*scatter) {
      apply_config_file(scatter, sc_config);
      cmd_scatter(sc, k_opt->count() > 0);
    } else if (*tmax) {
      apply_config_file(tmax, tm_config);
      cmd_tmax(tm_ph, tm_out);
    } else if (*figure) {
      return cmd_figure(fig_name, fig_config, fig_sets, fig_out);
    }
  } catch (const WindingUndefined& e) {
    std::cerr << "undefined: " << e.what() << '\n';
    return kExitUndefined;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    std::cerr << "invalid config value: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAssertion;
  } catch (const Error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  }
  return 0;
}
