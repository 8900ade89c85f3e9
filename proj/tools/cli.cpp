#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include "CLI11.hpp"
#include "stabmor/analysis.hpp"
#include "stabmor/benchgen.hpp"
#include "stabmor/errors.hpp"
#include "stabmor/io.hpp"
#include "stabmor/linalg/mtx.hpp"
#include "stabmor/nonlinear.hpp"
#include "stabmor/projection.hpp"
#include "stabmor/stabilize.hpp"

namespace fs = std::filesystem;

namespace stabmor::cli {
namespace {

constexpr const char* kCsvVersion = "# stabmor-v1";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ config

struct InputConfig {
  std::string kind = "sine";
  double period = 0.0;  // 0: the horizon
  double amplitude = 1.0;
};

struct GenerateConfig {
  std::string kind;
  fs::path out;
  std::uint64_t seed = 1;
  // msd and cubic-msd
  long masses = 4;
  std::vector<double> mass{1.0}, stiffness{1.0}, damping{1.0};
  long input_node = 0, output_node = -1;
  double gamma = 1.0;
  // nonnormal and convdiff
  long n = 0;
  double lambda_min = 0.1, lambda_max = 10.0, kappa = 50.0;
  bool allow_dissipative = false;
  double diffusion = 1.0, velocity = 50.0, grade = 8.0;
  std::string profile = "uniform";
  bool scale_identity = false;
};

struct ReduceConfig {
  fs::path system, out;
  std::string method = "arnoldi";
  std::string r_text;
  std::vector<long> r;
  double s0 = 1.0;
  bool stabilize = false;
  double delta = 1.0;
  std::string lyapunov = "auto";
  int adi_steps = 10;
  double adi_tol = 1e-8;
  int adi_shifts = 10;
  int h2_points = 2000;
  std::optional<double> omega_min, omega_max;
  InputConfig input;
  double horizon = 10.0;
  int steps = 1000;
  double pod_rtol = 1e-6;
  bool nonlinear = false;
  std::uint64_t seed = 1;
};

struct SimulateConfig {
  fs::path system, out;
  InputConfig input;
  double horizon = 1.0;
  std::string integrator = "trapezoid";
  int steps = 1000;
  double rtol = 1e-6, atol = 1e-9;
  int samples = 0;
  bool nonlinear = false;
};

struct AnalyzeConfig {
  fs::path system, out, rom;
  std::optional<double> omega_min, omega_max;
  int points = 200;
  int h2_points = 2000;
};

// ------------------------------------------------------------------ helpers

std::string cell(std::optional<double> v) { return v ? format_double(*v) : "NA"; }

Json json_number(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
}

void write_report(const fs::path& dir, const Json& report) { write_text(dir / "report.json", report.dump(2) + "\n"); }

Json to_json(const InputConfig& in) {
  return Json{{"kind", in.kind}, {"period", in.period}, {"amplitude", in.amplitude}};
}

InputSignal make_input(const InputConfig& cfg, Index n_in, double horizon) {
  if (cfg.kind == "zero") return zero_input(n_in);
  if (cfg.kind == "step") return step_input(n_in, cfg.amplitude);
  if (cfg.kind == "sine") return sine_input(n_in, cfg.period > 0.0 ? cfg.period : horizon, cfg.amplitude);
  throw UsageError("unknown input kind " + cfg.kind);
}

Json stability_json(const StabilityReport& r) {
  return Json{{"alpha", json_number(r.alpha)},
              {"asymptotically_stable", r.asymptotically_stable()},
              {"dissipative", r.dissipative},
              {"k", r.k},
              {"k_complete", r.k_complete},
              {"mu_max", r.mu_max}};
}

LyapunovMode parse_mode(const std::string& s) {
  if (s == "auto") return LyapunovMode::Auto;
  if (s == "lradi") return LyapunovMode::LowRankAdi;
  if (s == "dense") return LyapunovMode::DenseExact;
  throw UsageError("unknown Lyapunov mode " + s);
}

MSDChainSpec chain_spec(const GenerateConfig& g) {
  MSDChainSpec s;
  s.masses = g.masses;
  s.mass = g.mass;
  s.stiffness = g.stiffness;
  s.damping = g.damping;
  s.input_node = g.input_node;
  s.output_node = g.output_node;
  return s;
}

MSDChainSpec chain_spec(const Json& j) {
  MSDChainSpec s;
  s.masses = j.at("masses").get<Index>();
  s.mass = j.at("mass").get<std::vector<double>>();
  s.stiffness = j.at("stiffness").get<std::vector<double>>();
  s.damping = j.at("damping").get<std::vector<double>>();
  s.input_node = j.at("input_node").get<Index>();
  s.output_node = j.at("output_node").get<Index>();
  return s;
}

Json chain_json(const MSDChainSpec& s) {
  return Json{{"masses", s.masses},       {"mass", s.mass},
              {"stiffness", s.stiffness}, {"damping", s.damping},
              {"input_node", s.input_node}, {"output_node", s.output_node}};
}

// Rebuilds the nonlinear benchmark recorded in a bundle manifest.
NonlinearSystem nonlinear_from_manifest(const Json& manifest) {
  if (!manifest.contains("generator") || !manifest["generator"].value("nonlinear", false))
    throw UsageError("--nonlinear needs a bundle from `generate cubic-msd` or `generate crafted-cubic`");
  const Json& g = manifest["generator"];
  try {
    const std::string kind = g.at("kind").get<std::string>();
    if (kind == "cubic-msd") {
      CubicMSDSpec spec;
      spec.chain = chain_spec(g);
      spec.gamma = g.at("gamma").get<double>();
      return gen_cubic_msd(spec);
    }
    if (kind == "crafted-cubic") return crafted_cubic(g.at("gamma").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("malformed generator entry: ") + e.what());
  }
  throw UsageError("unknown nonlinear generator in manifest");
}

LinearSystem load_system(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("system bundle not found: " + dir.string());
  return read_system_bundle(dir);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    text_ << kCsvVersion << '\n';
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ << (i ? "," : "") << cells[i];
    text_ << '\n';
  }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  std::vector<std::string> header{"t"};
  for (Index j = 0; j < traj.y.cols(); ++j) header.push_back("y_" + std::to_string(j + 1));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    std::vector<std::string> cells{format_double(traj.t[i])};
    for (Index j = 0; j < traj.y.cols(); ++j) cells.push_back(format_double(traj.y(Index(i), j)));
    csv.row(cells);
  }
  write_text(path, csv.str());
}

Json stats_json(const IntegratorStats& s) {
  return Json{{"steps", s.steps}, {"rejected", s.rejected}, {"stages", s.stages}};
}

// ------------------------------------------------------------------ generate

int cmd_generate(const GenerateConfig& g, std::ostream& out) {
  std::optional<LinearSystem> sys;
  Json generator{{"kind", g.kind}, {"seed", g.seed}};
  if (g.kind == "msd") {
    const MSDChainSpec spec = chain_spec(g);
    sys = gen_msd_chain(spec);
    generator.update(chain_json(spec));
  } else if (g.kind == "cubic-msd") {
    CubicMSDSpec spec;
    spec.chain = chain_spec(g);
    spec.gamma = g.gamma;
    sys = gen_cubic_msd(spec).linearization();
    generator.update(chain_json(spec.chain));
    generator["gamma"] = spec.gamma;
    generator["nonlinear"] = true;
  } else if (g.kind == "nonnormal") {
    NonNormalSpec spec;
    spec.n = g.n > 0 ? g.n : 200;
    spec.lambda_min = g.lambda_min;
    spec.lambda_max = g.lambda_max;
    spec.kappa = g.kappa;
    spec.seed = g.seed;
    spec.require_nondissipative = !g.allow_dissipative;
    NonNormalSystem nn = gen_nonnormal_stable(spec);
    sys = nn.system;
    generator.update(Json{{"n", spec.n},
                          {"lambda_min", spec.lambda_min},
                          {"lambda_max", spec.lambda_max},
                          {"kappa", spec.kappa},
                          {"require_nondissipative", spec.require_nondissipative},
                          {"resamples", nn.resamples}});
  } else if (g.kind == "convdiff") {
    ConvDiffSpec spec;
    spec.n = g.n > 0 ? g.n : 400;
    spec.diffusion = g.diffusion;
    spec.velocity = g.velocity;
    spec.grade = g.grade;
    if (g.profile != "uniform" && g.profile != "ramp") throw UsageError("profile must be uniform or ramp");
    spec.profile = g.profile == "ramp" ? VelocityProfile::Ramp : VelocityProfile::Uniform;
    spec.scale_to_identity = g.scale_identity;
    sys = gen_convection_diffusion(spec);
    generator.update(Json{{"n", spec.n},
                          {"diffusion", spec.diffusion},
                          {"velocity", spec.velocity},
                          {"profile", g.profile},
                          {"grade", spec.grade},
                          {"scale_to_identity", spec.scale_to_identity}});
  } else if (g.kind == "crafted") {
    sys = crafted_counterexample();
  } else if (g.kind == "crafted-cubic") {
    sys = crafted_cubic(g.gamma).linearization();
    generator["gamma"] = g.gamma;
    generator["nonlinear"] = true;
  } else {
    throw UsageError("unknown generator " + g.kind);
  }

  StabilityReport report;
  report = stability_report(*sys);
  write_system_bundle(g.out, *sys, Json{{"generator", generator}});
  write_report(g.out, Json{{"command", "generate"}, {"generator", generator}, {"stability", stability_json(report)}});

  out << "n = " << sys->n() << ", n_in = " << sys->n_in() << ", n_out = " << sys->n_out() << '\n';
  out << "alpha = " << (report.alpha ? format_double(*report.alpha) : std::string("not computed (n > dense cap)"))
      << '\n';
  out << "k = " << report.k << (report.k_complete ? "" : " (lower bound)") << ", mu_max = " << format_double(report.mu_max)
      << (report.dissipative ? ", dissipative" : ", not dissipative") << '\n';
  return kOk;
}

// ------------------------------------------------------------------ reduce

struct SweepRow {
  long r = 0;
  std::optional<double> alpha_conv, alpha_stab, h2, h2_half, output_error;
  std::optional<ConditionBound> bound;
  std::vector<std::string> failures;
  bool failed = false;
  std::optional<ReducedSystem> conv_rom, stab_rom;
  std::optional<NonlinearROM> conv_nl, stab_nl;
  ProjectionBasis basis;
};

int cmd_reduce(const ReduceConfig& cfg, std::ostream& out) {
  const Tolerances& tol = default_tolerances();
  const LinearSystem sys = load_system(cfg.system);
  const Json manifest = read_manifest(cfg.system);
  if (cfg.r.empty()) throw UsageError("--r needs at least one order");
  for (long r : cfg.r) {
    if (r < 1) throw UsageError("reduced orders must be >= 1");
    if (r > sys.n()) throw UsageError("reduced order " + std::to_string(r) + " exceeds n = " + std::to_string(sys.n()));
  }
  if (!(cfg.delta > 0.0)) throw UsageError("--delta must be positive");
  if (cfg.method != "arnoldi" && cfg.method != "pod") throw UsageError("--method must be arnoldi or pod");
  if (!(cfg.horizon > 0.0) || cfg.steps < 1) throw UsageError("--horizon and --steps must be positive");
  const LyapunovMode mode = parse_mode(cfg.lyapunov);
  std::optional<NonlinearSystem> nl;
  if (cfg.nonlinear) nl = nonlinear_from_manifest(manifest);
  const InputSignal u = make_input(cfg.input, sys.n_in(), cfg.horizon);
  const long r_max = *std::max_element(cfg.r.begin(), cfg.r.end());

  Json report{{"command", "reduce"},
              {"system", cfg.system.string()},
              {"method", cfg.method},
              {"r", cfg.r},
              {"s0", cfg.s0},
              {"stabilize", cfg.stabilize},
              {"delta", cfg.delta},
              {"lyapunov", cfg.lyapunov},
              {"adi", Json{{"steps", cfg.adi_steps}, {"residual_tol", cfg.adi_tol}, {"shift_count", cfg.adi_shifts}}},
              {"input", to_json(cfg.input)},
              {"horizon", cfg.horizon},
              {"integrator", Json{{"kind", cfg.nonlinear ? "adaptive" : "trapezoid"}, {"steps", cfg.steps}}},
              {"pod_rtol", cfg.pod_rtol},
              {"nonlinear", cfg.nonlinear},
              {"seed", cfg.seed},
              {"threads", worker_count()},
              {"error_columns", cfg.stabilize ? "stabilized" : "conventional"}};
  auto fail_run = [&](const std::string& what) {
    report["fatal"] = what;
    write_report(cfg.out, report);
    out << "numerical failure: " << what << '\n';
    return kNumerical;
  };

  // Full-order stability is an input assertion; it is only checked below the cap.
  const StabilityReport fom = cfg.nonlinear ? equilibrium_stability(*nl, tol) : stability_report(sys, tol);
  report["full_order_stability"] = stability_json(fom);
  if (fom.alpha && *fom.alpha >= 0.0) return fail_run("full-order model is not asymptotically stable");

  // Basis at the largest order; smaller orders use its leading columns.
  ProjectionBasis full_basis;
  Trajectory snapshots_run;
  try {
    if (cfg.method == "arnoldi") {
      full_basis = arnoldi_basis(sys, r_max, cfg.s0, tol);
    } else {
      AdaptiveOptions ao;
      ao.rtol = cfg.pod_rtol;
      ao.atol = cfg.pod_rtol * 1e-3;
      ao.harvest = true;
      const Dynamics dyn = cfg.nonlinear ? nonlinear_dynamics(*nl) : linear_dynamics(sys);
      snapshots_run = integrate_adaptive(dyn, u, Vector::Zero(sys.n()), cfg.horizon, ao);
      full_basis = pod_basis(snapshots_run.snapshots, r_max, tol);
      report["snapshots"] = Json{{"count", snapshots_run.snapshots.cols()}, {"stats", stats_json(snapshots_run.stats)}};
    }
  } catch (const Error& e) {
    return fail_run(std::string("basis construction: ") + e.what());
  }
  report["basis"] = Json{{"columns", full_basis.r()}, {"breakdown", full_basis.breakdown}};

  std::optional<StabilizerFactor> stab;
  if (cfg.stabilize) {
    StabilizerOptions so;
    so.delta = cfg.delta;
    so.mode = mode;
    so.adi.max_steps = cfg.adi_steps;
    so.adi.residual_tol = cfg.adi_tol;
    so.adi.shift_count = cfg.adi_shifts;
    try {
      stab = cfg.nonlinear ? assemble_equilibrium_stabilizer(*nl, so, tol) : assemble_stabilizer(sys, so, tol);
    } catch (const Error& e) {
      return fail_run(std::string("stabilizer: ") + e.what());
    }
    write_stabilizer(cfg.out / "stabilizer", *stab);
    report["stabilizer"] = stabilizer_manifest(*stab);
  }

  // Reference trajectory and frequency response of the full model.
  std::optional<Trajectory> reference;
  std::optional<FrequencyGrid> grid;
  std::optional<FrequencyResponse> fom_response;
  std::vector<double> out_times;
  for (int i = 0; i <= cfg.steps; ++i) out_times.push_back(cfg.horizon * double(i) / double(cfg.steps));
  const double u_norm = input_l2_norm(u, cfg.horizon);
  report["input_l2_norm"] = u_norm;
  try {
    if (cfg.nonlinear) {
      AdaptiveOptions ao;
      ao.output_times = out_times;
      reference = integrate_adaptive(nonlinear_dynamics(*nl), u, Vector::Zero(sys.n()), cfg.horizon, ao);
    } else {
      reference = integrate_trapezoidal(sys, u, Vector::Zero(sys.n()), cfg.horizon, cfg.steps);
      H2Options ho;
      ho.points = cfg.h2_points;
      ho.omega_min = cfg.omega_min;
      ho.omega_max = cfg.omega_max;
      ho.check_stability = false;
      grid = h2_grid({&sys}, ho, tol);
      fom_response = sample_response(TransferFunction(sys), grid->omega);
      report["h2_grid"] = Json{{"omega_min", grid->omega_min},
                               {"omega_max", grid->omega_max},
                               {"points", cfg.h2_points},
                               {"rule", "trapezoid on [0, omega_max], log grid plus omega = 0, 1/omega^2 tail"}};
    }
  } catch (const Error& e) {
    return fail_run(std::string("full-order reference: ") + e.what());
  }

  std::vector<SweepRow> rows(cfg.r.size());
  parallel_for(Index(cfg.r.size()), [&](Index i) {
    SweepRow& row = rows[std::size_t(i)];
    row.r = cfg.r[std::size_t(i)];
    auto note = [&](const std::string& stage, const Error& e) {
      row.failures.push_back(stage + ": " + e.what());
      row.failed = true;
    };
    if (full_basis.r() < row.r) {
      row.failures.push_back("Krylov breakdown: only " + std::to_string(full_basis.r()) + " basis vectors");
      row.failed = true;
      return;
    }
    row.basis = full_basis;
    row.basis.v = full_basis.v.leftCols(row.r);
    if (full_basis.singular_values.size() > 0) row.basis.singular_values = full_basis.singular_values;
    row.basis.requested = row.r;

    try {
      if (cfg.nonlinear) {
        row.conv_nl = nonlinear_reduce(*nl, row.basis, nullptr, tol);
        row.alpha_conv = row.conv_nl->equilibrium_abscissa(tol);
      } else {
        row.conv_rom = galerkin_reduce(sys, row.basis);
        row.alpha_conv = row.conv_rom->spectral_abscissa(tol);
      }
    } catch (const Error& e) {
      note("conventional", e);
    }
    if (stab) {
      try {
        if (cfg.nonlinear) {
          row.stab_nl = nonlinear_reduce(*nl, row.basis, &*stab, tol);
          row.alpha_stab = row.stab_nl->equilibrium_abscissa(tol);
        } else {
          row.stab_rom = stabilized_reduce(sys, row.basis, *stab, tol);
          row.alpha_stab = row.stab_rom->spectral_abscissa(tol);
          row.bound = condition_bound_check(*stab, *row.stab_rom);
        }
      } catch (const Error& e) {
        note("stabilized", e);
      }
    }

    const std::optional<double> alpha = cfg.stabilize ? row.alpha_stab : row.alpha_conv;
    if (!alpha) return;
    try {
      if (cfg.nonlinear) {
        const NonlinearROM& rom = cfg.stabilize ? *row.stab_nl : *row.conv_nl;
        AdaptiveOptions ao;
        ao.output_times = out_times;
        const Trajectory t = integrate_adaptive(nonlinear_dynamics(rom), u, Vector::Zero(row.r), cfg.horizon, ao);
        row.output_error = output_error(*reference, t, false).max_abs;
      } else {
        const ReducedSystem& rom = cfg.stabilize ? *row.stab_rom : *row.conv_rom;
        const LinearSystem red = rom.to_linear_system();
        if (*alpha < 0.0) {
          const H2Result h2 = h2_error(*fom_response, sample_response(TransferFunction(red), grid->omega));
          row.h2 = h2.value;
          row.h2_half = h2.half_resolution;
        }
        const Trajectory t = integrate_trapezoidal(red, u, Vector::Zero(row.r), cfg.horizon, cfg.steps);
        row.output_error = output_error(*reference, t, false).max_abs;
      }
    } catch (const Error& e) {
      note("error evaluation", e);
    }
  });

  CsvWriter csv({"r", "spectral_abscissa_conventional", "spectral_abscissa_stabilized", "h2_error", "max_output_error"});
  Json entries = Json::array();
  bool any_failure = false;
  for (const SweepRow& row : rows) {
    any_failure = any_failure || row.failed;
    const std::string fail = "FAIL";
    auto mark = [&](std::optional<double> v, bool expected) {
      if (v) return cell(v);
      return expected && row.failed ? fail : std::string("NA");
    };
    csv.row({std::to_string(row.r), mark(row.alpha_conv, true), mark(row.alpha_stab, cfg.stabilize), mark(row.h2, false),
             mark(row.output_error, true)});

    const std::string tag = "r" + std::to_string(row.r);
    if (row.basis.v.cols() == row.r) write_basis(cfg.out / "bases" / ("V_" + tag + ".mtx"), row.basis);
    if (row.conv_rom) write_reduced_bundle(cfg.out / "roms" / ("conventional_" + tag), *row.conv_rom);
    if (row.stab_rom) write_reduced_bundle(cfg.out / "roms" / ("stabilized_" + tag), *row.stab_rom);

    Json e{{"r", row.r},
           {"spectral_abscissa_conventional", json_number(row.alpha_conv)},
           {"spectral_abscissa_stabilized", json_number(row.alpha_stab)},
           {"h2_error", json_number(row.h2)},
           {"h2_error_half_resolution", json_number(row.h2_half)},
           {"max_output_error", json_number(row.output_error)},
           {"failures", row.failures}};
    if (row.h2) e["error_bound"] = *row.h2 * u_norm;
    if (row.bound)
      e["condition_bound"] = Json{{"cond", row.bound->cond}, {"bound", row.bound->bound}, {"holds", row.bound->holds}};
    if (cfg.stabilize && row.alpha_stab && *row.alpha_stab >= 0.0) e["stability_violation"] = true;
    entries.push_back(e);
  }
  write_text(cfg.out / "error_sweep.csv", csv.str());
  report["sweep"] = entries;
  report["exit_code"] = any_failure ? kNumerical : kOk;
  write_report(cfg.out, report);

  long unstable_conv = 0, unstable_stab = 0;
  for (const SweepRow& row : rows) {
    unstable_conv += row.alpha_conv && *row.alpha_conv >= 0.0;
    unstable_stab += row.alpha_stab && *row.alpha_stab >= 0.0;
  }
  out << rows.size() << " reduced orders; unstable conventional ROMs: " << unstable_conv;
  if (cfg.stabilize) out << "; unstable stabilized ROMs: " << unstable_stab;
  out << '\n';
  if (any_failure) out << "some reductions failed; see report.json\n";
  return any_failure ? kNumerical : kOk;
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const SimulateConfig& cfg, std::ostream& out) {
  const LinearSystem sys = load_system(cfg.system);
  const Json manifest = read_manifest(cfg.system);
  if (!(cfg.horizon > 0.0)) throw UsageError("--horizon must be positive");
  if (cfg.integrator != "trapezoid" && cfg.integrator != "adaptive")
    throw UsageError("--integrator must be trapezoid or adaptive");
  if (cfg.nonlinear && cfg.integrator == "trapezoid")
    throw UsageError("the trapezoidal rule is for linear systems; use --integrator adaptive");
  if (cfg.steps < 1) throw UsageError("--steps must be >= 1");
  const InputSignal u = make_input(cfg.input, sys.n_in(), cfg.horizon);

  Json report{{"command", "simulate"},
              {"system", cfg.system.string()},
              {"input", to_json(cfg.input)},
              {"horizon", cfg.horizon},
              {"integrator", cfg.integrator},
              {"nonlinear", cfg.nonlinear}};
  Trajectory traj;
  try {
    if (cfg.integrator == "trapezoid") {
      report["steps"] = cfg.steps;
      traj = integrate_trapezoidal(sys, u, Vector::Zero(sys.n()), cfg.horizon, cfg.steps);
    } else {
      AdaptiveOptions ao;
      ao.rtol = cfg.rtol;
      ao.atol = cfg.atol;
      for (int i = 0; cfg.samples > 0 && i <= cfg.samples; ++i)
        ao.output_times.push_back(cfg.horizon * double(i) / double(cfg.samples));
      report["rtol"] = cfg.rtol;
      report["atol"] = cfg.atol;
      report["samples"] = cfg.samples;
      const Dynamics dyn =
          cfg.nonlinear ? nonlinear_dynamics(nonlinear_from_manifest(manifest)) : linear_dynamics(sys);
      traj = integrate_adaptive(dyn, u, Vector::Zero(sys.n()), cfg.horizon, ao);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
    report["fatal"] = e.what();
    write_report(cfg.out, report);
    out << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  write_trajectory(cfg.out / "trajectory.csv", traj);
  report["stats"] = stats_json(traj.stats);
  report["rows"] = traj.t.size();
  write_report(cfg.out, report);
  out << traj.t.size() << " samples, " << traj.stats.steps << " steps, " << traj.stats.rejected << " rejected\n";
  return kOk;
}

// ------------------------------------------------------------------ analyze

int cmd_analyze(const AnalyzeConfig& cfg, std::ostream& out) {
  const Tolerances& tol = default_tolerances();
  const LinearSystem sys = load_system(cfg.system);
  if (cfg.points < 1) throw UsageError("--points must be >= 1");
  Json report{{"command", "analyze"}, {"system", cfg.system.string()}};
  const StabilityReport stability = stability_report(sys, tol);
  report["stability"] = stability_json(stability);

  double lo = 0.0, hi = 0.0;
  if (!cfg.omega_min || !cfg.omega_max) std::tie(lo, hi) = pole_magnitude_range(sys, tol);
  const double wmin = cfg.omega_min.value_or(1e-2 * lo), wmax = cfg.omega_max.value_or(1e2 * hi);
  const TransferFunction tf(sys);
  const std::vector<BodePoint> bode = bode_data(tf, wmin, wmax, cfg.points);
  std::vector<std::string> header{"omega"};
  const bool siso = sys.n_in() == 1 && sys.n_out() == 1;
  for (Index i = 0; i < sys.n_out(); ++i)
    for (Index j = 0; j < sys.n_in(); ++j) {
      const std::string suffix = siso ? "" : "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
      header.push_back("mag_db" + suffix);
      header.push_back("phase_deg" + suffix);
    }
  CsvWriter csv(header);
  long poles = 0;
  for (const BodePoint& p : bode) {
    std::vector<std::string> cells{format_double(p.omega)};
    poles += p.pole;
    for (std::size_t k = 0; k < p.mag_db.size(); ++k) {
      cells.push_back(p.pole ? "NA" : format_double(p.mag_db[k]));
      cells.push_back(p.pole ? "NA" : format_double(p.phase_deg[k]));
    }
    csv.row(cells);
  }
  write_text(cfg.out / "bode.csv", csv.str());
  report["bode"] = Json{{"omega_min", wmin}, {"omega_max", wmax}, {"points", cfg.points}, {"pole_hits", poles}};

  int code = kOk;
  if (!cfg.rom.empty()) {
    const LinearSystem rom = load_system(cfg.rom);
    if (rom.n_in() != sys.n_in() || rom.n_out() != sys.n_out())
      throw UsageError("reduced model has different input/output dimensions");
    const StabilityReport rs = stability_report(rom, tol);
    report["rom"] = Json{{"path", cfg.rom.string()}, {"stability", stability_json(rs)}};
    if (rs.asymptotically_stable()) {
      try {
        H2Options ho;
        ho.points = cfg.h2_points;
        const H2Result h2 = h2_error(tf, TransferFunction(rom), ho, tol);
        report["h2_error"] = Json{{"value", h2.value},
                                  {"half_resolution", h2.half_resolution},
                                  {"omega_min", h2.omega_min},
                                  {"omega_max", h2.omega_max},
                                  {"points", h2.points}};
        out << "h2_error = " << format_double(h2.value) << '\n';
      } catch (const Error& e) {
        report["h2_error"] = Json{{"failure", e.what()}};
        code = kNumerical;
      }
    } else {
      report["h2_error"] = nullptr;
      out << "h2_error = NA (reduced model not asymptotically stable)\n";
    }
  }
  write_report(cfg.out, report);
  out << "alpha = " << (stability.alpha ? format_double(*stability.alpha) : std::string("not computed")) << ", k = "
      << stability.k << ", mu_max = " << format_double(stability.mu_max) << '\n';
  return code;
}

void add_input_options(CLI::App* cmd, InputConfig& in) {
  cmd->add_option("--input", in.kind, "input signal")->check(CLI::IsMember({"sine", "step", "zero"}));
  cmd->add_option("--period", in.period, "sine period (default: the horizon)");
  cmd->add_option("--amplitude", in.amplitude, "input amplitude");
}

}  // namespace

std::vector<long> parse_r_list(const std::string& text) {
  std::vector<long> out;
  auto number = [&](std::string_view s) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw UsageError("bad order list: " + text);
    return v;
  };
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    const std::size_t c1 = item.find(':');
    if (c1 == std::string_view::npos) {
      out.push_back(number(item));
      continue;
    }
    const std::size_t c2 = item.find(':', c1 + 1);
    const long first = number(item.substr(0, c1));
    const long last = number(item.substr(c1 + 1, c2 == std::string_view::npos ? std::string_view::npos : c2 - c1 - 1));
    const long step = c2 == std::string_view::npos ? 1 : number(item.substr(c2 + 1));
    if (step < 1 || last < first) throw UsageError("bad order range: " + std::string(item));
    for (long r = first; r <= last; r += step) out.push_back(r);
  }
  if (out.empty()) throw UsageError("empty order list");
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stabmor: Galerkin model order reduction with stability-preserving projections", "stabmor"};
  app.require_subcommand(1);

  GenerateConfig gen;
  auto* generate = app.add_subcommand("generate", "write a benchmark system bundle");
  generate->add_option("kind", gen.kind, "generator")
      ->required()
      ->check(CLI::IsMember({"msd", "cubic-msd", "nonnormal", "convdiff", "crafted", "crafted-cubic"}));
  generate->add_option("--out", gen.out, "bundle directory")->required();
  generate->add_option("--seed", gen.seed, "random seed");
  generate->add_option("--masses", gen.masses, "number of masses");
  generate->add_option("--mass", gen.mass, "mass per element (one value or one per mass)")->delimiter(',');
  generate->add_option("--stiffness", gen.stiffness, "spring stiffness")->delimiter(',');
  generate->add_option("--damping", gen.damping, "damper coefficient")->delimiter(',');
  generate->add_option("--input-node", gen.input_node, "mass receiving the input force");
  generate->add_option("--output-node", gen.output_node, "observed mass (-1: last)");
  generate->add_option("--gamma", gen.gamma, "cubic spring coefficient");
  generate->add_option("--n", gen.n, "state dimension (nonnormal, convdiff)");
  generate->add_option("--lambda-min", gen.lambda_min, "smallest eigenvalue magnitude");
  generate->add_option("--lambda-max", gen.lambda_max, "largest eigenvalue magnitude");
  generate->add_option("--kappa", gen.kappa, "condition number of the similarity transform");
  generate->add_flag("--allow-dissipative", gen.allow_dissipative, "accept samples with k = 0");
  generate->add_option("--diffusion", gen.diffusion, "diffusion coefficient");
  generate->add_option("--velocity", gen.velocity, "convection velocity");
  generate->add_option("--profile", gen.profile, "velocity profile")->check(CLI::IsMember({"uniform", "ramp"}));
  generate->add_option("--grade", gen.grade, "largest / smallest cell width");
  generate->add_flag("--scale-identity", gen.scale_identity, "scale to E = I");

  ReduceConfig red;
  auto* reduce = app.add_subcommand("reduce", "sweep reduced orders, conventional and stabilized");
  reduce->add_option("--system", red.system, "system bundle")->required();
  reduce->add_option("--out", red.out, "output directory")->required();
  reduce->add_option("--method", red.method, "basis")->check(CLI::IsMember({"arnoldi", "pod"}));
  reduce->add_option("--r", red.r_text, "orders, e.g. 1,2,5 or 1:20")->required();
  reduce->add_option("--s0", red.s0, "Arnoldi expansion point");
  reduce->add_flag("--stabilize", red.stabilize, "also build stabilized ROMs");
  reduce->add_option("--delta", red.delta, "shift delta > 0");
  reduce->add_option("--lyapunov", red.lyapunov, "Lyapunov solver")->check(CLI::IsMember({"auto", "lradi", "dense"}));
  reduce->add_option("--adi-steps", red.adi_steps, "LR-ADI steps");
  reduce->add_option("--adi-tol", red.adi_tol, "LR-ADI relative residual tolerance");
  reduce->add_option("--adi-shifts", red.adi_shifts, "number of ADI shifts");
  reduce->add_option("--h2-points", red.h2_points, "log-spaced H2 quadrature points");
  reduce->add_option("--omega-min", red.omega_min, "H2 grid lower end");
  reduce->add_option("--omega-max", red.omega_max, "H2 grid upper end");
  reduce->add_option("--horizon", red.horizon, "simulation horizon");
  reduce->add_option("--steps", red.steps, "trapezoidal steps");
  reduce->add_option("--pod-rtol", red.pod_rtol, "relative tolerance of the snapshot run");
  reduce->add_flag("--nonlinear", red.nonlinear, "reduce the recorded nonlinear benchmark");
  reduce->add_option("--seed", red.seed, "recorded in the report");
  add_input_options(reduce, red.input);

  SimulateConfig sim;
  auto* simulate = app.add_subcommand("simulate", "integrate a system or reduced model bundle");
  simulate->add_option("--system", sim.system, "system or reduced model bundle")->required();
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--horizon", sim.horizon, "end time");
  simulate->add_option("--integrator", sim.integrator, "integrator")->check(CLI::IsMember({"trapezoid", "adaptive"}));
  simulate->add_option("--steps", sim.steps, "trapezoidal steps");
  simulate->add_option("--rtol", sim.rtol, "adaptive relative tolerance");
  simulate->add_option("--atol", sim.atol, "adaptive absolute tolerance");
  simulate->add_option("--samples", sim.samples, "adaptive: uniform output samples (0: every step)");
  simulate->add_flag("--nonlinear", sim.nonlinear, "simulate the recorded nonlinear benchmark");
  add_input_options(simulate, sim.input);

  AnalyzeConfig ana;
  auto* analyze = app.add_subcommand("analyze", "stability report, Bode data and H2 error");
  analyze->add_option("--system", ana.system, "system bundle")->required();
  analyze->add_option("--out", ana.out, "output directory")->required();
  analyze->add_option("--rom", ana.rom, "reduced model bundle to compare against");
  analyze->add_option("--omega-min", ana.omega_min, "Bode lower frequency");
  analyze->add_option("--omega-max", ana.omega_max, "Bode upper frequency");
  analyze->add_option("--points", ana.points, "Bode points");
  analyze->add_option("--h2-points", ana.h2_points, "H2 quadrature points");

  std::vector<const char*> argv{"stabmor"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (reduce->parsed()) {
      red.r = parse_r_list(red.r_text);
      return cmd_reduce(red, out);
    }
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (analyze->parsed()) return cmd_analyze(ana, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::Io ? kUsage : kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}

}  // namespace stabmor::cli
