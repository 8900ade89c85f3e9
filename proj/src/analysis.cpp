#include "stabmor/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <Eigen/LU>

#include "stabmor/errors.hpp"
#include "stabmor/linalg/lu.hpp"
#include "stabmor/linalg/schur.hpp"

namespace stabmor {

int worker_count() {
  if (const char* env = std::getenv("STABMOR_THREADS")) {
    int value = 0;
    const char* end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec == std::errc() && ptr == end && value > 0) return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(Index count, const std::function<void(Index)>& body) {
  const Index workers = std::min<Index>(worker_count(), count);
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (Index w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------- frequency

namespace {

constexpr Index kDensePoleLimit = 200;

Vector deterministic_start(Index n) {
  Vector x = Vector::Ones(n) + Vector::LinSpaced(n, 0.0, 1.0);
  return x / x.norm();
}

double ritz_growth(const std::function<Vector(const Vector&)>& op, Index n) {
  Vector x = deterministic_start(n);
  double growth = 0.0;
  for (int it = 0; it < 60; ++it) {
    Vector y = op(x);
    const double norm = y.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) return norm;
    growth = norm;
    x = y / norm;
  }
  return growth;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> out(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < points; ++i) out[i] = std::pow(10.0, points == 1 ? a : a + (b - a) * i / (points - 1));
  return out;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y, const std::vector<std::size_t>& idx) {
  double sum = 0.0;
  for (std::size_t k = 1; k < idx.size(); ++k)
    sum += 0.5 * (x[idx[k]] - x[idx[k - 1]]) * (y[idx[k]] + y[idx[k - 1]]);
  return sum;
}

}  // namespace

std::pair<double, double> pole_magnitude_range(const LinearSystem& sys, const Tolerances& tol) {
  const Index n = sys.n();
  if (n == 0) return {1.0, 1.0};
  if (n <= kDensePoleLimit) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& l : dense_eigenvalues<double>(sys.dense_state_matrix(tol), tol)) {
      lo = std::min(lo, std::abs(l));
      hi = std::max(hi, std::abs(l));
    }
    if (!(lo > 0.0)) lo = hi > 0.0 ? hi * 1e-12 : 1.0;
    if (!(hi > 0.0)) hi = 1.0;
    return {lo, hi};
  }
  const double hi = ritz_growth([&](const Vector& x) -> Vector { return sys.solve_e(Vector(sys.a() * x)); }, n);
  const LUFactorization a_lu(sys.a());
  const double inv = ritz_growth([&](const Vector& x) -> Vector { return a_lu.solve(Vector(sys.e() * x)); }, n);
  return {inv > 0.0 ? 1.0 / inv : hi * 1e-12, hi};
}

FrequencyGrid h2_grid(const std::vector<const LinearSystem*>& systems, const H2Options& options,
                      const Tolerances& tol) {
  if (options.points < 3) throw Error(ErrorKind::InvalidArgument, "h2: at least 3 grid points required");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const LinearSystem* sys : systems) {
    if (options.check_stability && sys->n() <= tol.dense_cap && spectral_abscissa(*sys, tol) >= 0.0)
      throw Error(ErrorKind::UnstableOperand, "the H2 norm of an unstable system does not exist");
    if (!options.omega_min || !options.omega_max) {
      const auto [a, b] = pole_magnitude_range(*sys, tol);
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
  }
  FrequencyGrid grid;
  grid.omega_min = options.omega_min.value_or(1e-3 * lo);
  grid.omega_max = options.omega_max.value_or(1e3 * hi);
  if (!(grid.omega_min > 0.0) || !(grid.omega_max > grid.omega_min) || !std::isfinite(grid.omega_max))
    throw Error(ErrorKind::InvalidArgument, "h2: invalid frequency range");
  grid.omega.push_back(0.0);
  const std::vector<double> logs = log_grid(grid.omega_min, grid.omega_max, options.points);
  grid.omega.insert(grid.omega.end(), logs.begin(), logs.end());
  return grid;
}

FrequencyResponse sample_response(const TransferFunction& tf, const std::vector<double>& omega) {
  FrequencyResponse out;
  out.omega = omega;
  out.h.resize(omega.size());
  parallel_for(Index(omega.size()), [&](Index i) { out.h[i] = tf({0.0, omega[i]}); });
  return out;
}

H2Result h2_quadrature(const FrequencyGrid& g) {
  if (g.omega.size() < 3 || g.value.size() != g.omega.size())
    throw Error(ErrorKind::InvalidArgument, "h2_quadrature: malformed grid");
  std::vector<std::size_t> all(g.omega.size()), half{0};
  for (std::size_t i = 0; i < g.omega.size(); ++i) all[i] = i;
  for (std::size_t i = 1; i < g.omega.size(); i += 2) half.push_back(i);
  if (half.back() != g.omega.size() - 1) half.push_back(g.omega.size() - 1);
  const double tail = g.omega.back() * g.value.back();
  H2Result out;
  out.value = std::sqrt((trapezoid(g.omega, g.value, all) + tail) / std::numbers::pi);
  out.half_resolution = std::sqrt((trapezoid(g.omega, g.value, half) + tail) / std::numbers::pi);
  out.omega_min = g.omega_min > 0.0 ? g.omega_min : g.omega[1];
  out.omega_max = g.omega.back();
  out.points = int(g.omega.size()) - 1;
  return out;
}

H2Result h2_error(const FrequencyResponse& a, const FrequencyResponse& b) {
  if (a.omega != b.omega) throw Error(ErrorKind::GridMismatch, "h2_error: responses use different grids");
  FrequencyGrid g;
  g.omega = a.omega;
  g.value.resize(a.omega.size());
  for (std::size_t i = 0; i < a.omega.size(); ++i) {
    if (a.h[i].rows() != b.h[i].rows() || a.h[i].cols() != b.h[i].cols())
      throw Error(ErrorKind::InvalidArgument, "h2_error: input/output dimensions differ");
    g.value[i] = (a.h[i] - b.h[i]).squaredNorm();
  }
  g.omega_min = g.omega.size() > 1 ? g.omega[1] : 0.0;
  g.omega_max = g.omega.back();
  return h2_quadrature(g);
}

H2Result h2_norm(const TransferFunction& tf, const H2Options& options, const Tolerances& tol) {
  FrequencyGrid g = h2_grid({&tf.system()}, options, tol);
  const FrequencyResponse r = sample_response(tf, g.omega);
  g.value.resize(g.omega.size());
  for (std::size_t i = 0; i < g.omega.size(); ++i) g.value[i] = r.h[i].squaredNorm();
  return h2_quadrature(g);
}

H2Result h2_error(const TransferFunction& a, const TransferFunction& b, const H2Options& options,
                  const Tolerances& tol) {
  if (a.system().n_in() != b.system().n_in() || a.system().n_out() != b.system().n_out())
    throw Error(ErrorKind::InvalidArgument, "h2_error: input/output dimensions differ");
  const FrequencyGrid g = h2_grid({&a.system(), &b.system()}, options, tol);
  return h2_error(sample_response(a, g.omega), sample_response(b, g.omega));
}

std::vector<BodePoint> bode_data(const TransferFunction& tf, double omega_min, double omega_max, int points) {
  if (!(omega_min > 0.0) || !(omega_max >= omega_min) || points < 1)
    throw Error(ErrorKind::InvalidArgument, "bode: invalid frequency range");
  const std::vector<double> omega = log_grid(omega_min, omega_max, points);
  const std::size_t entries = std::size_t(tf.system().n_out() * tf.system().n_in());
  std::vector<BodePoint> out(omega.size());
  parallel_for(Index(omega.size()), [&](Index i) {
    BodePoint& p = out[i];
    p.omega = omega[i];
    p.mag_db.assign(entries, std::numeric_limits<double>::quiet_NaN());
    p.phase_deg = p.mag_db;
    try {
      const ComplexMatrix h = tf({0.0, omega[i]});
      std::size_t k = 0;
      for (Index r = 0; r < h.rows(); ++r)
        for (Index c = 0; c < h.cols(); ++c, ++k) {
          p.mag_db[k] = 20.0 * std::log10(std::abs(h(r, c)));
          p.phase_deg[k] = std::arg(h(r, c)) * 180.0 / std::numbers::pi;
        }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PoleHit) throw;
      p.pole = true;
    }
  });
  for (std::size_t k = 0; k < entries; ++k) {
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (BodePoint& p : out) {
      if (p.pole) continue;
      double& phase = p.phase_deg[k];
      if (std::isfinite(previous) && std::isfinite(phase)) phase -= 360.0 * std::round((phase - previous) / 360.0);
      previous = phase;
    }
  }
  return out;
}

// ---------------------------------------------------------------- time domain

InputSignal zero_input(Index n_in) {
  return [n_in](double) -> Vector { return Vector::Zero(n_in); };
}

InputSignal step_input(Index n_in, double amplitude) {
  return [n_in, amplitude](double) -> Vector { return Vector::Constant(n_in, amplitude); };
}

InputSignal sine_input(Index n_in, double period, double amplitude) {
  if (!(period > 0.0)) throw Error(ErrorKind::InvalidArgument, "sine input needs a positive period");
  return [n_in, period, amplitude](double t) -> Vector {
    return Vector::Constant(n_in, amplitude * std::sin(2.0 * std::numbers::pi * t / period));
  };
}

double input_l2_norm(const InputSignal& u, double horizon, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = horizon / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * u(i * h).squaredNorm();
  }
  return std::sqrt(sum * h / 3.0);
}

Dynamics linear_dynamics(const LinearSystem& sys) {
  Dynamics d;
  d.n = sys.n();
  d.n_in = sys.n_in();
  d.n_out = sys.n_out();
  d.rate = [sys](const Vector& x, const Vector& u) -> Vector {
    return sys.solve_e(Vector(sys.a() * x + sys.b() * u));
  };
  d.output = [c = sys.c()](const Vector& x) -> Vector { return c * x; };
  return d;
}

Dynamics linear_dynamics(const ReducedSystem& rom) {
  Dynamics d;
  d.n = rom.r();
  d.n_in = rom.b.cols();
  d.n_out = rom.c.rows();
  auto lu = std::make_shared<const LUFactorization>(rom.e);
  d.rate = [lu, a = rom.a, b = rom.b](const Vector& x, const Vector& u) -> Vector {
    return lu->solve(Vector(a * x + b * u));
  };
  d.output = [c = rom.c](const Vector& x) -> Vector { return c * x; };
  return d;
}

Dynamics nonlinear_dynamics(const NonlinearSystem& sys) {
  Dynamics d;
  d.n = sys.n();
  d.n_in = sys.n_in();
  d.n_out = sys.n_out();
  d.rate = [sys](const Vector& x, const Vector& u) -> Vector {
    return sys.linearization().solve_e(Vector(sys.eval(x) + sys.b() * u));
  };
  d.output = [c = sys.c()](const Vector& x) -> Vector { return c * x; };
  return d;
}

Dynamics nonlinear_dynamics(const NonlinearROM& rom) {
  Dynamics d;
  d.n = rom.r();
  d.n_in = rom.b.cols();
  d.n_out = rom.c.rows();
  auto lu = std::make_shared<const LUFactorization>(rom.e);
  d.rate = [lu, rom](const Vector& x, const Vector& u) -> Vector {
    return lu->solve(Vector(rom.eval(x) + rom.b * u));
  };
  d.output = [c = rom.c](const Vector& x) -> Vector { return c * x; };
  return d;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_norm(const Vector& v, const Vector& x0, const Vector& x1, double rtol, double atol) {
  if (v.size() == 0) return 0.0;
  const Vector scale = (atol + rtol * x0.cwiseAbs().cwiseMax(x1.cwiseAbs()).array()).matrix();
  const double norm = std::sqrt((v.array() / scale.array()).square().mean());
  return std::isnan(norm) ? std::numeric_limits<double>::infinity() : norm;
}

void record(Trajectory& traj, std::vector<Vector>& states, const Dynamics& dyn, double t, const Vector& x,
            bool store_states) {
  traj.t.push_back(t);
  states.push_back(store_states ? x : dyn.output(x));
}

Matrix rows_of(const std::vector<Vector>& rows, Index cols) {
  Matrix m(Index(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(Index(i)) = rows[i].transpose();
  return m;
}

}  // namespace

Trajectory integrate_adaptive(const Dynamics& dyn, const InputSignal& u, const Vector& x0, double horizon,
                              const AdaptiveOptions& options) {
  if (x0.size() != dyn.n) throw Error(ErrorKind::InvalidArgument, "integrate_adaptive: x0 has wrong size");
  if (!(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "integrate_adaptive: horizon must be positive");
  const double rtol = options.rtol, atol = options.atol;
  Trajectory traj;
  std::vector<Vector> samples, harvested;
  auto f = [&](double t, const Vector& x) {
    ++traj.stats.stages;
    return dyn.rate(x, u(t));
  };

  const std::vector<double>& out_times = options.output_times;
  for (std::size_t i = 0; i < out_times.size(); ++i)
    if (out_times[i] < 0.0 || out_times[i] > horizon || (i > 0 && !(out_times[i] > out_times[i - 1])))
      throw Error(ErrorKind::InvalidArgument, "output_times must increase within [0, horizon]");
  std::size_t next_out = 0;

  double t = 0.0;
  Vector x = x0;
  Vector k1 = f(t, x);
  if (out_times.empty()) {
    record(traj, samples, dyn, t, x, options.store_states);
  } else {
    for (; next_out < out_times.size() && out_times[next_out] <= 0.0; ++next_out)
      record(traj, samples, dyn, out_times[next_out], x, options.store_states);
  }
  if (options.harvest) harvested.push_back(x);

  double h;
  long fixed_count = 0;
  if (options.fixed_step) {
    if (!(*options.fixed_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "fixed step must be positive");
    fixed_count = std::max(1L, long(std::ceil(horizon / *options.fixed_step - 1e-9)));
    h = horizon / fixed_count;
  } else if (options.initial_step) {
    h = *options.initial_step;
  } else {
    const double d0 = scaled_norm(x, x, x, rtol, atol), d1 = scaled_norm(k1, x, x, rtol, atol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * horizon : 0.01 * d0 / d1;
    h0 = std::min(h0, horizon);
    const Vector x1 = x + h0 * k1;
    const double d2 = scaled_norm(f(h0, x1) - k1, x, x, rtol, atol) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6 * horizon, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100.0 * h0, h1);
  }

  constexpr double safety = 0.9, beta = 0.04, alpha = 0.2 - 0.75 * beta;
  double err_prev = 1e-4;
  bool last_rejected = false;
  long step = 0;
  while (true) {
    if (options.fixed_step) {
      if (step == fixed_count) break;
    } else {
      if (t >= horizon * (1.0 - 1e-14)) break;
      h = std::min(h, horizon - t);
      if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), horizon))
        throw Error(ErrorKind::StepSizeUnderflow, "step size underflow at t = " + std::to_string(t));
    }
    if (traj.stats.steps + traj.stats.rejected >= options.max_steps)
      throw Error(ErrorKind::StepSizeUnderflow, "step budget exhausted at t = " + std::to_string(t));

    const Vector y2 = x + h * a21 * k1;
    const Vector k2 = f(t + c2 * h, y2);
    const Vector y3 = x + h * (a31 * k1 + a32 * k2);
    const Vector k3 = f(t + c3 * h, y3);
    const Vector y4 = x + h * (a41 * k1 + a42 * k2 + a43 * k3);
    const Vector k4 = f(t + c4 * h, y4);
    const Vector y5 = x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    const Vector k5 = f(t + c5 * h, y5);
    const Vector y6 = x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double t_new = options.fixed_step ? horizon * double(step + 1) / double(fixed_count) : t + h;
    const Vector k6 = f(t + h, y6);
    const Vector x_new = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = f(t_new, x_new);

    double fac = 1.0;
    if (!options.fixed_step) {
      const Vector err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double err = scaled_norm(err_vec, x, x_new, rtol, atol);
      if (!(err <= 1.0)) {
        ++traj.stats.rejected;
        last_rejected = true;
        h *= std::isfinite(err) ? std::max(0.2, safety * std::pow(err, -alpha)) : 0.2;
        continue;
      }
      fac = err == 0.0 ? 10.0 : safety * std::pow(err, -alpha) * std::pow(err_prev, beta);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      err_prev = std::max(err, 1e-4);
      last_rejected = false;
    } else if (!x_new.allFinite()) {
      throw Error(ErrorKind::StepSizeUnderflow, "non-finite state in fixed-step integration");
    }

    if (options.harvest) {
      for (const Vector* s : {&y2, &y3, &y4, &y5, &y6, &x_new}) harvested.push_back(*s);
    }
    ++traj.stats.steps;
    ++step;
    const bool final_step = options.fixed_step ? step == fixed_count : t_new >= horizon * (1.0 - 1e-14);
    for (; next_out < out_times.size() && (out_times[next_out] <= t_new || final_step); ++next_out) {
      const double th = std::clamp((out_times[next_out] - t) / (t_new - t), 0.0, 1.0);
      const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
      const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
      const Vector xs = h00 * x + h10 * (t_new - t) * k1 + h01 * x_new + h11 * (t_new - t) * k7;
      record(traj, samples, dyn, out_times[next_out], xs, options.store_states);
    }
    t = t_new;
    x = x_new;
    k1 = k7;
    if (out_times.empty()) record(traj, samples, dyn, t, x, options.store_states);
    if (!options.fixed_step) h *= fac;
  }

  if (options.store_states) {
    traj.x = rows_of(samples, dyn.n);
    traj.y.resize(traj.x.rows(), dyn.n_out);
    for (Index i = 0; i < traj.x.rows(); ++i) traj.y.row(i) = dyn.output(traj.x.row(i).transpose()).transpose();
  } else {
    traj.y = rows_of(samples, dyn.n_out);
  }
  if (options.harvest) {
    traj.snapshots.resize(dyn.n, Index(harvested.size()));
    for (std::size_t j = 0; j < harvested.size(); ++j) traj.snapshots.col(Index(j)) = harvested[j];
  }
  return traj;
}

Trajectory integrate_trapezoidal(const LinearSystem& sys, const InputSignal& u, const Vector& x0, double horizon,
                                 int steps, bool store_states) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "integrate_trapezoidal: steps must be >= 1");
  if (x0.size() != sys.n()) throw Error(ErrorKind::InvalidArgument, "integrate_trapezoidal: x0 has wrong size");
  const double h = horizon / steps;
  const SparseMatrix lhs = sys.e() - 0.5 * h * sys.a();
  const SparseMatrix rhs = sys.e() + 0.5 * h * sys.a();
  std::unique_ptr<LUFactorization> lu;
  try {
    lu = std::make_unique<LUFactorization>(lhs);
  } catch (const Error& e) {
    throw Error(ErrorKind::FactorizationFailure, std::string("E - h/2 A: ") + e.what());
  }
  Trajectory traj;
  traj.t.reserve(steps + 1);
  traj.y.resize(steps + 1, sys.n_out());
  if (store_states) traj.x.resize(steps + 1, sys.n());
  Vector x = x0;
  Vector u_prev = u(0.0);
  traj.t.push_back(0.0);
  traj.y.row(0) = (sys.c() * x).transpose();
  if (store_states) traj.x.row(0) = x.transpose();
  for (int k = 1; k <= steps; ++k) {
    const double t = horizon * double(k) / double(steps);
    const Vector u_next = u(t);
    x = lu->solve(Vector(rhs * x + 0.5 * h * (sys.b() * (u_prev + u_next))));
    if (!x.allFinite()) throw Error(ErrorKind::FactorizationFailure, "non-finite state in trapezoidal rule");
    u_prev = u_next;
    traj.t.push_back(t);
    traj.y.row(k) = (sys.c() * x).transpose();
    if (store_states) traj.x.row(k) = x.transpose();
  }
  traj.stats.steps = steps;
  traj.stats.stages = steps;
  return traj;
}

OutputError output_error(const Trajectory& a, const Trajectory& b, bool interpolate) {
  if (a.y.cols() != b.y.cols()) throw Error(ErrorKind::InvalidArgument, "output_error: output counts differ");
  if (a.t.empty() || b.t.empty()) throw Error(ErrorKind::InvalidArgument, "output_error: empty trajectory");
  OutputError out;
  out.per_output = Vector::Zero(a.y.cols());
  const double scale = std::max({1e-300, std::abs(a.t.back()), std::abs(b.t.back())});
  bool common = a.t.size() == b.t.size();
  for (std::size_t i = 0; common && i < a.t.size(); ++i) common = std::abs(a.t[i] - b.t[i]) <= 1e-12 * scale;

  auto accumulate = [&](const Eigen::RowVectorXd& diff) {
    const Vector d = diff.transpose().cwiseAbs();
    out.per_output = out.per_output.cwiseMax(d);
    if (d.size() > 0) out.max_abs = std::max(out.max_abs, d.maxCoeff());
    if (d.hasNaN()) out.max_abs = std::numeric_limits<double>::infinity();
  };
  if (common) {
    for (Index i = 0; i < a.y.rows(); ++i) accumulate(a.y.row(i) - b.y.row(i));
    return out;
  }
  if (!interpolate) throw Error(ErrorKind::GridMismatch, "output_error: trajectories use different time grids");
  const Trajectory& coarse = a.t.size() <= b.t.size() ? a : b;
  const Trajectory& fine = a.t.size() <= b.t.size() ? b : a;
  std::size_t j = 0;
  for (std::size_t i = 0; i < coarse.t.size(); ++i) {
    const double t = std::clamp(coarse.t[i], fine.t.front(), fine.t.back());
    while (j + 2 < fine.t.size() && fine.t[j + 1] < t) ++j;
    Eigen::RowVectorXd yf;
    if (fine.t.size() == 1) {
      yf = fine.y.row(0);
    } else {
      const double t0 = fine.t[j], t1 = fine.t[j + 1];
      const double w = t1 > t0 ? std::clamp((t - t0) / (t1 - t0), 0.0, 1.0) : 0.0;
      yf = (1.0 - w) * fine.y.row(Index(j)) + w * fine.y.row(Index(j + 1));
    }
    accumulate(coarse.y.row(Index(i)) - yf);
  }
  return out;
}

}  // namespace stabmor
