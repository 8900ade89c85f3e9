#ifndef STABMOR_ANALYSIS_HPP
#define STABMOR_ANALYSIS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stabmor/config.hpp"
#include "stabmor/dynsys.hpp"
#include "stabmor/nonlinear.hpp"
#include "stabmor/projection.hpp"

namespace stabmor {

// Worker count for concurrent sweeps: STABMOR_THREADS if set to a positive
// integer, else the hardware concurrency (at least 1).
int worker_count();

// Runs body(i) for i in [0, count) on up to worker_count() threads. The first
// exception thrown by any body is rethrown after all workers finish.
void parallel_for(Index count, const std::function<void(Index)>& body);

// ---------------------------------------------------------------- frequency

// Quadrature samples of ||H(i omega)||_F^2 (or of an error transfer function).
struct FrequencyGrid {
  std::vector<double> omega;  // 0 followed by a strictly increasing log grid
  std::vector<double> value;
  double omega_min = 0.0;     // first positive sample
  double omega_max = 0.0;     // last sample
};

struct FrequencyResponse {
  std::vector<double> omega;
  std::vector<ComplexMatrix> h;
};

struct H2Options {
  int points = 2000;                  // log-spaced samples in [omega_min, omega_max]
  std::optional<double> omega_min;    // default 1e-3 * smallest pole magnitude
  std::optional<double> omega_max;    // default 1e3 * largest pole magnitude
  bool check_stability = true;        // dense abscissa check for n <= dense cap
};

struct H2Result {
  double value = 0.0;
  double half_resolution = 0.0;  // same rule on every other sample
  double omega_min = 0.0;
  double omega_max = 0.0;
  int points = 0;
  double refinement_delta() const { return std::abs(value - half_resolution); }
};

// Pole magnitude range of (E, A): dense eigenvalues for small n, power and
// inverse power iteration otherwise (a scale estimate only).
std::pair<double, double> pole_magnitude_range(const LinearSystem& sys,
                                               const Tolerances& tol = default_tolerances());

// Frequencies 0, then options.points log-spaced samples; the range comes from
// the options or from the poles of `systems`. Values are left empty.
FrequencyGrid h2_grid(const std::vector<const LinearSystem*>& systems, const H2Options& options = {},
                      const Tolerances& tol = default_tolerances());

// H(i omega) on the given frequencies, evaluated concurrently.
FrequencyResponse sample_response(const TransferFunction& tf, const std::vector<double>& omega);

// Trapezoidal rule on [0, omega_max] (conjugate symmetry) plus the tail
// omega_max * value(omega_max) of a 1/omega^2 decay; returns the square root
// of the integral over pi.
H2Result h2_quadrature(const FrequencyGrid& integrand);

// ||H||_H2 and ||H_a - H_b||_H2. Operands with n <= dense cap must be
// asymptotically stable; larger ones are assumed so.
H2Result h2_norm(const TransferFunction& tf, const H2Options& options = {},
                 const Tolerances& tol = default_tolerances());
H2Result h2_error(const TransferFunction& a, const TransferFunction& b, const H2Options& options = {},
                  const Tolerances& tol = default_tolerances());
// Same from responses sampled on one grid (from h2_grid).
H2Result h2_error(const FrequencyResponse& a, const FrequencyResponse& b);

// Log-spaced samples of H(i omega); phase unwrapped along the grid per entry.
struct BodePoint {
  double omega = 0.0;
  bool pole = false;            // evaluation failed; magnitudes and phases are NaN
  std::vector<double> mag_db;   // row-major over (output, input)
  std::vector<double> phase_deg;
};
std::vector<BodePoint> bode_data(const TransferFunction& tf, double omega_min, double omega_max, int points);

// ---------------------------------------------------------------- time domain

using InputSignal = std::function<Vector(double)>;

InputSignal zero_input(Index n_in);
InputSignal step_input(Index n_in, double amplitude = 1.0);
// amplitude * sin(2 pi t / period) on every input channel.
InputSignal sine_input(Index n_in, double period, double amplitude = 1.0);

// ||u||_L2 on [0, horizon] by composite Simpson quadrature; signals are
// truncated at the horizon.
double input_l2_norm(const InputSignal& u, double horizon, int intervals = 20000);

// x' = rate(t, x, u(t)), y = output(x); mass matrices already solved for.
struct Dynamics {
  Index n = 0;
  Index n_in = 0;
  Index n_out = 0;
  std::function<Vector(const Vector& x, const Vector& u)> rate;
  std::function<Vector(const Vector& x)> output;
};

Dynamics linear_dynamics(const LinearSystem& sys);
Dynamics linear_dynamics(const ReducedSystem& rom);
Dynamics nonlinear_dynamics(const NonlinearSystem& sys);
Dynamics nonlinear_dynamics(const NonlinearROM& rom);

struct IntegratorStats {
  long steps = 0;
  long rejected = 0;
  long stages = 0;  // right-hand side evaluations
};

struct Trajectory {
  std::vector<double> t;
  Matrix y;          // one row per time point
  Matrix x;          // one row per time point when states are stored, else empty
  Matrix snapshots;  // n x s harvested states (accepted steps with their stages)
  IntegratorStats stats;
};

struct AdaptiveOptions {
  double rtol = 1e-6;
  double atol = 1e-9;
  std::optional<double> initial_step;
  std::optional<double> fixed_step;  // constant steps, no error control
  long max_steps = 10'000'000;
  bool harvest = false;
  bool store_states = false;
  // When non-empty (increasing, within [0, horizon]) samples are taken at
  // these times by cubic Hermite interpolation instead of at every step.
  std::vector<double> output_times;
};

// Dormand-Prince 5(4) with PI step control; the 5th order solution is
// propagated.
Trajectory integrate_adaptive(const Dynamics& dyn, const InputSignal& u, const Vector& x0, double horizon,
                              const AdaptiveOptions& options = {});

// Fixed-step trapezoidal rule for E x' = A x + B u with one factorization of
// E - h/2 A reused for all steps.
Trajectory integrate_trapezoidal(const LinearSystem& sys, const InputSignal& u, const Vector& x0,
                                 double horizon, int steps, bool store_states = false);

struct OutputError {
  double max_abs = 0.0;   // max over samples of ||y_a - y_b||_inf
  Vector per_output;      // max over samples per output channel
};

// Compares on a common grid; otherwise linearly interpolates the finer
// trajectory onto the coarser grid, or throws GridMismatch when interpolation
// is disabled.
OutputError output_error(const Trajectory& a, const Trajectory& b, bool interpolate = true);

}  // namespace stabmor

#endif  // STABMOR_ANALYSIS_HPP
