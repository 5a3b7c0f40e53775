#include "fibreflow/simulation.hpp"

#include <cmath>
#include <sstream>

#include "fibreflow/errors.hpp"

namespace fibreflow {

namespace {

// Steps sit on the global lattice k dt so that output times which are
// multiples of dt are reached without accumulated drift.
class Clock {
 public:
  explicit Clock(double dt) : dt_(dt) {}

  double next(double t, double target) const {
    const double k = std::floor(t / dt_ + 1e-9);
    double t_next = (k + 1.0) * dt_;
    if (t_next > target - 1e-9 * dt_) t_next = target;
    return t_next;
  }

 private:
  double dt_;
};

// On failure `state` holds the last accepted step.
void advance_in_place(FieldState& state, double t_end, const StepperConfig& stepper,
                      const ModelParams& params) {
  const Clock clock(stepper.dt);
  while (state.t < t_end) {
    const double t_next = clock.next(state.t, t_end);
    state = step(state, t_next - state.t, stepper, params);
    state.t = t_next;
  }
}

}  // namespace

FieldState advance(FieldState state, double t_end, const StepperConfig& stepper,
                   const ModelParams& params) {
  advance_in_place(state, t_end, stepper, params);
  return state;
}

RunResult run(const RunConfig& config, const SampleCallback& on_sample) {
  config.validate();
  RunResult result;
  const std::vector<double> times = config.output_times();
  if (times.empty()) return result;

  const Grid grid = config.grid();
  FieldState state = initial_condition(grid, config.ic.h0, config.ic.amplitude, config.params);
  DiagnosticsAccumulator diagnostics(config.params);

  const auto record = [&](const FieldState& s) {
    result.trajectory.snapshots.push_back(s);
    const DiagnosticsSample& sample = diagnostics.add(s);
    if (on_sample) on_sample(s, sample);
  };

  try {
    for (double target : times) {
      advance_in_place(state, target, config.stepper, config.params);
      record(state);
    }
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << "at t = " << state.t << ": " << e.what();
    result.trajectory.failed = true;
    result.trajectory.failure = msg.str();
  }
  result.diagnostics = diagnostics.samples();
  return result;
}

}  // namespace fibreflow
