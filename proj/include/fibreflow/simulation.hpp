#pragma once

#include <functional>
#include <vector>

#include "fibreflow/config.hpp"
#include "fibreflow/diagnostics.hpp"
#include "fibreflow/pde.hpp"

namespace fibreflow {

struct RunResult {
  Trajectory trajectory;
  std::vector<DiagnosticsSample> diagnostics;
};

using SampleCallback = std::function<void(const FieldState&, const DiagnosticsSample&)>;

/// Integrates from the configured initial data, landing exactly on every
/// output time (the last step before an output time is shortened). Solver
/// errors end the run early with trajectory.failed set; `on_sample` sees each
/// snapshot as soon as it is computed.
RunResult run(const RunConfig& config, const SampleCallback& on_sample = {});

/// Advances `state` to time `t_end` with steps of at most dt, using the same
/// step grid as run(). Throws on solver failure.
FieldState advance(FieldState state, double t_end, const StepperConfig& stepper,
                   const ModelParams& params);

}  // namespace fibreflow
