#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "osmoflow/energetics.hpp"
#include "osmoflow/geometry.hpp"
#include "osmoflow/stokes.hpp"
#include "osmoflow/transport.hpp"

namespace osmoflow {

enum class Mode {
  Full,           // flow + osmosis + diffusion
  Osmosis,        // resting solvent
  Impermeable,    // V_n = u.n, no solute flux through the membrane
  FastDiffusion,  // c uniform = M/|Omega|, with flow
  FastDiffusionNoFlow,
};

Mode mode_from_string(const std::string& name);
std::string mode_to_string(Mode m);
bool mode_has_flow(Mode m);
bool mode_has_transport(Mode m);  // false in the fast-diffusion limits

struct SimState {
  double t = 0.0;
  double kappa = 1.0;
  Mode mode = Mode::Full;
  PolarCurve curve;
  InteriorScalar xi;  // n_s x n_phi
};

struct EvolutionOptions {
  DerivScheme scheme = DerivScheme::Fd4;
  double dt_factor = 0.25;  // dt = dt_factor * min(h^2, h / max |V_n|)
  double r_floor = 1e-3;
  double cfl_factor = 1.0;
  double solvability_tol = 1e-8;
  double var_residual_floor = 1e-12;
};

// Everything evaluated on a state before stepping: geometry, the Stokes field
// (in the modes that have one) and the normal velocity of the law
// V_n = kappa H + c + u.n (terms dropped per mode).
struct Processes {
  DomainMap map;            // without mesh rate
  BoundaryScalar H, Lambda;
  Measures meas;
  std::optional<StokesSolution> stokes;
  InteriorVector velocity;  // zero field when the mode has no flow
  BoundaryScalar V_n;
  double max_Vn = 0.0;
};

Processes evaluate_processes(const SimState& state, const EvolutionOptions& opts = {});

// One row of the diagnostics series.
struct DiagnosticsRecord {
  double t = 0.0;
  double area = 0.0, perimeter = 0.0, mass = 0.0, energy = 0.0;
  double diss_solute = 0.0, diss_viscous = 0.0, diss_membrane = 0.0, diss_total = 0.0;
  double var_residual = 0.0;
  double min_c = 0.0, max_c = 0.0, min_r = 0.0;
  double dt_used = 0.0;
};

DiagnosticsRecord diagnostics_of(const SimState& state, const Processes& pr);

// |dE/dt + 2 Psi| / max(|dE/dt|, floor), discretized by differences of E and
// the trapezoid average of Psi over one step.
double variational_residual(double e_prev, double e_cur, double psi_prev, double psi_cur,
                            double dt, double floor = 1e-12);

struct StepResult {
  SimState state;
  double dt_used = 0.0;
};

// Operator-split step built on precomputed processes: curve update with the
// curvature term semi-implicit, then conservative transport on the moved
// geometry. dt_request <= 0 selects the automatic step, capped by dt_max.
StepResult advance(const SimState& state, const Processes& pr, double dt_request,
                   double dt_max, const EvolutionOptions& opts);

StepResult step_coupled(const SimState& state, double dt_request,
                        const EvolutionOptions& opts = {},
                        double dt_max = std::numeric_limits<double>::infinity());

struct RunParams {
  SimState initial;
  double t_final = 1.0;
  double dt = 0.0;  // <= 0: automatic
  EvolutionOptions options;
  // When continuing from a snapshot: the diagnostics row of the initial state
  // as originally emitted, so the residual history resumes without a seam.
  std::optional<DiagnosticsRecord> initial_record;
};

struct RunResult {
  std::vector<DiagnosticsRecord> records;  // one per state, initial included
  SimState final_state;
  bool completed = false;
  std::string error;
};

// Drives the step loop; on_record fires for every emitted record (including
// the initial one). Simulation failures are caught and reported in the result
// with the records accumulated so far.
RunResult run(const RunParams& params,
              const std::function<void(const SimState&, const DiagnosticsRecord&)>&
                  on_record = nullptr);

}  // namespace osmoflow
