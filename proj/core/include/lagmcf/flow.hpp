#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lagmcf/diagnostics.hpp"
#include "lagmcf/grid.hpp"
#include "lagmcf/potential.hpp"

namespace lagmcf {

enum class Scheme { euler, rk2 };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme s);

struct FlowState {
  Potential u;
  double t = 0.0;
  std::int64_t step_count = 0;
};

/// m periodic components f^a sharing one grid.
struct VectorFlowState {
  std::vector<ScalarField> f;
  double t = 0.0;
  std::int64_t step_count = 0;
};

struct StepControl {
  double sigma = 0.5;  ///< CFL safety factor in (0, 1]
  Scheme scheme = Scheme::rk2;
  double t_end = 0.0;
  int sample_every = 100;
  /// Extra times the integrator lands on exactly and samples.
  std::vector<double> sample_times;
  /// Abort when osc(theta) exceeds this multiple of its initial value.
  double osc_alarm_factor = 2.0;
};

/// Throws ValidationError naming the offending field.
void validate(const StepControl& control);

/// sigma * min_d h_d^2 / (2 n).
double cfl_dt(const GridSpec& grid, double sigma);

/// Lagrangian angle of the full Hessian at every node.
ScalarField angle_field(const Potential& u);

/// One explicit step of du/dt = theta(D^2 u).
///
/// euler: u + dt theta(u). rk2: Heun / SSP form, 1/2 u + 1/2 E(E(u)) with E
/// the Euler map; it is second order and, being a convex combination of
/// Euler steps, inherits their discrete maximum principle. Throws
/// ValidationError if dt exceeds the sigma = 1 CFL bound and BlowupError
/// if a non-finite value appears.
FlowState potential_step(const FlowState& state, double dt, Scheme scheme = Scheme::euler);

/// One explicit step of df^a/dt = g^ij(f) f^a_ij with g_ij = delta_ij + sum_a f^a_i f^a_j.
VectorFlowState vector_step(const VectorFlowState& state, double dt, Scheme scheme = Scheme::euler);

struct RunResult {
  FlowState final_state;
  DiagnosticsSeries series;
  bool aborted = false;
  std::string error;
  std::optional<std::size_t> error_index;
};

/// Integrates to control.t_end, sampling diagnostics (with pinching
/// parameter eps) at t = 0, every sample_every steps, at each of
/// control.sample_times and at t_end. t_end = 0 returns the input and an
/// empty series. A blowup stops the run and returns the partial series
/// with aborted = true. on_stop, if set, sees the state at every
/// sample_times entry reached and at t_end.
RunResult run(FlowState state, const StepControl& control, double eps,
              const std::function<void(const FlowState&)>& on_stop = {});

/// Same driver for the vector flow; no diagnostics.
VectorFlowState run_vector(VectorFlowState state, const StepControl& control);

}  // namespace lagmcf
