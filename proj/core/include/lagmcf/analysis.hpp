#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "lagmcf/diagnostics.hpp"
#include "lagmcf/flow.hpp"
#include "lagmcf/grid.hpp"
#include "lagmcf/initdata.hpp"
#include "lagmcf/potential.hpp"

namespace lagmcf {

/// Samples every diagnostic of one state. pinch_min uses the given eps.
DiagnosticsRecord diagnostics(const FlowState& state, double eps);

struct PreservationReport {
  bool pass = true;
  /// Largest max(eig_max, -eig_min) - (1 - delta) over the series.
  double worst_eig_excess = 0.0;
  double worst_pinch = 0.0;
  std::optional<double> first_violation_t;
  /// "hessian_bounds" or "pinching" for the first violation.
  std::string first_violation_check;
};

/// Eigenvalue extremes within +-(1 - delta) + tol and pinch_min >= -tol at
/// every sample. tol may be infinite.
PreservationReport preservation_report(const DiagnosticsSeries& series, double delta, double tol);

struct DecayReport {
  /// First sample with t >= t_min.
  double anchor_t = 0.0;
  double anchor_tH2 = 0.0;
  double anchor_tD3 = 0.0;
  /// Suprema over samples with t >= t_min.
  double max_tH2 = 0.0;
  double max_tD3 = 0.0;
  /// Final product <= anchor product.
  bool final_below_anchor_H2 = true;
  bool final_below_anchor_D3 = true;
};

/// Throws ValidationError if no sample reaches t_min.
DecayReport decay_report(const DiagnosticsSeries& series, double t_min);

struct MonotoneReport {
  bool pass = true;
  /// Largest (v[k] - v[k-1]) / (t[k] - t[k-1]) seen.
  double worst_rate = 0.0;
  std::optional<double> first_violation_t;
};

/// Checks that a column is non-increasing up to rate_tol per unit time.
MonotoneReport nonincreasing_report(const DiagnosticsSeries& series, double DiagnosticsRecord::*column,
                                    double rate_tol);

/// periodic: every node, wrapped stencils. interior: only nodes whose
/// stencils stay inside the cell (for data that is not periodic).
enum class StencilMode { periodic, interior };

/// Translating-soliton data: theta + a . Du - b . x = c.
struct SolitonSpec {
  std::array<double, kMaxDim> a{};
  std::array<double, kMaxDim> b{};
  double c = 0.0;
};

struct Residual {
  double sup = 0.0;
  std::size_t argmax = 0;
  std::size_t evaluated = 0;
};

/// sup |theta(D^2 u) - Theta|.
Residual special_lagrangian_residual(const ScalarField& u, double Theta, StencilMode mode = StencilMode::periodic);
Residual special_lagrangian_residual(const Potential& u, double Theta);

/// sup |theta + a . Du - b . x - c| with x on the unwrapped cell. With
/// a = b = 0 and c = Theta this is bitwise special_lagrangian_residual.
Residual soliton_residual(const ScalarField& u, const SolitonSpec& spec, StencilMode mode = StencilMode::periodic);
Residual soliton_residual(const Potential& u, const SolitonSpec& spec);

struct ConvergenceVerdict {
  bool pass = false;
  /// sup over nodes of the spectral norm of D^2 u - A.
  double sup_hess_dev = 0.0;
  /// Largest per-component oscillation of Du - A x.
  double osc_periodic_grad = 0.0;
};

ConvergenceVerdict convergence_check(const FlowState& state, const LiftDecomposition& lift, double tol);

/// CSV with header t,sup_H2,...,pinch_min and %.17g values.
void write_diagnostics_csv(std::ostream& os, const DiagnosticsSeries& series);
void write_diagnostics_csv(const std::string& path, const DiagnosticsSeries& series);

/// Columns are matched by name, extra columns ignored. FormatError on a
/// missing column or a malformed row; IoError if the file cannot be opened.
DiagnosticsSeries read_diagnostics_csv(std::istream& is);
DiagnosticsSeries read_diagnostics_csv(const std::string& path);

}  // namespace lagmcf
