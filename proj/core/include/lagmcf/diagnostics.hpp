#pragma once

#include <vector>

namespace lagmcf {

/// Per-sample scalar summaries of a potential-flow state.
///
/// sup_D3u2 uses the flat Euclidean contraction sum_ijk u_ijk^2; sup_H2 is
/// the metric norm g^ij H_i H_j of the mean curvature form.
struct DiagnosticsRecord {
  double t = 0.0;
  double sup_H2 = 0.0;
  double sup_D3u2 = 0.0;
  double t_supH2 = 0.0;
  double t_supD3u2 = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  double osc_theta = 0.0;
  double sup_Du = 0.0;
  double pinch_min = 0.0;
};

using DiagnosticsSeries = std::vector<DiagnosticsRecord>;

}  // namespace lagmcf
