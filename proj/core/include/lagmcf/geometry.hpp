#pragma once

#include <array>
#include <span>
#include <utility>

#include "lagmcf/grid.hpp"
#include "lagmcf/symmat.hpp"

namespace lagmcf {

struct EigenDecomposition {
  int n = 0;
  /// Ascending eigenvalues.
  std::array<double, SymMat::kMaxN> values{};
  /// Dense row-major n x n matrix whose columns are the eigenvectors.
  std::array<double, SymMat::kMaxN * SymMat::kMaxN> vectors{};
  int sweeps = 0;
};

/// Closed form for n <= 2, cyclic Jacobi (off-diagonal norm <= 1e-14 relative
/// to the Frobenius norm, at most 50 sweeps) for n = 3, 4. Throws
/// std::runtime_error if Jacobi fails to converge.
EigenDecomposition sym_eigen(const SymMat& m);

/// Ascending eigenvalues only; first m.n() entries are meaningful.
std::array<double, SymMat::kMaxN> sym_eigenvalues(const SymMat& m);

/// Lagrangian angle: sum of arctan over the eigenvalues of the Hessian.
/// Range (-n pi/2, n pi/2).
double lagrangian_angle(const SymMat& hess);

/// The same angle from the complex determinant route,
///   Im log( det(I + i M) / sqrt(det(I + M^2)) ) = arg det(I + i M),
/// with det(I + i M) expanded by cofactors in complex arithmetic. Uses the
/// principal branch, so it agrees with lagrangian_angle whenever that lies
/// in (-pi, pi]: always for n <= 2, and for |lambda| < 1 when n <= 3.
double angle_via_logdet(const SymMat& hess);

/// Pointwise geometry of the Lagrangian graph (x, Du(x)).
///
/// Sign convention: h_ijk = -u_ijk, so H_i = g^jk h_ijk = -d_i theta.
struct GeometrySample {
  int n = 0;
  std::array<double, SymMat::kMaxN> lambda{};
  double theta = 0.0;
  SymMat g;      ///< induced metric delta_ij + u_ik u_kj
  SymMat g_inv;
  SymMat s;      ///< delta_ij - u_ik u_kj
  Sym3Tensor h;  ///< second fundamental form
  std::array<double, SymMat::kMaxN> H{};
  double normH2 = 0.0;  ///< g^ij H_i H_j
  double normA2 = 0.0;  ///< g^ip g^jq g^kr h_ijk h_pqr
};

GeometrySample graph_geometry(const SymMat& hess, const Sym3Tensor& third);

/// Inverse of a symmetric positive definite matrix (Cholesky).
SymMat spd_inverse(const SymMat& m);

/// g^ij S_ij; equals sum (1 - l^2)/(1 + l^2) over eigenvalues, at most n.
double metric_trace_of_s(const GeometrySample& sample);

/// Smallest eigenvalue of S - eps g = (1 - eps) I - (1 + eps) M^2.
double pinch_margin(const SymMat& hess, double eps);

/// eps at which pinch_margin changes sign for a given spectral radius r:
/// r^2 = (1 - eps) / (1 + eps).
double pinch_threshold(double spectral_radius);

/// (min over grid of lambda_min, max over grid of lambda_max).
std::pair<double, double> hessian_eig_extremes(const SymMatField& field);

}  // namespace lagmcf
