#pragma once

#include <array>

#include "lagmcf/grid.hpp"
#include "lagmcf/symmat.hpp"

namespace lagmcf {

/// Scalar potential u(x) = 1/2 x^T A x + b . x + p(x) with p periodic.
///
/// Only p lives on the grid; the affine-gradient background (A, b) is kept
/// analytically. This is what makes quadratic data and lifts of torus maps
/// (Du = A x + periodic) representable on a periodic lattice. x is measured
/// on the unwrapped fundamental cell [origin, origin + extent).
class Potential {
 public:
  Potential() = default;
  explicit Potential(ScalarField periodic);
  Potential(ScalarField periodic, SymMat background_hessian, std::array<double, kMaxDim> background_slope = {});

  [[nodiscard]] const GridSpec& grid() const { return periodic_.grid(); }
  [[nodiscard]] const ScalarField& periodic() const { return periodic_; }
  [[nodiscard]] ScalarField& periodic() { return periodic_; }
  [[nodiscard]] const SymMat& background_hessian() const { return quad_; }
  [[nodiscard]] const std::array<double, kMaxDim>& background_slope() const { return slope_; }
  [[nodiscard]] bool has_background() const;

  /// Full Hessian at a node: A + stencil Hessian of p.
  [[nodiscard]] SymMat hessian_at(std::size_t p) const;
  [[nodiscard]] SymMatField hessian() const;
  /// Full gradient A x + b + Dp on the unwrapped cell.
  [[nodiscard]] VectorField gradient() const;
  /// Full values of u sampled on the unwrapped cell.
  [[nodiscard]] ScalarField sampled() const;

 private:
  ScalarField periodic_;
  SymMat quad_;
  std::array<double, kMaxDim> slope_{};
};

}  // namespace lagmcf
