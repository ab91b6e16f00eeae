#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lagmcf/symmat.hpp"

namespace lagmcf {

inline constexpr int kMaxDim = 3;

/// Periodic rectangular lattice on a torus of dimension 1..3.
///
/// Points per axis are even and at least 8. Spacing is extent / npts, so the
/// point at index npts would coincide with index 0. Flat indices are
/// row-major with the last axis fastest.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(std::span<const std::size_t> npts, std::span<const double> spacing,
           std::span<const double> origin);

  /// Grid covering [origin, origin + extent) on every axis.
  static GridSpec periodic(std::span<const std::size_t> npts, std::span<const double> extent,
                           std::span<const double> origin = {});
  /// Hypercube helper: the same npts/extent/origin on every axis.
  static GridSpec cube(int ndim, std::size_t npts, double extent, double origin = 0.0);

  [[nodiscard]] int ndim() const { return ndim_; }
  [[nodiscard]] std::size_t npts(int d) const { return npts_[static_cast<std::size_t>(d)]; }
  [[nodiscard]] double spacing(int d) const { return spacing_[static_cast<std::size_t>(d)]; }
  [[nodiscard]] double origin(int d) const { return origin_[static_cast<std::size_t>(d)]; }
  [[nodiscard]] double extent(int d) const {
    return static_cast<double>(npts(d)) * spacing(d);
  }
  [[nodiscard]] std::size_t stride(int d) const { return stride_[static_cast<std::size_t>(d)]; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] double min_spacing() const;

  /// Node coordinate on the unwrapped fundamental cell.
  [[nodiscard]] double coord(int d, std::size_t i) const {
    return origin(d) + static_cast<double>(i) * spacing(d);
  }
  [[nodiscard]] std::array<std::size_t, kMaxDim> unravel(std::size_t flat) const;
  [[nodiscard]] std::size_t ravel(const std::array<std::size_t, kMaxDim>& idx) const;
  /// Flat index of a possibly out-of-range multi-index, wrapped modulo npts.
  [[nodiscard]] std::size_t wrapped(const std::array<long, kMaxDim>& idx) const;
  /// Coordinates of a flat index on the unwrapped fundamental cell.
  [[nodiscard]] std::array<double, kMaxDim> point(std::size_t flat) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b);

 private:
  int ndim_ = 0;
  std::array<std::size_t, kMaxDim> npts_{1, 1, 1};
  std::array<double, kMaxDim> spacing_{1.0, 1.0, 1.0};
  std::array<double, kMaxDim> origin_{};
  std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
  std::size_t size_ = 0;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridSpec grid, double fill = 0.0);
  ScalarField(GridSpec grid, std::vector<double> values);

  [[nodiscard]] const GridSpec& grid() const { return grid_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  double operator[](std::size_t p) const { return values_[p]; }
  double& operator[](std::size_t p) { return values_[p]; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> values() { return values_; }

  /// Index of the first non-finite value, or size() if all are finite.
  [[nodiscard]] std::size_t first_nonfinite() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// ncomp reals per grid point, point-major.
class VectorField {
 public:
  VectorField() = default;
  VectorField(GridSpec grid, int ncomp);

  [[nodiscard]] const GridSpec& grid() const { return grid_; }
  [[nodiscard]] int ncomp() const { return ncomp_; }
  double operator()(std::size_t p, int c) const { return data_[p * static_cast<std::size_t>(ncomp_) + static_cast<std::size_t>(c)]; }
  double& operator()(std::size_t p, int c) { return data_[p * static_cast<std::size_t>(ncomp_) + static_cast<std::size_t>(c)]; }
  [[nodiscard]] std::span<const double> data() const { return data_; }

  [[nodiscard]] ScalarField component(int c) const;

 private:
  GridSpec grid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

/// Packed symmetric ndim x ndim matrix per grid point.
class SymMatField {
 public:
  SymMatField() = default;
  explicit SymMatField(GridSpec grid);

  [[nodiscard]] const GridSpec& grid() const { return grid_; }
  [[nodiscard]] int ncomp() const { return SymMat::packed_size(grid_.ndim()); }
  [[nodiscard]] SymMat at(std::size_t p) const;
  void set(std::size_t p, const SymMat& m);
  double operator()(std::size_t p, int i, int j) const {
    return data_[p * static_cast<std::size_t>(ncomp()) +
                 static_cast<std::size_t>(SymMat::packed_index(grid_.ndim(), i, j))];
  }
  [[nodiscard]] std::span<const double> data() const { return data_; }

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

/// Fully symmetric rank-3 tensor per grid point.
class Rank3Field {
 public:
  Rank3Field() = default;
  explicit Rank3Field(GridSpec grid);

  [[nodiscard]] const GridSpec& grid() const { return grid_; }
  [[nodiscard]] int ncomp() const { return Sym3Tensor::packed_size(grid_.ndim()); }
  [[nodiscard]] Sym3Tensor at(std::size_t p) const;
  void set(std::size_t p, const Sym3Tensor& t);
  [[nodiscard]] std::span<const double> data() const { return data_; }

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

/// Centered second-order first derivatives, periodic wrap.
VectorField gradient(const ScalarField& f);

/// Centered second-order Hessian: three-point diagonal stencil and the
/// four-point cross stencil off the diagonal. Symmetric by storage.
SymMatField hessian(const ScalarField& f);

struct ThirdDerivatives {
  Rank3Field field;
  /// Largest |D_a H_bc - symmetrized value| seen before averaging.
  double max_asymmetry = 0.0;
};

/// Centered difference of the Hessian field along each axis, averaged over
/// the three ways of choosing the differentiated index.
ThirdDerivatives third_derivatives(const ScalarField& f);

/// Hessian at a single node; bitwise identical to hessian(f).at(p).
SymMat hessian_at(const ScalarField& f, std::size_t p);

/// Hessian at node p using only non-wrapping stencils. Returns false when
/// the stencil would leave the fundamental cell.
bool interior_hessian_at(const ScalarField& f, std::size_t p, SymMat& out);

/// Centered gradient at node p without wrap; false near the cell boundary.
bool interior_gradient_at(const ScalarField& f, std::size_t p, std::span<double> out);

}  // namespace lagmcf
