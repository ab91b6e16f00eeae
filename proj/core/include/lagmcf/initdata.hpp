#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lagmcf/grid.hpp"
#include "lagmcf/potential.hpp"
#include "lagmcf/symmat.hpp"

namespace lagmcf {

enum class PresetKind { quadratic, cosine, product_sine, sawtooth_c11, random_bandlimited };

PresetKind parse_preset_kind(std::string_view name);
std::string_view to_string(PresetKind kind);

/// Named initial potential plus its parameters. Unused fields are ignored.
///
///   quadratic           u = 1/2 x^T A x (A = matrix, dense row-major n*n)
///   cosine              u = a sum_d cos(k_d x_d)
///   product_sine        u = a prod_d sin(k_d x_d)
///   sawtooth_c11        sum_d s(x_d), s'' = +level on the first half of each
///                       period and -level on the second (C^{1,1}, Hessian a
///                       square wave with essential range [-level, level])
///   random_bandlimited  random Fourier modes with |k|_inf <= modes
///
/// Wavenumbers are k_d = 2 pi frequency / extent_d, so every periodic preset
/// is periodic on the grid cell.
struct Preset {
  PresetKind kind = PresetKind::cosine;
  double amplitude = 0.0;
  std::vector<double> matrix;
  int frequency = 1;
  double level = 0.9;
  std::uint64_t seed = 1;
  int modes = 3;
  /// If > 0, presets whose Hessian range exceeds it are rejected;
  /// random_bandlimited with amplitude <= 0 is instead scaled to hit it.
  double hessian_clamp = 0.0;
};

/// Value and derivatives of an analytic potential at one point.
struct Jet {
  double value = 0.0;
  std::array<double, kMaxDim> grad{};
  SymMat hess;
  Sym3Tensor third;
};

/// Closed-form evaluation of a preset on a given cell. Coordinates are
/// absolute; periodic presets are periodic with the cell's extent.
class AnalyticPreset {
 public:
  AnalyticPreset(const Preset& preset, const GridSpec& grid);

  [[nodiscard]] Jet eval(const std::array<double, kMaxDim>& x) const;
  [[nodiscard]] int ndim() const { return ndim_; }
  [[nodiscard]] PresetKind kind() const { return kind_; }
  /// Documented essential range of the Hessian eigenvalues. Exact for
  /// quadratic, cosine, sawtooth and product_sine with n <= 2; a Gershgorin
  /// bound for product_sine in 3D; measured on a 4x refined lattice for
  /// random_bandlimited.
  [[nodiscard]] std::pair<double, double> hessian_range() const { return range_; }

 private:
  struct Mode {
    std::array<double, kMaxDim> k{};
    double c = 0.0;
    double s = 0.0;
  };

  PresetKind kind_;
  int ndim_;
  double amplitude_ = 0.0;
  double level_ = 0.0;
  SymMat quad_;
  std::array<double, kMaxDim> wave_{};
  std::array<double, kMaxDim> origin_{};
  std::array<double, kMaxDim> period_{};
  std::vector<Mode> modes_;
  std::pair<double, double> range_{0.0, 0.0};

  [[nodiscard]] double measured_spectral_radius(const GridSpec& grid) const;
};

/// Samples the preset on the grid. Quadratic presets become a pure
/// background (zero periodic part).
Potential make_preset(const Preset& preset, const GridSpec& grid);

struct MollifyInfo {
  double tau_requested = 0.0;
  double tau_used = 0.0;
  /// Kernel width sqrt(2 tau) fell below 2h on some axis and was raised.
  bool clamped = false;
};

/// Convolution with the periodized Gaussian of variance 2 tau per axis
/// (the heat kernel at time tau), truncated at 8 standard deviations and
/// renormalized to unit mass.
ScalarField mollify(const ScalarField& u0, double tau, MollifyInfo* info = nullptr);

struct MollifierStep {
  double k = 0.0;
  double tau = 0.0;
  double sup_err_u = 0.0;
  double sup_err_du = 0.0;
};

struct MollifierSequence {
  std::vector<ScalarField> fields;
  std::vector<MollifierStep> steps;
  /// Both error columns non-increasing in k.
  bool monotone = true;
};

/// u0^k = mollify(u0, 1/k) for increasing k, with C^0 and C^1 errors.
MollifierSequence mollifier_sequence(const ScalarField& u0, std::span<const double> k_list);

struct Snapshot {
  double t = 0.0;
  ScalarField u;
};

struct RescaleOptions {
  double lambda = 1.0;
  std::array<double, kMaxDim> x0{};
  double t0 = 0.0;
  /// Output points per axis; 0 means half the source count.
  std::size_t out_npts = 0;
  /// Output spacing in y; 0 means lambda * h, which maps every output node
  /// onto a source node. Any other value samples off-lattice with
  /// Catmull-Rom (third order) interpolation.
  double out_spacing = 0.0;
};

/// Parabolic rescaling at (x0, t0):
///   y = lambda (x - x0),  s = lambda^2 (t - t0),
///   u_l(y, s) = lambda^2 (u(x, t) - u(x0, t0) - Du(x0, t0) . (x - x0)).
/// Output grids are centred so that y = 0 is a node. Snapshots must satisfy
/// t <= t0 and one must sit at t0. Throws ValidationError if x0 is not a
/// node or the sampled window leaves the source cell (no periodic wrap).
std::vector<Snapshot> parabolic_rescale(std::span<const Snapshot> snapshots, const RescaleOptions& options);

/// Analytic counterpart of parabolic_rescale for a static closed-form
/// potential: D^l_y u_l(y) = lambda^(2-l) D^l_x u(x) for l >= 2.
class RescaledAnalytic {
 public:
  RescaledAnalytic(AnalyticPreset base, double lambda, const std::array<double, kMaxDim>& x0);
  [[nodiscard]] Jet eval(const std::array<double, kMaxDim>& y) const;

 private:
  AnalyticPreset base_;
  double lambda_;
  std::array<double, kMaxDim> x0_;
  Jet at_x0_;
};

/// Du = A x + mean_offset + periodic_part with A integer-valued.
struct LiftDecomposition {
  int n = 0;
  /// Dense row-major n x n.
  std::vector<double> A;
  VectorField periodic_part;
  std::array<double, kMaxDim> mean_offset{};
};

/// Recovers the winding matrix of a sampled gradient on the torus. Throws
/// ValidationError ("not a lift") if a winding entry is more than 0.1 away
/// from an integer.
LiftDecomposition lift_decompose(const VectorField& du);

/// The decomposition implied by a potential's analytic background; A need
/// not be integer here (quadratic data is not a torus lift).
LiftDecomposition lift_from_background(const Potential& u);

}  // namespace lagmcf
