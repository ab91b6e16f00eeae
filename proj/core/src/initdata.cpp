#include "lagmcf/initdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "kernels.hpp"
#include "lagmcf/errors.hpp"
#include "lagmcf/geometry.hpp"

namespace lagmcf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// d^m/dz^m of sin(k z) and cos(k z).
double sin_deriv(int m, double k, double z) {
  const double km = std::pow(k, m);
  switch (m % 4) {
    case 0: return km * std::sin(k * z);
    case 1: return km * std::cos(k * z);
    case 2: return -km * std::sin(k * z);
    default: return -km * std::cos(k * z);
  }
}

double cos_deriv(int m, double k, double z) {
  const double km = std::pow(k, m);
  switch (m % 4) {
    case 0: return km * std::cos(k * z);
    case 1: return -km * std::sin(k * z);
    case 2: return -km * std::cos(k * z);
    default: return km * std::sin(k * z);
  }
}

// m-th derivative of c cos(phi) + s sin(phi) with respect to phi.
double phase_deriv(int m, double c, double s, double phi) {
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  switch (m % 4) {
    case 0: return c * cp + s * sp;
    case 1: return -c * sp + s * cp;
    case 2: return -c * cp - s * sp;
    default: return c * sp - s * cp;
  }
}

// Evaluates every derivative of order 0..3 of a potential given a callback
// deriv(orders) returning the mixed partial with orders[d] derivatives along d.
template <class Deriv>
Jet jet_from_partials(int n, Deriv&& deriv) {
  Jet j;
  j.hess = SymMat(n);
  j.third = Sym3Tensor(n);
  std::array<int, kMaxDim> ord{};
  j.value = deriv(ord);
  for (int a = 0; a < n; ++a) {
    ord = {};
    ord[static_cast<std::size_t>(a)] += 1;
    j.grad[static_cast<std::size_t>(a)] = deriv(ord);
    for (int b = a; b < n; ++b) {
      ord = {};
      ord[static_cast<std::size_t>(a)] += 1;
      ord[static_cast<std::size_t>(b)] += 1;
      j.hess(a, b) = deriv(ord);
      for (int c = b; c < n; ++c) {
        ord = {};
        ord[static_cast<std::size_t>(a)] += 1;
        ord[static_cast<std::size_t>(b)] += 1;
        ord[static_cast<std::size_t>(c)] += 1;
        j.third(a, b, c) = deriv(ord);
      }
    }
  }
  return j;
}

void check_range(const std::pair<double, double>& range, double clamp) {
  if (clamp > 0.0 && (range.second > clamp || range.first < -clamp)) {
    throw ValidationError("preset.hessian_clamp: Hessian range [" + std::to_string(range.first) + ", " +
                          std::to_string(range.second) + "] exceeds clamp " + std::to_string(clamp) +
                          " for the requested amplitude");
  }
}

}  // namespace

PresetKind parse_preset_kind(std::string_view name) {
  if (name == "quadratic") return PresetKind::quadratic;
  if (name == "cosine") return PresetKind::cosine;
  if (name == "product_sine") return PresetKind::product_sine;
  if (name == "sawtooth_c11") return PresetKind::sawtooth_c11;
  if (name == "random_bandlimited") return PresetKind::random_bandlimited;
  throw ValidationError("preset.name: unknown preset '" + std::string(name) + "'");
}

std::string_view to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::quadratic: return "quadratic";
    case PresetKind::cosine: return "cosine";
    case PresetKind::product_sine: return "product_sine";
    case PresetKind::sawtooth_c11: return "sawtooth_c11";
    case PresetKind::random_bandlimited: return "random_bandlimited";
  }
  return "unknown";
}

AnalyticPreset::AnalyticPreset(const Preset& p, const GridSpec& grid)
    : kind_(p.kind), ndim_(grid.ndim()), amplitude_(p.amplitude), level_(p.level), quad_(grid.ndim()) {
  const int n = ndim_;
  if (p.frequency < 1) throw ValidationError("preset.frequency: must be >= 1");
  for (int d = 0; d < n; ++d) {
    const auto du = static_cast<std::size_t>(d);
    period_[du] = grid.extent(d) / p.frequency;
    wave_[du] = kTwoPi * p.frequency / grid.extent(d);
    origin_[du] = grid.origin(d);
  }
  if (!std::isfinite(p.amplitude)) throw ValidationError("preset.amplitude: must be finite");

  switch (kind_) {
    case PresetKind::quadratic: {
      if (p.matrix.empty()) {
        quad_ = SymMat(n);
      } else {
        if (p.matrix.size() != static_cast<std::size_t>(n * n)) {
          throw ValidationError("preset.matrix: expected " + std::to_string(n * n) + " entries");
        }
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (p.matrix[static_cast<std::size_t>(i * n + j)] != p.matrix[static_cast<std::size_t>(j * n + i)]) {
              throw ValidationError("preset.matrix: must be symmetric");
            }
        quad_ = SymMat::from_dense(n, p.matrix);
      }
      const auto ev = sym_eigenvalues(quad_);
      range_ = {ev[0], ev[static_cast<std::size_t>(n - 1)]};
      break;
    }
    case PresetKind::cosine: {
      double kmax2 = 0.0;
      for (int d = 0; d < n; ++d) kmax2 = std::max(kmax2, wave_[static_cast<std::size_t>(d)] * wave_[static_cast<std::size_t>(d)]);
      const double r = std::abs(amplitude_) * kmax2;
      range_ = {-r, r};
      break;
    }
    case PresetKind::product_sine: {
      bool equal = true;
      for (int d = 1; d < n; ++d) equal = equal && wave_[static_cast<std::size_t>(d)] == wave_[0];
      double r = 0.0;
      if (n <= 2 && equal) {
        r = std::abs(amplitude_) * wave_[0] * wave_[0];
      } else {
        for (int i = 0; i < n; ++i) {
          double row = 0.0;
          for (int j = 0; j < n; ++j) row += wave_[static_cast<std::size_t>(i)] * wave_[static_cast<std::size_t>(j)];
          r = std::max(r, std::abs(amplitude_) * row);
        }
      }
      range_ = {-r, r};
      break;
    }
    case PresetKind::sawtooth_c11: {
      if (!(level_ >= 0.0) || !std::isfinite(level_)) throw ValidationError("preset.level: must be finite and >= 0");
      range_ = {-level_, level_};
      break;
    }
    case PresetKind::random_bandlimited: {
      if (p.modes < 1) throw ValidationError("preset.modes: must be >= 1");
      std::mt19937_64 rng(p.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      const int K = p.modes;
      std::array<int, kMaxDim> lo{0, 0, 0};
      std::array<int, kMaxDim> hi{0, 0, 0};
      for (int d = 0; d < n; ++d) {
        lo[static_cast<std::size_t>(d)] = -K;
        hi[static_cast<std::size_t>(d)] = K;
      }
      for (int a = lo[0]; a <= hi[0]; ++a)
        for (int b = lo[1]; b <= hi[1]; ++b)
          for (int c = lo[2]; c <= hi[2]; ++c) {
            const std::array<int, kMaxDim> k{a, b, c};
            // one representative per +-k pair
            int first = 0;
            for (int v : k)
              if (v != 0) {
                first = v;
                break;
              }
            if (first <= 0) continue;
            Mode m;
            double k2 = 0.0;
            for (int d = 0; d < n; ++d) {
              const auto du = static_cast<std::size_t>(d);
              m.k[du] = wave_[du] * k[du];
              k2 += static_cast<double>(k[du] * k[du]);
            }
            m.c = normal(rng) / k2;
            m.s = normal(rng) / k2;
            modes_.push_back(m);
          }
      amplitude_ = 1.0;
      if (p.amplitude > 0.0) {
        double sup = 0.0;
        for (std::size_t q = 0; q < grid.size(); ++q) sup = std::max(sup, std::abs(eval(grid.point(q)).value));
        amplitude_ = p.amplitude / sup;
        const double r = measured_spectral_radius(grid);
        range_ = {-r, r};
        check_range(range_, p.hessian_clamp);
      } else {
        if (!(p.hessian_clamp > 0.0)) {
          throw ValidationError("preset: random_bandlimited needs amplitude > 0 or hessian_clamp > 0");
        }
        amplitude_ = p.hessian_clamp / measured_spectral_radius(grid);
        range_ = {-p.hessian_clamp, p.hessian_clamp};
      }
      return;
    }
  }
  check_range(range_, p.hessian_clamp);
}

double AnalyticPreset::measured_spectral_radius(const GridSpec& grid) const {
  std::array<std::size_t, kMaxDim> fine{};
  for (int d = 0; d < ndim_; ++d) fine[static_cast<std::size_t>(d)] = grid.npts(d) * 4;
  std::array<double, kMaxDim> ext{};
  std::array<double, kMaxDim> org{};
  for (int d = 0; d < ndim_; ++d) {
    ext[static_cast<std::size_t>(d)] = grid.extent(d);
    org[static_cast<std::size_t>(d)] = grid.origin(d);
  }
  const auto nd = static_cast<std::size_t>(ndim_);
  const GridSpec g = GridSpec::periodic({fine.data(), nd}, {ext.data(), nd}, {org.data(), nd});
  return detail::parallel_max(g.size(), [&](std::size_t q) {
    const auto ev = sym_eigenvalues(eval(g.point(q)).hess);
    return std::max(std::abs(ev[0]), std::abs(ev[nd - 1]));
  });
}

Jet AnalyticPreset::eval(const std::array<double, kMaxDim>& x) const {
  const int n = ndim_;
  switch (kind_) {
    case PresetKind::quadratic: {
      Jet j;
      j.hess = quad_;
      j.third = Sym3Tensor(n);
      for (int i = 0; i < n; ++i) {
        double ax = 0.0;
        for (int k = 0; k < n; ++k) ax += quad_(i, k) * x[static_cast<std::size_t>(k)];
        j.grad[static_cast<std::size_t>(i)] = ax;
        j.value += 0.5 * x[static_cast<std::size_t>(i)] * ax;
      }
      return j;
    }
    case PresetKind::cosine:
      return jet_from_partials(n, [&](const std::array<int, kMaxDim>& ord) {
        int axis = -1;
        int total = 0;
        for (int d = 0; d < n; ++d)
          if (ord[static_cast<std::size_t>(d)] > 0) {
            axis = (axis == -1) ? d : -2;
            total += ord[static_cast<std::size_t>(d)];
          }
        if (axis == -2) return 0.0;  // mixed partials of a separable sum
        if (axis == -1) {
          double s = 0.0;
          for (int d = 0; d < n; ++d) s += std::cos(wave_[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)]);
          return amplitude_ * s;
        }
        const auto du = static_cast<std::size_t>(axis);
        return amplitude_ * cos_deriv(total, wave_[du], x[du]);
      });
    case PresetKind::product_sine:
      return jet_from_partials(n, [&](const std::array<int, kMaxDim>& ord) {
        double v = amplitude_;
        for (int d = 0; d < n; ++d) {
          const auto du = static_cast<std::size_t>(d);
          v *= sin_deriv(ord[du], wave_[du], x[du]);
        }
        return v;
      });
    case PresetKind::sawtooth_c11:
      return jet_from_partials(n, [&](const std::array<int, kMaxDim>& ord) {
        auto axis_part = [&](int d, int m) {
          const auto du = static_cast<std::size_t>(d);
          const double L = period_[du];
          const double P = 0.5 * L;
          double xi = std::fmod(x[du] - origin_[du], L);
          if (xi < 0.0) xi += L;
          const bool first = xi < P;
          const double z = first ? xi : L - xi;
          const double sign = first ? 1.0 : -1.0;
          switch (m) {
            case 0: return sign * 0.5 * level_ * (z * z - P * z);
            case 1: return level_ * (z - 0.5 * P);
            case 2: return sign * level_;
            default: return 0.0;
          }
        };
        int axis = -1;
        int total = 0;
        for (int d = 0; d < n; ++d)
          if (ord[static_cast<std::size_t>(d)] > 0) {
            axis = (axis == -1) ? d : -2;
            total += ord[static_cast<std::size_t>(d)];
          }
        if (axis == -2) return 0.0;
        if (axis == -1) {
          double s = 0.0;
          for (int d = 0; d < n; ++d) s += axis_part(d, 0);
          return s;
        }
        return axis_part(axis, total);
      });
    case PresetKind::random_bandlimited:
      return jet_from_partials(n, [&](const std::array<int, kMaxDim>& ord) {
        int total = 0;
        for (int d = 0; d < n; ++d) total += ord[static_cast<std::size_t>(d)];
        double s = 0.0;
        for (const auto& m : modes_) {
          double phi = 0.0;
          double kpow = 1.0;
          for (int d = 0; d < n; ++d) {
            const auto du = static_cast<std::size_t>(d);
            phi += m.k[du] * x[du];
            for (int r = 0; r < ord[du]; ++r) kpow *= m.k[du];
          }
          s += kpow * phase_deriv(total, m.c, m.s, phi);
        }
        return amplitude_ * s;
      });
  }
  return {};
}

Potential make_preset(const Preset& preset, const GridSpec& grid) {
  const AnalyticPreset analytic(preset, grid);
  if (preset.kind == PresetKind::quadratic) {
    return Potential(ScalarField(grid), analytic.eval({}).hess);
  }
  ScalarField f(grid);
  detail::parallel_range(grid.size(), [&](std::size_t p) { f[p] = analytic.eval(grid.point(p)).value; });
  return Potential(std::move(f));
}

// ---------------------------------------------------------------------------
// Mollification

namespace {

struct Tap {
  std::size_t offset;
  double weight;
};

std::vector<Tap> periodized_gaussian(std::size_t npts, double h, double tau) {
  const double sigma = std::sqrt(2.0 * tau);
  const auto reach = static_cast<long>(std::ceil(8.0 * sigma / h));
  const auto n = static_cast<long>(npts);
  std::vector<double> w(npts, 0.0);
  for (long j = -reach; j <= reach; ++j) {
    const double x = static_cast<double>(j) * h;
    long r = j % n;
    if (r < 0) r += n;
    w[static_cast<std::size_t>(r)] += std::exp(-x * x / (4.0 * tau));
  }
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<Tap> taps;
  for (std::size_t r = 0; r < npts; ++r)
    if (w[r] > 0.0) taps.push_back({r, w[r] / total});
  return taps;
}

ScalarField convolve_axis(const ScalarField& in, int axis, const std::vector<Tap>& taps) {
  const auto& g = in.grid();
  ScalarField out(g);
  const std::size_t n = g.npts(axis);
  const std::size_t stride = g.stride(axis);
  const double* src = in.values().data();
  double* dst = out.values().data();
  detail::parallel_range(g.size(), [&](std::size_t p) {
    const std::size_t i = (p / stride) % n;
    const std::size_t base = p - i * stride;
    double s = 0.0;
    for (const auto& t : taps) {
      const std::size_t k = (i + n - t.offset) % n;
      s += t.weight * src[base + k * stride];
    }
    dst[p] = s;
  });
  return out;
}

}  // namespace

ScalarField mollify(const ScalarField& u0, double tau, MollifyInfo* info) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("mollify: tau must be positive and finite");
  const auto& g = u0.grid();
  double tau_used = tau;
  for (int d = 0; d < g.ndim(); ++d) {
    const double h = g.spacing(d);
    tau_used = std::max(tau_used, 2.0 * h * h);  // sqrt(2 tau) >= 2h
  }
  if (info != nullptr) {
    info->tau_requested = tau;
    info->tau_used = tau_used;
    info->clamped = tau_used != tau;
  }
  ScalarField cur = u0;
  for (int d = 0; d < g.ndim(); ++d) {
    cur = convolve_axis(cur, d, periodized_gaussian(g.npts(d), g.spacing(d), tau_used));
  }
  return cur;
}

MollifierSequence mollifier_sequence(const ScalarField& u0, std::span<const double> k_list) {
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    if (!(k_list[i] > 0.0)) throw ValidationError("mollifier_sequence: k must be positive");
    if (i > 0 && !(k_list[i] > k_list[i - 1])) throw ValidationError("mollifier_sequence: k_list must be increasing");
  }
  const auto& g = u0.grid();
  const int n = g.ndim();
  const VectorField du0 = gradient(u0);
  MollifierSequence seq;
  for (double k : k_list) {
    ScalarField uk = mollify(u0, 1.0 / k);
    const VectorField duk = gradient(uk);
    MollifierStep st{k, 1.0 / k, 0.0, 0.0};
    st.sup_err_u = detail::parallel_max(g.size(), [&](std::size_t p) { return std::abs(uk[p] - u0[p]); });
    st.sup_err_du = detail::parallel_max(g.size(), [&](std::size_t p) {
      double s = 0.0;
      for (int d = 0; d < n; ++d) {
        const double e = duk(p, d) - du0(p, d);
        s += e * e;
      }
      return std::sqrt(s);
    });
    if (!seq.steps.empty()) {
      const auto& prev = seq.steps.back();
      if (st.sup_err_u > prev.sup_err_u || st.sup_err_du > prev.sup_err_du) seq.monotone = false;
    }
    seq.steps.push_back(st);
    seq.fields.push_back(std::move(uk));
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Parabolic rescaling

namespace {

void catmull_rom_weights(double t, double w[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
  w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
  w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

// Source position of one output axis: either an exact node or a
// Catmull-Rom stencil base with fraction.
struct AxisSample {
  bool exact = true;
  long node = 0;
  double frac = 0.0;
  double dx = 0.0;  // x - x0
};

}  // namespace

std::vector<Snapshot> parabolic_rescale(std::span<const Snapshot> snapshots, const RescaleOptions& opt) {
  if (!(opt.lambda > 0.0) || !std::isfinite(opt.lambda)) throw ValidationError("rescale: lambda must be positive");
  if (snapshots.empty()) throw ValidationError("rescale: need at least one snapshot");
  const GridSpec& src = snapshots.front().u.grid();
  const int n = src.ndim();
  const double lam = opt.lambda;
  const double t_tol = 1e-12 * std::max(1.0, std::abs(opt.t0));
  const Snapshot* at_t0 = nullptr;
  for (const auto& s : snapshots) {
    if (!(s.u.grid() == src)) throw ValidationError("rescale: snapshots must share one grid");
    if (s.t > opt.t0 + t_tol) throw ValidationError("rescale: snapshot time exceeds t0");
    if (std::abs(s.t - opt.t0) <= t_tol) at_t0 = &s;
  }
  if (at_t0 == nullptr) throw ValidationError("rescale: no snapshot at t0");

  std::array<std::size_t, kMaxDim> x0_idx{};
  for (int d = 0; d < n; ++d) {
    const auto du = static_cast<std::size_t>(d);
    const double r = (opt.x0[du] - src.origin(d)) / src.spacing(d);
    const double ri = std::round(r);
    if (std::abs(r - ri) > 1e-9 || ri < 0.0 || ri >= static_cast<double>(src.npts(d))) {
      throw ValidationError("rescale: x0 must be a grid node inside the cell");
    }
    x0_idx[du] = static_cast<std::size_t>(ri);
  }
  const std::size_t x0_flat = src.ravel(x0_idx);
  const double u00 = at_t0->u[x0_flat];
  std::array<double, kMaxDim> du00{};
  if (!interior_gradient_at(at_t0->u, x0_flat, du00)) {
    throw ValidationError("rescale: x0 lies on the cell boundary; rescaled window would wrap");
  }

  std::array<std::size_t, kMaxDim> out_n{};
  std::array<double, kMaxDim> out_h{};
  std::array<double, kMaxDim> out_o{};
  bool aligned = true;
  for (int d = 0; d < n; ++d) {
    const auto du = static_cast<std::size_t>(d);
    out_n[du] = opt.out_npts > 0 ? opt.out_npts : src.npts(d) / 2;
    const double natural = lam * src.spacing(d);
    out_h[du] = opt.out_spacing > 0.0 ? opt.out_spacing : natural;
    if (std::abs(out_h[du] - natural) > 1e-12 * natural) aligned = false;
    out_o[du] = -static_cast<double>(out_n[du] / 2) * out_h[du];
  }
  const auto nd = static_cast<std::size_t>(n);
  const GridSpec dst({out_n.data(), nd}, {out_h.data(), nd}, {out_o.data(), nd});

  // Per axis, where each output index lands in the source.
  std::array<std::vector<AxisSample>, kMaxDim> axes;
  for (int d = 0; d < n; ++d) {
    const auto du = static_cast<std::size_t>(d);
    const long N = static_cast<long>(src.npts(d));
    const long half = static_cast<long>(out_n[du] / 2);
    axes[du].resize(out_n[du]);
    for (std::size_t j = 0; j < out_n[du]; ++j) {
      AxisSample& a = axes[du][j];
      const long offset = static_cast<long>(j) - half;
      if (aligned) {
        a.exact = true;
        a.node = static_cast<long>(x0_idx[du]) + offset;
        a.dx = static_cast<double>(offset) * src.spacing(d);
      } else {
        const double r = static_cast<double>(x0_idx[du]) + static_cast<double>(offset) * out_h[du] / (lam * src.spacing(d));
        const double fl = std::floor(r);
        a.frac = r - fl;
        a.node = static_cast<long>(fl);
        a.exact = a.frac < 1e-12;
        a.dx = (r - static_cast<double>(x0_idx[du])) * src.spacing(d);
        if (!a.exact && (a.node - 1 < 0 || a.node + 2 > N - 1)) {
          throw ValidationError("rescale: rescaled window exceeds the source cell on axis " + std::to_string(d));
        }
      }
      if (a.node < 0 || a.node > N - 1) {
        throw ValidationError("rescale: rescaled window exceeds the source cell on axis " + std::to_string(d));
      }
    }
  }

  std::vector<Snapshot> out;
  out.reserve(snapshots.size());
  for (const auto& snap : snapshots) {
    ScalarField f(dst);
    const double* v = snap.u.values().data();
    detail::parallel_range(dst.size(), [&](std::size_t q) {
      const auto idx = dst.unravel(q);
      // Tensor-product stencil: 1 tap on exact axes, 4 Catmull-Rom taps otherwise.
      double w[kMaxDim][4];
      long base[kMaxDim];
      int taps[kMaxDim];
      double affine = 0.0;
      for (int d = 0; d < kMaxDim; ++d) {
        taps[d] = 1;
        base[d] = 0;
        w[d][0] = 1.0;
      }
      for (int d = 0; d < n; ++d) {
        const auto du = static_cast<std::size_t>(d);
        const AxisSample& a = axes[du][idx[du]];
        affine += du00[du] * a.dx;
        if (a.exact) {
          base[d] = a.node;
        } else {
          taps[d] = 4;
          base[d] = a.node - 1;
          catmull_rom_weights(a.frac, w[d]);
        }
      }
      double val = 0.0;
      for (int i = 0; i < taps[0]; ++i)
        for (int j = 0; j < taps[1]; ++j)
          for (int k = 0; k < taps[2]; ++k) {
            std::array<std::size_t, kMaxDim> si{static_cast<std::size_t>(base[0] + i),
                                                static_cast<std::size_t>(base[1] + j),
                                                static_cast<std::size_t>(base[2] + k)};
            val += w[0][i] * w[1][j] * w[2][k] * v[src.ravel(si)];
          }
      f[q] = lam * lam * (val - u00 - affine);
    });
    out.push_back({lam * lam * (snap.t - opt.t0), std::move(f)});
  }
  return out;
}

RescaledAnalytic::RescaledAnalytic(AnalyticPreset base, double lambda, const std::array<double, kMaxDim>& x0)
    : base_(std::move(base)), lambda_(lambda), x0_(x0), at_x0_(base_.eval(x0)) {
  if (!(lambda > 0.0)) throw ValidationError("rescale: lambda must be positive");
}

Jet RescaledAnalytic::eval(const std::array<double, kMaxDim>& y) const {
  const int n = base_.ndim();
  std::array<double, kMaxDim> x{};
  std::array<double, kMaxDim> dx{};
  for (int d = 0; d < n; ++d) {
    const auto du = static_cast<std::size_t>(d);
    dx[du] = y[du] / lambda_;
    x[du] = x0_[du] + dx[du];
  }
  const Jet j = base_.eval(x);
  const double l2 = lambda_ * lambda_;
  Jet r;
  double affine = 0.0;
  for (int d = 0; d < n; ++d) affine += at_x0_.grad[static_cast<std::size_t>(d)] * dx[static_cast<std::size_t>(d)];
  r.value = l2 * (j.value - at_x0_.value - affine);
  for (int d = 0; d < n; ++d) {
    const auto du = static_cast<std::size_t>(d);
    r.grad[du] = lambda_ * (j.grad[du] - at_x0_.grad[du]);
  }
  // chain rule: each y-derivative contributes 1/lambda, times the lambda^2 prefactor
  r.hess = j.hess;
  r.third = Sym3Tensor(n);
  for (std::size_t s = 0; s < j.third.packed().size(); ++s) r.third.packed()[s] = j.third.packed()[s] / lambda_;
  return r;
}

// ---------------------------------------------------------------------------
// Torus lifts

LiftDecomposition lift_decompose(const VectorField& du) {
  const auto& g = du.grid();
  const int n = g.ndim();
  if (du.ncomp() != n) throw ValidationError("lift_decompose: need one gradient component per axis");
  LiftDecomposition lift;
  lift.n = n;
  lift.A.assign(static_cast<std::size_t>(n * n), 0.0);

  for (int j = 0; j < n; ++j) {
    const std::size_t N = g.npts(j);
    const std::size_t stride = g.stride(j);
    const double span = static_cast<double>(N - 1) * g.spacing(j);
    std::size_t lines = 0;
    std::array<double, kMaxDim> acc{};
    for (std::size_t p = 0; p < g.size(); ++p) {
      if ((p / stride) % N != 0) continue;  // start of a line along axis j
      const std::size_t last = p + (N - 1) * stride;
      for (int i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)] += (du(last, i) - du(p, i)) / span;
      ++lines;
    }
    for (int i = 0; i < n; ++i) {
      const double raw = acc[static_cast<std::size_t>(i)] / static_cast<double>(lines);
      const double rounded = std::round(raw);
      if (std::abs(raw - rounded) > 0.1) {
        throw ValidationError("lift_decompose: not a lift (winding " + std::to_string(raw) + " for component " +
                              std::to_string(i) + " along axis " + std::to_string(j) + ")");
      }
      lift.A[static_cast<std::size_t>(i * n + j)] = rounded + 0.0;
    }
  }

  lift.periodic_part = VectorField(g, n);
  std::array<double, kMaxDim> mean{};
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.point(p);
    for (int i = 0; i < n; ++i) {
      double ax = 0.0;
      for (int j = 0; j < n; ++j) ax += lift.A[static_cast<std::size_t>(i * n + j)] * x[static_cast<std::size_t>(j)];
      lift.periodic_part(p, i) = du(p, i) - ax;
      mean[static_cast<std::size_t>(i)] += lift.periodic_part(p, i);
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    lift.mean_offset[iu] = mean[iu] / static_cast<double>(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) lift.periodic_part(p, i) -= lift.mean_offset[iu];
  }
  return lift;
}

LiftDecomposition lift_from_background(const Potential& u) {
  const auto& g = u.grid();
  const int n = g.ndim();
  LiftDecomposition lift;
  lift.n = n;
  lift.A.assign(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lift.A[static_cast<std::size_t>(i * n + j)] = u.background_hessian()(i, j);
  const VectorField dp = gradient(u.periodic());
  lift.periodic_part = VectorField(g, n);
  for (int i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    double mean = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) mean += dp(p, i);
    mean /= static_cast<double>(g.size());
    lift.mean_offset[iu] = u.background_slope()[iu] + mean;
    for (std::size_t p = 0; p < g.size(); ++p) lift.periodic_part(p, i) = dp(p, i) - mean;
  }
  return lift;
}

}  // namespace lagmcf
