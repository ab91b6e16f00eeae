#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lagmcf/errors.hpp"
#include "lagmcf/geometry.hpp"
#include "lagmcf/initdata.hpp"
#include "oracles.hpp"

using namespace lagmcf;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

GridSpec centred(int ndim, std::size_t npts) { return GridSpec::cube(ndim, npts, kTwoPi, -std::numbers::pi); }

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) s = std::max(s, std::abs(a[q] - b[q]));
  return s;
}

}  // namespace

TEST(Presets, NamesRoundTrip) {
  for (auto k : {PresetKind::quadratic, PresetKind::cosine, PresetKind::product_sine, PresetKind::sawtooth_c11,
                 PresetKind::random_bandlimited}) {
    EXPECT_EQ(parse_preset_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_preset_kind("gaussian"), ValidationError);
}

TEST(Presets, AnalyticDerivativesMatchFiniteDifferences) {
  const GridSpec g = GridSpec::cube(3, 8, kTwoPi);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (auto kind : {PresetKind::cosine, PresetKind::product_sine, PresetKind::random_bandlimited}) {
    Preset p;
    p.kind = kind;
    p.amplitude = 0.4;
    p.frequency = 2;
    const AnalyticPreset a(p, g);
    for (int trial = 0; trial < 20; ++trial) {
      const std::array<double, kMaxDim> x{U(rng), U(rng), U(rng)};
      const Jet j = a.eval(x);
      const double h = 1e-5;
      for (int d = 0; d < 3; ++d) {
        auto xp = x;
        auto xm = x;
        xp[static_cast<std::size_t>(d)] += h;
        xm[static_cast<std::size_t>(d)] -= h;
        const Jet jp = a.eval(xp);
        const Jet jm = a.eval(xm);
        EXPECT_NEAR(j.grad[static_cast<std::size_t>(d)], (jp.value - jm.value) / (2 * h), 1e-8);
        for (int e = 0; e < 3; ++e) {
          EXPECT_NEAR(j.hess(d, e), (jp.grad[static_cast<std::size_t>(e)] - jm.grad[static_cast<std::size_t>(e)]) / (2 * h), 1e-7);
          for (int f = 0; f < 3; ++f) EXPECT_NEAR(j.third(d, e, f), (jp.hess(e, f) - jm.hess(e, f)) / (2 * h), 1e-6);
        }
      }
    }
  }
}

TEST(Presets, QuadraticIsPureBackground) {
  Preset p;
  p.kind = PresetKind::quadratic;
  p.matrix = {0.2, -0.1, -0.1, 0.4};
  const Potential u = make_preset(p, centred(2, 16));
  EXPECT_TRUE(u.has_background());
  for (double v : u.periodic().values()) EXPECT_EQ(v, 0.0);
  p.matrix = {0.2, -0.1, 0.1, 0.4};
  EXPECT_THROW(make_preset(p, centred(2, 16)), ValidationError);
  p.matrix = {0.2};
  EXPECT_THROW(make_preset(p, centred(2, 16)), ValidationError);
}

TEST(Presets, CosineHessianRangeIsExact) {
  Preset p;
  p.kind = PresetKind::cosine;
  p.amplitude = 0.3;
  p.frequency = 2;
  const GridSpec g = centred(2, 32);
  const auto r = AnalyticPreset(p, g).hessian_range();
  EXPECT_NEAR(r.second, 1.2, 1e-15);
  EXPECT_NEAR(r.first, -1.2, 1e-15);
  p.hessian_clamp = 1.0;
  EXPECT_THROW(AnalyticPreset(p, g), ValidationError);
}

TEST(Presets, SawtoothIsC11WithSquareWaveHessian) {
  Preset p;
  p.kind = PresetKind::sawtooth_c11;
  p.level = 0.7;
  const GridSpec g = GridSpec::cube(1, 64, kTwoPi);
  const AnalyticPreset a(p, g);
  const double L = kTwoPi;
  // value and slope continuous across the kinks at 0, L/2 and the wrap
  for (double k : {0.25 * L, 0.5 * L, L - 1e-12}) {
    const double e = 1e-9;
    const Jet lo = a.eval({k - e, 0, 0});
    const Jet hi = a.eval({k + e, 0, 0});
    EXPECT_NEAR(lo.value, hi.value, 1e-8);
    EXPECT_NEAR(lo.grad[0], hi.grad[0], 1e-8);
  }
  EXPECT_DOUBLE_EQ(a.eval({0.3, 0, 0}).hess(0, 0), 0.7);
  EXPECT_DOUBLE_EQ(a.eval({0.3 + 0.5 * L, 0, 0}).hess(0, 0), -0.7);
  // the sampled field's discrete Hessian stays in the essential range
  const Potential u = make_preset(p, g);
  const auto ext = hessian_eig_extremes(u.hessian());
  EXPECT_LE(ext.second, 0.7 + 1e-12);
  EXPECT_GE(ext.first, -0.7 - 1e-12);
}

TEST(Presets, RandomBandlimitedIsSeededAndClamped) {
  const GridSpec g = centred(2, 32);
  Preset p;
  p.kind = PresetKind::random_bandlimited;
  p.hessian_clamp = 0.8;
  p.seed = 99;
  const Potential a = make_preset(p, g);
  const Potential b = make_preset(p, g);
  EXPECT_EQ(sup_diff(a.periodic(), b.periodic()), 0.0);
  p.seed = 100;
  EXPECT_GT(sup_diff(a.periodic(), make_preset(p, g).periodic()), 1e-3);
  // analytic Hessian never exceeds the clamp (measured on a finer lattice)
  p.seed = 99;
  const AnalyticPreset an(p, g);
  double rmax = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    const auto ev = sym_eigenvalues(an.eval(g.point(q)).hess);
    rmax = std::max({rmax, std::abs(ev[0]), std::abs(ev[1])});
  }
  EXPECT_LE(rmax, 0.8 + 1e-12);
  EXPECT_GT(rmax, 0.6);
  p.hessian_clamp = 0.0;
  EXPECT_THROW(make_preset(p, g), ValidationError);
}

TEST(Mollify, ConstantFieldIsFixed) {
  const ScalarField c(centred(2, 16), 3.25);
  const ScalarField m = mollify(c, 0.3);
  for (double v : m.values()) EXPECT_NEAR(v, 3.25, 1e-14);
}

TEST(Mollify, FourierModesAttenuateByHeatSymbol) {
  const GridSpec g = centred(2, 64);
  for (int k : {1, 2, 3}) {
    for (double tau : {0.05, 0.2}) {
      ScalarField f(g);
      for (std::size_t q = 0; q < g.size(); ++q) {
        const auto x = g.point(q);
        f[q] = std::cos(k * x[0]) * std::sin(x[1]);
      }
      const ScalarField m = mollify(f, tau);
      const double factor = std::exp(-(k * k + 1) * tau);
      for (std::size_t q = 0; q < g.size(); ++q) EXPECT_NEAR(m[q], factor * f[q], 1e-12);
    }
  }
}

TEST(Mollify, PreservesMeanAndClampsSubgridWidth) {
  const GridSpec g = centred(1, 64);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ScalarField f(g);
  for (auto& v : f.values()) v = U(rng);
  MollifyInfo info;
  const ScalarField m = mollify(f, 1e-6, &info);
  EXPECT_TRUE(info.clamped);
  EXPECT_NEAR(info.tau_used, 2.0 * g.spacing(0) * g.spacing(0), 1e-15);
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    s0 += f[q];
    s1 += m[q];
  }
  EXPECT_NEAR(s0, s1, 1e-12);
  mollify(f, 0.5, &info);
  EXPECT_FALSE(info.clamped);
  EXPECT_THROW(mollify(f, 0.0), ValidationError);
}

TEST(Mollify, SequenceErrorsShrink) {
  Preset p;
  p.kind = PresetKind::sawtooth_c11;
  const ScalarField u0 = make_preset(p, centred(1, 256)).periodic();
  const std::vector<double> ks{2.0, 8.0, 32.0};
  const auto seq = mollifier_sequence(u0, ks);
  EXPECT_TRUE(seq.monotone);
  ASSERT_EQ(seq.fields.size(), 3u);
  EXPECT_GT(seq.steps[0].sup_err_u, seq.steps[2].sup_err_u);
  const std::vector<double> bad{4.0, 2.0};
  EXPECT_THROW(mollifier_sequence(u0, bad), ValidationError);
}

TEST(Rescale, UnitLambdaAtNodeSubtractsTangentPlane) {
  const GridSpec g = centred(2, 32);
  Preset p;
  p.kind = PresetKind::product_sine;
  p.amplitude = 0.3;
  const ScalarField u = make_preset(p, g).periodic();
  RescaleOptions opt;
  opt.lambda = 1.0;
  opt.t0 = 1.0;
  const std::vector<Snapshot> snaps{{1.0, u}};
  const auto out = parabolic_rescale(snaps, opt);
  ASSERT_EQ(out.size(), 1u);
  const GridSpec& d = out[0].u.grid();
  EXPECT_EQ(d.npts(0), 16u);
  // y = 0 is the centre node, where the value and gradient vanish
  const std::size_t c = d.ravel({8, 8, 0});
  EXPECT_EQ(out[0].u[c], 0.0);
  std::array<double, kMaxDim> g0{};
  ASSERT_TRUE(interior_gradient_at(out[0].u, c, g0));
  EXPECT_NEAR(g0[0], 0.0, 1e-15);
  EXPECT_NEAR(g0[1], 0.0, 1e-15);
  EXPECT_EQ(out[0].t, 0.0);
}

TEST(Rescale, AlignedGridPreservesDiscreteHessian) {
  const GridSpec g = centred(2, 64);
  Preset p;
  p.kind = PresetKind::cosine;
  p.amplitude = 0.2;
  const ScalarField u = make_preset(p, g).periodic();
  for (double lam : {2.0, 4.0}) {
    RescaleOptions opt;
    opt.lambda = lam;
    opt.x0 = {0.5 * g.spacing(0) * 4, -g.spacing(1) * 2, 0.0};
    const std::vector<Snapshot> snaps{{0.0, u}};
    const auto out = parabolic_rescale(snaps, opt);
    const GridSpec& d = out[0].u.grid();
    EXPECT_NEAR(d.spacing(0), lam * g.spacing(0), 1e-15);
    double err = 0.0;
    for (std::size_t q = 0; q < d.size(); ++q) {
      SymMat hy;
      if (!interior_hessian_at(out[0].u, q, hy)) continue;
      const auto j = d.unravel(q);
      const std::array<std::size_t, kMaxDim> si{j[0] + 32 - 16 + 2, j[1] + 32 - 16 - 2, 0};
      const SymMat hx = hessian_at(u, g.ravel(si));
      for (std::size_t s = 0; s < 3; ++s) err = std::max(err, std::abs(hy.packed()[s] - hx.packed()[s]));
    }
    EXPECT_LT(err, 1e-11);
  }
}

TEST(Rescale, OffLatticeInterpolationIsThirdOrder) {
  // Catmull-Rom error for smooth data scales like h^3 in value
  double prev = 0.0;
  for (std::size_t n : {32u, 64u, 128u}) {
    const GridSpec g = centred(1, n);
    ScalarField u(g);
    for (std::size_t q = 0; q < g.size(); ++q) u[q] = std::sin(g.coord(0, q)) + 0.5 * std::cos(2 * g.coord(0, q));
    RescaleOptions opt;
    opt.lambda = 1.0;
    opt.out_npts = 8;
    opt.out_spacing = 0.37;
    const std::vector<Snapshot> snaps{{0.0, u}};
    const auto out = parabolic_rescale(snaps, opt);
    const GridSpec& d = out[0].u.grid();
    double err = 0.0;
    for (std::size_t q = 0; q < d.size(); ++q) {
      const double x = d.coord(0, q);
      // tangent plane uses the centred-difference slope sin(h) / h at x0 = 0
      const double h = g.spacing(0);
      const double exact = std::sin(x) + 0.5 * std::cos(2 * x) - 0.5 - x * std::sin(h) / h;
      err = std::max(err, std::abs(out[0].u[q] - exact));
    }
    if (prev > 0.0) EXPECT_GT(prev / err, 6.0);
    prev = err;
  }
}

TEST(Rescale, RejectsBadRequests) {
  const GridSpec g = centred(1, 32);
  const ScalarField u(g, 0.0);
  const std::vector<Snapshot> snaps{{0.0, u}, {0.5, u}};
  RescaleOptions opt;
  opt.t0 = 0.5;
  opt.x0 = {0.01, 0, 0};
  EXPECT_THROW(parabolic_rescale(snaps, opt), ValidationError);  // not a node
  opt.x0 = {0.0, 0, 0};
  opt.t0 = 0.25;
  EXPECT_THROW(parabolic_rescale(snaps, opt), ValidationError);  // t > t0 present
  opt.t0 = 0.5;
  opt.lambda = 0.25;
  opt.out_spacing = 0.1;
  opt.out_npts = 64;
  EXPECT_THROW(parabolic_rescale(snaps, opt), ValidationError);  // window leaves the cell
  opt = RescaleOptions{};
  opt.t0 = 0.5;
  opt.lambda = -1.0;
  EXPECT_THROW(parabolic_rescale(snaps, opt), ValidationError);
}

TEST(Rescale, AnalyticPathScalesDerivatives) {
  Preset p;
  p.kind = PresetKind::random_bandlimited;
  p.hessian_clamp = 0.5;
  const GridSpec g = centred(2, 16);
  const AnalyticPreset base(p, g);
  const std::array<double, kMaxDim> x0{0.2, -0.4, 0.0};
  const RescaledAnalytic r(base, 3.0, x0);
  const Jet at0 = r.eval({0, 0, 0});
  EXPECT_EQ(at0.value, 0.0);
  EXPECT_EQ(at0.grad[0], 0.0);
  const Jet jy = r.eval({0.9, 0.3, 0});
  const Jet jx = base.eval({0.2 + 0.3, -0.4 + 0.1, 0});
  EXPECT_NEAR(jy.hess(0, 1), jx.hess(0, 1), 1e-15);
  EXPECT_NEAR(jy.third(0, 0, 1), jx.third(0, 0, 1) / 3.0, 1e-15);
  EXPECT_NEAR(jy.grad[1], 3.0 * (jx.grad[1] - base.eval(x0).grad[1]), 1e-14);
}

TEST(Lift, RecoversIntegerWindingAndPeriodicPart) {
  const GridSpec g = centred(2, 32);
  const std::array<int, 4> A{1, 0, 0, -2};
  VectorField du(g, 2);
  for (std::size_t q = 0; q < g.size(); ++q) {
    const auto x = g.point(q);
    du(q, 0) = A[0] * x[0] + A[1] * x[1] + 0.3 + 0.1 * std::sin(x[0]);
    du(q, 1) = A[2] * x[0] + A[3] * x[1] - 0.7 + 0.2 * std::cos(x[1]);
  }
  const auto lift = lift_decompose(du);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(lift.A[i], A[i]);
  EXPECT_NEAR(lift.mean_offset[0], 0.3, 1e-14);
  EXPECT_NEAR(lift.mean_offset[1], -0.7, 1e-14);
  for (std::size_t q = 0; q < g.size(); ++q) {
    const auto x = g.point(q);
    EXPECT_NEAR(lift.periodic_part(q, 0), 0.1 * std::sin(x[0]), 1e-14);
  }
}

TEST(Lift, RejectsNonIntegerWinding) {
  const GridSpec g = centred(1, 32);
  VectorField du(g, 1);
  for (std::size_t q = 0; q < g.size(); ++q) du(q, 0) = 0.5 * g.coord(0, q);
  EXPECT_THROW(lift_decompose(du), ValidationError);
}

TEST(Lift, FromBackgroundKeepsRealMatrix) {
  Preset p;
  p.kind = PresetKind::quadratic;
  p.matrix = {0.25, 0.0, 0.0, -0.5};
  const auto lift = lift_from_background(make_preset(p, centred(2, 16)));
  EXPECT_EQ(lift.A[0], 0.25);
  EXPECT_EQ(lift.A[3], -0.5);
  EXPECT_EQ(lift.mean_offset[0], 0.0);
}
