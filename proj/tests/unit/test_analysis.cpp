#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "lagmcf/analysis.hpp"
#include "lagmcf/errors.hpp"
#include "lagmcf/geometry.hpp"
#include "lagmcf/initdata.hpp"
#include "oracles.hpp"

using namespace lagmcf;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

DiagnosticsRecord record(double t, double eig_lo, double eig_hi, double pinch) {
  DiagnosticsRecord r;
  r.t = t;
  r.eig_min = eig_lo;
  r.eig_max = eig_hi;
  r.pinch_min = pinch;
  return r;
}

ScalarField random_field(const GridSpec& g, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-scale, scale);
  ScalarField f(g);
  for (auto& v : f.values()) v = U(rng);
  return f;
}

}  // namespace

TEST(Diagnostics, ZeroFieldIsFlat) {
  const FlowState s{Potential(ScalarField(GridSpec::cube(2, 16, kTwoPi))), 0.0, 0};
  const auto r = diagnostics(s, 0.25);
  EXPECT_EQ(r.sup_H2, 0.0);
  EXPECT_EQ(r.sup_D3u2, 0.0);
  EXPECT_EQ(r.eig_min, 0.0);
  EXPECT_EQ(r.eig_max, 0.0);
  EXPECT_EQ(r.osc_theta, 0.0);
  EXPECT_EQ(r.pinch_min, 0.75);
}

TEST(Diagnostics, QuadraticIsFlatWithConstantAngle) {
  Preset p;
  p.kind = PresetKind::quadratic;
  p.matrix = {0.4, 0.0, 0.0, -0.2};
  const FlowState s{make_preset(p, GridSpec::cube(2, 16, kTwoPi, -std::numbers::pi)), 1.0, 0};
  const auto r = diagnostics(s, 0.0);
  EXPECT_EQ(r.sup_H2, 0.0);
  EXPECT_EQ(r.osc_theta, 0.0);
  EXPECT_DOUBLE_EQ(r.eig_max, 0.4);
  EXPECT_DOUBLE_EQ(r.eig_min, -0.2);
  EXPECT_NEAR(r.pinch_min, 1.0 - 0.16, 1e-15);
}

TEST(Diagnostics, OneDimensionalCosineMatchesClosedForm) {
  // u = e cos x: u'' = -e cos x, u''' = e sin x, so
  // |H|^2 = e^2 sin^2 x / (1 + e^2 cos^2 x)^3, maximal (= e^2) at x = pi/2.
  const double e = 1e-3;
  const GridSpec g = GridSpec::cube(1, 256, kTwoPi);
  ScalarField u(g);
  for (std::size_t q = 0; q < g.size(); ++q) u[q] = e * std::cos(g.coord(0, q));
  const auto r = diagnostics(FlowState{Potential(u), 0.0, 0}, 0.0);
  double ref = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    const double x = g.coord(0, q);
    ref = std::max(ref, oracle::mean_curvature_sq_1d(-e * std::cos(x), e * std::sin(x)));
  }
  EXPECT_NEAR(r.sup_H2, ref, 1e-8);
  EXPECT_NEAR(r.sup_H2, e * e, 1e-8);
}

TEST(Diagnostics, RecomputationIsBitExact) {
  Preset p;
  p.kind = PresetKind::product_sine;
  p.amplitude = 0.4;
  const FlowState s{make_preset(p, GridSpec::cube(2, 32, kTwoPi)), 0.7, 0};
  const auto a = diagnostics(s, 0.1);
  const auto b = diagnostics(s, 0.1);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.t_supD3u2), std::bit_cast<std::uint64_t>(b.t_supD3u2));
  EXPECT_EQ(a.t_supH2, 0.7 * a.sup_H2);
}

TEST(Preservation, FlagsInjectedViolationAtItsTime) {
  DiagnosticsSeries s{record(0.0, -0.5, 0.5, 0.1), record(0.1, -0.4, 0.95, 0.0), record(0.2, -0.3, 0.3, 0.2)};
  const auto rep = preservation_report(s, 0.1, 1e-3);
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.first_violation_t.has_value());
  EXPECT_EQ(*rep.first_violation_t, 0.1);
  EXPECT_EQ(rep.first_violation_check, "hessian_bounds");
  EXPECT_NEAR(rep.worst_eig_excess, 0.05, 1e-15);
  EXPECT_TRUE(preservation_report(s, 0.1, kInf).pass);

  DiagnosticsSeries p{record(0.0, 0.0, 0.0, 0.0), record(0.5, 0.0, 0.0, -0.01)};
  const auto pr = preservation_report(p, 0.1, 1e-3);
  EXPECT_EQ(pr.first_violation_check, "pinching");
}

TEST(Preservation, VerdictIsMonotoneInTolerance) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    DiagnosticsSeries s;
    for (int k = 0; k < 5; ++k) s.push_back(record(k, -std::abs(U(rng)), std::abs(U(rng)), 0.05 * U(rng)));
    bool passed = false;
    for (double tol : {0.0, 1e-3, 1e-2, 0.05, 0.1, 0.5, kInf}) {
      const bool p = preservation_report(s, 0.1, tol).pass;
      if (passed) EXPECT_TRUE(p);
      passed = passed || p;
    }
    EXPECT_TRUE(passed);
  }
}

TEST(Decay, AnchorsAtFirstSampleAfterTmin) {
  DiagnosticsSeries s;
  for (double t : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    DiagnosticsRecord r;
    r.t = t;
    r.sup_H2 = std::exp(-t);
    r.sup_D3u2 = 2.0 * std::exp(-2.0 * t);
    r.t_supH2 = t * r.sup_H2;
    r.t_supD3u2 = t * r.sup_D3u2;
    s.push_back(r);
  }
  const auto d = decay_report(s, 0.4);
  EXPECT_EQ(d.anchor_t, 0.5);
  EXPECT_DOUBLE_EQ(d.max_tH2, std::exp(-1.0));  // t e^-t peaks at t = 1
  EXPECT_TRUE(d.final_below_anchor_D3);
  EXPECT_TRUE(d.final_below_anchor_H2);  // 2 e^-2 < 0.5 e^-0.5
  EXPECT_THROW(decay_report(s, 3.0), ValidationError);

  const DiagnosticsSeries one{s[2]};
  const auto single = decay_report(one, 0.5);
  EXPECT_EQ(single.max_tH2, s[2].t_supH2);
  EXPECT_TRUE(single.final_below_anchor_H2);
}

TEST(Monotone, RateToleranceScalesWithTimeStep) {
  DiagnosticsSeries s{record(0.0, 0, 0, 0), record(1.0, 0, 0, 0), record(3.0, 0, 0, 0)};
  s[0].osc_theta = 1.0;
  s[1].osc_theta = 1.0 + 5e-9;
  s[2].osc_theta = 1.0 + 2e-8;
  EXPECT_TRUE(nonincreasing_report(s, &DiagnosticsRecord::osc_theta, 1e-8).pass);
  s[2].osc_theta = 1.0 + 3e-8;
  const auto m = nonincreasing_report(s, &DiagnosticsRecord::osc_theta, 1e-8);
  EXPECT_FALSE(m.pass);
  EXPECT_EQ(*m.first_violation_t, 3.0);
}

TEST(Residuals, SpecialLagrangianExamples) {
  Preset p;
  p.kind = PresetKind::quadratic;
  p.matrix = {0.5, 0.0, 0.0, -0.2};
  const Potential quad = make_preset(p, GridSpec::cube(2, 16, kTwoPi));
  const double theta = std::atan(0.5) + std::atan(-0.2);
  EXPECT_LE(special_lagrangian_residual(quad, theta).sup, 1e-12);
  EXPECT_NEAR(special_lagrangian_residual(quad, 0.0).sup, std::abs(theta), 1e-15);

  // u = cos x: discrete u'' = -c(h) cos x with c(h) = sin^2(h/2) / (h/2)^2
  const GridSpec g = GridSpec::cube(1, 128, kTwoPi);
  ScalarField u(g);
  for (std::size_t q = 0; q < g.size(); ++q) u[q] = std::cos(g.coord(0, q));
  const double h = g.spacing(0);
  const double c = -oracle::second_diff_symbol(1.0, h);
  EXPECT_NEAR(special_lagrangian_residual(u, 0.0).sup, std::atan(c), 1e-14);
  EXPECT_NEAR(special_lagrangian_residual(u, 0.0).sup, std::atan(1.0), 1e-3);
}

TEST(Residuals, SolitonWithZeroDataIsBitwiseSpecialLagrangian) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const ScalarField u = random_field(GridSpec::cube(n, 8, 1.0), seed, 0.02);
    const double Theta = seed % 2 ? 0.0 : 0.125 * static_cast<double>(seed);
    SolitonSpec s;
    s.c = Theta;
    for (auto mode : {StencilMode::periodic, StencilMode::interior}) {
      const auto a = soliton_residual(u, s, mode);
      const auto b = special_lagrangian_residual(u, Theta, mode);
      EXPECT_EQ(std::bit_cast<std::uint64_t>(a.sup), std::bit_cast<std::uint64_t>(b.sup));
      EXPECT_EQ(a.argmax, b.argmax);
      EXPECT_EQ(a.evaluated, b.evaluated);
    }
  }
}

TEST(Residuals, InteriorModeSkipsBoundaryNodes) {
  const ScalarField u = random_field(GridSpec::cube(2, 8, 1.0), 3, 1.0);
  EXPECT_EQ(special_lagrangian_residual(u, 0.0, StencilMode::interior).evaluated, 36u);
  EXPECT_EQ(special_lagrangian_residual(u, 0.0, StencilMode::periodic).evaluated, 64u);
}

TEST(Residuals, TranslatingSolitonFromQuadratureOracle) {
  // u'' = tan(b x + c0) with b = 2, c0 = 0.3 on |b x + c0| <= 1.2; the
  // translating vector has no a-part, so theta - b x = c0.
  const double b = 2.0;
  const double c0 = 0.3;
  const double lo = (-1.2 - c0) / b;
  const std::size_t n = 8192;
  const double h = 2.4 / b / static_cast<double>(n);
  const std::array<std::size_t, 1> np{n};
  const std::array<double, 1> sp{h};
  const std::array<double, 1> org{lo};
  const GridSpec g(np, sp, org);
  const ScalarField u(g, oracle::tan_soliton_profile(lo, h, n, b, c0));
  SolitonSpec s;
  s.b[0] = b;
  s.c = c0;
  EXPECT_LE(soliton_residual(u, s, StencilMode::interior).sup, 1e-7);
  s.c = c0 + 0.01;
  EXPECT_NEAR(soliton_residual(u, s, StencilMode::interior).sup, 0.01, 1e-7);
}

TEST(Convergence, QuadraticPassesImmediatelyAndWavyStartFails) {
  Preset p;
  p.kind = PresetKind::quadratic;
  p.matrix = {0.5, 0.1, 0.1, 0.2};
  const FlowState q{make_preset(p, GridSpec::cube(2, 16, kTwoPi)), 0.0, 0};
  const auto v = convergence_check(q, lift_from_background(q.u), 1e-12);
  EXPECT_TRUE(v.pass);

  p.kind = PresetKind::cosine;
  p.amplitude = 0.3;
  const FlowState c{make_preset(p, GridSpec::cube(2, 16, kTwoPi)), 0.0, 0};
  const auto w = convergence_check(c, lift_from_background(c.u), 1e-5);
  EXPECT_FALSE(w.pass);
  EXPECT_GT(w.sup_hess_dev, 0.2);
}

TEST(Csv, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> N(0.0, 1.0);
  DiagnosticsSeries s;
  for (int k = 0; k < 10; ++k) {
    DiagnosticsRecord r;
    r.t = 0.1 * k;
    r.sup_H2 = std::abs(N(rng));
    r.sup_D3u2 = std::abs(N(rng)) * 1e-300;
    r.t_supH2 = r.t * r.sup_H2;
    r.eig_min = N(rng);
    r.eig_max = N(rng);
    r.osc_theta = 1.0 / 3.0;
    r.pinch_min = -N(rng);
    s.push_back(r);
  }
  std::stringstream ss;
  write_diagnostics_csv(ss, s);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')),
            "t,sup_H2,sup_D3u2,t_supH2,t_supD3u2,eig_min,eig_max,osc_theta,sup_Du,pinch_min");
  const auto back = read_diagnostics_csv(ss);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[k].sup_D3u2), std::bit_cast<std::uint64_t>(s[k].sup_D3u2));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[k].pinch_min), std::bit_cast<std::uint64_t>(s[k].pinch_min));
  }
}

TEST(Csv, MissingColumnAndBadCellsAreFormatErrors) {
  std::stringstream missing("t,sup_H2\n0,0\n");
  EXPECT_THROW(read_diagnostics_csv(missing), FormatError);
  std::stringstream bad(
      "t,sup_H2,sup_D3u2,t_supH2,t_supD3u2,eig_min,eig_max,osc_theta,sup_Du,pinch_min\n0,0,0,0,0,0,0,x,0,0\n");
  EXPECT_THROW(read_diagnostics_csv(bad), FormatError);
  std::stringstream short_row(
      "t,sup_H2,sup_D3u2,t_supH2,t_supD3u2,eig_min,eig_max,osc_theta,sup_Du,pinch_min\n0,0,0\n");
  EXPECT_THROW(read_diagnostics_csv(short_row), FormatError);
  EXPECT_THROW(read_diagnostics_csv(std::string("/nonexistent/x.csv")), IoError);
}
