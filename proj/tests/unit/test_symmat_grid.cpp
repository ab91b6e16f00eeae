#include <gtest/gtest.h>

#include <cmath>
#include <bit>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "lagmcf/errors.hpp"
#include "lagmcf/field_io.hpp"
#include "lagmcf/grid.hpp"
#include "lagmcf/symmat.hpp"
#include "oracles.hpp"

using namespace lagmcf;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

GridSpec grid2(std::size_t nx, std::size_t ny, double lx = kTwoPi, double ly = kTwoPi) {
  const std::array<std::size_t, 2> n{nx, ny};
  const std::array<double, 2> e{lx, ly};
  return GridSpec::periodic(n, e);
}

}  // namespace

TEST(SymMat, PackedIndexCoversUpperTriangleOnce) {
  for (int n = 1; n <= 4; ++n) {
    std::vector<int> seen(static_cast<std::size_t>(SymMat::packed_size(n)), 0);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        ++seen[static_cast<std::size_t>(SymMat::packed_index(n, i, j))];
        EXPECT_EQ(SymMat::packed_index(n, i, j), SymMat::packed_index(n, j, i));
      }
    for (int c : seen) EXPECT_EQ(c, 1);
  }
}

TEST(SymMat, ConjugationMatchesDenseProduct) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int n = 1; n <= 4; ++n) {
    oracle::Dense m(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m(i, j) = m(j, i) = U(rng);
    const oracle::Dense q = oracle::random_orthogonal(n, rng);
    const SymMat c = SymMat::from_dense(n, m.a).conjugated(q.a);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double ref = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) ref += q(k, i) * m(k, l) * q(l, j);
        EXPECT_NEAR(c(i, j), ref, 1e-14);
      }
  }
}

TEST(Sym3Tensor, Norm2IsFullContraction) {
  Sym3Tensor t(3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (auto& v : t.packed()) v = U(rng);
  double ref = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) ref += t(i, j, k) * t(i, j, k);
  EXPECT_NEAR(t.norm2(), ref, 1e-14);
  EXPECT_EQ(t(0, 1, 2), t(2, 0, 1));
  EXPECT_EQ(t(1, 1, 0), t(0, 1, 1));
}

TEST(GridSpec, RejectsBadShapes) {
  const std::array<double, 1> e{1.0};
  EXPECT_THROW(GridSpec::periodic(std::array<std::size_t, 1>{7}, e), ValidationError);
  EXPECT_THROW(GridSpec::periodic(std::array<std::size_t, 1>{6}, e), ValidationError);
  EXPECT_THROW(GridSpec::periodic(std::array<std::size_t, 1>{8}, std::array<double, 1>{-1.0}), ValidationError);
  EXPECT_THROW(GridSpec::cube(4, 8, 1.0), ValidationError);
  EXPECT_NO_THROW(GridSpec::cube(3, 8, 1.0));
}

TEST(GridSpec, RavelUnravelRoundTripAndLayout) {
  const std::array<std::size_t, 3> n{8, 10, 12};
  const std::array<double, 3> e{1.0, 2.0, 3.0};
  const GridSpec g = GridSpec::periodic(n, e);
  EXPECT_EQ(g.size(), 960u);
  EXPECT_EQ(g.stride(2), 1u);
  EXPECT_EQ(g.stride(1), 12u);
  EXPECT_EQ(g.stride(0), 120u);
  for (std::size_t p = 0; p < g.size(); p += 7) EXPECT_EQ(g.ravel(g.unravel(p)), p);
  EXPECT_EQ(g.wrapped({-1, 10, 13}), g.ravel({7, 0, 1}));
  EXPECT_DOUBLE_EQ(g.spacing(1), 0.2);
}

TEST(Stencils, FourierModesMatchDiscreteSymbols) {
  // f = cos(k1 x + k2 y): every stencil acts on a Fourier mode by a known factor.
  const GridSpec g = grid2(16, 24, kTwoPi, 3.0);
  const double k1 = 2.0 * kTwoPi / g.extent(0);
  const double k2 = 3.0 * kTwoPi / g.extent(1);
  const double h1 = g.spacing(0);
  const double h2 = g.spacing(1);
  ScalarField f(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.point(p);
    f[p] = std::cos(k1 * x[0] + k2 * x[1]);
  }
  const VectorField grad = gradient(f);
  const SymMatField hess = hessian(f);
  const double s1 = std::sin(k1 * h1) / h1;
  const double s2 = std::sin(k2 * h2) / h2;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.point(p);
    const double c = std::cos(k1 * x[0] + k2 * x[1]);
    const double s = std::sin(k1 * x[0] + k2 * x[1]);
    EXPECT_NEAR(grad(p, 0), -s1 * s, 1e-12);
    EXPECT_NEAR(grad(p, 1), -s2 * s, 1e-12);
    EXPECT_NEAR(hess(p, 0, 0), oracle::second_diff_symbol(k1, h1) * c, 1e-11);
    EXPECT_NEAR(hess(p, 1, 1), oracle::second_diff_symbol(k2, h2) * c, 1e-11);
    EXPECT_NEAR(hess(p, 0, 1), -s1 * s2 * c, 1e-11);
  }
}

TEST(Stencils, SecondOrderConvergenceOnSmoothField) {
  double prev = 0.0;
  for (std::size_t n : {32u, 64u, 128u}) {
    const GridSpec g = grid2(n, n);
    ScalarField f(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const auto x = g.point(p);
      f[p] = std::exp(std::sin(x[0])) * std::cos(x[1]);
    }
    const auto t3 = third_derivatives(f);
    double err = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const auto x = g.point(p);
      const double es = std::exp(std::sin(x[0]));
      // d^3/dx^2 dy of e^{sin x} cos y
      const double fxx = es * (std::cos(x[0]) * std::cos(x[0]) - std::sin(x[0]));
      err = std::max(err, std::abs(t3.field.at(p)(0, 0, 1) - (-fxx * std::sin(x[1]))));
    }
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
      EXPECT_LT(prev / err, 4.5);
    }
    prev = err;
  }
}

TEST(Stencils, PointwiseHessianIsBitwiseFieldHessian) {
  const GridSpec g = grid2(16, 16);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ScalarField f(g);
  for (auto& v : f.values()) v = U(rng);
  const SymMatField hess = hessian(f);
  for (std::size_t p = 0; p < g.size(); ++p) {
    EXPECT_EQ(hessian_at(f, p), hess.at(p));
    SymMat inner;
    if (interior_hessian_at(f, p, inner)) EXPECT_EQ(inner, hess.at(p));
  }
  SymMat dummy;
  EXPECT_FALSE(interior_hessian_at(f, 0, dummy));
}

TEST(Stencils, ThirdDerivativeAsymmetryVanishesForSmoothData) {
  const GridSpec g = grid2(64, 64);
  ScalarField f(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.point(p);
    f[p] = std::sin(x[0]) * std::sin(2.0 * x[1]);
  }
  const auto t3 = third_derivatives(f);
  EXPECT_LT(t3.max_asymmetry, 5e-2);
  EXPECT_GE(t3.max_asymmetry, 0.0);
}

TEST(FieldIo, RoundTripIsBitIdentical) {
  const std::array<std::size_t, 2> n{8, 10};
  const std::array<double, 2> e{1.5, 2.5};
  const std::array<double, 2> o{-0.25, 3.0};
  const GridSpec g = GridSpec::periodic(n, e, o);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1e3);
  ScalarField f(g);
  for (auto& v : f.values()) v = N(rng);
  f[3] = -0.0;
  f[4] = 5e-324;
  std::stringstream ss;
  write_lgf1(f, ss);
  const ScalarField back = read_lgf1(ss);
  ASSERT_TRUE(back.grid() == g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[p]), std::bit_cast<std::uint64_t>(f[p]));
  }
}

TEST(FieldIo, MalformedInputsAreFormatErrors) {
  const ScalarField f(GridSpec::cube(1, 8, 1.0), 2.0);
  std::stringstream good;
  write_lgf1(f, good);
  const std::string bytes = good.str();

  std::stringstream bad_magic("LGF2" + bytes.substr(4));
  EXPECT_THROW(read_lgf1(bad_magic), FormatError);

  std::string v2 = bytes;
  v2[4] = 2;
  std::stringstream bad_version(v2);
  EXPECT_THROW(read_lgf1(bad_version), FormatError);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_lgf1(truncated), FormatError);

  std::string odd = bytes;
  odd[12] = 7;  // npts of axis 0
  std::stringstream odd_npts(odd);
  EXPECT_THROW(read_lgf1(odd_npts), FormatError);

  EXPECT_THROW(read_lgf1(std::filesystem::path("/nonexistent/dir/x.lgf")), IoError);
}
