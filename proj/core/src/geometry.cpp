#include "lagmcf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "kernels.hpp"
#include "lagmcf/errors.hpp"

namespace lagmcf {

namespace {

constexpr int kMaxSweeps = 50;
constexpr double kJacobiTol = 1e-14;

using Dense = std::array<double, SymMat::kMaxN * SymMat::kMaxN>;

void sort_ascending(EigenDecomposition& e) {
  const int n = e.n;
  std::array<int, SymMat::kMaxN> order{};
  std::iota(order.begin(), order.begin() + n, 0);
  std::sort(order.begin(), order.begin() + n, [&](int a, int b) { return e.values[a] < e.values[b]; });
  EigenDecomposition sorted = e;
  for (int c = 0; c < n; ++c) {
    sorted.values[c] = e.values[order[c]];
    for (int r = 0; r < n; ++r) sorted.vectors[r * n + c] = e.vectors[r * n + order[c]];
  }
  e = sorted;
}

EigenDecomposition jacobi(const SymMat& m) {
  const int n = m.n();
  EigenDecomposition e;
  e.n = n;
  double a[SymMat::kMaxN][SymMat::kMaxN];
  double frob2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a[i][j] = m(i, j);
      frob2 += a[i][j] * a[i][j];
    }
  Dense& v = e.vectors;
  v.fill(0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double threshold = kJacobiTol * std::sqrt(frob2);
  auto offdiag = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += a[i][j] * a[i][j];
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  while (offdiag() > threshold) {
    if (sweep == kMaxSweeps) {
      throw std::runtime_error("sym_eigen: Jacobi did not converge in 50 sweeps");
    }
    ++sweep;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  e.sweeps = sweep;
  for (int i = 0; i < n; ++i) e.values[i] = a[i][i];
  sort_ascending(e);
  return e;
}

using cplx = std::complex<double>;

cplx complex_det(const cplx* z, int n, int ld) {
  switch (n) {
    case 1:
      return z[0];
    case 2:
      return z[0] * z[ld + 1] - z[1] * z[ld];
    case 3:
      return z[0] * (z[ld + 1] * z[2 * ld + 2] - z[ld + 2] * z[2 * ld + 1]) -
             z[1] * (z[ld] * z[2 * ld + 2] - z[ld + 2] * z[2 * ld]) +
             z[2] * (z[ld] * z[2 * ld + 1] - z[ld + 1] * z[2 * ld]);
    default: {
      // Laplace expansion along the first row.
      cplx total = 0.0;
      cplx minor[SymMat::kMaxN * SymMat::kMaxN];
      for (int col = 0; col < n; ++col) {
        for (int r = 1; r < n; ++r) {
          int mc = 0;
          for (int c = 0; c < n; ++c) {
            if (c == col) continue;
            minor[(r - 1) * (n - 1) + mc++] = z[r * ld + c];
          }
        }
        const cplx term = z[col] * complex_det(minor, n - 1, n - 1);
        total += (col % 2 == 0) ? term : -term;
      }
      return total;
    }
  }
}

}  // namespace

EigenDecomposition sym_eigen(const SymMat& m) {
  const int n = m.n();
  EigenDecomposition e;
  e.n = n;
  if (n == 1) {
    e.values[0] = m(0, 0);
    e.vectors[0] = 1.0;
    return e;
  }
  if (n == 2) {
    const double a = m(0, 0);
    const double b = m(0, 1);
    const double c = m(1, 1);
    const double mean = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), b);
    const double phi = 0.5 * std::atan2(2.0 * b, a - c);
    const double cs = std::cos(phi);
    const double sn = std::sin(phi);
    e.values[0] = mean - r;
    e.values[1] = mean + r;
    // column 0 <-> smaller eigenvalue, column 1 <-> larger
    e.vectors = {-sn, cs, cs, sn};
    return e;
  }
  return jacobi(m);
}

std::array<double, SymMat::kMaxN> sym_eigenvalues(const SymMat& m) {
  if (m.n() <= 2) {
    std::array<double, SymMat::kMaxN> ev{};
    if (m.n() == 1) {
      ev[0] = m(0, 0);
    } else if (m.n() == 2) {
      const double mean = 0.5 * (m(0, 0) + m(1, 1));
      const double r = std::hypot(0.5 * (m(0, 0) - m(1, 1)), m(0, 1));
      ev[0] = mean - r;
      ev[1] = mean + r;
    }
    return ev;
  }
  return sym_eigen(m).values;
}

double lagrangian_angle(const SymMat& hess) {
  const auto ev = sym_eigenvalues(hess);
  double theta = 0.0;
  for (int i = 0; i < hess.n(); ++i) theta += std::atan(ev[static_cast<std::size_t>(i)]);
  return theta;
}

double angle_via_logdet(const SymMat& hess) {
  const int n = hess.n();
  cplx z[SymMat::kMaxN * SymMat::kMaxN];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z[i * n + j] = cplx(i == j ? 1.0 : 0.0, hess(i, j));
  const cplx det = complex_det(z, n, n);
  // |det(I + iM)| = sqrt(det(I + M^2)); dividing by it leaves the argument unchanged.
  return std::log(det / std::abs(det)).imag();
}

SymMat spd_inverse(const SymMat& m) {
  const int n = m.n();
  double l[SymMat::kMaxN][SymMat::kMaxN]{};
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (!(d > 0.0)) throw std::runtime_error("spd_inverse: matrix is not positive definite");
    l[j][j] = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  // inverse of L (lower triangular)
  double li[SymMat::kMaxN][SymMat::kMaxN]{};
  for (int i = 0; i < n; ++i) {
    li[i][i] = 1.0 / l[i][i];
    for (int j = 0; j < i; ++j) {
      double s = 0.0;
      for (int k = j; k < i; ++k) s -= l[i][k] * li[k][j];
      li[i][j] = s / l[i][i];
    }
  }
  SymMat inv(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = j; k < n; ++k) s += li[k][i] * li[k][j];
      inv(i, j) = s;
    }
  return inv;
}

GeometrySample graph_geometry(const SymMat& hess, const Sym3Tensor& third) {
  const int n = hess.n();
  GeometrySample gs;
  gs.n = n;
  gs.lambda = sym_eigenvalues(hess);
  for (int i = 0; i < n; ++i) gs.theta += std::atan(gs.lambda[static_cast<std::size_t>(i)]);
  const SymMat sq = hess.squared();
  const SymMat id = SymMat::identity(n);
  gs.g = id + sq;
  gs.s = id - sq;
  gs.g_inv = spd_inverse(gs.g);

  gs.h = Sym3Tensor(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) gs.h(i, j, k) = -third(i, j, k);

  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += gs.g_inv(j, k) * gs.h(i, j, k);
    gs.H[static_cast<std::size_t>(i)] = s;
  }
  double h2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h2 += gs.g_inv(i, j) * gs.H[static_cast<std::size_t>(i)] * gs.H[static_cast<std::size_t>(j)];
  gs.normH2 = std::max(h2, 0.0);

  // Raise the three indices one at a time, then contract with h.
  constexpr int N = SymMat::kMaxN;
  double t1[N][N][N]{};
  double t2[N][N][N]{};
  for (int p = 0; p < n; ++p)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += gs.g_inv(p, i) * gs.h(i, j, k);
        t1[p][j][k] = s;
      }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += gs.g_inv(q, j) * t1[p][j][k];
        t2[p][q][k] = s;
      }
  double a2 = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += gs.g_inv(r, k) * t2[p][q][k];
        a2 += gs.h(p, q, r) * s;
      }
  gs.normA2 = std::max(a2, 0.0);
  return gs;
}

double metric_trace_of_s(const GeometrySample& sample) {
  double s = 0.0;
  for (int i = 0; i < sample.n; ++i)
    for (int j = 0; j < sample.n; ++j) s += sample.g_inv(i, j) * sample.s(i, j);
  return s;
}

double pinch_margin(const SymMat& hess, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("pinch_margin: eps must lie in [0, 1)");
  const int n = hess.n();
  const SymMat sq = hess.squared();
  const SymMat id = SymMat::identity(n);
  const SymMat m = (id - sq) - eps * (id + sq);
  return sym_eigenvalues(m)[0];
}

double pinch_threshold(double spectral_radius) {
  const double r2 = spectral_radius * spectral_radius;
  return (1.0 - r2) / (1.0 + r2);
}

std::pair<double, double> hessian_eig_extremes(const SymMatField& field) {
  const std::size_t n = field.grid().size();
  const int dim = field.grid().ndim();
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  detail::parallel_range(n, [&](std::size_t p) {
    const auto ev = sym_eigenvalues(field.at(p));
    lo[p] = ev[0];
    hi[p] = ev[static_cast<std::size_t>(dim - 1)];
  });
  const double mn = detail::parallel_min(n, [&](std::size_t p) { return lo[p]; });
  const double mx = detail::parallel_max(n, [&](std::size_t p) { return hi[p]; });
  return {mn, mx};
}

}  // namespace lagmcf
