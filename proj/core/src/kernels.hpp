#pragma once

// Internal stencil machinery shared by the grid, flow and analysis kernels.
// Every public derivative routine goes through these helpers so that, e.g.,
// the Hessian used by the flow is bitwise the Hessian reported by hessian().

#include <algorithm>
#include <cstddef>
#include <limits>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/parallel_reduce.h>

#include "lagmcf/grid.hpp"
#include "lagmcf/symmat.hpp"

namespace lagmcf::detail {

/// Flat offsets to the +1 / -1 neighbours of one node along every axis.
struct Neighbors {
  std::size_t p = 0;
  std::ptrdiff_t up[kMaxDim]{};
  std::ptrdiff_t dn[kMaxDim]{};
};

inline Neighbors neighbors_of(const GridSpec& g, std::size_t p) {
  Neighbors nb;
  nb.p = p;
  const auto idx = g.unravel(p);
  for (int d = 0; d < g.ndim(); ++d) {
    const auto n = g.npts(d);
    const auto i = idx[static_cast<std::size_t>(d)];
    const auto s = static_cast<std::ptrdiff_t>(g.stride(d));
    nb.up[d] = (i + 1 == n) ? -static_cast<std::ptrdiff_t>(n - 1) * s : s;
    nb.dn[d] = (i == 0) ? static_cast<std::ptrdiff_t>(n - 1) * s : -s;
  }
  return nb;
}

/// Runs fn(nb) for every node; slabs along axis 0 are processed in parallel.
template <class Fn>
void for_each_node(const GridSpec& g, Fn&& fn) {
  const int nd = g.ndim();
  const std::size_t n0 = g.npts(0);
  const std::size_t slab = g.stride(0);
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n0), [&](const tbb::blocked_range<std::size_t>& r) {
    for (std::size_t i0 = r.begin(); i0 != r.end(); ++i0) {
      for (std::size_t q = 0; q < slab; ++q) {
        const std::size_t p = i0 * slab + q;
        Neighbors nb;
        nb.p = p;
        std::size_t rem = p;
        for (int d = 0; d < nd; ++d) {
          const std::size_t s = g.stride(d);
          const std::size_t i = rem / s;
          rem -= i * s;
          const std::size_t n = g.npts(d);
          const auto ss = static_cast<std::ptrdiff_t>(s);
          nb.up[d] = (i + 1 == n) ? -static_cast<std::ptrdiff_t>(n - 1) * ss : ss;
          nb.dn[d] = (i == 0) ? static_cast<std::ptrdiff_t>(n - 1) * ss : -ss;
        }
        fn(nb);
      }
    }
  });
}

/// Index-parallel loop over [0, n).
template <class Fn>
void parallel_range(std::size_t n, Fn&& fn) {
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
    for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
  });
}

/// Max of value(i) over [0, n); max is associative and commutative, so the
/// result does not depend on how TBB splits the range.
template <class Fn>
double parallel_max(std::size_t n, Fn&& value) {
  return tbb::parallel_reduce(
      tbb::blocked_range<std::size_t>(0, n), -std::numeric_limits<double>::infinity(),
      [&](const tbb::blocked_range<std::size_t>& r, double acc) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) acc = std::max(acc, value(i));
        return acc;
      },
      [](double a, double b) { return std::max(a, b); });
}

template <class Fn>
double parallel_min(std::size_t n, Fn&& value) {
  return -parallel_max(n, [&](std::size_t i) { return -value(i); });
}

inline double first_diff(const double* v, const Neighbors& nb, int d, double h) {
  return (v[nb.p + nb.up[d]] - v[nb.p + nb.dn[d]]) / (2.0 * h);
}

inline double second_diff(const double* v, const Neighbors& nb, int d, double h) {
  return (v[nb.p + nb.up[d]] - 2.0 * v[nb.p] + v[nb.p + nb.dn[d]]) / (h * h);
}

inline double cross_diff(const double* v, const Neighbors& nb, int a, int b, double ha, double hb) {
  const std::size_t p = nb.p;
  const double pp = v[p + nb.up[a] + nb.up[b]];
  const double pm = v[p + nb.up[a] + nb.dn[b]];
  const double mp = v[p + nb.dn[a] + nb.up[b]];
  const double mm = v[p + nb.dn[a] + nb.dn[b]];
  return (pp - pm - mp + mm) / (4.0 * ha * hb);
}

inline SymMat hessian_kernel(const double* v, const GridSpec& g, const Neighbors& nb) {
  const int n = g.ndim();
  SymMat m(n);
  for (int a = 0; a < n; ++a) {
    m(a, a) = second_diff(v, nb, a, g.spacing(a));
    for (int b = a + 1; b < n; ++b) m(a, b) = cross_diff(v, nb, a, b, g.spacing(a), g.spacing(b));
  }
  return m;
}

}  // namespace lagmcf::detail
