#include "lagmcf/potential.hpp"

#include "kernels.hpp"
#include "lagmcf/errors.hpp"

namespace lagmcf {

Potential::Potential(ScalarField periodic) : periodic_(std::move(periodic)), quad_(periodic_.grid().ndim()) {}

Potential::Potential(ScalarField periodic, SymMat background_hessian, std::array<double, kMaxDim> background_slope)
    : periodic_(std::move(periodic)), quad_(background_hessian), slope_(background_slope) {
  if (quad_.n() != periodic_.grid().ndim()) {
    throw ValidationError("potential: background Hessian dimension does not match the grid");
  }
}

bool Potential::has_background() const {
  for (double v : quad_.packed())
    if (v != 0.0) return true;
  for (int d = 0; d < grid().ndim(); ++d)
    if (slope_[static_cast<std::size_t>(d)] != 0.0) return true;
  return false;
}

SymMat Potential::hessian_at(std::size_t p) const { return quad_ + lagmcf::hessian_at(periodic_, p); }

SymMatField Potential::hessian() const {
  const auto& g = grid();
  SymMatField out(g);
  const double* v = periodic_.values().data();
  detail::for_each_node(g, [&](const detail::Neighbors& nb) {
    out.set(nb.p, quad_ + detail::hessian_kernel(v, g, nb));
  });
  return out;
}

VectorField Potential::gradient() const {
  const auto& g = grid();
  const int n = g.ndim();
  VectorField out(g, n);
  const double* v = periodic_.values().data();
  detail::for_each_node(g, [&](const detail::Neighbors& nb) {
    const auto x = g.point(nb.p);
    for (int i = 0; i < n; ++i) {
      double ax = 0.0;
      for (int j = 0; j < n; ++j) ax += quad_(i, j) * x[static_cast<std::size_t>(j)];
      out(nb.p, i) = ax + slope_[static_cast<std::size_t>(i)] + detail::first_diff(v, nb, i, g.spacing(i));
    }
  });
  return out;
}

ScalarField Potential::sampled() const {
  const auto& g = grid();
  const int n = g.ndim();
  ScalarField out(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.point(p);
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto xi = x[static_cast<std::size_t>(i)];
      q += slope_[static_cast<std::size_t>(i)] * xi;
      for (int j = 0; j < n; ++j) q += 0.5 * quad_(i, j) * xi * x[static_cast<std::size_t>(j)];
    }
    out[p] = q + periodic_[p];
  }
  return out;
}

}  // namespace lagmcf
