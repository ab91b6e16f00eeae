#include "lagmcf/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kernels.hpp"
#include "lagmcf/errors.hpp"

namespace lagmcf {

GridSpec::GridSpec(std::span<const std::size_t> npts, std::span<const double> spacing,
                   std::span<const double> origin) {
  const auto nd = npts.size();
  if (nd < 1 || nd > static_cast<std::size_t>(kMaxDim)) {
    throw ValidationError("grid: ndim must be 1, 2 or 3, got " + std::to_string(nd));
  }
  if (spacing.size() != nd || (!origin.empty() && origin.size() != nd)) {
    throw ValidationError("grid: npts, spacing and origin must have ndim entries");
  }
  ndim_ = static_cast<int>(nd);
  std::size_t total = 1;
  for (std::size_t d = 0; d < nd; ++d) {
    if (npts[d] < 8 || npts[d] % 2 != 0) {
      throw ValidationError("grid: npts[" + std::to_string(d) + "] must be even and >= 8, got " +
                            std::to_string(npts[d]));
    }
    if (!(spacing[d] > 0.0) || !std::isfinite(spacing[d])) {
      throw ValidationError("grid: spacing[" + std::to_string(d) + "] must be positive and finite");
    }
    if (!origin.empty() && !std::isfinite(origin[d])) {
      throw ValidationError("grid: origin[" + std::to_string(d) + "] must be finite");
    }
    if (total > std::numeric_limits<std::size_t>::max() / npts[d]) {
      throw ValidationError("grid: total point count overflows the index type");
    }
    total *= npts[d];
    npts_[d] = npts[d];
    spacing_[d] = spacing[d];
    origin_[d] = origin.empty() ? 0.0 : origin[d];
  }
  size_ = total;
  std::size_t s = 1;
  for (int d = ndim_ - 1; d >= 0; --d) {
    stride_[static_cast<std::size_t>(d)] = s;
    s *= npts_[static_cast<std::size_t>(d)];
  }
}

GridSpec GridSpec::periodic(std::span<const std::size_t> npts, std::span<const double> extent,
                            std::span<const double> origin) {
  if (extent.size() != npts.size()) {
    throw ValidationError("grid: extent must have ndim entries");
  }
  std::array<double, kMaxDim> spacing{};
  for (std::size_t d = 0; d < npts.size() && d < spacing.size(); ++d) {
    if (!(extent[d] > 0.0) || !std::isfinite(extent[d])) {
      throw ValidationError("grid: extent[" + std::to_string(d) + "] must be positive and finite");
    }
    spacing[d] = npts[d] > 0 ? extent[d] / static_cast<double>(npts[d]) : 0.0;
  }
  return GridSpec(npts, std::span<const double>(spacing.data(), std::min<std::size_t>(npts.size(), kMaxDim)),
                  origin);
}

GridSpec GridSpec::cube(int ndim, std::size_t npts, double extent, double origin) {
  if (ndim < 1 || ndim > kMaxDim) throw ValidationError("grid: ndim must be 1, 2 or 3");
  const auto nd = static_cast<std::size_t>(ndim);
  std::array<std::size_t, kMaxDim> n{npts, npts, npts};
  std::array<double, kMaxDim> e{extent, extent, extent};
  std::array<double, kMaxDim> o{origin, origin, origin};
  return periodic({n.data(), nd}, {e.data(), nd}, {o.data(), nd});
}

double GridSpec::min_spacing() const {
  double h = spacing(0);
  for (int d = 1; d < ndim_; ++d) h = std::min(h, spacing(d));
  return h;
}

std::array<std::size_t, kMaxDim> GridSpec::unravel(std::size_t flat) const {
  std::array<std::size_t, kMaxDim> idx{};
  for (int d = 0; d < ndim_; ++d) {
    const auto s = stride(d);
    idx[static_cast<std::size_t>(d)] = flat / s;
    flat -= idx[static_cast<std::size_t>(d)] * s;
  }
  return idx;
}

std::size_t GridSpec::ravel(const std::array<std::size_t, kMaxDim>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < ndim_; ++d) flat += idx[static_cast<std::size_t>(d)] * stride(d);
  return flat;
}

std::size_t GridSpec::wrapped(const std::array<long, kMaxDim>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < ndim_; ++d) {
    const auto n = static_cast<long>(npts(d));
    long i = idx[static_cast<std::size_t>(d)] % n;
    if (i < 0) i += n;
    flat += static_cast<std::size_t>(i) * stride(d);
  }
  return flat;
}

std::array<double, kMaxDim> GridSpec::point(std::size_t flat) const {
  const auto idx = unravel(flat);
  std::array<double, kMaxDim> x{};
  for (int d = 0; d < ndim_; ++d) x[static_cast<std::size_t>(d)] = coord(d, idx[static_cast<std::size_t>(d)]);
  return x;
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  if (a.ndim_ != b.ndim_) return false;
  for (int d = 0; d < a.ndim_; ++d) {
    if (a.npts(d) != b.npts(d) || a.spacing(d) != b.spacing(d) || a.origin(d) != b.origin(d)) return false;
  }
  return true;
}

ScalarField::ScalarField(GridSpec grid, double fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ValidationError("field: expected " + std::to_string(grid_.size()) + " values, got " +
                          std::to_string(values_.size()));
  }
}

std::size_t ScalarField::first_nonfinite() const {
  for (std::size_t p = 0; p < values_.size(); ++p)
    if (!std::isfinite(values_[p])) return p;
  return values_.size();
}

VectorField::VectorField(GridSpec grid, int ncomp)
    : grid_(std::move(grid)), ncomp_(ncomp), data_(grid_.size() * static_cast<std::size_t>(ncomp), 0.0) {}

ScalarField VectorField::component(int c) const {
  ScalarField out(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) out[p] = (*this)(p, c);
  return out;
}

SymMatField::SymMatField(GridSpec grid)
    : grid_(std::move(grid)), data_(grid_.size() * static_cast<std::size_t>(ncomp()), 0.0) {}

SymMat SymMatField::at(std::size_t p) const {
  SymMat m(grid_.ndim());
  auto dst = m.packed();
  const auto nc = static_cast<std::size_t>(ncomp());
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(p * nc), nc, dst.begin());
  return m;
}

void SymMatField::set(std::size_t p, const SymMat& m) {
  const auto nc = static_cast<std::size_t>(ncomp());
  std::copy_n(m.packed().begin(), nc, data_.begin() + static_cast<std::ptrdiff_t>(p * nc));
}

Rank3Field::Rank3Field(GridSpec grid)
    : grid_(std::move(grid)), data_(grid_.size() * static_cast<std::size_t>(ncomp()), 0.0) {}

Sym3Tensor Rank3Field::at(std::size_t p) const {
  Sym3Tensor t(grid_.ndim());
  auto dst = t.packed();
  const auto nc = static_cast<std::size_t>(ncomp());
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(p * nc), nc, dst.begin());
  return t;
}

void Rank3Field::set(std::size_t p, const Sym3Tensor& t) {
  const auto nc = static_cast<std::size_t>(ncomp());
  std::copy_n(t.packed().begin(), nc, data_.begin() + static_cast<std::ptrdiff_t>(p * nc));
}

VectorField gradient(const ScalarField& f) {
  const auto& g = f.grid();
  VectorField out(g, g.ndim());
  const double* v = f.values().data();
  detail::for_each_node(g, [&](const detail::Neighbors& nb) {
    for (int d = 0; d < g.ndim(); ++d) out(nb.p, d) = detail::first_diff(v, nb, d, g.spacing(d));
  });
  return out;
}

SymMatField hessian(const ScalarField& f) {
  const auto& g = f.grid();
  SymMatField out(g);
  const double* v = f.values().data();
  detail::for_each_node(g, [&](const detail::Neighbors& nb) { out.set(nb.p, detail::hessian_kernel(v, g, nb)); });
  return out;
}

SymMat hessian_at(const ScalarField& f, std::size_t p) {
  return detail::hessian_kernel(f.values().data(), f.grid(), detail::neighbors_of(f.grid(), p));
}

ThirdDerivatives third_derivatives(const ScalarField& f) {
  const auto& g = f.grid();
  const int n = g.ndim();
  const SymMatField hess = hessian(f);
  const int hc = hess.ncomp();
  const double* hv = hess.data().data();
  ThirdDerivatives out{Rank3Field(g), 0.0};
  std::vector<double> asym(g.size(), 0.0);

  detail::for_each_node(g, [&](const detail::Neighbors& nb) {
    // D_a H_bc, centered along axis a.
    auto dH = [&](int a, int b, int c) {
      const auto slot = static_cast<std::ptrdiff_t>(SymMat::packed_index(n, b, c));
      const auto up = static_cast<std::ptrdiff_t>(nb.p) + nb.up[a];
      const auto dn = static_cast<std::ptrdiff_t>(nb.p) + nb.dn[a];
      return (hv[up * hc + slot] - hv[dn * hc + slot]) / (2.0 * g.spacing(a));
    };
    Sym3Tensor t(n);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) {
          const double v1 = dH(i, j, k);
          const double v2 = dH(j, i, k);
          const double v3 = dH(k, i, j);
          const double avg = (v1 + v2 + v3) / 3.0;
          worst = std::max({worst, std::abs(v1 - avg), std::abs(v2 - avg), std::abs(v3 - avg)});
          t(i, j, k) = avg;
        }
    out.field.set(nb.p, t);
    asym[nb.p] = worst;
  });
  out.max_asymmetry = detail::parallel_max(asym.size(), [&](std::size_t p) { return asym[p]; });
  return out;
}

namespace {

bool interior_neighbors(const GridSpec& g, std::size_t p, detail::Neighbors& nb) {
  const auto idx = g.unravel(p);
  for (int d = 0; d < g.ndim(); ++d) {
    const auto i = idx[static_cast<std::size_t>(d)];
    if (i == 0 || i + 1 >= g.npts(d)) return false;
  }
  nb = detail::neighbors_of(g, p);
  return true;
}

}  // namespace

bool interior_hessian_at(const ScalarField& f, std::size_t p, SymMat& out) {
  detail::Neighbors nb;
  if (!interior_neighbors(f.grid(), p, nb)) return false;
  out = detail::hessian_kernel(f.values().data(), f.grid(), nb);
  return true;
}

bool interior_gradient_at(const ScalarField& f, std::size_t p, std::span<double> out) {
  detail::Neighbors nb;
  const auto& g = f.grid();
  if (!interior_neighbors(g, p, nb)) return false;
  for (int d = 0; d < g.ndim(); ++d)
    out[static_cast<std::size_t>(d)] = detail::first_diff(f.values().data(), nb, d, g.spacing(d));
  return true;
}

}  // namespace lagmcf
