#include "lagmcf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "kernels.hpp"
#include "lagmcf/errors.hpp"
#include "lagmcf/geometry.hpp"

namespace lagmcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Extremes {
  double sup_H2 = 0.0;
  double sup_D3 = 0.0;
  double eig_min = kInf;
  double eig_max = -kInf;
  double theta_min = kInf;
  double theta_max = -kInf;
  double sup_Du = 0.0;
  double pinch_min = kInf;

  void merge(const Extremes& o) {
    sup_H2 = std::max(sup_H2, o.sup_H2);
    sup_D3 = std::max(sup_D3, o.sup_D3);
    eig_min = std::min(eig_min, o.eig_min);
    eig_max = std::max(eig_max, o.eig_max);
    theta_min = std::min(theta_min, o.theta_min);
    theta_max = std::max(theta_max, o.theta_max);
    sup_Du = std::max(sup_Du, o.sup_Du);
    pinch_min = std::min(pinch_min, o.pinch_min);
  }
};

const char* const kColumns[] = {"t",         "sup_H2",  "sup_D3u2", "t_supH2",   "t_supD3u2",
                                "eig_min",   "eig_max", "osc_theta", "sup_Du",   "pinch_min"};

double DiagnosticsRecord::*const kMembers[] = {
    &DiagnosticsRecord::t,         &DiagnosticsRecord::sup_H2,  &DiagnosticsRecord::sup_D3u2,
    &DiagnosticsRecord::t_supH2,   &DiagnosticsRecord::t_supD3u2, &DiagnosticsRecord::eig_min,
    &DiagnosticsRecord::eig_max,   &DiagnosticsRecord::osc_theta, &DiagnosticsRecord::sup_Du,
    &DiagnosticsRecord::pinch_min};

template <class ThetaAt>
Residual residual_over(const GridSpec& g, StencilMode mode, ThetaAt&& value_at) {
  // value_at(p, out) returns false for skipped nodes
  struct Acc {
    double sup = -1.0;
    std::size_t arg = 0;
    std::size_t count = 0;
  };
  const Acc acc = tbb::parallel_reduce(
      tbb::blocked_range<std::size_t>(0, g.size()), Acc{},
      [&](const tbb::blocked_range<std::size_t>& r, Acc a) {
        for (std::size_t p = r.begin(); p != r.end(); ++p) {
          double v = 0.0;
          if (!value_at(p, mode, v)) continue;
          ++a.count;
          const double e = std::abs(v);
          if (e > a.sup || (e == a.sup && p < a.arg)) {
            a.sup = e;
            a.arg = p;
          }
        }
        return a;
      },
      [](Acc x, const Acc& y) {
        x.count += y.count;
        if (y.sup > x.sup || (y.sup == x.sup && y.arg < x.arg)) {
          x.sup = y.sup;
          x.arg = y.arg;
        }
        return x;
      });
  Residual out;
  out.sup = acc.count > 0 ? acc.sup : 0.0;
  out.argmax = acc.arg;
  out.evaluated = acc.count;
  return out;
}

// Soliton expression evaluated in a fixed order so that a = b = 0 reduces
// to theta - c exactly.
double soliton_value(double theta, const double* du, const std::array<double, kMaxDim>& x, const SolitonSpec& s,
                     int n) {
  double adu = 0.0;
  double bx = 0.0;
  for (int i = 0; i < n; ++i) {
    adu += s.a[static_cast<std::size_t>(i)] * du[i];
    bx += s.b[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  }
  return ((theta + adu) - bx) - s.c;
}

}  // namespace

DiagnosticsRecord diagnostics(const FlowState& state, double eps) {
  const Potential& u = state.u;
  const GridSpec& g = u.grid();
  const int n = g.ndim();
  const SymMat& quad = u.background_hessian();
  const auto third = third_derivatives(u.periodic());
  const VectorField du = u.gradient();
  const double* v = u.periodic().values().data();

  const Extremes ex = tbb::parallel_reduce(
      tbb::blocked_range<std::size_t>(0, g.size()), Extremes{},
      [&](const tbb::blocked_range<std::size_t>& r, Extremes acc) {
        for (std::size_t p = r.begin(); p != r.end(); ++p) {
          const auto nb = detail::neighbors_of(g, p);
          const SymMat hess = quad + detail::hessian_kernel(v, g, nb);
          const Sym3Tensor t3 = third.field.at(p);
          const GeometrySample gs = graph_geometry(hess, t3);
          acc.sup_H2 = std::max(acc.sup_H2, gs.normH2);
          acc.sup_D3 = std::max(acc.sup_D3, t3.norm2());
          acc.eig_min = std::min(acc.eig_min, gs.lambda[0]);
          acc.eig_max = std::max(acc.eig_max, gs.lambda[static_cast<std::size_t>(n - 1)]);
          acc.theta_min = std::min(acc.theta_min, gs.theta);
          acc.theta_max = std::max(acc.theta_max, gs.theta);
          double s = 0.0;
          for (int i = 0; i < n; ++i) s += du(p, i) * du(p, i);
          acc.sup_Du = std::max(acc.sup_Du, std::sqrt(s));
          acc.pinch_min = std::min(acc.pinch_min, pinch_margin(hess, eps));
        }
        return acc;
      },
      [](Extremes a, const Extremes& b) {
        a.merge(b);
        return a;
      });

  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.sup_H2 = ex.sup_H2;
  rec.sup_D3u2 = ex.sup_D3;
  rec.t_supH2 = state.t * ex.sup_H2;
  rec.t_supD3u2 = state.t * ex.sup_D3;
  rec.eig_min = ex.eig_min;
  rec.eig_max = ex.eig_max;
  rec.osc_theta = ex.theta_max - ex.theta_min;
  rec.sup_Du = ex.sup_Du;
  rec.pinch_min = ex.pinch_min;
  return rec;
}

PreservationReport preservation_report(const DiagnosticsSeries& series, double delta, double tol) {
  PreservationReport rep;
  rep.worst_eig_excess = -kInf;
  rep.worst_pinch = kInf;
  const double bound = 1.0 - delta;
  for (const auto& r : series) {
    const double excess = std::max(r.eig_max, -r.eig_min) - bound;
    rep.worst_eig_excess = std::max(rep.worst_eig_excess, excess);
    rep.worst_pinch = std::min(rep.worst_pinch, r.pinch_min);
    if (!rep.first_violation_t) {
      if (!(excess <= tol)) {
        rep.first_violation_t = r.t;
        rep.first_violation_check = "hessian_bounds";
      } else if (!(r.pinch_min >= -tol)) {
        rep.first_violation_t = r.t;
        rep.first_violation_check = "pinching";
      }
    }
  }
  rep.pass = !rep.first_violation_t.has_value();
  return rep;
}

DecayReport decay_report(const DiagnosticsSeries& series, double t_min) {
  auto it = std::find_if(series.begin(), series.end(), [&](const DiagnosticsRecord& r) { return r.t >= t_min; });
  if (it == series.end()) throw ValidationError("decay_report: no sample at or after t_min");
  DecayReport rep;
  rep.anchor_t = it->t;
  rep.anchor_tH2 = it->t_supH2;
  rep.anchor_tD3 = it->t_supD3u2;
  for (auto k = it; k != series.end(); ++k) {
    rep.max_tH2 = std::max(rep.max_tH2, k->t_supH2);
    rep.max_tD3 = std::max(rep.max_tD3, k->t_supD3u2);
  }
  rep.final_below_anchor_H2 = series.back().t_supH2 <= rep.anchor_tH2;
  rep.final_below_anchor_D3 = series.back().t_supD3u2 <= rep.anchor_tD3;
  return rep;
}

MonotoneReport nonincreasing_report(const DiagnosticsSeries& series, double DiagnosticsRecord::*column,
                                    double rate_tol) {
  MonotoneReport rep;
  rep.worst_rate = -kInf;
  for (std::size_t k = 1; k < series.size(); ++k) {
    const double dt = series[k].t - series[k - 1].t;
    const double dv = series[k].*column - series[k - 1].*column;
    rep.worst_rate = std::max(rep.worst_rate, dt > 0.0 ? dv / dt : (dv > 0.0 ? kInf : 0.0));
    if (!rep.first_violation_t && dv > rate_tol * dt) rep.first_violation_t = series[k].t;
  }
  if (series.size() < 2) rep.worst_rate = 0.0;
  rep.pass = !rep.first_violation_t.has_value();
  return rep;
}

Residual special_lagrangian_residual(const ScalarField& u, double Theta, StencilMode mode) {
  const GridSpec& g = u.grid();
  return residual_over(g, mode, [&](std::size_t p, StencilMode m, double& out) {
    SymMat hess;
    if (m == StencilMode::interior) {
      if (!interior_hessian_at(u, p, hess)) return false;
    } else {
      hess = hessian_at(u, p);
    }
    out = lagrangian_angle(hess) - Theta;
    return true;
  });
}

Residual special_lagrangian_residual(const Potential& u, double Theta) {
  const GridSpec& g = u.grid();
  return residual_over(g, StencilMode::periodic, [&](std::size_t p, StencilMode, double& out) {
    out = lagrangian_angle(u.hessian_at(p)) - Theta;
    return true;
  });
}

Residual soliton_residual(const ScalarField& u, const SolitonSpec& spec, StencilMode mode) {
  const GridSpec& g = u.grid();
  const int n = g.ndim();
  const double* v = u.values().data();
  return residual_over(g, mode, [&](std::size_t p, StencilMode m, double& out) {
    SymMat hess;
    double du[kMaxDim] = {};
    if (m == StencilMode::interior) {
      if (!interior_hessian_at(u, p, hess)) return false;
      interior_gradient_at(u, p, std::span<double>(du, static_cast<std::size_t>(n)));
    } else {
      const auto nb = detail::neighbors_of(g, p);
      hess = detail::hessian_kernel(v, g, nb);
      for (int d = 0; d < n; ++d) du[d] = detail::first_diff(v, nb, d, g.spacing(d));
    }
    out = soliton_value(lagrangian_angle(hess), du, g.point(p), spec, n);
    return true;
  });
}

Residual soliton_residual(const Potential& u, const SolitonSpec& spec) {
  const GridSpec& g = u.grid();
  const int n = g.ndim();
  const VectorField grad = u.gradient();
  return residual_over(g, StencilMode::periodic, [&](std::size_t p, StencilMode, double& out) {
    double du[kMaxDim] = {};
    for (int d = 0; d < n; ++d) du[d] = grad(p, d);
    out = soliton_value(lagrangian_angle(u.hessian_at(p)), du, g.point(p), spec, n);
    return true;
  });
}

ConvergenceVerdict convergence_check(const FlowState& state, const LiftDecomposition& lift, double tol) {
  const Potential& u = state.u;
  const GridSpec& g = u.grid();
  const int n = g.ndim();
  if (lift.n != n || lift.A.size() != static_cast<std::size_t>(n * n)) {
    throw ValidationError("convergence_check: lift dimension does not match the state");
  }
  const SymMat A = SymMat::from_dense(n, lift.A);
  ConvergenceVerdict v;
  v.sup_hess_dev = detail::parallel_max(g.size(), [&](std::size_t p) {
    const auto ev = sym_eigenvalues(u.hessian_at(p) - A);
    return std::max(std::abs(ev[0]), std::abs(ev[static_cast<std::size_t>(n - 1)]));
  });
  const VectorField du = u.gradient();
  for (int i = 0; i < n; ++i) {
    auto comp = [&](std::size_t p) {
      const auto x = g.point(p);
      double ax = 0.0;
      for (int j = 0; j < n; ++j) ax += lift.A[static_cast<std::size_t>(i * n + j)] * x[static_cast<std::size_t>(j)];
      return du(p, i) - ax;
    };
    const double hi = detail::parallel_max(g.size(), comp);
    const double lo = detail::parallel_min(g.size(), comp);
    v.osc_periodic_grad = std::max(v.osc_periodic_grad, hi - lo);
  }
  v.pass = v.sup_hess_dev <= tol && v.osc_periodic_grad <= tol;
  return v;
}

void write_diagnostics_csv(std::ostream& os, const DiagnosticsSeries& series) {
  for (std::size_t c = 0; c < std::size(kColumns); ++c) os << (c ? "," : "") << kColumns[c];
  os << '\n';
  char buf[32];
  for (const auto& r : series) {
    for (std::size_t c = 0; c < std::size(kMembers); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", r.*kMembers[c]);
      os << (c ? "," : "") << buf;
    }
    os << '\n';
  }
}

void write_diagnostics_csv(const std::string& path, const DiagnosticsSeries& series) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_diagnostics_csv(os, series);
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

DiagnosticsSeries read_diagnostics_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(is, line)) throw FormatError("diagnostics CSV: empty input");
  const auto header = split(line);
  std::size_t pos[std::size(kColumns)];
  for (std::size_t c = 0; c < std::size(kColumns); ++c) {
    const auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) throw FormatError(std::string("diagnostics CSV: missing column '") + kColumns[c] + "'");
    pos[c] = static_cast<std::size_t>(it - header.begin());
  }
  DiagnosticsSeries series;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw FormatError("diagnostics CSV: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(header.size()));
    }
    DiagnosticsRecord r;
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
      const std::string& s = cells[pos[c]];
      char* end = nullptr;
      const double val = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) {
        throw FormatError("diagnostics CSV: row " + std::to_string(row) + " column '" + kColumns[c] +
                          "' is not a number");
      }
      r.*kMembers[c] = val;
    }
    series.push_back(r);
  }
  return series;
}

DiagnosticsSeries read_diagnostics_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_diagnostics_csv(is);
}

}  // namespace lagmcf
