// lagmcf command-line front end.
//
// Exit codes: 0 success, 1 validation error, 2 numerical abort, 3 I/O or
// malformed input.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lagmcf/analysis.hpp"
#include "lagmcf/errors.hpp"
#include "lagmcf/field_io.hpp"
#include "lagmcf/flow.hpp"
#include "lagmcf/geometry.hpp"
#include "lagmcf/initdata.hpp"
#include "lagmcf/parallel.hpp"
#include "run_config.hpp"

using namespace lagmcf;

namespace {

enum Exit { kOk = 0, kValidation = 1, kBlowup = 2, kIo = 3 };

// -- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<int> ndim;
  std::optional<std::size_t> npts;
  std::optional<double> extent;
  std::optional<std::string> preset;
  std::optional<double> amplitude;
  std::optional<std::uint64_t> seed;
  std::optional<double> mollify_tau;
  std::optional<double> sigma;
  std::optional<std::string> scheme;
  std::optional<double> t_end;
  std::optional<int> sample_every;
  std::optional<std::string> eps;
  std::optional<double> delta;
  std::optional<std::string> out_field;
  std::optional<std::string> out_csv;
  std::optional<std::string> snapshot_prefix;
};

void apply_overrides(cli::RunConfig& cfg, const SimulateArgs& a) {
  if (a.ndim) cfg.grid.ndim = *a.ndim;
  if (a.npts) cfg.grid.npts = {*a.npts};
  if (a.extent) cfg.grid.extent = {*a.extent};
  if (a.preset) cfg.preset.kind = parse_preset_kind(*a.preset);
  if (a.amplitude) cfg.preset.amplitude = *a.amplitude;
  if (a.seed) cfg.preset.seed = *a.seed;
  if (a.mollify_tau) cfg.mollify_tau = *a.mollify_tau;
  if (a.sigma) cfg.control.sigma = *a.sigma;
  if (a.scheme) cfg.control.scheme = parse_scheme(*a.scheme);
  if (a.t_end) cfg.control.t_end = *a.t_end;
  if (a.sample_every) cfg.control.sample_every = *a.sample_every;
  if (a.eps) {
    if (*a.eps == "auto") {
      cfg.eps_pinch.reset();
    } else {
      try {
        std::size_t used = 0;
        cfg.eps_pinch = std::stod(*a.eps, &used);
        if (used != a.eps->size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw ValidationError("eps_pinch: expected a number or \"auto\"");
      }
    }
  }
  if (a.delta) cfg.delta = *a.delta;
  if (a.out_field) cfg.output.field = *a.out_field;
  if (a.out_csv) cfg.output.diagnostics = *a.out_csv;
  if (a.snapshot_prefix) cfg.output.snapshot_prefix = *a.snapshot_prefix;
}

int cmd_simulate(const SimulateArgs& args) {
  cli::RunConfig cfg = args.config.empty() ? cli::RunConfig{} : cli::load_run_config(args.config);
  apply_overrides(cfg, args);
  cli::validate(cfg);
  const GridSpec grid = cli::build_grid(cfg.grid);
  Potential u = make_preset(cfg.preset, grid);
  if (cfg.mollify_tau) {
    MollifyInfo info;
    ScalarField smooth = mollify(u.periodic(), *cfg.mollify_tau, &info);
    if (info.clamped) {
      std::fprintf(stderr, "warning: mollify_tau %.6g is below the grid scale; using %.6g\n", info.tau_requested,
                   info.tau_used);
    }
    u = Potential(std::move(smooth), u.background_hessian(), u.background_slope());
  }

  double eps = 0.0;
  if (cfg.eps_pinch) {
    eps = *cfg.eps_pinch;
  } else {
    const auto ext = hessian_eig_extremes(u.hessian());
    const double r0 = std::max(std::abs(ext.first), std::abs(ext.second));
    if (!(r0 < 1.0)) throw ValidationError("eps_pinch: auto needs initial Hessian spectral radius < 1");
    // flat data has threshold 1, which is outside the admissible range
    eps = std::min(pinch_threshold(r0), 0.999);
  }

  int snap_index = 0;
  auto on_stop = [&](const FlowState& s) {
    if (cfg.output.snapshot_prefix.empty()) return;
    const std::string path = cfg.output.snapshot_prefix + "_" + std::to_string(snap_index++) + ".lgf";
    write_lgf1(s.u.sampled(), path);
    std::printf("snapshot t=%.17g %s\n", s.t, path.c_str());
  };
  RunResult r = run(FlowState{std::move(u), 0.0, 0}, cfg.control, eps, on_stop);

  if (!cfg.output.diagnostics.empty()) write_diagnostics_csv(cfg.output.diagnostics, r.series);
  if (!cfg.output.field.empty()) write_lgf1(r.final_state.u.sampled(), cfg.output.field);

  std::printf("steps=%lld t=%.17g samples=%zu eps_pinch=%.17g\n", static_cast<long long>(r.final_state.step_count),
              r.final_state.t, r.series.size(), eps);
  if (!r.series.empty()) {
    const auto pres = preservation_report(r.series, cfg.delta, 0.0);
    const auto& last = r.series.back();
    std::printf("final eig=[%.6e, %.6e] sup_H2=%.6e osc_theta=%.6e bounds(delta=%g): %s\n", last.eig_min,
                last.eig_max, last.sup_H2, last.osc_theta, cfg.delta, pres.pass ? "held" : "exceeded");
  }
  if (r.aborted) {
    std::fprintf(stderr, "error: %s\n", r.error.c_str());
    return kBlowup;
  }
  return kOk;
}

// -- verify -------------------------------------------------------------------

struct VerifyArgs {
  std::string csv;
  double delta = 0.1;
  std::optional<double> eps;
  double tol = 1e-3;
  std::optional<double> t_min;
  double decay_factor = 10.0;
  double rate_tol = 1e-8;
  std::vector<std::string> checks{"hessian_bounds", "pinching", "decay", "osc_theta", "sup_Du"};
};

struct CheckLine {
  bool pass = true;
  std::string note;
};

int cmd_verify(const VerifyArgs& a) {
  for (const auto& c : a.checks) {
    if (c != "hessian_bounds" && c != "pinching" && c != "decay" && c != "osc_theta" && c != "sup_Du") {
      throw ValidationError("--checks: unknown check '" + c + "'");
    }
  }
  if (a.eps && !(*a.eps >= 0.0 && *a.eps < 1.0)) throw ValidationError("--eps: must lie in [0, 1)");
  const DiagnosticsSeries series = read_diagnostics_csv(a.csv);
  if (series.empty()) throw FormatError("diagnostics CSV: no data rows");

  auto at = [](double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "t=%.17g", t);
    return std::string(buf);
  };

  bool all = true;
  for (const auto& name : a.checks) {
    CheckLine line;
    if (name == "hessian_bounds") {
      const double bound = 1.0 - a.delta + a.tol;
      for (const auto& r : series)
        if (!(r.eig_max <= bound && r.eig_min >= -bound)) {
          line = {false, "at " + at(r.t) + ": eigenvalue outside +-(1 - delta) + tol"};
          break;
        }
    } else if (name == "pinching") {
      for (const auto& r : series) {
        double m = r.pinch_min;
        if (a.eps) {
          const double l2 = std::max(r.eig_max * r.eig_max, r.eig_min * r.eig_min);
          m = (1.0 - *a.eps) - (1.0 + *a.eps) * l2;
        }
        if (!(m >= -a.tol)) {
          line = {false, "at " + at(r.t) + ": pinch margin below -tol"};
          break;
        }
      }
    } else if (name == "decay") {
      double t_min = 0.0;
      if (a.t_min) {
        t_min = *a.t_min;
      } else {
        const auto it = std::find_if(series.begin(), series.end(), [](const DiagnosticsRecord& r) { return r.t > 0.0; });
        t_min = it == series.end() ? series.back().t : it->t;
      }
      const auto d = decay_report(series, t_min);
      if (!(d.max_tH2 <= a.decay_factor * d.anchor_tH2) || !(d.max_tD3 <= a.decay_factor * d.anchor_tD3)) {
        line = {false, "after anchor " + at(d.anchor_t) + ": decay product exceeds envelope"};
      } else if (!d.final_below_anchor_H2 || !d.final_below_anchor_D3) {
        line = {false, "at " + at(series.back().t) + ": final decay product above anchor " + at(d.anchor_t)};
      }
    } else {
      const auto column = name == "osc_theta" ? &DiagnosticsRecord::osc_theta : &DiagnosticsRecord::sup_Du;
      const auto m = nonincreasing_report(series, column, a.rate_tol);
      if (!m.pass) line = {false, "at " + at(*m.first_violation_t) + ": increased faster than rate tol"};
    }
    all = all && line.pass;
    std::printf("%s %s%s%s\n", line.pass ? "PASS" : "FAIL", name.c_str(), line.note.empty() ? "" : " ",
                line.note.c_str());
  }
  return all ? kOk : kValidation;
}

// -- mollify ------------------------------------------------------------------

struct MollifyArgs {
  std::string input;
  std::optional<double> tau;
  std::vector<double> k_list;
  std::string output;
  std::string out_prefix;
};

int cmd_mollify(const MollifyArgs& a) {
  if (a.tau.has_value() == !a.k_list.empty()) throw ValidationError("mollify: give exactly one of --tau or --k-list");
  const ScalarField u0 = read_lgf1(a.input);
  if (a.tau) {
    if (a.output.empty()) throw ValidationError("mollify: --output is required with --tau");
    MollifyInfo info;
    const ScalarField out = mollify(u0, *a.tau, &info);
    if (info.clamped) {
      std::fprintf(stderr, "warning: tau %.6g is below the grid scale; using %.6g\n", info.tau_requested,
                   info.tau_used);
    }
    write_lgf1(out, a.output);
    std::printf("tau_requested=%.17g tau_used=%.17g clamped=%d\n", info.tau_requested, info.tau_used,
                info.clamped ? 1 : 0);
    return kOk;
  }
  const auto seq = mollifier_sequence(u0, a.k_list);
  std::printf("k,tau,sup_err_u,sup_err_du\n");
  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    const auto& s = seq.steps[i];
    std::printf("%.17g,%.17g,%.17g,%.17g\n", s.k, s.tau, s.sup_err_u, s.sup_err_du);
    if (!a.out_prefix.empty()) write_lgf1(seq.fields[i], a.out_prefix + "_" + std::to_string(i) + ".lgf");
  }
  std::printf("monotone=%d\n", seq.monotone ? 1 : 0);
  return kOk;
}

// -- soliton-check ------------------------------------------------------------

struct SolitonArgs {
  std::string input;
  std::vector<double> a;
  std::vector<double> b;
  double c = 0.0;
  bool interior = false;
};

int cmd_soliton(const SolitonArgs& args) {
  const ScalarField u = read_lgf1(args.input);
  const auto n = static_cast<std::size_t>(u.grid().ndim());
  SolitonSpec spec;
  auto fill = [&](const std::vector<double>& src, std::array<double, kMaxDim>& dst, const char* flag) {
    if (src.empty()) return;
    if (src.size() != n) throw ValidationError(std::string(flag) + ": expected " + std::to_string(n) + " entries");
    std::copy(src.begin(), src.end(), dst.begin());
  };
  fill(args.a, spec.a, "--a");
  fill(args.b, spec.b, "--b");
  spec.c = args.c;
  const auto r = soliton_residual(u, spec, args.interior ? StencilMode::interior : StencilMode::periodic);
  const auto x = u.grid().point(r.argmax);
  std::printf("residual=%.17g nodes=%zu argmax=%zu x=(", r.sup, r.evaluated, r.argmax);
  for (std::size_t d = 0; d < n; ++d) std::printf("%s%.17g", d ? ", " : "", x[d]);
  std::printf(")\n");
  return kOk;
}

// -- rescale ------------------------------------------------------------------

struct RescaleArgs {
  std::vector<std::string> inputs;
  std::vector<double> times;
  double lambda = 1.0;
  std::vector<double> x0;
  double t0 = 0.0;
  std::string out_prefix;
  std::size_t out_npts = 0;
  double out_spacing = 0.0;
};

int cmd_rescale(const RescaleArgs& a) {
  if (a.inputs.size() != a.times.size()) throw ValidationError("--times: need one time per snapshot");
  std::vector<Snapshot> snaps;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) snaps.push_back({a.times[i], read_lgf1(a.inputs[i])});
  const GridSpec& src = snaps.front().u.grid();
  const auto n = static_cast<std::size_t>(src.ndim());
  RescaleOptions opt;
  opt.lambda = a.lambda;
  opt.t0 = a.t0;
  opt.out_npts = a.out_npts;
  opt.out_spacing = a.out_spacing;
  if (!a.x0.empty()) {
    if (a.x0.size() != n) throw ValidationError("--x0: expected " + std::to_string(n) + " entries");
    std::copy(a.x0.begin(), a.x0.end(), opt.x0.begin());
  }
  const auto out = parabolic_rescale(snaps, opt);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::string path;
    if (!a.out_prefix.empty()) {
      path = a.out_prefix + "_" + std::to_string(i) + ".lgf";
      write_lgf1(out[i].u, path);
    }
    std::printf("s=%.17g %s\n", out[i].t, path.c_str());
  }

  // With lambda = 1 on the source lattice the output must be the source minus
  // its tangent plane at x0, node for node.
  const bool aligned = a.out_spacing == 0.0;
  if (a.lambda == 1.0 && aligned) {
    std::array<std::size_t, kMaxDim> i0{};
    for (std::size_t d = 0; d < n; ++d) {
      i0[d] = static_cast<std::size_t>(std::llround((opt.x0[d] - src.origin(static_cast<int>(d))) /
                                                     src.spacing(static_cast<int>(d))));
    }
    const Snapshot& base = *std::find_if(snaps.begin(), snaps.end(),
                                         [&](const Snapshot& s) { return std::abs(s.t - a.t0) <= 1e-12 * std::max(1.0, std::abs(a.t0)); });
    const std::size_t p0 = src.ravel(i0);
    std::array<double, kMaxDim> g0{};
    interior_gradient_at(base.u, p0, g0);
    double worst = 0.0;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      const GridSpec& dst = out[k].u.grid();
      for (std::size_t q = 0; q < dst.size(); ++q) {
        const auto j = dst.unravel(q);
        std::array<std::size_t, kMaxDim> si{};
        double plane = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
          const long off = static_cast<long>(j[d]) - static_cast<long>(dst.npts(static_cast<int>(d)) / 2);
          si[d] = static_cast<std::size_t>(static_cast<long>(i0[d]) + off);
          plane += g0[d] * static_cast<double>(off) * src.spacing(static_cast<int>(d));
        }
        const double expect = snaps[k].u[src.ravel(si)] - base.u[p0] - plane;
        worst = std::max(worst, std::abs(out[k].u[q] - expect));
      }
    }
    std::printf("identity check: max deviation=%.3e %s\n", worst, worst <= 1e-12 ? "PASS" : "FAIL");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian mean curvature flow of graphs on periodic grids"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run the potential flow from a preset");
  s->add_option("--config", sim.config, "JSON run configuration");
  s->add_option("--ndim", sim.ndim);
  s->add_option("--npts", sim.npts, "points per axis");
  s->add_option("--extent", sim.extent, "cell extent per axis");
  s->add_option("--preset", sim.preset);
  s->add_option("--amplitude", sim.amplitude);
  s->add_option("--seed", sim.seed);
  s->add_option("--mollify-tau", sim.mollify_tau);
  s->add_option("--sigma", sim.sigma);
  s->add_option("--scheme", sim.scheme, "euler or rk2");
  s->add_option("--t-end", sim.t_end);
  s->add_option("--sample-every", sim.sample_every);
  s->add_option("--eps", sim.eps, "pinching parameter or 'auto'");
  s->add_option("--delta", sim.delta);
  s->add_option("--out-field", sim.out_field);
  s->add_option("--out-csv", sim.out_csv);
  s->add_option("--snapshot-prefix", sim.snapshot_prefix);

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "check a diagnostics CSV against the estimates");
  v->add_option("csv", ver.csv)->required();
  v->add_option("--delta", ver.delta);
  v->add_option("--eps", ver.eps, "recompute pinching from the eigenvalue columns at this eps");
  v->add_option("--tol", ver.tol);
  v->add_option("--t-min", ver.t_min, "decay anchor time");
  v->add_option("--decay-factor", ver.decay_factor);
  v->add_option("--rate-tol", ver.rate_tol);
  v->add_option("--checks", ver.checks)->delimiter(',');

  MollifyArgs mol;
  auto* m = app.add_subcommand("mollify", "heat-kernel mollification of a field");
  m->add_option("input", mol.input)->required();
  m->add_option("--tau", mol.tau);
  m->add_option("--k-list", mol.k_list)->delimiter(',');
  m->add_option("-o,--output", mol.output);
  m->add_option("--out-prefix", mol.out_prefix);

  SolitonArgs sol;
  auto* so = app.add_subcommand("soliton-check", "translating-soliton residual of a field");
  so->add_option("input", sol.input)->required();
  so->add_option("--a", sol.a)->delimiter(',');
  so->add_option("--b", sol.b)->delimiter(',');
  so->add_option("--c", sol.c);
  so->add_flag("--interior", sol.interior, "skip nodes whose stencil would wrap");

  RescaleArgs res;
  auto* r = app.add_subcommand("rescale", "parabolic rescaling of snapshots");
  r->add_option("inputs", res.inputs)->required();
  r->add_option("--times", res.times)->delimiter(',')->required();
  r->add_option("--lambda", res.lambda);
  r->add_option("--x0", res.x0)->delimiter(',');
  r->add_option("--t0", res.t0)->required();
  r->add_option("--out-prefix", res.out_prefix);
  r->add_option("--out-npts", res.out_npts);
  r->add_option("--out-spacing", res.out_spacing);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    apply_thread_env();
    if (*s) return cmd_simulate(sim);
    if (*v) return cmd_verify(ver);
    if (*m) return cmd_mollify(mol);
    if (*so) return cmd_soliton(sol);
    if (*r) return cmd_rescale(res);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  } catch (const BlowupError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBlowup;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  }
  return kValidation;
}
