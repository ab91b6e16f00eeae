#include "lagmcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kernels.hpp"
#include "lagmcf/analysis.hpp"
#include "lagmcf/errors.hpp"
#include "lagmcf/geometry.hpp"

namespace lagmcf {

namespace {

// Relative slack on the CFL comparison so that dt computed by cfl_dt(g, 1)
// itself is accepted after floating-point round trips.
constexpr double kCflSlack = 1e-12;

void check_dt(const GridSpec& g, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("step: dt must be positive and finite");
  if (dt > cfl_dt(g, 1.0) * (1.0 + kCflSlack)) {
    throw ValidationError("step: dt exceeds the CFL bound min h^2 / (2n)");
  }
}

void check_finite(const ScalarField& f, double t, const char* what) {
  const auto bad = f.first_nonfinite();
  if (bad != f.size()) {
    throw BlowupError(std::string("blowup/instability: non-finite ") + what + " at flat index " +
                          std::to_string(bad) + " near t=" + std::to_string(t),
                      bad, t);
  }
}

// Periodic part after one forward Euler step of the potential flow.
ScalarField euler_map(const ScalarField& p, const SymMat& quad, double dt) {
  const auto& g = p.grid();
  ScalarField out(g);
  const double* v = p.values().data();
  double* o = out.values().data();
  detail::for_each_node(g, [&](const detail::Neighbors& nb) {
    const SymMat hess = quad + detail::hessian_kernel(v, g, nb);
    o[nb.p] = v[nb.p] + dt * lagrangian_angle(hess);
  });
  return out;
}

std::vector<ScalarField> vector_euler_map(const std::vector<ScalarField>& f, double dt) {
  const auto& g = f.front().grid();
  const int n = g.ndim();
  const auto m = f.size();
  std::vector<ScalarField> out(m, ScalarField(g));
  std::vector<const double*> src(m);
  std::vector<double*> dst(m);
  for (std::size_t a = 0; a < m; ++a) {
    src[a] = f[a].values().data();
    dst[a] = out[a].values().data();
  }
  detail::for_each_node(g, [&](const detail::Neighbors& nb) {
    SymMat metric = SymMat::identity(n);
    for (std::size_t a = 0; a < m; ++a) {
      double grad[kMaxDim];
      for (int i = 0; i < n; ++i) grad[i] = detail::first_diff(src[a], nb, i, g.spacing(i));
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) metric(i, j) += grad[i] * grad[j];
    }
    const SymMat ginv = spd_inverse(metric);
    for (std::size_t a = 0; a < m; ++a) {
      const SymMat hess = detail::hessian_kernel(src[a], g, nb);
      double rhs = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rhs += ginv(i, j) * hess(i, j);
      dst[a][nb.p] = src[a][nb.p] + dt * rhs;
    }
  });
  return out;
}

void average_into(ScalarField& target, const ScalarField& a, const ScalarField& b) {
  auto t = target.values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t p = 0; p < t.size(); ++p) t[p] = 0.5 * av[p] + 0.5 * bv[p];
}

struct OscTracker {
  double initial = -1.0;
  double factor = 2.0;
};

}  // namespace

Scheme parse_scheme(std::string_view name) {
  if (name == "euler") return Scheme::euler;
  if (name == "rk2") return Scheme::rk2;
  throw ValidationError("control.scheme: expected 'euler' or 'rk2', got '" + std::string(name) + "'");
}

std::string_view to_string(Scheme s) { return s == Scheme::euler ? "euler" : "rk2"; }

void validate(const StepControl& c) {
  if (!(c.sigma > 0.0 && c.sigma <= 1.0)) {
    throw ValidationError("control.sigma: must lie in (0, 1], got " + std::to_string(c.sigma));
  }
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) {
    throw ValidationError("control.t_end: must be finite and >= 0");
  }
  if (c.sample_every < 1) throw ValidationError("control.sample_every: must be >= 1");
  for (double s : c.sample_times) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("control.sample_times: entries must be finite and >= 0");
  }
  if (!(c.osc_alarm_factor >= 1.0)) throw ValidationError("control.osc_alarm_factor: must be >= 1");
}

double cfl_dt(const GridSpec& grid, double sigma) {
  const double h = grid.min_spacing();
  return sigma * h * h / (2.0 * grid.ndim());
}

ScalarField angle_field(const Potential& u) {
  const auto& g = u.grid();
  ScalarField out(g);
  const double* v = u.periodic().values().data();
  double* o = out.values().data();
  const SymMat& quad = u.background_hessian();
  detail::for_each_node(g, [&](const detail::Neighbors& nb) {
    o[nb.p] = lagrangian_angle(quad + detail::hessian_kernel(v, g, nb));
  });
  return out;
}

FlowState potential_step(const FlowState& state, double dt, Scheme scheme) {
  const auto& u = state.u;
  check_dt(u.grid(), dt);
  const SymMat& quad = u.background_hessian();
  ScalarField next = euler_map(u.periodic(), quad, dt);
  if (scheme == Scheme::rk2) {
    check_finite(next, state.t + dt, "stage value");
    const ScalarField second = euler_map(next, quad, dt);
    average_into(next, u.periodic(), second);
  }
  check_finite(next, state.t + dt, "potential");
  FlowState out{Potential(std::move(next), quad, u.background_slope()), state.t + dt, state.step_count + 1};
  return out;
}

VectorFlowState vector_step(const VectorFlowState& state, double dt, Scheme scheme) {
  if (state.f.empty()) throw ValidationError("vector_step: need at least one component");
  const auto& g = state.f.front().grid();
  for (const auto& c : state.f) {
    if (!(c.grid() == g)) throw ValidationError("vector_step: components must share one grid");
  }
  check_dt(g, dt);
  auto next = vector_euler_map(state.f, dt);
  if (scheme == Scheme::rk2) {
    for (const auto& c : next) check_finite(c, state.t + dt, "stage component");
    const auto second = vector_euler_map(next, dt);
    for (std::size_t a = 0; a < next.size(); ++a) average_into(next[a], state.f[a], second[a]);
  }
  for (const auto& c : next) check_finite(c, state.t + dt, "component");
  return {std::move(next), state.t + dt, state.step_count + 1};
}

namespace {

// Drives any stepper to t_end, landing exactly on every requested stop.
// On exception, state holds the last successfully completed step.
template <class State, class Step, class Sample, class Stop>
void integrate(State& state, const StepControl& control, const GridSpec& grid, Step&& step, Sample&& sample,
               Stop&& on_stop) {
  if (control.t_end <= state.t) return;
  const double dt = cfl_dt(grid, control.sigma);
  std::vector<double> stops;
  for (double s : control.sample_times)
    if (s > state.t && s < control.t_end) stops.push_back(s);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(control.t_end);

  sample(state);
  std::size_t next_stop = 0;
  std::int64_t local_steps = 0;
  while (next_stop < stops.size()) {
    const double target = stops[next_stop];
    const double remaining = target - state.t;
    const bool lands = remaining <= dt * (1.0 + kCflSlack);
    state = step(state, lands ? remaining : dt);
    ++local_steps;
    bool sampled_now = false;
    if (lands) {
      state.t = target;
      ++next_stop;
      sample(state);
      on_stop(state);
      sampled_now = true;
    }
    if (!sampled_now && local_steps % control.sample_every == 0) sample(state);
  }
}

}  // namespace

RunResult run(FlowState state, const StepControl& control, double eps,
              const std::function<void(const FlowState&)>& on_stop) {
  validate(control);
  RunResult result;
  OscTracker osc{-1.0, control.osc_alarm_factor};
  const GridSpec grid = state.u.grid();
  auto sample = [&](const FlowState& s) {
    DiagnosticsRecord rec = diagnostics(s, eps);
    if (!result.series.empty() && !(rec.t > result.series.back().t)) return;
    result.series.push_back(rec);
    if (osc.initial < 0.0) {
      osc.initial = rec.osc_theta;
    } else if (rec.osc_theta > osc.factor * osc.initial + 1e-9) {
      throw BlowupError("blowup/instability: angle oscillation grew from " + std::to_string(osc.initial) +
                            " to " + std::to_string(rec.osc_theta) + " at t=" + std::to_string(rec.t),
                        0, rec.t);
    }
  };
  auto step = [&](const FlowState& s, double dt) { return potential_step(s, dt, control.scheme); };
  try {
    check_finite(state.u.periodic(), state.t, "initial data");
    integrate(state, control, grid, step, sample, [&](const FlowState& s) {
      if (on_stop) on_stop(s);
    });
  } catch (const BlowupError& e) {
    result.aborted = true;
    result.error = e.what();
    result.error_index = e.first_index();
  }
  result.final_state = std::move(state);
  return result;
}

VectorFlowState run_vector(VectorFlowState state, const StepControl& control) {
  validate(control);
  if (state.f.empty()) throw ValidationError("run_vector: need at least one component");
  const GridSpec grid = state.f.front().grid();
  auto step = [&](const VectorFlowState& s, double dt) { return vector_step(s, dt, control.scheme); };
  integrate(state, control, grid, step, [](const VectorFlowState&) {}, [](const VectorFlowState&) {});
  return state;
}

}  // namespace lagmcf
