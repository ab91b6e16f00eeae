#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lagmcf/errors.hpp"

namespace lagmcf::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ValidationError((where.empty() ? key : where + "." + key) + ": unknown key");
    }
  }
}

template <class T>
T get(const json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(field + ": wrong type");
  }
}

template <class T>
std::vector<T> scalar_or_list(const json& v, const std::string& field) {
  if (v.is_array()) return get<std::vector<T>>(v, field);
  return {get<T>(v, field)};
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  reject_unknown(doc, "", {"grid", "preset", "mollify_tau", "control", "eps_pinch", "delta", "output"});
  RunConfig cfg;

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    reject_unknown(g, "grid", {"ndim", "npts", "extent", "origin"});
    if (g.contains("ndim")) cfg.grid.ndim = get<int>(g["ndim"], "grid.ndim");
    if (g.contains("npts")) cfg.grid.npts = scalar_or_list<std::size_t>(g["npts"], "grid.npts");
    if (g.contains("extent")) cfg.grid.extent = scalar_or_list<double>(g["extent"], "grid.extent");
    if (g.contains("origin")) cfg.grid.origin = scalar_or_list<double>(g["origin"], "grid.origin");
  }

  if (doc.contains("preset")) {
    const json& p = doc["preset"];
    reject_unknown(p, "preset", {"name", "amplitude", "frequency", "matrix", "level", "seed", "modes", "hessian_clamp"});
    if (p.contains("name")) cfg.preset.kind = parse_preset_kind(get<std::string>(p["name"], "preset.name"));
    if (p.contains("amplitude")) cfg.preset.amplitude = get<double>(p["amplitude"], "preset.amplitude");
    if (p.contains("frequency")) cfg.preset.frequency = get<int>(p["frequency"], "preset.frequency");
    if (p.contains("matrix")) cfg.preset.matrix = get<std::vector<double>>(p["matrix"], "preset.matrix");
    if (p.contains("level")) cfg.preset.level = get<double>(p["level"], "preset.level");
    if (p.contains("seed")) cfg.preset.seed = get<std::uint64_t>(p["seed"], "preset.seed");
    if (p.contains("modes")) cfg.preset.modes = get<int>(p["modes"], "preset.modes");
    if (p.contains("hessian_clamp")) cfg.preset.hessian_clamp = get<double>(p["hessian_clamp"], "preset.hessian_clamp");
  }

  if (doc.contains("mollify_tau") && !doc["mollify_tau"].is_null()) {
    cfg.mollify_tau = get<double>(doc["mollify_tau"], "mollify_tau");
  }

  if (doc.contains("control")) {
    const json& c = doc["control"];
    reject_unknown(c, "control", {"sigma", "scheme", "t_end", "sample_every", "sample_times"});
    if (c.contains("sigma")) cfg.control.sigma = get<double>(c["sigma"], "control.sigma");
    if (c.contains("scheme")) cfg.control.scheme = parse_scheme(get<std::string>(c["scheme"], "control.scheme"));
    if (c.contains("t_end")) cfg.control.t_end = get<double>(c["t_end"], "control.t_end");
    if (c.contains("sample_every")) cfg.control.sample_every = get<int>(c["sample_every"], "control.sample_every");
    if (c.contains("sample_times")) {
      cfg.control.sample_times = get<std::vector<double>>(c["sample_times"], "control.sample_times");
    }
  }

  if (doc.contains("eps_pinch")) {
    const json& e = doc["eps_pinch"];
    if (e.is_string()) {
      if (e.get<std::string>() != "auto") throw ValidationError("eps_pinch: expected a number or \"auto\"");
      cfg.eps_pinch.reset();
    } else {
      cfg.eps_pinch = get<double>(e, "eps_pinch");
    }
  }
  if (doc.contains("delta")) cfg.delta = get<double>(doc["delta"], "delta");

  if (doc.contains("output")) {
    const json& o = doc["output"];
    reject_unknown(o, "output", {"field", "diagnostics", "snapshot_prefix"});
    if (o.contains("field")) cfg.output.field = get<std::string>(o["field"], "output.field");
    if (o.contains("diagnostics")) cfg.output.diagnostics = get<std::string>(o["diagnostics"], "output.diagnostics");
    if (o.contains("snapshot_prefix")) {
      cfg.output.snapshot_prefix = get<std::string>(o["snapshot_prefix"], "output.snapshot_prefix");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

void validate(const RunConfig& cfg) {
  const auto& g = cfg.grid;
  if (g.ndim < 1 || g.ndim > kMaxDim) throw ValidationError("grid.ndim: must be 1, 2 or 3");
  auto check_len = [&](std::size_t len, const char* field) {
    if (len != 1 && len != static_cast<std::size_t>(g.ndim)) {
      throw ValidationError(std::string(field) + ": expected 1 or ndim entries");
    }
  };
  check_len(g.npts.size(), "grid.npts");
  if (!g.extent.empty()) check_len(g.extent.size(), "grid.extent");
  check_len(g.origin.size(), "grid.origin");
  for (auto n : g.npts) {
    if (n < 8 || n % 2 != 0) throw ValidationError("grid.npts: must be even and >= 8");
  }
  for (double e : g.extent) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ValidationError("grid.extent: must be positive and finite");
  }
  for (double o : g.origin) {
    if (!std::isfinite(o)) throw ValidationError("grid.origin: must be finite");
  }
  lagmcf::validate(cfg.control);
  if (cfg.mollify_tau && (!(*cfg.mollify_tau > 0.0) || !std::isfinite(*cfg.mollify_tau))) {
    throw ValidationError("mollify_tau: must be positive and finite");
  }
  if (cfg.eps_pinch && !(*cfg.eps_pinch >= 0.0 && *cfg.eps_pinch < 1.0)) {
    throw ValidationError("eps_pinch: must lie in [0, 1)");
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ValidationError("delta: must lie in (0, 1)");
}

GridSpec build_grid(const GridConfig& g) {
  std::vector<std::size_t> npts(static_cast<std::size_t>(g.ndim));
  std::vector<double> extent(static_cast<std::size_t>(g.ndim));
  std::vector<double> origin(static_cast<std::size_t>(g.ndim));
  for (std::size_t d = 0; d < npts.size(); ++d) {
    npts[d] = g.npts.size() == 1 ? g.npts[0] : g.npts[d];
    extent[d] = g.extent.empty() ? 2.0 * std::numbers::pi : (g.extent.size() == 1 ? g.extent[0] : g.extent[d]);
    origin[d] = g.origin.size() == 1 ? g.origin[0] : g.origin[d];
  }
  return GridSpec::periodic(npts, extent, origin);
}

}  // namespace lagmcf::cli
