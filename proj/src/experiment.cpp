#include "kdvlab/experiment.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/initial_data.hpp"
#include "kdvlab/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <thread>

namespace kdvlab {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kExperiments{"conservation", "microlaw", "operator_scaling", "apriori_sweep",
                                         "bottom_roundtrip"};

Json default_tolerances() {
  return Json{{"alpha_drift", 1e-6},         {"l2_identity_pure", 1e-8}, {"l2_identity_forced", 1e-4},
              {"soliton_error", 1e-4},       {"microlaw", 1e-6},         {"series_agreement", 1e-8},
              {"integrated_microlaw", 1e-4}, {"slope_tol", 0.15},        {"equivalence", 1e-4},
              {"zero_bottom", 1e-12},        {"roundtrip", 1e-10},       {"bound_factor", 10.0}};
}

Json default_initial(const std::string& kind) {
  if (kind == "soliton") return Json{{"kind", kind}, {"speed_c", 1.0}, {"center", 0.0}};
  if (kind == "random_bandlimited") return Json{{"kind", kind}, {"target_norm", 0.5}, {"norm_kappa", 1.0}};
  return Json{{"kind", "gaussian"}, {"amplitude", 0.5}, {"width", 1.0}, {"center", 0.0}};
}

Json default_profile() { return Json{{"kind", "sech2"}, {"amplitude", 0.05}, {"width", 3.0}}; }

Json defaults_for(const std::string& exp) {
  Json d{{"experiment", exp}};
  if (exp == "operator_scaling") {
    d["grid"] = Json{{"L", 100.0}, {"N", 4096}};
    d["kappa_list"] = Json::array({2.0, 4.0, 8.0, 16.0});
    d["variants"] = Json::array({"plain", "with_derivative", "double", "double_derivative"});
    d["weight_power"] = 1;
  } else if (exp == "apriori_sweep") {
    d["grid"] = Json{{"L", 50.0}, {"N", 256}};
    d["time"] = Json{{"T", 1.0}, {"dt", 0.0}, {"save_every", 0}};
    d["R_list"] = Json::array({0.5, 1.0, 2.0});
    d["coefficients"] = Json{{"kind", "bottom"}, {"profile", Json{{"kind", "sech2"}, {"amplitude", 0.01}, {"width", 3.0}}}};
  } else if (exp == "bottom_roundtrip") {
    d["grid"] = Json{{"L", 50.0}, {"N", 256}};
    d["time"] = Json{{"T", 0.1}, {"dt", 0.0}, {"save_every", 0}};
    d["initial_data"] = default_initial("gaussian");
    d["coefficients"] = Json{{"kind", "bottom"}, {"profile", default_profile()}};
  } else {
    d["grid"] = Json{{"L", 50.0}, {"N", 512}};
    d["time"] = Json{{"T", exp == "microlaw" ? 0.0 : 0.1}, {"dt", 0.0}, {"save_every", 0}};
    d["kappa_list"] = Json::array({3.0});
    d["initial_data"] = default_initial("gaussian");
    d["coefficients"] = Json{{"kind", "zero"}};
  }
  d["tolerances"] = default_tolerances();
  d["output_dir"] = "out";
  d["threads"] = 1;
  return d;
}

class Errors {
public:
  void add(std::string path, std::string msg) { list.push_back({std::move(path), std::move(msg)}); }
  std::vector<ConfigError> list;
};

bool is_number(const Json& j) { return j.is_number() && std::isfinite(j.get<double>()); }

double shape_value(const Json& s, double x) {
  const std::string shape = s.at("shape").get<std::string>();
  if (shape == "constant") return s.at("value").get<double>();
  const double amp = s.value("amplitude", 0.0);
  const double c = s.value("center", 0.0);
  if (shape == "gaussian") {
    const double w = s.value("width", 1.0);
    return amp * std::exp(-((x - c) / w) * ((x - c) / w));
  }
  if (shape == "lorentzian") return amp / (1.0 + (x - c) * (x - c));
  if (shape == "sech2") {
    const double w = s.value("width", 1.0);
    const double h = 1.0 / std::cosh((x - c) / w);
    return amp * h * h;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown coefficient shape '" + shape + "'");
}

struct Problem {
  TorusGrid grid;
  CoefficientSet coeffs;
  std::optional<BottomProfile> profile;
};

Problem build_problem(const Json& cfg) {
  const TorusGrid base(cfg.at("grid").at("L").get<double>(), cfg.at("grid").at("N").get<std::size_t>());
  const Json& c = cfg.at("coefficients");
  const std::string kind = c.at("kind").get<std::string>();
  if (kind == "bottom") {
    BottomProfile prof(load_profile(base, c.at("profile")));
    CoefficientSet co = synth_coefficients(prof);
    return Problem{prof.y_grid(), co, prof};
  }
  if (kind == "analytic") {
    std::array<RealField, 4> a{RealField(base), RealField(base), RealField(base), RealField(base)};
    for (int j = 1; j <= 4; ++j) {
      const std::string key = "a" + std::to_string(j);
      if (c.contains(key)) a[j - 1] = sample(base, [&](double x) { return shape_value(c.at(key), x); });
    }
    CoefficientMetadata meta;
    meta.descriptor = "analytic";
    return Problem{base, CoefficientSet::from_fields(a[0], a[1], a[2], a[3], meta), std::nullopt};
  }
  if (kind == "fields") {
    const CsvTable t = parse_csv(read_text(c.at("path").get<std::string>()));
    if (t.rows.size() != base.points()) throw Error(ErrorCode::ParseError, "coefficient file rows do not match grid.N");
    std::array<RealField, 4> a{RealField(base), RealField(base), RealField(base), RealField(base)};
    const std::size_t xc = t.column("x");
    for (std::size_t i = 0; i < base.points(); ++i) {
      if (std::abs(t.rows[i][xc] - base.x(i)) > 1e-9 * base.length())
        throw Error(ErrorCode::ParseError, "coefficient file x column does not match the grid at row " + std::to_string(i));
      for (int j = 1; j <= 4; ++j) a[j - 1][i] = t.rows[i][t.column("a" + std::to_string(j))];
    }
    CoefficientMetadata meta;
    meta.descriptor = "fields";
    return Problem{base, CoefficientSet::from_fields(a[0], a[1], a[2], a[3], meta), std::nullopt};
  }
  return Problem{base, CoefficientSet(base), std::nullopt};
}

RealField build_initial(const Json& cfg, const TorusGrid& grid) {
  const Json& d = cfg.at("initial_data");
  const std::string kind = d.at("kind").get<std::string>();
  if (kind == "soliton") return soliton(grid, d.at("speed_c").get<double>(), d.at("center").get<double>());
  if (kind == "random_bandlimited")
    return random_bandlimited(grid, KappaParam(d.at("norm_kappa").get<double>()), d.at("target_norm").get<double>(),
                              cfg.at("seed").get<std::uint64_t>());
  return gaussian(grid, d.at("amplitude").get<double>(), d.at("width").get<double>(), d.at("center").get<double>());
}

SolveOptions solve_options(const Json& cfg) {
  SolveOptions o;
  o.dt = cfg.at("time").at("dt").get<double>();
  o.save_every = cfg.at("time").at("save_every").get<std::size_t>();
  return o;
}

std::vector<double> kappa_list(const Json& cfg) { return cfg.at("kappa_list").get<std::vector<double>>(); }

void normalize_initial(const Json& raw, Json& out, Errors& err) {
  if (!raw.contains("initial_data")) return;
  const Json& r = raw.at("initial_data");
  if (!r.is_object()) {
    err.add("initial_data", "must be an object");
    return;
  }
  const std::string kind = r.value("kind", std::string{"gaussian"});
  if (kind != "gaussian" && kind != "soliton" && kind != "random_bandlimited") {
    err.add("initial_data.kind", "unknown kind '" + kind + "'");
    return;
  }
  Json d = default_initial(kind);
  for (auto it = r.begin(); it != r.end(); ++it) {
    if (!d.contains(it.key())) {
      err.add("initial_data." + it.key(), "unknown key for kind " + kind);
      continue;
    }
    if (it.key() != "kind" && !is_number(it.value())) {
      err.add("initial_data." + it.key(), "must be a finite number");
      continue;
    }
    d[it.key()] = it.key() == "kind" ? it.value() : Json(it.value().get<double>());
  }
  out["initial_data"] = d;
}

void check_shape(const Json& s, const std::string& path, Errors& err) {
  if (!s.is_object() || !s.contains("shape") || !s.at("shape").is_string()) {
    err.add(path, "needs a string field 'shape'");
    return;
  }
  const std::string shape = s.at("shape").get<std::string>();
  static const std::set<std::string> shapes{"constant", "gaussian", "lorentzian", "sech2"};
  if (!shapes.count(shape)) err.add(path + ".shape", "unknown shape '" + shape + "'");
  for (auto it = s.begin(); it != s.end(); ++it)
    if (it.key() != "shape" && !is_number(it.value())) err.add(path + "." + it.key(), "must be a finite number");
  if (shape == "constant" && !s.contains("value")) err.add(path + ".value", "constant shape needs a value");
  if ((shape == "gaussian" || shape == "sech2") && s.contains("width") && is_number(s.at("width")) &&
      s.at("width").get<double>() <= 0.0)
    err.add(path + ".width", "must be positive");
}

void normalize_coefficients(const Json& raw, Json& out, const fs::path& base_dir, Errors& err) {
  if (!raw.contains("coefficients")) return;
  const Json& r = raw.at("coefficients");
  if (!r.is_object() || !r.contains("kind") || !r.at("kind").is_string()) {
    err.add("coefficients.kind", "coefficients need a string kind");
    return;
  }
  const std::string kind = r.at("kind").get<std::string>();
  Json c{{"kind", kind}};
  if (kind == "zero") {
  } else if (kind == "analytic") {
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (it.key() == "kind") continue;
      if (it.key() != "a1" && it.key() != "a2" && it.key() != "a3" && it.key() != "a4") {
        err.add("coefficients." + it.key(), "expected a1..a4");
        continue;
      }
      check_shape(it.value(), "coefficients." + it.key(), err);
      Json shape = it.value();
      if (shape.is_object())
        for (auto& [k, v] : shape.items())
          if (v.is_number()) v = v.get<double>();
      c[it.key()] = shape;
    }
  } else if (kind == "fields") {
    if (!r.contains("path") || !r.at("path").is_string()) {
      err.add("coefficients.path", "fields coefficients need a path");
    } else {
      fs::path p = r.at("path").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      p = p.lexically_normal();
      if (!fs::exists(p)) err.add("coefficients.path", "file not found: " + p.string());
      c["path"] = p.string();
    }
  } else if (kind == "bottom") {
    Json p = r.value("profile", default_profile());
    if (!p.is_object() || !p.contains("kind")) {
      err.add("coefficients.profile", "profile needs a kind");
    } else {
      const std::string pk = p.value("kind", std::string{});
      if (pk == "file") {
        fs::path path = p.value("path", std::string{});
        if (path.is_relative()) path = base_dir / path;
        path = path.lexically_normal();
        if (!fs::exists(path)) err.add("coefficients.profile.path", "file not found: " + path.string());
        p["path"] = path.string();
      } else if (pk == "sech2") {
        for (const char* key : {"amplitude", "width"}) {
          if (!p.contains(key) || !is_number(p.at(key))) err.add(std::string("coefficients.profile.") + key, "must be a finite number");
          else p[key] = p.at(key).get<double>();
        }
      } else if (pk != "flat") {
        err.add("coefficients.profile.kind", "unknown profile kind '" + pk + "'");
      }
    }
    c["profile"] = p;
  } else {
    err.add("coefficients.kind", "unknown kind '" + kind + "'");
  }
  out["coefficients"] = c;
}

void copy_numbers(const Json& raw, Json& out, const std::string& section, Errors& err) {
  if (!raw.contains(section)) return;
  const Json& r = raw.at(section);
  if (!r.is_object()) {
    err.add(section, "must be an object");
    return;
  }
  for (auto it = r.begin(); it != r.end(); ++it) {
    if (!out.at(section).contains(it.key())) {
      err.add(section + "." + it.key(), "unknown key");
      continue;
    }
    if (!is_number(it.value())) {
      err.add(section + "." + it.key(), "must be a finite number");
      continue;
    }
    out[section][it.key()] = it.value().get<double>();
  }
}

bool is_integer(const Json& j) {
  if (j.is_number_integer()) return true;
  if (!j.is_number_float()) return false;
  const double v = j.get<double>();
  return std::isfinite(v) && v == std::floor(v);
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void set_dotted(Json& j, const std::string& dotted, const Json& value) {
  Json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

} // namespace

ValidationResult validate_config(const Json& raw, const fs::path& base_dir) {
  ValidationResult res;
  Errors err;
  if (!raw.is_object()) {
    res.errors.push_back({"", "config must be a JSON object"});
    return res;
  }
  if (!raw.contains("experiment") || !raw.at("experiment").is_string() ||
      !kExperiments.count(raw.at("experiment").get<std::string>())) {
    std::string got = raw.contains("experiment") ? raw.at("experiment").dump() : "missing";
    res.errors.push_back({"experiment", "unknown experiment " + got +
                                            " (expected conservation, microlaw, operator_scaling, apriori_sweep or "
                                            "bottom_roundtrip)"});
    return res;
  }
  const std::string exp = raw.at("experiment").get<std::string>();
  Json cfg = defaults_for(exp);

  for (auto it = raw.begin(); it != raw.end(); ++it) {
    const std::string& k = it.key();
    if (k == "seed" || k == "sweep") continue;
    if (!cfg.contains(k)) err.add(k, "unknown key for experiment " + exp);
  }

  copy_numbers(raw, cfg, "grid", err);
  if (cfg.contains("time")) copy_numbers(raw, cfg, "time", err);
  copy_numbers(raw, cfg, "tolerances", err);
  if (cfg.contains("initial_data")) normalize_initial(raw, cfg, err);
  if (cfg.contains("coefficients")) normalize_coefficients(raw, cfg, base_dir, err);
  if (raw.contains("output_dir")) {
    if (raw.at("output_dir").is_string()) cfg["output_dir"] = raw.at("output_dir");
    else err.add("output_dir", "must be a string");
  }
  if (raw.contains("threads")) {
    if (is_integer(raw.at("threads")) && raw.at("threads").get<double>() >= 1) cfg["threads"] = raw.at("threads").get<int>();
    else err.add("threads", "must be a positive integer");
  }
  for (const char* key : {"kappa_list", "R_list"}) {
    if (!cfg.contains(key) || !raw.contains(key)) continue;
    const Json& v = raw.at(key);
    if (!v.is_array() || v.empty()) {
      err.add(key, "must be a nonempty array of numbers");
      continue;
    }
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!is_number(v[i])) err.add(std::string(key) + "[" + std::to_string(i) + "]", "must be a finite number");
    cfg[key] = Json::array();
    for (const auto& x : v) cfg[key].push_back(x.is_number() ? Json(x.get<double>()) : x);
  }
  if (cfg.contains("variants") && raw.contains("variants")) {
    const Json& v = raw.at("variants");
    if (!v.is_array() || v.empty()) err.add("variants", "must be a nonempty array");
    else cfg["variants"] = v;
  }
  if (cfg.contains("weight_power") && raw.contains("weight_power")) {
    if (is_integer(raw.at("weight_power")) && raw.at("weight_power").get<double>() >= 1)
      cfg["weight_power"] = raw.at("weight_power").get<int>();
    else err.add("weight_power", "must be a positive integer");
  }
  if (raw.contains("seed")) {
    const Json& s = raw.at("seed");
    if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0)) cfg["seed"] = s.get<std::uint64_t>();
    else err.add("seed", "must be a nonnegative integer");
  }
  if (!err.list.empty()) {
    res.errors = err.list;
    return res;
  }

  // Field-level checks.
  const Json& g = cfg.at("grid");
  const double L = g.at("L").get<double>();
  if (!(L > 0.0)) err.add("grid.L", "length must be positive");
  if (!is_integer(g.at("N")) || g.at("N").get<double>() < 8 || static_cast<long long>(g.at("N").get<double>()) % 2 != 0)
    err.add("grid.N", "point count must be an even integer >= 8");
  else
    cfg["grid"]["N"] = static_cast<std::size_t>(g.at("N").get<double>());
  if (cfg.contains("time")) {
    const Json& t = cfg.at("time");
    if (t.at("T").get<double>() < 0.0) err.add("time.T", "must be nonnegative");
    if ((exp == "apriori_sweep" || exp == "bottom_roundtrip") && !(t.at("T").get<double>() > 0.0))
      err.add("time.T", "must be positive for " + exp);
    if (t.at("dt").get<double>() < 0.0) err.add("time.dt", "must be nonnegative (0 selects the default)");
    if (t.at("dt").get<double>() > 1e-2) err.add("time.dt", "exceeds the cap 1e-2");
    if (!is_integer(t.at("save_every")) || t.at("save_every").get<double>() < 0)
      err.add("time.save_every", "must be a nonnegative integer");
    else
      cfg["time"]["save_every"] = static_cast<std::size_t>(t.at("save_every").get<double>());
  }
  if (cfg.contains("kappa_list"))
    for (std::size_t i = 0; i < cfg.at("kappa_list").size(); ++i)
      if (cfg.at("kappa_list")[i].get<double>() < 1.0)
        err.add("kappa_list[" + std::to_string(i) + "]", "kappa must be >= 1");
  if (cfg.contains("R_list"))
    for (std::size_t i = 0; i < cfg.at("R_list").size(); ++i)
      if (!(cfg.at("R_list")[i].get<double>() > 0.0)) err.add("R_list[" + std::to_string(i) + "]", "must be positive");
  if (cfg.contains("initial_data")) {
    const Json& d = cfg.at("initial_data");
    const std::string kind = d.at("kind").get<std::string>();
    if (kind == "random_bandlimited") {
      if (!cfg.contains("seed")) err.add("seed", "random initial data needs a seed");
      if (!(d.at("target_norm").get<double>() >= 0.0)) err.add("initial_data.target_norm", "must be nonnegative");
      if (d.at("norm_kappa").get<double>() < 1.0) err.add("initial_data.norm_kappa", "kappa must be >= 1");
    }
    if (kind == "gaussian" && !(d.at("width").get<double>() > 0.0)) err.add("initial_data.width", "must be positive");
    if (kind == "soliton" && !(d.at("speed_c").get<double>() > 0.0)) err.add("initial_data.speed_c", "must be positive");
  }
  if (exp == "apriori_sweep" && !cfg.contains("seed")) err.add("seed", "random initial data needs a seed");
  if (exp == "apriori_sweep" && cfg.at("coefficients").at("kind") != "bottom")
    err.add("coefficients.kind", "apriori_sweep uses variable-bottom coefficients");
  if (exp == "bottom_roundtrip" && cfg.at("coefficients").at("kind") != "bottom")
    err.add("coefficients.kind", "bottom_roundtrip needs a bottom profile");
  if (exp == "operator_scaling") {
    const auto k = kappa_list(cfg);
    if (k.size() < 4) err.add("kappa_list", "scaling fits need at least four kappa values");
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i] > 64.0) err.add("kappa_list[" + std::to_string(i) + "]", "kappa must be <= 64 for the audit");
      if (i && k[i] <= k[i - 1]) err.add("kappa_list[" + std::to_string(i) + "]", "kappa values must increase");
    }
    for (std::size_t i = 0; i < cfg.at("variants").size(); ++i) {
      const Json& v = cfg.at("variants")[i];
      try {
        if (!v.is_string()) throw Error(ErrorCode::InvalidArgument, "not a string");
        commutator_variant_from_string(v.get<std::string>());
      } catch (const Error&) {
        err.add("variants[" + std::to_string(i) + "]", "unknown commutator variant " + v.dump());
      }
    }
  }
  if (!err.list.empty()) {
    res.errors = err.list;
    return res;
  }

  // Cross-field checks that need the grid and the data.
  const TorusGrid grid(L, cfg.at("grid").at("N").get<std::size_t>());
  if (exp == "conservation" || exp == "microlaw" || exp == "operator_scaling") {
    const auto k = kappa_list(cfg);
    for (std::size_t i = 0; i < k.size(); ++i)
      if (k[i] * grid.dx() > 0.5)
        err.add("kappa_list[" + std::to_string(i) + "]",
                "kappa * dx = " + format_double(k[i] * grid.dx()) + " exceeds 0.5; refine grid.N");
  }
  if (cfg.contains("coefficients") && cfg.contains("initial_data")) {
    try {
      const Problem prob = build_problem(cfg);
      const RealField u0 = build_initial(cfg, prob.grid);
      if (!u0.all_finite()) err.add("initial_data", "initial data is not finite");
      const double dt = cfg.at("time").at("dt").get<double>();
      const double eff = dt > 0.0 ? dt : default_time_step(prob.grid);
      if (eff * 6.0 * u0.max_abs() * prob.grid.xi_max() > 2.8)
        err.add("time.dt", "nonlinear step dt * 6 max|u0| * xi_max = " +
                               format_double(eff * 6.0 * u0.max_abs() * prob.grid.xi_max()) + " exceeds 2.8");
      if (exp == "conservation" || exp == "microlaw") {
        const auto k = kappa_list(cfg);
        for (std::size_t i = 0; i < k.size(); ++i)
          if (!kappa_admissible(u0, KappaParam(k[i])))
            err.add("kappa_list[" + std::to_string(i) + "]",
                    "kappa not admissible for the initial data (needs kappa >= 1 + 10 ||u0||^2_{H^-1_kappa})");
      }
    } catch (const Error& e) {
      err.add(cfg.at("coefficients").at("kind") == "bottom" ? "coefficients.profile" : "initial_data", e.what());
    } catch (const Json::exception& e) {
      err.add("coefficients", e.what());
    }
  }
  res.errors = err.list;
  res.config = cfg;
  return res;
}

std::string config_hash(const Json& normalized) {
  nlohmann::json sorted = nlohmann::json::parse(normalized.dump());
  sorted.erase("output_dir");
  sorted.erase("threads");
  return fnv1a(sorted.dump());
}

bool RunSummary::passed() const {
  if (!error.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

Json summary_to_json(const RunSummary& s) {
  Json checks = Json::array();
  for (const auto& c : s.checks)
    checks.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}, {"relation", c.relation}});
  return Json{{"config_hash", s.config_hash}, {"experiment", s.experiment}, {"passed", s.passed()}, {"checks", checks},
              {"measured", s.measured},       {"wall_time_s", s.wall_time},  {"error", s.error}};
}

RunSummary summary_from_json(const Json& j) {
  try {
    RunSummary s;
    s.config_hash = j.at("config_hash").get<std::string>();
    s.experiment = j.at("experiment").get<std::string>();
    for (const auto& c : j.at("checks")) {
      Check k;
      k.name = c.at("name").get<std::string>();
      k.passed = c.at("passed").get<bool>();
      k.value = c.at("value").is_null() ? std::nan("") : c.at("value").get<double>();
      k.threshold = c.at("threshold").is_null() ? std::nan("") : c.at("threshold").get<double>();
      k.relation = c.value("relation", std::string{"<="});
      s.checks.push_back(k);
    }
    s.measured = j.value("measured", Json::object());
    s.wall_time = j.value("wall_time_s", 0.0);
    s.error = j.value("error", std::string{});
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("summary: ") + e.what());
  }
}

namespace {

Check upper(std::string name, double value, double threshold) {
  return Check{std::move(name), std::isfinite(value) && value <= threshold, value, threshold, "<="};
}

Check band(std::string name, double value, double target, double tol) {
  return Check{std::move(name), std::isfinite(value) && std::abs(value - target) <= tol, value, target, "+-" + format_double(tol)};
}

std::string kappa_tag(double k) { return format_double(k); }

void run_conservation(const Json& cfg, const fs::path& out, RunSummary& s) {
  const Json& tol = cfg.at("tolerances");
  const Problem prob = build_problem(cfg);
  const RealField u0 = build_initial(cfg, prob.grid);
  const double T = cfg.at("time").at("T").get<double>();
  SolveOptions opts = solve_options(cfg);
  opts.kappas = kappa_list(cfg);
  const Trajectory traj = solve(u0, T, prob.coeffs, opts);
  save_trajectory(out / "trajectory", traj, s.config_hash);
  s.measured["dt"] = traj.dt;
  s.measured["snapshots"] = traj.size();
  s.measured["diverged"] = traj.diverged;
  if (traj.diverged) throw Error(ErrorCode::Diverged, "solution diverged before T");

  const bool pure = prob.coeffs.all_zero();
  const double mass0 = traj.records.front().mass;
  double mass_drift = 0.0;
  for (const auto& r : traj.records) mass_drift = std::max(mass_drift, std::abs(r.mass - mass0));
  s.measured["mass_drift"] = mass_drift;

  for (std::size_t k = 0; k < opts.kappas.size(); ++k) {
    std::vector<double> t, a;
    double drift = 0.0;
    const double a0 = traj.records.front().alpha[k];
    for (const auto& r : traj.records) {
      t.push_back(r.t);
      a.push_back(r.alpha[k]);
      drift = std::max(drift, std::abs(r.alpha[k] - a0) / std::max(std::abs(a0), 1e-14));
    }
    if (std::isnan(drift)) drift = std::numeric_limits<double>::infinity();
    write_text(out / ("alpha_kappa_" + kappa_tag(opts.kappas[k]) + ".txt"), plot_columns(t, a));
    s.measured["alpha_drift"][kappa_tag(opts.kappas[k])] = drift;
    if (pure) s.checks.push_back(upper("alpha_drift_kappa_" + kappa_tag(opts.kappas[k]), drift, tol.at("alpha_drift").get<double>()));
  }

  if (traj.size() >= 3) {
    const auto res = l2_identity_residual(traj, prob.coeffs);
    const double worst = *std::max_element(res.begin(), res.end());
    s.checks.push_back(upper("l2_identity", worst, tol.at(pure ? "l2_identity_pure" : "l2_identity_forced").get<double>()));
  }
  const Json& init = cfg.at("initial_data");
  if (pure && init.at("kind") == "soliton") {
    const RealField exact = soliton(prob.grid, init.at("speed_c").get<double>(), init.at("center").get<double>(), traj.times.back());
    const double e = l2_norm(traj.snapshots.back() - exact) / l2_norm(exact);
    s.checks.push_back(upper("soliton_error", e, tol.at("soliton_error").get<double>()));
  }
}

void run_microlaw(const Json& cfg, const fs::path& out, RunSummary& s) {
  const Json& tol = cfg.at("tolerances");
  const Problem prob = build_problem(cfg);
  const RealField u0 = build_initial(cfg, prob.grid);
  const auto kappas = kappa_list(cfg);
  for (double k : kappas) {
    const KappaParam kp(k);
    const std::string tag = kappa_tag(k);
    const GreensData d = rho_alpha(u0, kp);
    write_text(out / ("greens_kappa_" + tag + ".txt"), greens_columns(d));
    write_json(out / ("greens_kappa_" + tag + ".json"), greens_summary(d));
    s.measured["alpha"][tag] = d.alpha;
    s.checks.push_back(upper("microlaw_kappa_" + tag, microlaw_residual(u0, kp, prob.coeffs, 0.0), tol.at("microlaw").get<double>()));
    const double q = series_contraction_bound(u0, kp);
    s.measured["series_bound"][tag] = q;
    if (q <= SeriesOptions{}.contraction_limit) {
      const SeriesResult sr = greens_diagonal_series(u0, kp);
      s.measured["series_terms"][tag] = sr.terms_used;
      s.checks.push_back(upper("series_vs_direct_kappa_" + tag, (sr.g - d.g).max_abs(), tol.at("series_agreement").get<double>()));
    }
  }
  const double T = cfg.at("time").at("T").get<double>();
  if (T > 0.0 && !prob.coeffs.all_zero()) {
    SolveOptions opts = solve_options(cfg);
    opts.record_alpha = false;
    const Trajectory traj = solve(u0, T, prob.coeffs, opts);
    if (traj.diverged) throw Error(ErrorCode::Diverged, "solution diverged before T");
    const MicrolawBalance b = integrated_microlaw(traj, KappaParam(kappas.front()), prob.coeffs);
    s.measured["alpha_change"] = b.alpha_change;
    s.measured["forcing_integral"] = b.forcing_integral;
    s.checks.push_back(upper("integrated_microlaw", b.mismatch, tol.at("integrated_microlaw").get<double>()));
  }
}

void run_operator_scaling(const Json& cfg, const fs::path& out, RunSummary& s) {
  const double slope_tol = cfg.at("tolerances").at("slope_tol").get<double>();
  const AuditGrid ag{cfg.at("grid").at("L").get<double>(), cfg.at("grid").at("N").get<std::size_t>()};
  const auto kappas = kappa_list(cfg);
  const int power = cfg.at("weight_power").get<int>();
  for (const auto& v : cfg.at("variants")) {
    const CommutatorVariant var = commutator_variant_from_string(v.get<std::string>());
    const ScalingReport r = commutator_scaling_audit(power, var, kappas, ag);
    const std::string name = to_string(var);
    write_json(out / ("scaling_" + name + ".json"), scaling_to_json(r));
    write_text(out / ("scaling_" + name + ".txt"), plot_columns(r.kappas, r.norms));
    s.measured["slopes"][name] = r.slope;
    s.measured["ci"][name] = r.ci;
    s.measured["norms"][name] = r.norms;
    switch (var) {
      case CommutatorVariant::Plain: s.checks.push_back(band("slope_" + name, r.slope, -2.0, slope_tol)); break;
      case CommutatorVariant::WithDerivative: s.checks.push_back(band("slope_" + name, r.slope, -1.0, slope_tol)); break;
      case CommutatorVariant::Double: s.checks.push_back(upper("slope_" + name, r.slope, -2.0 + slope_tol)); break;
      case CommutatorVariant::DoubleDerivative: break;
    }
  }
}

void run_apriori_sweep(const Json& cfg, const fs::path& out, RunSummary& s) {
  const double factor = cfg.at("tolerances").at("bound_factor").get<double>();
  const Problem prob = build_problem(cfg);
  const auto Rs = cfg.at("R_list").get<std::vector<double>>();
  const double T = cfg.at("time").at("T").get<double>();
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  HypothesisOptions hopt;
  const HypothesisReport hyp = hypothesis_check(prob.coeffs, HypothesisMode::Integral, hopt);
  write_json(out / "hypothesis.json", hypothesis_to_json(hyp));
  write_text(out / "hypothesis.csv", hypothesis_csv(hyp));
  double eps = 0.0;
  for (int j = 0; j < 3; ++j) eps = std::max(eps, hyp.coeffs[j].value);
  s.measured["epsilon"] = eps;

  const WeightFamily weights(prob.grid);
  std::vector<BootstrapRecord> recs;
  std::vector<double> horizon, kap;
  bool any_reached = false;
  Json runs = Json::array();
  for (double R : Rs) {
    const KappaParam kappa(1.0 + factor * R * R);
    const RealField u0 = random_bandlimited(prob.grid, KappaParam(1.0), R, seed);
    SolveOptions opts = solve_options(cfg);
    opts.kappas = {kappa.value()};
    opts.record_alpha = false;
    const Trajectory traj = solve(u0, T, prob.coeffs, opts);
    const std::string tag = format_double(R);
    if (traj.diverged) {
      s.checks.push_back(Check{"finite_R_" + tag, false, std::numeric_limits<double>::infinity(), 0.0, "finite"});
      continue;
    }
    double sup = 0.0;
    for (const auto& u : traj.snapshots) sup = std::max(sup, sobolev_kappa_norm(u, -1.0, kappa));
    const BootstrapRecord rec = bootstrap_audit(traj, kappa, R, eps, weights, factor);
    const Horizon hz = bootstrap_horizon(traj, kappa, weights, factor * R * R);
    any_reached = any_reached || hz.reached;
    s.checks.push_back(upper("sup_h1k_R_" + tag, sup, factor * R));
    s.checks.push_back(Check{"B_T_finite_R_" + tag, std::isfinite(rec.B_T), rec.B_T, 0.0, "finite"});
    Json r = bootstrap_to_json(rec);
    r["sup_h1k_norm"] = sup;
    r["horizon"] = hz.time;
    r["horizon_reached"] = hz.reached;
    runs.push_back(r);
    recs.push_back(rec);
    horizon.push_back(hz.time);
    kap.push_back(kappa.value());
  }
  s.measured["runs"] = runs;
  if (recs.size() != Rs.size() || recs.size() < 2) return;

  std::vector<double> rs(Rs.begin(), Rs.end());
  if (any_reached) s.measured["horizon_slope"] = fit_loglog(rs, horizon).slope;
  else s.measured["horizon_slope"] = nullptr;
  // Horizon at which the bootstrap inequality stops closing for one uniform constant.
  double cmax = 0.0;
  for (const auto& r : recs) cmax = std::max(cmax, r.fitted_C);
  std::vector<double> closure;
  bool closes = cmax > 0.0;
  for (std::size_t i = 0; i < recs.size() && closes; ++i) {
    const double room = 1.0 / (2.0 * cmax) - eps - 1.0 / (kap[i] * kap[i]);
    if (room <= 0.0) closes = false;
    else closure.push_back(std::pow(room, 4) / (kap[i] * kap[i]));
  }
  s.measured["uniform_C"] = cmax;
  if (closes) {
    s.measured["closure_horizon"] = closure;
    s.measured["closure_slope"] = fit_loglog(rs, closure).slope;
  }
  write_text(out / "horizon.txt", plot_columns(rs, horizon));
}

void run_bottom_roundtrip(const Json& cfg, const fs::path& out, RunSummary& s) {
  const Json& tol = cfg.at("tolerances");
  const Problem prob = build_problem(cfg);
  const BottomProfile& prof = *prob.profile;
  const TorusGrid xg(cfg.at("grid").at("L").get<double>(), cfg.at("grid").at("N").get<std::size_t>());

  const SynthesizedCoefficients flat = synth_fields(build_profile(RealField(xg)));
  const double zero = std::max({flat.a2.max_abs(), flat.a3.max_abs(), flat.a4.max_abs()});
  s.checks.push_back(upper("zero_bottom_coefficients", zero, tol.at("zero_bottom").get<double>()));

  const SynthesizedCoefficients fields = synth_fields(prof);
  write_text(out / "coefficients.csv", coefficients_csv(fields));
  const HypothesisReport hyp = hypothesis_check(prob.coeffs, HypothesisMode::Pointwise);
  write_json(out / "hypothesis.json", hypothesis_to_json(hyp));
  write_text(out / "hypothesis.csv", hypothesis_csv(hyp));

  const RealField v0 = build_initial(cfg, prof.y_grid());
  const TransformResult u0 = transform_forward(v0, 0.0, prof);
  const TransformResult back = transform_backward(u0.field, 0.0, prof);
  s.measured["out_of_band"] = u0.out_of_band;
  s.measured["aliased"] = u0.aliased;
  s.checks.push_back(upper("roundtrip", l2_norm(back.field - v0) / l2_norm(v0), tol.at("roundtrip").get<double>()));

  const double T = cfg.at("time").at("T").get<double>();
  SolveOptions opts = solve_options(cfg);
  opts.record_alpha = false;
  const Trajectory tv = solve(v0, T, prob.coeffs, opts);
  const Trajectory tu = solve_kdvvb(u0.field, T, prof, opts);
  if (tv.diverged || tu.diverged) throw Error(ErrorCode::Diverged, "solution diverged before T");
  const RealField mapped = transform_forward(tv.snapshots.back(), tv.times.back(), prof).field;
  const double e = l2_norm(mapped - tu.snapshots.back()) / l2_norm(mapped);
  s.checks.push_back(upper("equivalence", e, tol.at("equivalence").get<double>()));
  s.measured["slope_m"] = prof.y_grid().length() / xg.length();
}

} // namespace

RunSummary run_experiment(const Json& config, const fs::path& out_dir) {
  RunSummary s;
  s.config_hash = config_hash(config);
  s.experiment = config.at("experiment").get<std::string>();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fs::create_directories(out_dir);
    Json stored = config;
    stored["config_hash"] = s.config_hash;
    write_json(out_dir / "config.json", stored);
    if (s.experiment == "conservation") run_conservation(config, out_dir, s);
    else if (s.experiment == "microlaw") run_microlaw(config, out_dir, s);
    else if (s.experiment == "operator_scaling") run_operator_scaling(config, out_dir, s);
    else if (s.experiment == "apriori_sweep") run_apriori_sweep(config, out_dir, s);
    else if (s.experiment == "bottom_roundtrip") run_bottom_roundtrip(config, out_dir, s);
  } catch (const std::exception& e) {
    s.error = s.experiment + ": " + e.what();
  }
  s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_json(out_dir / "summary.json", summary_to_json(s));
  } catch (const Error& e) {
    if (s.error.empty()) s.error = e.what();
  }
  return s;
}

Report make_report(const std::vector<RunSummary>& summaries) {
  if (summaries.empty()) throw Error(ErrorCode::InvalidArgument, "report needs at least one summary");
  Report rep;
  bool slope_column = false;
  for (const auto& s : summaries) slope_column = slope_column || s.measured.contains("slopes");
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s  %-18s  %-6s  %-7s", "config_hash", "experiment", "status", "checks");
  rep.table = line;
  if (slope_column) rep.table += "  slopes";
  rep.table += "  failing\n";
  rep.index = Json{{"runs", Json::array()}};
  for (const auto& s : summaries) {
    std::size_t ok = 0;
    std::string failing;
    Json failed = Json::array();
    for (const auto& c : s.checks) {
      if (c.passed) ++ok;
      else {
        failing += (failing.empty() ? "" : ",") + c.name;
        failed.push_back(c.name);
      }
    }
    if (!s.error.empty()) failing += (failing.empty() ? "" : ",") + std::string("error");
    const bool pass = s.passed();
    rep.all_passed = rep.all_passed && pass;
    std::snprintf(line, sizeof(line), "%-16s  %-18s  %-6s  %3zu/%-3zu", s.config_hash.c_str(), s.experiment.c_str(),
                  pass ? "PASS" : "FAIL", ok, s.checks.size());
    rep.table += line;
    Json entry{{"config_hash", s.config_hash}, {"experiment", s.experiment}, {"passed", pass}, {"failed", failed}};
    if (slope_column) {
      std::string cell;
      if (s.measured.contains("slopes")) {
        for (auto it = s.measured.at("slopes").begin(); it != s.measured.at("slopes").end(); ++it) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%s%s=%.3f", cell.empty() ? "" : ",", it.key().c_str(), it.value().get<double>());
          cell += buf;
        }
        entry["slopes"] = s.measured.at("slopes");
      }
      rep.table += "  " + (cell.empty() ? std::string("-") : cell);
    }
    if (!s.error.empty()) entry["error"] = s.error;
    rep.table += "  " + (failing.empty() ? std::string("-") : failing) + "\n";
    rep.index["runs"].push_back(entry);
  }
  rep.index["all_passed"] = rep.all_passed;
  return rep;
}

std::vector<Json> expand_sweep(const Json& config) {
  if (!config.contains("sweep")) return {config};
  Json base = config;
  base.erase("sweep");
  std::vector<Json> out{base};
  const Json& sw = config.at("sweep");
  if (!sw.is_object()) throw Error(ErrorCode::InvalidArgument, "sweep must map dotted keys to value lists");
  for (auto it = sw.begin(); it != sw.end(); ++it) {
    if (!it.value().is_array() || it.value().empty())
      throw Error(ErrorCode::InvalidArgument, "sweep." + it.key() + " must be a nonempty array");
    std::vector<Json> next;
    for (const auto& cfg : out)
      for (const auto& v : it.value()) {
        Json c = cfg;
        set_dotted(c, it.key(), v);
        next.push_back(std::move(c));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<RunSummary> run_sweep(const Json& config, const fs::path& out_dir, unsigned threads, const fs::path& base_dir) {
  const auto configs = expand_sweep(config);
  std::vector<RunSummary> results(configs.size());
  std::vector<std::optional<Json>> valid(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ValidationResult v = validate_config(configs[i], base_dir);
    if (v.ok()) {
      valid[i] = v.config;
      continue;
    }
    RunSummary& s = results[i];
    s.config_hash = fnv1a(configs[i].dump());
    s.experiment = configs[i].value("experiment", std::string{"unknown"});
    for (const auto& e : v.errors) s.error += (s.error.empty() ? "" : "; ") + e.path + ": " + e.message;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++)
      if (valid[i]) results[i] = run_experiment(*valid[i], out_dir / config_hash(*valid[i]));
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::stable_sort(results.begin(), results.end(), [](const RunSummary& a, const RunSummary& b) { return a.config_hash < b.config_hash; });
  return results;
}

} // namespace kdvlab
