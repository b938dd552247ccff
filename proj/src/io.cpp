#include "kdvlab/io.hpp"

#include "kdvlab/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace kdvlab {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::ParseError, "missing column " + name);
}

std::string to_csv(const CsvTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += "\r\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line, bool whitespace) {
  std::vector<std::string> out;
  if (whitespace) {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
  }
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r' && ch != '"') {
      cell += ch;
    }
  }
  out.push_back(cell);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<double> to_vector(const RealField& f) { return {f.samples.data(), f.samples.data() + f.samples.size()}; }

} // namespace

CsvTable parse_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty CSV");
  CsvTable t;
  t.header = split_line(lines[0], false);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_line(lines[i], false);
    if (cells.size() != t.header.size())
      throw Error(ErrorCode::ParseError, "CSV row " + std::to_string(i) + " has " + std::to_string(cells.size()) +
                                             " cells, expected " + std::to_string(t.header.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Json field_to_json(const RealField& f, double t) {
  return Json{{"L", f.grid.length()}, {"N", f.grid.points()}, {"t", t}, {"samples", to_vector(f)}};
}

RealField field_from_json(const Json& j, double* t) {
  try {
    const TorusGrid grid(j.at("L").get<double>(), j.at("N").get<std::size_t>());
    const auto v = j.at("samples").get<std::vector<double>>();
    if (v.size() != grid.points()) throw Error(ErrorCode::ParseError, "sample count does not match N");
    if (t) *t = j.at("t").get<double>();
    return RealField(grid, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field: ") + e.what());
  }
}

std::string greens_columns(const GreensData& d) {
  std::string out = "# x g rho j\n";
  for (std::size_t i = 0; i < d.g.size(); ++i)
    out += format_double(d.g.grid.x(i)) + ' ' + format_double(d.g[i]) + ' ' + format_double(d.rho[i]) + ' ' +
           format_double(d.j[i]) + '\n';
  return out;
}

Json greens_summary(const GreensData& d) {
  return Json{{"kappa", d.kappa.value()},
              {"alpha", d.alpha},
              {"method", to_string(d.method)},
              {"terms_used", d.series_terms_used}};
}

CsvTable parse_columns(const std::string& text, const std::vector<std::string>& names) {
  CsvTable t;
  t.header = names;
  for (const auto& line : lines_of(text)) {
    if (line[0] == '#') continue;
    const auto cells = split_line(line, true);
    if (cells.size() != names.size()) throw Error(ErrorCode::ParseError, "column count mismatch in '" + line + "'");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Json scaling_to_json(const ScalingReport& r) {
  return Json{{"variant", r.variant},     {"weight_power", r.weight_power}, {"spaces", r.spaces},
              {"kappas", r.kappas},       {"norms", r.norms},               {"slope", r.slope},
              {"ci", r.ci},               {"width_ok", r.width_ok},         {"schur_row", r.schur_row},
              {"schur_col", r.schur_col}, {"schur_row_slope", r.schur_row_slope},
              {"schur_col_slope", r.schur_col_slope}, {"note", r.note}};
}

ScalingReport scaling_from_json(const Json& j) {
  try {
    ScalingReport r;
    r.variant = j.at("variant").get<std::string>();
    r.weight_power = j.value("weight_power", 1);
    r.spaces = j.value("spaces", std::string{});
    r.kappas = j.at("kappas").get<std::vector<double>>();
    r.norms = j.at("norms").get<std::vector<double>>();
    r.slope = j.at("slope").get<double>();
    r.ci = j.at("ci").get<double>();
    r.width_ok = j.value("width_ok", false);
    r.schur_row = j.value("schur_row", std::vector<double>{});
    r.schur_col = j.value("schur_col", std::vector<double>{});
    r.schur_row_slope = j.value("schur_row_slope", 0.0);
    r.schur_col_slope = j.value("schur_col_slope", 0.0);
    r.note = j.value("note", std::string{});
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scaling report: ") + e.what());
  }
}

Json hypothesis_to_json(const HypothesisReport& r) {
  Json out{{"mode", r.mode == HypothesisMode::Integral ? "integral" : "pointwise"}, {"coefficients", Json::array()}};
  for (const auto& c : r.coeffs)
    out["coefficients"].push_back(Json{{"index", c.index},
                                       {"value", c.value},
                                       {"alternative", c.alternative},
                                       {"norm_used", c.norm_used},
                                       {"decaying", c.decaying}});
  return out;
}

std::string hypothesis_csv(const HypothesisReport& r) {
  CsvTable t;
  t.header = {"index", r.mode == HypothesisMode::Integral ? "z" : "x", "value"};
  for (const auto& c : r.coeffs)
    for (std::size_t i = 0; i < c.positions.size(); ++i)
      t.rows.push_back({static_cast<double>(c.index), c.positions[i], c.profile[i]});
  return to_csv(t);
}

Json bootstrap_to_json(const BootstrapRecord& r) {
  return Json{{"T", r.T},
              {"kappa", r.kappa},
              {"sup_H1k", r.sup_H1k},
              {"ls_sq", r.ls_sq},
              {"B_T", r.B_T},
              {"R", r.R},
              {"epsilon", r.epsilon},
              {"admissible", r.admissible},
              {"fitted", r.fitted},
              {"fitted_C", r.fitted_C},
              {"note", r.note}};
}

void save_trajectory(const fs::path& dir, const Trajectory& traj, const std::string& config_hash) {
  const double T = traj.size() ? traj.times.back() - traj.times.front() : 0.0;
  Json header{{"L", traj.grid.length()},
              {"N", traj.grid.points()},
              {"dt", traj.dt},
              {"T", T},
              {"t0", traj.size() ? traj.times.front() : 0.0},
              {"kappa_list", traj.kappas},
              {"coeff_descriptor", traj.coeff_descriptor},
              {"diverged", traj.diverged},
              {"config_hash", config_hash}};
  write_json(dir / "header.json", header);

  CsvTable diag;
  diag.header = {"t", "mass", "momentum"};
  for (std::size_t k = 0; k < traj.kappas.size(); ++k) diag.header.push_back("alpha_" + std::to_string(k));
  for (std::size_t k = 0; k < traj.kappas.size(); ++k) diag.header.push_back("h1k_norm_" + std::to_string(k));
  diag.header.push_back("max_abs");
  for (const auto& r : traj.records) {
    std::vector<double> row{r.t, r.mass, r.momentum};
    for (std::size_t k = 0; k < traj.kappas.size(); ++k)
      row.push_back(k < r.alpha.size() ? r.alpha[k] : std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < traj.kappas.size(); ++k)
      row.push_back(k < r.h1k_norm.size() ? r.h1k_norm[k] : std::numeric_limits<double>::quiet_NaN());
    row.push_back(r.max_abs);
    diag.rows.push_back(std::move(row));
  }
  write_text(dir / "diagnostics.csv", to_csv(diag));

  CsvTable snaps;
  snaps.header = {"t"};
  for (std::size_t i = 0; i < traj.grid.points(); ++i) snaps.header.push_back("u" + std::to_string(i));
  for (std::size_t n = 0; n < traj.size(); ++n) {
    std::vector<double> row{traj.times[n]};
    const auto v = to_vector(traj.snapshots[n]);
    row.insert(row.end(), v.begin(), v.end());
    snaps.rows.push_back(std::move(row));
  }
  write_text(dir / "snapshots.csv", to_csv(snaps));
}

Trajectory load_trajectory(const fs::path& dir) {
  const Json header = read_json(dir / "header.json");
  Trajectory traj(TorusGrid(header.at("L").get<double>(), header.at("N").get<std::size_t>()));
  traj.dt = header.at("dt").get<double>();
  traj.kappas = header.at("kappa_list").get<std::vector<double>>();
  traj.coeff_descriptor = header.at("coeff_descriptor").get<std::string>();
  traj.diverged = header.value("diverged", false);

  const CsvTable snaps = parse_csv(read_text(dir / "snapshots.csv"));
  if (snaps.header.size() != traj.grid.points() + 1) throw Error(ErrorCode::ParseError, "snapshot width does not match N");
  for (const auto& row : snaps.rows) {
    traj.times.push_back(row[0]);
    traj.snapshots.emplace_back(traj.grid, Eigen::Map<const Eigen::VectorXd>(row.data() + 1, static_cast<Eigen::Index>(traj.grid.points())));
  }

  const CsvTable diag = parse_csv(read_text(dir / "diagnostics.csv"));
  const std::size_t nk = traj.kappas.size();
  for (const auto& row : diag.rows) {
    DiagnosticRecord r;
    r.t = row[0];
    r.mass = row[1];
    r.momentum = row[2];
    r.alpha.assign(row.begin() + 3, row.begin() + 3 + static_cast<std::ptrdiff_t>(nk));
    r.h1k_norm.assign(row.begin() + 3 + static_cast<std::ptrdiff_t>(nk), row.begin() + 3 + static_cast<std::ptrdiff_t>(2 * nk));
    r.max_abs = row[3 + 2 * nk];
    traj.records.push_back(std::move(r));
  }
  return traj;
}

std::string coefficients_csv(const SynthesizedCoefficients& c) {
  CsvTable t;
  t.header = {"y", "a2", "a3", "a4"};
  for (std::size_t i = 0; i < c.a2.size(); ++i) t.rows.push_back({c.a2.grid.x(i), c.a2[i], c.a3[i], c.a4[i]});
  return to_csv(t);
}

RealField load_profile(const TorusGrid& grid, const Json& descriptor) {
  const std::string kind = descriptor.value("kind", std::string{});
  if (kind == "sech2") return sech2_bottom(grid, descriptor.at("amplitude").get<double>(), descriptor.at("width").get<double>());
  if (kind == "flat") return RealField(grid);
  if (kind == "file") return load_profile_file(grid, descriptor.at("path").get<std::string>());
  throw Error(ErrorCode::InvalidArgument, "unknown profile kind '" + kind + "'");
}

RealField load_profile_file(const TorusGrid& grid, const fs::path& path) {
  const CsvTable t = parse_columns(read_text(path), {"x", "c"});
  if (t.rows.size() < 2) throw Error(ErrorCode::ParseError, path.string() + ": need at least two profile samples");
  std::vector<double> xs, cs;
  for (const auto& r : t.rows) {
    if (!xs.empty() && r[0] <= xs.back()) throw Error(ErrorCode::ParseError, path.string() + ": x must increase");
    xs.push_back(r[0]);
    cs.push_back(r[1]);
  }
  const double len = grid.length();
  if (xs.back() - xs.front() >= len) throw Error(ErrorCode::ParseError, path.string() + ": profile longer than the torus");
  // The segment from the last sample back to the first closes the period.
  return sample(grid, [&](double x) {
    double s = x - xs.front();
    s -= len * std::floor(s / len);
    const double xq = xs.front() + s;
    auto it = std::upper_bound(xs.begin(), xs.end(), xq);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    if (hi == xs.size()) {
      const double w = (xq - xs.back()) / (xs.front() + len - xs.back());
      return (1.0 - w) * cs.back() + w * cs.front();
    }
    const std::size_t lo = hi - 1;
    const double w = (xq - xs[lo]) / (xs[hi] - xs[lo]);
    return (1.0 - w) * cs[lo] + w * cs[hi];
  });
}

std::string plot_columns(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "plot columns differ in length");
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) out += format_double(x[i]) + ' ' + format_double(y[i]) + '\n';
  return out;
}

} // namespace kdvlab
