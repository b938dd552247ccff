#pragma once

#include "kdvlab/bottom.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/lax.hpp"
#include "kdvlab/metrics.hpp"
#include "kdvlab/smoothing.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace kdvlab {

using Json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Shortest round-trip decimal for a double ("nan", "inf" and "-inf" for the special values).
std::string format_double(double v);
double parse_double(const std::string& s);

/// Comma-separated table with a header row. Cells never need quoting here.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};
std::string to_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);

/// Field samples with the {L, N, t} header.
Json field_to_json(const RealField& f, double t);
RealField field_from_json(const Json& j, double* t = nullptr);

/// Whitespace-separated columns x g rho j.
std::string greens_columns(const GreensData& d);
Json greens_summary(const GreensData& d);
CsvTable parse_columns(const std::string& text, const std::vector<std::string>& names);

Json scaling_to_json(const ScalingReport& r);
ScalingReport scaling_from_json(const Json& j);

Json hypothesis_to_json(const HypothesisReport& r);
/// Columns index, position, value for the four coefficients.
std::string hypothesis_csv(const HypothesisReport& r);

Json bootstrap_to_json(const BootstrapRecord& r);

/// Writes header.json, diagnostics.csv and snapshots.csv into dir.
void save_trajectory(const std::filesystem::path& dir, const Trajectory& traj, const std::string& config_hash);
Trajectory load_trajectory(const std::filesystem::path& dir);

/// Columns y, a2, a3, a4 on the y-grid.
std::string coefficients_csv(const SynthesizedCoefficients& c);

/// Depth perturbation from a descriptor {kind: "sech2", amplitude, width} or a
/// two-column (x, c) text file interpolated linearly and periodically onto the grid.
RealField load_profile(const TorusGrid& grid, const Json& descriptor);
RealField load_profile_file(const TorusGrid& grid, const std::filesystem::path& path);

/// Plain two-column text for plotting.
std::string plot_columns(const std::vector<double>& x, const std::vector<double>& y);

} // namespace kdvlab
