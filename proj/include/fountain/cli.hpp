#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fountain/dcp.hpp"
#include "fountain/lensing.hpp"

namespace fountain::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Everything a run needs. Lengths are stored in SI; the text form uses the
/// unit-suffixed keys listed by `config_keys()`.
struct RunConfig {
  PhysicalConstants constants = cesium_constants();
  FountainGeometry geometry;
  TimingSchedule timing;
  CloudState cloud;
  MicrowaveDrive drive;
  DetectionProfile detection;
  KickOrder order = KickOrder::all_orders;
  R1Domain r1_domain = R1Domain::clipped_to_a;
  bool include_lower_aperture = false;
  LensingQuadrature quadrature;
  EnsembleSettings ensemble;
  std::optional<double> fringe_fwhm;
  int passage_nodes = 8;
  std::string output_dir = "fountain_out";

  LensingConfig lensing() const;
  DcpConfig dcp() const;
};

std::vector<std::string> config_keys();

/// Applies one `key = value` setting; unknown keys and malformed values
/// raise an invalid-argument error naming the key.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines ('#' starts a comment) on top of `config`.
void read_config(std::istream& in, RunConfig& config, const std::string& source = "config");
void read_config_file(const std::filesystem::path& path, RunConfig& config);

/// Canonical text form; reading it back reproduces the config exactly.
std::string write_config(const RunConfig& config);

/// Checks ranges and orderings, reporting the offending key.
void validate_config(const RunConfig& config);

/// lo:hi:step, inclusive of hi within half a step.
std::vector<double> parse_range(const std::string& spec);

/// Locale-independent scientific notation with 9 significant digits.
std::string format_number(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a numeric CSV with a header line; '#' lines are skipped.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::filesystem::path& path);

struct OutputFile {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Collects outputs of one run and writes `manifest.json` beside them.
class RunContext {
 public:
  RunContext(const RunConfig& config, std::string command, std::vector<std::string> arguments);

  const std::filesystem::path& directory() const { return dir_; }
  /// Writes `content` to `name` inside the output directory and records it.
  void write_output(const std::string& name, const std::string& content);
  /// Writes the manifest; returns its path.
  std::filesystem::path finish();

 private:
  RunConfig config_;
  std::string command_;
  std::vector<std::string> arguments_;
  std::filesystem::path dir_;
  std::string started_;
  std::vector<OutputFile> outputs_;
};

std::string sha256_hex(const std::string& data);

struct LensingOptions {
  std::optional<std::vector<double>> b2_scan;
  bool b1_linearity = false;
};

struct DcpScanOptions {
  std::string field = "toy";  // "toy" or a phase-map path
  int toy_m = 1;
  double amplitude = 1e-3;     // rad
  std::string scan = "tilt";   // tilt (mrad) or offset (mm)
  std::vector<double> values;  // in scan units
  double direction_deg = 0.0;
  FeedConfig feed{FeedMode::single_phi0};
  bool fit_zero = false;
};

struct FitCommandOptions {
  std::string input;
  double cluster_tolerance = 0.0;  // 0: per-point weighting
  bool inflate = false;
  std::string extremum = "either";
};

struct CalibrationOptions {
  std::string input;
  int model_peaks = 0;  // > 0: expected peaks from the cloud model
};

struct CollisionalOptions {
  double nu_high = 0.0;
  double nu_low = 0.0;
  double kappa = 0.0;
  double kappa_rel_unc = 0.0;
};

struct BudgetOptions {
  std::string input;
  double u_a = 0.0;  // fractional
  std::optional<int> decimals;  // fixed display decimals in 1e-16 units
};

// Each command prints its report to `out` and records files in `run`.
void cmd_lensing(const RunConfig& config, const LensingOptions& options, RunContext& run, std::ostream& out);
void cmd_dcp_scan(const RunConfig& config, const DcpScanOptions& options, RunContext& run, std::ostream& out);
void cmd_tilt_fit(const FitCommandOptions& options, RunContext& run, std::ostream& out);
void cmd_parabola_fit(const FitCommandOptions& options, RunContext& run, std::ostream& out);
void cmd_calibrate_b(const RunConfig& config, const CalibrationOptions& options, RunContext& run, std::ostream& out);
void cmd_collisional(const CollisionalOptions& options, RunContext& run, std::ostream& out);
void cmd_budget(const BudgetOptions& options, RunContext& run, std::ostream& out);

}  // namespace fountain::cli
