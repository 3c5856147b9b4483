#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fountain/analysis.hpp"
#include "fountain/budget.hpp"
#include "fountain/cli.hpp"
#include "fountain/error.hpp"
#include "fountain/phase_field.hpp"

namespace fountain::cli {
namespace {

double cell_number(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) {
    fail(ErrorCode::parse_error, "row " + std::to_string(row + 1) + ", column '" + t.header[col] +
                                     "': expected a number, got '" + s + "'");
  }
  return v;
}

std::vector<WeightedPoint> read_points(const std::string& path) {
  const CsvTable t = read_csv_file(path);
  if (t.header.size() != 3) fail(ErrorCode::parse_error, path + ": expected columns x,y,sigma");
  std::vector<WeightedPoint> pts;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    pts.push_back({cell_number(t, i, 0), cell_number(t, i, 1), cell_number(t, i, 2)});
  }
  return pts;
}

void line(std::ostream& out, const std::string& key, const std::string& value) {
  out << key << " = " << value << '\n';
}

std::string fit_report(const FitResult& fit, const char* derived_name) {
  std::ostringstream os;
  for (std::size_t i = 0; i < fit.parameters.size(); ++i) {
    line(os, "p" + std::to_string(i), format_number(fit.parameters[i]));
  }
  for (std::size_t i = 0; i < fit.covariance.size(); ++i) {
    for (std::size_t j = i; j < fit.covariance.size(); ++j) {
      line(os, "cov" + std::to_string(i) + std::to_string(j), format_number(fit.covariance[i][j]));
    }
  }
  line(os, derived_name, format_number(fit.derived));
  line(os, std::string("sigma_") + derived_name, format_number(fit.derived_sigma));
  line(os, "chi2", format_number(fit.chi2));
  line(os, "dof", std::to_string(fit.dof));
  line(os, "chi2_per_dof", format_number(fit.chi2_per_dof()));
  return os.str();
}

std::string residual_csv(const std::vector<WeightedPoint>& pts, const FitResult& fit) {
  std::ostringstream os;
  os << "x,y,sigma,residual\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    os << format_number(pts[i].x) << ',' << format_number(pts[i].y) << ',' << format_number(pts[i].sigma_y) << ','
       << format_number(fit.residuals[i]) << '\n';
  }
  return os.str();
}

std::vector<WeightedPoint> maybe_cluster(std::vector<WeightedPoint> pts, double tolerance) {
  if (tolerance > 0.0) return cluster_means(pts, tolerance);
  return pts;
}

}  // namespace

void cmd_lensing(const RunConfig& config, const LensingOptions& options, RunContext& run, std::ostream& out) {
  validate_config(config);
  const LensingConfig lc = config.lensing();
  const double recoil_rel = lc.constants.nu_recoil / lc.constants.nu_clock;
  std::ostringstream summary;
  summary << "quantity,value\n";
  const auto report = [&](const std::string& key, double v) {
    out << key << " = " << format_number(v) << '\n';
    summary << key << ',' << format_number(v) << '\n';
  };

  report("nu_recoil_over_nu", recoil_rel);
  report("analytic_shift", analytic_shift(lc));
  const LensingResult r = full_shift(lc);
  report("full_shift_term1", r.shift_term1_rel);
  report("full_shift_term2", r.shift_term2_rel);
  report("full_shift_total", r.shift_rel);
  report("deltaP_term1", r.deltaP_term1);
  report("deltaP_term2", r.deltaP_term2);
  report("deltaP_R", r.deltaP_R);
  report("quadrature_error", r.quadrature_error);
  if (recoil_rel > 0.0) {
    report("ratio_to_recoil", r.shift_rel / recoil_rel);
  } else {
    out << "ratio_to_recoil = undefined (nu_r_hz = 0)\n";
    summary << "ratio_to_recoil,\n";
  }
  run.write_output("lensing.csv", summary.str());

  if (options.b2_scan) {
    const auto scan = amplitude_scan(lc, *options.b2_scan, options.b1_linearity);
    std::ostringstream csv;
    csv << "b2,term1,term2,total,quadrature_error,b1_linearity,error\n";
    std::size_t failures = 0;
    for (const auto& p : scan) {
      csv << format_number(p.b2) << ',';
      if (p.result) {
        csv << format_number(p.result->shift_term1_rel) << ',' << format_number(p.result->shift_term2_rel) << ','
            << format_number(p.result->shift_rel) << ',' << format_number(p.result->quadrature_error);
      } else {
        csv << ",,,";
        ++failures;
      }
      csv << ',' << (p.b1_linearity ? format_number(*p.b1_linearity) : "") << ',';
      // keep the CSV single-line per row
      std::string err = p.error;
      for (char& ch : err) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      csv << err << '\n';
    }
    run.write_output("amplitude_scan.csv", csv.str());
    out << "amplitude_scan_rows = " << scan.size() << '\n';
    for (const double z : term1_zero_crossings(scan)) out << "term1_zero_crossing_b2 = " << format_number(z) << '\n';
    if (failures > 0) out << "amplitude_scan_failed_points = " << failures << '\n';
  }
}

void cmd_dcp_scan(const RunConfig& config, const DcpScanOptions& o, RunContext& run, std::ostream& out) {
  validate_config(config);
  require(!o.values.empty(), "dcp-scan: no scan values given");
  const DcpConfig dc = config.dcp();
  const PhaseField field = o.field == "toy"
                               ? toy_field(o.toy_m, o.amplitude, config.geometry.a, config.geometry.cavity_height)
                               : read_phase_map_file(o.field, o.amplitude);
  const double angle = o.direction_deg * std::numbers::pi / 180.0;
  const Vec2 direction{std::cos(angle), std::sin(angle)};

  std::vector<ScanRow> rows;
  std::string x_name;
  double unit = 1.0;
  if (o.scan == "tilt") {
    x_name = "tilt_mrad";
    unit = 1e-3;
    std::vector<double> tilts;
    for (const double v : o.values) tilts.push_back(v * unit);
    rows = tilt_scan(dc, field, tilts, direction);
  } else if (o.scan == "offset") {
    x_name = "offset_mm";
    unit = 1e-3;
    std::vector<double> offsets;
    for (const double v : o.values) offsets.push_back(v * unit);
    rows = offset_scan(dc, field, o.feed, offsets, direction, config.cloud.tilt);
  } else {
    fail(ErrorCode::invalid_argument, "dcp-scan: scan must be 'tilt' or 'offset'");
  }

  std::ostringstream csv;
  csv << x_name << ",shift_rel,stat_err,error\n";
  std::vector<WeightedPoint> pts;
  std::size_t failures = 0;
  for (const auto& r : rows) {
    csv << format_number(r.x / unit) << ',';
    if (r.error.empty()) {
      csv << format_number(r.shift_rel) << ',' << format_number(r.stat_error) << ",\n";
      if (r.stat_error > 0.0) pts.push_back({r.x / unit, r.shift_rel, r.stat_error});
    } else {
      ++failures;
      std::string err = r.error;
      for (char& ch : err) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      csv << ",," << err << '\n';
    }
  }
  run.write_output("dcp_scan.csv", csv.str());
  out << "scan_rows = " << rows.size() << '\n';
  if (failures > 0) out << "scan_failed_points = " << failures << '\n';

  if (o.fit_zero) {
    const FitResult fit = fit_linear_zero_crossing(pts);
    const std::string text = fit_report(fit, "x0");
    run.write_output("fit_zero.txt", text);
    out << text;
  }
}

void cmd_tilt_fit(const FitCommandOptions& o, RunContext& run, std::ostream& out) {
  const auto pts = maybe_cluster(read_points(o.input), o.cluster_tolerance);
  const FitResult fit = fit_linear_zero_crossing(pts, {.inflate_by_chi2 = o.inflate});
  const std::string text = fit_report(fit, "x0");
  run.write_output("tilt_fit.txt", text);
  run.write_output("tilt_fit_residuals.csv", residual_csv(pts, fit));
  out << text;
}

void cmd_parabola_fit(const FitCommandOptions& o, RunContext& run, std::ostream& out) {
  Extremum mode = Extremum::either;
  if (o.extremum == "max") {
    mode = Extremum::maximum;
  } else if (o.extremum == "min") {
    mode = Extremum::minimum;
  } else if (o.extremum != "either") {
    fail(ErrorCode::invalid_argument, "parabola-fit: extremum must be max, min or either");
  }
  const auto pts = maybe_cluster(read_points(o.input), o.cluster_tolerance);
  const FitResult fit = fit_parabola_vertex(pts, mode, {.inflate_by_chi2 = o.inflate});
  const std::string text = fit_report(fit, "vertex");
  run.write_output("parabola_fit.txt", text);
  run.write_output("parabola_fit_residuals.csv", residual_csv(pts, fit));
  out << text;
}

void cmd_calibrate_b(const RunConfig& config, const CalibrationOptions& o, RunContext& run, std::ostream& out) {
  const CsvTable t = read_csv_file(o.input);
  if (t.header.size() != 2) fail(ErrorCode::parse_error, o.input + ": expected columns drive,contrast");
  std::vector<ContrastSample> scan;
  for (std::size_t i = 0; i < t.rows.size(); ++i) scan.push_back({cell_number(t, i, 0), cell_number(t, i, 1)});
  std::vector<double> expected;
  if (o.model_peaks > 0) {
    validate_config(config);
    const LensingConfig base = config.lensing();
    expected = model_contrast_peaks(
        [&](double b) {
          LensingConfig c = base;
          c.drive.b1 = c.drive.b2 = b;
          return std::fabs(fringe_contrast(c));
        },
        o.model_peaks);
  }
  const AmplitudeCalibration cal = calibrate_amplitude(scan, expected);
  std::ostringstream os;
  line(os, "scale", format_number(cal.scale));
  line(os, "residual_rms", format_number(cal.residual_rms));
  for (std::size_t i = 0; i < cal.peak_drives.size(); ++i) {
    line(os, "peak" + std::to_string(i) + "_drive", format_number(cal.peak_drives[i]));
    line(os, "peak" + std::to_string(i) + "_b", format_number(cal.peak_amplitudes[i]));
  }
  run.write_output("calibration.txt", os.str());
  out << os.str();
}

void cmd_collisional(const CollisionalOptions& o, RunContext& run, std::ostream& out) {
  const auto r = collisional_extrapolation({o.nu_high, o.nu_low, o.kappa, o.kappa_rel_unc});
  std::ostringstream os;
  line(os, "delta_nu", format_number(o.nu_high - o.nu_low));
  line(os, "corrected", format_number(r.corrected));
  line(os, "type_b", format_number(r.type_b));
  run.write_output("collisional.txt", os.str());
  out << os.str();
}

void cmd_budget(const BudgetOptions& o, RunContext& run, std::ostream& out) {
  const auto entries = read_budget_file(o.input);
  if (entries.empty()) fail(ErrorCode::parse_error, o.input + ": no budget rows");
  std::ostringstream text, csv;
  ReportFormat format;
  format.decimals = o.decimals;
  write_budget_report(text, entries, o.u_a, format);
  write_budget_report_csv(csv, entries, o.u_a, format);
  run.write_output("budget_report.txt", text.str());
  run.write_output("budget_report.csv", csv.str());
  out << text.str();
}

}  // namespace fountain::cli
