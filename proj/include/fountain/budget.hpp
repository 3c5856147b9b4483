#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fountain {

enum class UncertaintyKind { type_a, type_b };

struct UncertaintyEntry {
  std::string name;
  std::optional<double> shift;  // fractional frequency
  double uncertainty = 0.0;     // fractional frequency
  UncertaintyKind kind = UncertaintyKind::type_b;
  std::string group;            // empty: a group of its own
};

struct Combined {
  double shift = 0.0;
  double uncertainty = 0.0;
};

/// Shifts add. Uncertainties add linearly within a correlation group and
/// in quadrature across groups.
Combined combine_quadrature(std::span<const UncertaintyEntry> entries);

struct BudgetTotals {
  double shift = 0.0;
  double u_b = 0.0;
  double u_a = 0.0;
  double total = 0.0;
};

/// Type-B rows combined as above; u_a is the quadrature sum of any type-A
/// rows together with `extra_u_a`.
BudgetTotals table2_totals(std::span<const UncertaintyEntry> entries, double extra_u_a = 0.0);

/// tilt_unc * sqrt(sensitivity^2 + sensitivity_unc^2)
double tilt_sensitivity_uncertainty(double sensitivity, double sensitivity_unc, double tilt_unc);

double offset_uncertainty(std::span<const double> components);

double halve_as_uncertainty(double shift);

double rss(std::span<const double> values);

/// Rounds to `digits` significant figures, ties to even.
double round_sig_half_even(double value, int digits);

/// Rounds to `decimals` places after the decimal point, ties to even.
double round_decimals_half_even(double value, int decimals);

/// Formats with `digits` significant figures after half-even rounding,
/// keeping trailing zeros.
std::string format_sig(double value, int digits);
std::string format_decimals(double value, int decimals);

/// Display rounding for reports: significant figures unless a fixed number
/// of decimals (in units of 1e-16) is requested.
struct ReportFormat {
  int significant = 2;
  std::optional<int> decimals;
};

/// CSV with header `name,shift_1e16,unc_1e16,kind,group`. Values are in
/// units of 1e-16; the shift column may be empty.
std::vector<UncertaintyEntry> read_budget_csv(std::istream& in);
std::vector<UncertaintyEntry> read_budget_file(const std::string& path);
void write_budget_csv(std::ostream& out, std::span<const UncertaintyEntry> entries);

/// Aligned text table with rounded and full-precision columns.
void write_budget_report(std::ostream& out, std::span<const UncertaintyEntry> entries, double extra_u_a = 0.0,
                         ReportFormat format = {});
/// Same content as the text report, one row per line in CSV.
void write_budget_report_csv(std::ostream& out, std::span<const UncertaintyEntry> entries, double extra_u_a = 0.0,
                             ReportFormat format = {});

}  // namespace fountain
