#include "fountain/budget.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fountain/error.hpp"

namespace fountain {

namespace {

// Entries sharing a full group label add linearly. A label of the form
// "top:sub" also contributes to the quadrature subtotal of "top".
std::map<std::string, double> linear_groups(std::span<const UncertaintyEntry> entries, UncertaintyKind kind) {
  std::map<std::string, double> groups;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    require(e.uncertainty >= 0.0, "budget entry '" + e.name + "': uncertainty must be >= 0");
    if (e.kind != kind) continue;
    const std::string key = e.group.empty() ? "\x01" + std::to_string(i) : e.group;
    groups[key] += e.uncertainty;
  }
  return groups;
}

double rss_of(const std::map<std::string, double>& groups) {
  double s = 0.0;
  for (const auto& [name, u] : groups) s += u * u;
  return std::sqrt(s);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// "0.8" in units of 1e-16 is parsed as the decimal 0.8e-16 so the value is
// correctly rounded once, not rounded and then scaled.
double parse_scaled(const std::string& text, int line_no) {
  const auto epos = text.find_first_of("eE");
  std::string mantissa = text.substr(0, epos);
  long exponent = 0;
  if (epos != std::string::npos) {
    const std::string exp_text = text.substr(epos + 1);
    const char* first = exp_text.data();
    if (!exp_text.empty() && exp_text[0] == '+') ++first;
    const auto [p, ec] = std::from_chars(first, exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc() || p != exp_text.data() + exp_text.size()) {
      fail(ErrorCode::parse_error, "budget line " + std::to_string(line_no) + ": bad number '" + text + "'");
    }
  }
  const std::string full = mantissa + "e" + std::to_string(exponent - 16);
  double value = 0.0;
  const auto [p, ec] = std::from_chars(full.data(), full.data() + full.size(), value);
  if (mantissa.empty() || ec != std::errc() || p != full.data() + full.size() || !std::isfinite(value)) {
    fail(ErrorCode::parse_error, "budget line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return value;
}

// Shortest round-trip digits of `value`, written in units of 1e-16.
std::string format_scaled(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  std::string s(buf, end);
  const auto epos = s.find('e');
  const int exponent = std::stoi(s.substr(epos + 1)) + 16;
  std::string mantissa = s.substr(0, epos);
  if (exponent == 0) return mantissa;
  return mantissa + "e" + std::to_string(exponent);
}

std::string kind_name(UncertaintyKind k) { return k == UncertaintyKind::type_a ? "A" : "B"; }

}  // namespace

Combined combine_quadrature(std::span<const UncertaintyEntry> entries) {
  require(!entries.empty(), "combine_quadrature: need at least one entry");
  Combined c;
  for (const auto& e : entries) c.shift += e.shift.value_or(0.0);
  const auto b = linear_groups(entries, UncertaintyKind::type_b);
  const auto a = linear_groups(entries, UncertaintyKind::type_a);
  c.uncertainty = std::hypot(rss_of(b), rss_of(a));
  return c;
}

BudgetTotals table2_totals(std::span<const UncertaintyEntry> entries, double extra_u_a) {
  require(extra_u_a >= 0.0, "table2_totals: uA must be >= 0");
  BudgetTotals t;
  for (const auto& e : entries) t.shift += e.shift.value_or(0.0);
  t.u_b = rss_of(linear_groups(entries, UncertaintyKind::type_b));
  t.u_a = std::hypot(rss_of(linear_groups(entries, UncertaintyKind::type_a)), extra_u_a);
  t.total = std::hypot(t.u_b, t.u_a);
  return t;
}

double tilt_sensitivity_uncertainty(double sensitivity, double sensitivity_unc, double tilt_unc) {
  require(tilt_unc >= 0.0, "tilt_sensitivity_uncertainty: tilt uncertainty must be >= 0");
  return tilt_unc * std::hypot(sensitivity, sensitivity_unc);
}

double rss(std::span<const double> values) {
  double s = 0.0;
  for (const double v : values) s += v * v;
  return std::sqrt(s);
}

double offset_uncertainty(std::span<const double> components) {
  for (const double c : components) require(c >= 0.0, "offset_uncertainty: components must be >= 0");
  return rss(components);
}

double halve_as_uncertainty(double shift) { return 0.5 * std::fabs(shift); }

namespace {

int decimal_exponent(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return std::atoi(std::strchr(buf, 'e') + 1);
}

}  // namespace

double round_decimals_half_even(double value, int decimals) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  // Decide on the exact decimal expansion so that e.g. 0.125 -> 0.12.
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", std::clamp(decimals + 40, 0, 400), std::fabs(value));
  std::string s(buf);
  const auto dot = s.find('.');
  std::string int_part = s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  // digits: all significant positions up to `decimals`, then the remainder
  std::string digits = int_part + frac;
  const long keep = static_cast<long>(int_part.size()) + decimals;
  if (keep < 0) return std::copysign(0.0, value);
  const std::string kept = digits.substr(0, static_cast<std::size_t>(keep));
  const std::string rest = digits.substr(static_cast<std::size_t>(keep));
  const bool nonzero_tail = rest.size() > 1 && rest.find_first_not_of('0', 1) != std::string::npos;
  const char first = rest.empty() ? '0' : rest[0];
  const int last = kept.empty() ? 0 : kept.back() - '0';
  const bool round_up = first > '5' || (first == '5' && (nonzero_tail || last % 2 == 1));
  std::string text = kept.empty() ? "0" : kept;
  if (round_up) {
    int i = static_cast<int>(text.size()) - 1;
    while (i >= 0 && text[i] == '9') text[i--] = '0';
    if (i < 0) {
      text.insert(text.begin(), '1');
    } else {
      ++text[i];
    }
  }
  const std::string out = std::string(value < 0 ? "-" : "") + text + "e" + std::to_string(-decimals);
  return std::strtod(out.c_str(), nullptr);
}

double round_sig_half_even(double value, int digits) {
  require(digits >= 1, "round_sig_half_even: digits must be >= 1");
  if (value == 0.0 || !std::isfinite(value)) return value;
  return round_decimals_half_even(value, digits - 1 - decimal_exponent(value));
}

std::string format_decimals(double value, int decimals) {
  require(decimals >= 0, "format_decimals: decimals must be >= 0");
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_decimals_half_even(value, decimals));
  return buf;
}

std::string format_sig(double value, int digits) {
  const double r = round_sig_half_even(value, digits);
  if (r == 0.0) return "0";
  const int decimals = std::max(0, digits - 1 - decimal_exponent(r));
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

std::vector<UncertaintyEntry> read_budget_csv(std::istream& in) {
  std::vector<UncertaintyEntry> entries;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split_csv(t);
    if (!header_seen) {
      header_seen = true;
      if (cells.size() < 3 || cells[0] != "name") {
        fail(ErrorCode::parse_error, "budget line " + std::to_string(line_no) +
                                         ": expected header name,shift_1e16,unc_1e16,kind,group");
      }
      continue;
    }
    if (cells.size() < 3 || cells.size() > 5) {
      fail(ErrorCode::parse_error, "budget line " + std::to_string(line_no) + ": expected 3 to 5 columns");
    }
    UncertaintyEntry e;
    e.name = cells[0];
    if (!cells[1].empty() && cells[1] != "-") e.shift = parse_scaled(cells[1], line_no);
    e.uncertainty = parse_scaled(cells[2], line_no);
    if (e.uncertainty < 0.0) {
      fail(ErrorCode::parse_error, "budget line " + std::to_string(line_no) + ": negative uncertainty");
    }
    if (cells.size() > 3 && !cells[3].empty()) {
      if (cells[3] == "A" || cells[3] == "typeA") {
        e.kind = UncertaintyKind::type_a;
      } else if (cells[3] == "B" || cells[3] == "typeB") {
        e.kind = UncertaintyKind::type_b;
      } else {
        fail(ErrorCode::parse_error, "budget line " + std::to_string(line_no) + ": kind must be A or B");
      }
    }
    if (cells.size() > 4) e.group = cells[4];
    entries.push_back(std::move(e));
  }
  if (!header_seen) fail(ErrorCode::parse_error, "budget: empty file");
  return entries;
}

std::vector<UncertaintyEntry> read_budget_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open budget file '" + path + "'");
  return read_budget_csv(in);
}

void write_budget_csv(std::ostream& out, std::span<const UncertaintyEntry> entries) {
  out << "name,shift_1e16,unc_1e16,kind,group\n";
  for (const auto& e : entries) {
    out << e.name << ',' << (e.shift ? format_scaled(*e.shift) : "") << ',' << format_scaled(e.uncertainty) << ','
        << kind_name(e.kind) << ',' << e.group << '\n';
  }
}

namespace {

struct ReportRow {
  std::string label;
  std::optional<double> shift;
  double uncertainty;
};

std::vector<ReportRow> report_rows(std::span<const UncertaintyEntry> entries, double extra_u_a) {
  std::vector<ReportRow> rows;
  for (const auto& e : entries) rows.push_back({e.name, e.shift, e.uncertainty});

  // Quadrature subtotals for "top:sub" labels with more than one subgroup.
  std::map<std::string, std::map<std::string, double>> nested;
  std::map<std::string, std::optional<double>> nested_shift;
  for (const auto& e : entries) {
    const auto colon = e.group.find(':');
    if (colon == std::string::npos || e.kind != UncertaintyKind::type_b) continue;
    const std::string top = e.group.substr(0, colon);
    nested[top][e.group] += e.uncertainty;
    if (e.shift) nested_shift[top] = nested_shift[top].value_or(0.0) + *e.shift;
  }
  for (const auto& [top, subs] : nested) {
    if (subs.size() < 2) continue;
    rows.push_back({"subtotal " + top, nested_shift[top], rss_of(subs)});
  }

  const BudgetTotals t = table2_totals(entries, extra_u_a);
  bool any_a = extra_u_a > 0.0;
  bool any_shift = false;
  for (const auto& e : entries) {
    any_a = any_a || e.kind == UncertaintyKind::type_a;
    any_shift = any_shift || e.shift.has_value();
  }
  rows.push_back({"uB", std::nullopt, t.u_b});
  if (any_a) {
    rows.push_back({"uA", std::nullopt, t.u_a});
  }
  rows.push_back({"total", any_shift ? std::optional<double>(t.shift) : std::nullopt, t.total});
  return rows;
}

std::string display(double v, const ReportFormat& f) {
  if (f.decimals) return format_decimals(v * 1e16, *f.decimals);
  return format_sig(v * 1e16, f.significant);
}

std::string scaled_fixed(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(6) << std::fixed << v * 1e16;
  return os.str();
}

}  // namespace

void write_budget_report(std::ostream& out, std::span<const UncertaintyEntry> entries, double extra_u_a,
                         ReportFormat format) {
  const auto rows = report_rows(entries, extra_u_a);
  const auto shown = [&](double v) { return display(v, format); };
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  out << std::left << std::setw(static_cast<int>(width)) << "effect" << "  " << std::right << std::setw(8)
      << "shift" << "  " << std::setw(8) << "unc" << "  " << std::setw(12) << "shift_full" << "  "
      << std::setw(12) << "unc_full" << "   (units of 1e-16)\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.label << "  " << std::right << std::setw(8)
        << (r.shift ? shown(*r.shift) : "-") << "  " << std::setw(8)
        << shown(r.uncertainty) << "  " << std::setw(12) << (r.shift ? scaled_fixed(*r.shift) : "-")
        << "  " << std::setw(12) << scaled_fixed(r.uncertainty) << '\n';
  }
}

void write_budget_report_csv(std::ostream& out, std::span<const UncertaintyEntry> entries, double extra_u_a,
                             ReportFormat format) {
  const auto shown = [&](double v) { return display(v, format); };
  out << "label,shift_1e16_rounded,unc_1e16_rounded,shift_1e16,unc_1e16\n";
  for (const auto& r : report_rows(entries, extra_u_a)) {
    out << r.label << ',' << (r.shift ? shown(*r.shift) : "") << ','
        << shown(r.uncertainty) << ',' << (r.shift ? format_scaled(*r.shift) : "") << ','
        << format_scaled(r.uncertainty) << '\n';
  }
}

}  // namespace fountain
