#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <istream>
#include <limits>
#include <sstream>

#include "fountain/cli.hpp"
#include "fountain/error.hpp"

namespace fountain::cli {
namespace {

struct Key {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  if (!text.empty() && text[0] == '+') ++first;
  const auto [p, ec] = std::from_chars(first, text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v)) {
    fail(ErrorCode::invalid_argument, key + ": expected a number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    fail(ErrorCode::invalid_argument, key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(ErrorCode::invalid_argument, key + ": expected true or false, got '" + text + "'");
}

// A double stored in SI and written in the key's unit. `ref` is a generic
// accessor usable on const and mutable configs.
template <typename Ref>
Key scaled(std::string name, Ref ref, double unit) {
  return {name, [ref, unit](const RunConfig& c) { return shortest(ref(c) / unit); },
          [ref, unit, name](RunConfig& c, const std::string& v) { ref(c) = parse_double(name, v) * unit; }};
}

template <typename Enum, typename Ref>
Key choice(std::string name, Ref ref, std::vector<std::pair<std::string, Enum>> names) {
  return {name,
          [ref, names](const RunConfig& c) {
            const Enum v = ref(c);
            for (const auto& [n, e] : names) {
              if (e == v) return n;
            }
            return std::string("?");
          },
          [ref, names, name](RunConfig& c, const std::string& v) {
            for (const auto& [n, e] : names) {
              if (n == v) {
                ref(c) = e;
                return;
              }
            }
            std::string options;
            for (const auto& [n, e] : names) options += (options.empty() ? "" : ", ") + n;
            fail(ErrorCode::invalid_argument, name + ": expected one of " + options + ", got '" + v + "'");
          }};
}

#define FIELD(expr) [](auto& c) -> auto& { return expr; }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    constexpr double mm = 1e-3;
    constexpr double mrad = 1e-3;
    std::vector<Key> k;
    k.push_back(scaled("a_mm", FIELD(c.geometry.a), mm));
    k.push_back(scaled("a_sel_mm", FIELD(c.geometry.a_sel), mm));
    k.push_back(scaled("a_cutoff_mm", FIELD(c.geometry.a_cutoff), mm));
    k.push_back(scaled("cavity_height_mm", FIELD(c.geometry.cavity_height), mm));
    k.push_back(scaled("L_det_m", FIELD(c.geometry.L_det), 1.0));
    k.push_back(scaled("t1_s", FIELD(c.timing.t1), 1.0));
    k.push_back(scaled("t2_s", FIELD(c.timing.t2), 1.0));
    k.push_back(scaled("t1L_s", FIELD(c.timing.t1L), 1.0));
    k.push_back(scaled("t2L_s", FIELD(c.timing.t2L), 1.0));
    k.push_back(scaled("td_s", FIELD(c.timing.td), 1.0));
    k.push_back(scaled("w0_mm", FIELD(c.cloud.w0), mm));
    k.push_back(scaled("u_mm_per_s", FIELD(c.cloud.u), mm));
    k.push_back(scaled("offset_x_mm", FIELD(c.cloud.offset.x), mm));
    k.push_back(scaled("offset_y_mm", FIELD(c.cloud.offset.y), mm));
    k.push_back(scaled("tilt_x_mrad", FIELD(c.cloud.tilt.x), mrad));
    k.push_back(scaled("tilt_y_mrad", FIELD(c.cloud.tilt.y), mrad));
    k.push_back(scaled("b1", FIELD(c.drive.b1), 1.0));
    k.push_back(scaled("b2", FIELD(c.drive.b2), 1.0));
    k.push_back(scaled("eta", FIELD(c.drive.eta), 1.0));
    k.push_back(scaled("feed_amplitude_0", FIELD(c.drive.feed_amplitudes[0]), 1.0));
    k.push_back(scaled("feed_amplitude_1", FIELD(c.drive.feed_amplitudes[1]), 1.0));
    k.push_back(scaled("feed_phase_0_rad", FIELD(c.drive.feed_phases[0]), 1.0));
    k.push_back(scaled("feed_phase_1_rad", FIELD(c.drive.feed_phases[1]), 1.0));
    k.push_back(scaled("cavity_linewidth_hz", FIELD(c.drive.cavity_linewidth), 1.0));
    k.push_back(scaled("cavity_detuning_hz", FIELD(c.drive.cavity_detuning), 1.0));
    k.push_back(choice<DetectionMode>("detection", FIELD(c.detection.mode),
                                      {{"uniform", DetectionMode::uniform}, {"gaussian", DetectionMode::gaussian}}));
    k.push_back(choice<BeamShape>("beam_shape", FIELD(c.detection.shape),
                                  {{"single_axis", BeamShape::single_axis}, {"radial", BeamShape::radial}}));
    k.push_back(scaled("w_det_mm", FIELD(c.detection.w_det), mm));
    k.push_back(scaled("beam_axis_rad", FIELD(c.detection.profile_angle), 1.0));
    k.push_back(scaled("collection_radius_mm", FIELD(c.detection.collection_radius), mm));
    k.push_back(scaled("detection_offset_x_mm", FIELD(c.detection.offset.x), mm));
    k.push_back(scaled("detection_offset_y_mm", FIELD(c.detection.offset.y), mm));
    k.push_back(choice<KickOrder>("kick_order", FIELD(c.order),
                                  {{"all_orders", KickOrder::all_orders}, {"k2_truncated", KickOrder::k2_truncated}}));
    k.push_back(choice<R1Domain>("r1_domain", FIELD(c.r1_domain),
                                 {{"clipped_to_a", R1Domain::clipped_to_a}, {"unbounded", R1Domain::unbounded}}));
    k.push_back({"include_lower_aperture",
                 [](const RunConfig& c) { return std::string(c.include_lower_aperture ? "true" : "false"); },
                 [](RunConfig& c, const std::string& v) { c.include_lower_aperture = parse_bool("include_lower_aperture", v); }});
    k.push_back(scaled("nu_r_hz", FIELD(c.constants.nu_recoil), 1.0));
    k.push_back(scaled("g_m_per_s2", FIELD(c.constants.g), 1.0));
    k.push_back(scaled("quadrature_tolerance", FIELD(c.quadrature.tolerance), 1.0));
    k.push_back({"quadrature_max_levels", [](const RunConfig& c) { return std::to_string(c.quadrature.max_levels); },
                 [](RunConfig& c, const std::string& v) { c.quadrature.max_levels = parse_int<int>("quadrature_max_levels", v); }});
    k.push_back({"samples", [](const RunConfig& c) { return std::to_string(c.ensemble.samples); },
                 [](RunConfig& c, const std::string& v) { c.ensemble.samples = parse_int<std::size_t>("samples", v); }});
    k.push_back(choice<SamplingMode>("sampling", FIELD(c.ensemble.mode),
                                     {{"random", SamplingMode::random},
                                      {"quasi_random", SamplingMode::quasi_random},
                                      {"stratified", SamplingMode::stratified}}));
    k.push_back({"seed", [](const RunConfig& c) { return std::to_string(c.ensemble.seed); },
                 [](RunConfig& c, const std::string& v) { c.ensemble.seed = parse_int<std::uint64_t>("seed", v); }});
    k.push_back({"max_stat_error",
                 [](const RunConfig& c) {
                   return std::isfinite(c.ensemble.max_stat_error) ? shortest(c.ensemble.max_stat_error)
                                                                   : std::string("none");
                 },
                 [](RunConfig& c, const std::string& v) {
                   c.ensemble.max_stat_error =
                       v == "none" ? std::numeric_limits<double>::infinity() : parse_double("max_stat_error", v);
                 }});
    k.push_back({"fringe_fwhm_hz",
                 [](const RunConfig& c) { return c.fringe_fwhm ? shortest(*c.fringe_fwhm) : std::string("auto"); },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "auto") {
                     c.fringe_fwhm.reset();
                   } else {
                     c.fringe_fwhm = parse_double("fringe_fwhm_hz", v);
                   }
                 }});
    k.push_back({"passage_nodes", [](const RunConfig& c) { return std::to_string(c.passage_nodes); },
                 [](RunConfig& c, const std::string& v) { c.passage_nodes = parse_int<int>("passage_nodes", v); }});
    k.push_back({"output_dir", [](const RunConfig& c) { return c.output_dir; },
                 [](RunConfig& c, const std::string& v) { c.output_dir = v; }});
    return k;
  }();
  return table;
}

#undef FIELD

}  // namespace

LensingConfig RunConfig::lensing() const {
  LensingConfig c;
  c.constants = constants;
  c.geometry = geometry;
  c.timing = timing;
  c.cloud = cloud;
  c.drive = drive;
  c.detection = detection;
  c.order = order;
  c.r1_domain = r1_domain;
  c.include_lower_aperture = include_lower_aperture;
  c.quadrature = quadrature;
  return c;
}

DcpConfig RunConfig::dcp() const {
  DcpConfig c;
  c.constants = constants;
  c.geometry = geometry;
  c.timing = timing;
  c.cloud = cloud;
  c.drive = drive;
  c.detection = detection;
  c.ensemble = ensemble;
  c.fringe_fwhm = fringe_fwhm;
  c.passage_nodes = passage_nodes;
  return c;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.name);
  return out;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  fail(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
}

void read_config(std::istream& in, RunConfig& config, const std::string& source) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::parse_error, source + " line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const Error& e) {
      fail(ErrorCode::parse_error, source + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void read_config_file(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open config file '" + path.string() + "'");
  read_config(in, config, path.string());
}

std::string write_config(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& k : keys()) out << k.name << " = " << k.get(config) << '\n';
  return out.str();
}

void validate_config(const RunConfig& c) {
  const auto positive = [](double v, const char* key) {
    if (!(v > 0.0)) fail(ErrorCode::invalid_argument, std::string(key) + " must be positive");
  };
  const auto non_negative = [](double v, const char* key) {
    if (!(v >= 0.0)) fail(ErrorCode::invalid_argument, std::string(key) + " must be >= 0");
  };
  positive(c.geometry.a, "a_mm");
  positive(c.geometry.a_sel, "a_sel_mm");
  positive(c.geometry.a_cutoff, "a_cutoff_mm");
  positive(c.geometry.cavity_height, "cavity_height_mm");
  positive(c.geometry.L_det, "L_det_m");
  positive(c.timing.t1L, "t1L_s");
  if (!(c.timing.t1L <= c.timing.t1)) fail(ErrorCode::invalid_argument, "t1L_s must not exceed t1_s");
  if (!(c.timing.t1 < c.timing.t2)) fail(ErrorCode::invalid_argument, "t1_s must be less than t2_s");
  if (!(c.timing.t2 <= c.timing.t2L)) fail(ErrorCode::invalid_argument, "t2_s must not exceed t2L_s");
  if (!(c.timing.t2L <= c.timing.td)) fail(ErrorCode::invalid_argument, "t2L_s must not exceed td_s");
  positive(c.cloud.w0, "w0_mm");
  positive(c.cloud.u, "u_mm_per_s");
  non_negative(c.drive.b1, "b1");
  non_negative(c.drive.b2, "b2");
  positive(c.drive.eta, "eta");
  if (!(std::fabs(c.drive.feed_phases[0] - c.drive.feed_phases[1]) < std::numbers::pi)) {
    fail(ErrorCode::invalid_argument, "feed_phase_0_rad and feed_phase_1_rad must differ by less than pi");
  }
  if (c.detection.mode == DetectionMode::gaussian) positive(c.detection.w_det, "w_det_mm");
  non_negative(c.detection.collection_radius, "collection_radius_mm");
  non_negative(c.constants.nu_recoil, "nu_r_hz");
  positive(c.constants.g, "g_m_per_s2");
  positive(c.quadrature.tolerance, "quadrature_tolerance");
  if (c.quadrature.max_levels < 1) fail(ErrorCode::invalid_argument, "quadrature_max_levels must be >= 1");
  if (c.ensemble.samples < 1) fail(ErrorCode::invalid_argument, "samples must be >= 1");
  positive(c.ensemble.max_stat_error, "max_stat_error");
  if (c.fringe_fwhm) positive(*c.fringe_fwhm, "fringe_fwhm_hz");
  if (c.passage_nodes < 1) fail(ErrorCode::invalid_argument, "passage_nodes must be >= 1");
  if (c.output_dir.empty()) fail(ErrorCode::invalid_argument, "output_dir must not be empty");
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(trim(p));
  if (parts.size() != 3) fail(ErrorCode::invalid_argument, "range '" + spec + "': expected lo:hi:step");
  const double lo = parse_double("range", parts[0]);
  const double hi = parse_double("range", parts[1]);
  const double step = parse_double("range", parts[2]);
  if (!(step > 0.0) || hi < lo) fail(ErrorCode::invalid_argument, "range '" + spec + "': need lo <= hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5));
  if (n > 1000000) fail(ErrorCode::invalid_argument, "range '" + spec + "': too many points");
  std::vector<double> out;
  for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 8);
  return std::string(buf, end);
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    std::vector<std::string> cells;
    for (std::size_t start = 0;;) {
      const auto comma = body.find(',', start);
      cells.push_back(trim(body.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    if (cells.size() != t.header.size()) {
      fail(ErrorCode::parse_error, source + " line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(t.header.size()) + " columns");
    }
    t.rows.push_back(cells);
  }
  if (t.header.empty()) fail(ErrorCode::parse_error, source + ": missing header line");
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open '" + path.string() + "'");
  return read_csv(in, path.string());
}

}  // namespace fountain::cli
