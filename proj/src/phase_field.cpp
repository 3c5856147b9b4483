#include "fountain/phase_field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "fountain/error.hpp"

namespace fountain {
namespace {

double even_polynomial(const std::vector<double>& c, double zeta) {
  const double z2 = zeta * zeta;
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z2 + *it;
  return acc;
}

double toy_value(const ToyProfile& p, int m, double r, double z) {
  const double s = r / p.radius;
  const double zeta = 2.0 * z / p.cavity_height;
  switch (m) {
    case 0: return zeta * s * s;
    case 1: return s * even_polynomial(p.even_z_coefficients, zeta);
    default: return s * s * even_polynomial(p.even_z_coefficients, zeta);
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  fail(ErrorCode::parse_error, "phase map line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& text, int line) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) parse_fail(line, "not a number: '" + t + "'");
  return value;
}

}  // namespace

double TabulatedProfile::operator()(double r, double z) const {
  const auto locate = [](double x, double lo, double hi, std::size_t n, std::size_t& i, double& f) {
    if (n == 1) {
      i = 0;
      f = 0.0;
      return;
    }
    const double pos = std::clamp((x - lo) / (hi - lo), 0.0, 1.0) * static_cast<double>(n - 1);
    i = std::min(static_cast<std::size_t>(pos), n - 2);
    f = pos - static_cast<double>(i);
  };
  std::size_t i = 0, j = 0;
  double fr = 0.0, fz = 0.0;
  locate(r, r_min, r_max, nr, i, fr);
  locate(z, z_min, z_max, nz, j, fz);
  const auto at = [&](std::size_t a, std::size_t b) { return values[a * nz + b]; };
  const std::size_t i1 = nr == 1 ? i : i + 1;
  const std::size_t j1 = nz == 1 ? j : j + 1;
  return (1 - fr) * ((1 - fz) * at(i, j) + fz * at(i, j1)) + fr * ((1 - fz) * at(i1, j) + fz * at(i1, j1));
}

double PhaseField::profile_value(double r, double z) const {
  if (const auto* toy = std::get_if<ToyProfile>(&profile)) return toy_value(*toy, m, r, z);
  return std::get<TabulatedProfile>(profile)(r, z);
}

double PhaseField::phase(Vec2 r, double z) const {
  if (amplitude == 0.0) return 0.0;
  const double g = profile_value(r.norm(), z);
  if (m == 0) return amplitude * g;
  const double phi = std::atan2(r.y, r.x);
  return amplitude * g * std::cos(m * (phi - orientation));
}

void validate(const PhaseField& field) {
  require(field.m >= 0 && field.m <= 2, "phase field: m must be 0, 1 or 2");
  if (const auto* tab = std::get_if<TabulatedProfile>(&field.profile)) {
    require(tab->nr >= 1 && tab->nz >= 1, "phase field: empty grid");
    require(tab->values.size() == tab->nr * tab->nz, "phase field: grid size mismatch");
    require(tab->r_min >= 0.0 && tab->r_max >= tab->r_min, "phase field: bad r range");
    require(tab->z_max >= tab->z_min, "phase field: bad z range");
    if (tab->nr > 1) require(tab->r_max > tab->r_min, "phase field: degenerate r range");
    if (tab->nz > 1) require(tab->z_max > tab->z_min, "phase field: degenerate z range");
    if (field.m >= 1 && tab->r_min == 0.0) {
      for (std::size_t j = 0; j < tab->nz; ++j) {
        require(tab->values[j] == 0.0, "phase field: m >= 1 profile must vanish on the axis");
      }
    }
  } else {
    const auto& toy = std::get<ToyProfile>(field.profile);
    require(toy.radius > 0.0 && toy.cavity_height > 0.0, "phase field: toy scales must be positive");
  }
}

PhaseField toy_field(int m, double amplitude, double aperture, double cavity_height) {
  PhaseField f;
  f.m = m;
  f.amplitude = amplitude;
  f.profile = ToyProfile{aperture, cavity_height, {1.0}};
  validate(f);
  return f;
}

PhaseField read_phase_map(std::istream& in, double amplitude) {
  std::map<std::string, std::pair<double, int>> header;
  std::vector<std::vector<double>> rows;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text[0] == '#') continue;
    if (const auto eq = text.find('='); eq != std::string::npos) {
      if (!rows.empty()) parse_fail(line, "header entry after data rows");
      const std::string key = trim(text.substr(0, eq));
      if (key.empty()) parse_fail(line, "missing key");
      header[key] = {parse_double(text.substr(eq + 1), line), line};
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell, line));
    rows.push_back(std::move(row));
    const auto nz_it = header.find("nz");
    if (nz_it != header.end() && rows.back().size() != static_cast<std::size_t>(nz_it->second.first)) {
      parse_fail(line, "expected " + std::to_string(static_cast<long>(nz_it->second.first)) + " values, got " +
                           std::to_string(rows.back().size()));
    }
  }
  const auto need = [&](const char* key) {
    const auto it = header.find(key);
    if (it == header.end()) parse_fail(line, std::string("missing header key '") + key + "'");
    return it->second;
  };
  const auto [m, m_line] = need("m");
  const auto [nr, nr_line] = need("nr");
  const auto [nz, nz_line] = need("nz");
  if (m != 0.0 && m != 1.0 && m != 2.0) parse_fail(m_line, "m must be 0, 1 or 2");
  if (nr < 1 || nr != std::floor(nr)) parse_fail(nr_line, "nr must be a positive integer");
  if (nz < 1 || nz != std::floor(nz)) parse_fail(nz_line, "nz must be a positive integer");
  if (rows.size() != static_cast<std::size_t>(nr)) {
    parse_fail(line, "expected " + std::to_string(static_cast<long>(nr)) + " data rows, got " +
                         std::to_string(rows.size()));
  }
  TabulatedProfile tab;
  tab.nr = static_cast<std::size_t>(nr);
  tab.nz = static_cast<std::size_t>(nz);
  tab.r_min = need("r_min_mm").first * units::mm;
  tab.r_max = need("r_max_mm").first * units::mm;
  tab.z_min = need("z_min_mm").first * units::mm;
  tab.z_max = need("z_max_mm").first * units::mm;
  for (const auto& row : rows) tab.values.insert(tab.values.end(), row.begin(), row.end());

  PhaseField f;
  f.m = static_cast<int>(m);
  f.amplitude = amplitude;
  f.profile = std::move(tab);
  try {
    validate(f);
  } catch (const Error& e) {
    parse_fail(line, e.what());
  }
  return f;
}

PhaseField read_phase_map_file(const std::string& path, double amplitude) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open phase map '" + path + "'");
  return read_phase_map(in, amplitude);
}

}  // namespace fountain
