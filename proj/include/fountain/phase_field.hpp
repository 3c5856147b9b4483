#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "fountain/core.hpp"

namespace fountain {

/// Built-in radial/longitudinal profiles, zeta = 2 z / cavity_height:
///   m = 0: zeta (r/a)^2
///   m = 1: (r/a)   p(zeta)
///   m = 2: (r/a)^2 p(zeta)
/// with p an even polynomial sum_j c_j zeta^(2j) (default p = 1).
struct ToyProfile {
  double radius = 5.0 * units::mm;
  double cavity_height = 43.0 * units::mm;
  std::vector<double> even_z_coefficients{1.0};
};

/// g(r, z) on a regular rectangular grid, bilinear between nodes and
/// clamped at the edges. values[i * nz + j] belongs to (r_i, z_j).
struct TabulatedProfile {
  std::size_t nr = 0;
  std::size_t nz = 0;
  double r_min = 0.0;
  double r_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
  std::vector<double> values;

  double operator()(double r, double z) const;
};

/// phase(r, phi, z) = amplitude * g_m(r, z) * cos(m (phi - orientation)).
struct PhaseField {
  int m = 1;
  double amplitude = 0.0;  // rad
  double orientation = 0.0;
  /// m = 1 gradients set up by the feeds follow FeedConfig; other m = 1
  /// sources (wall losses) do not.
  bool feed_driven = true;
  std::variant<ToyProfile, TabulatedProfile> profile = ToyProfile{};

  double profile_value(double r, double z) const;
  double phase(Vec2 r, double z) const;
};

void validate(const PhaseField& field);

PhaseField toy_field(int m, double amplitude, double aperture = 5.0 * units::mm,
                     double cavity_height = 43.0 * units::mm);

/// Reads a phase-map file: `key = value` header lines (m, nr, nz,
/// r_min_mm, r_max_mm, z_min_mm, z_max_mm) followed by nr CSV rows of nz
/// values each. Blank lines and lines starting with '#' are skipped.
/// Malformed input raises a parse-error naming the offending line.
PhaseField read_phase_map(std::istream& in, double amplitude = 1.0);
PhaseField read_phase_map_file(const std::string& path, double amplitude = 1.0);

}  // namespace fountain
