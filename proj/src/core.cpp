#include "fountain/core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fountain/error.hpp"

namespace fountain {

PhysicalConstants derive_constants(double h, double m_cs, double c, double nu_clock, double g) {
  require(h > 0.0, "derive_constants: h must be positive");
  require(m_cs > 0.0, "derive_constants: m_Cs must be positive");
  require(c > 0.0, "derive_constants: c must be positive");
  require(nu_clock > 0.0, "derive_constants: nu_clock must be positive");
  require(g > 0.0, "derive_constants: g must be positive");
  PhysicalConstants pc;
  pc.h = h;
  pc.m_cs = m_cs;
  pc.c = c;
  pc.nu_clock = nu_clock;
  pc.g = g;
  pc.nu_recoil = h * nu_clock * nu_clock / (2.0 * m_cs * c * c);
  pc.k = 2.0 * std::numbers::pi * nu_clock / c;
  return pc;
}

PhysicalConstants cesium_constants() {
  constexpr double h = 6.62607015e-34;
  constexpr double atomic_mass_unit = 1.66053906660e-27;
  constexpr double m_cs = 132.905451961 * atomic_mass_unit;
  constexpr double c = 299792458.0;
  constexpr double nu = 9192631770.0;
  return derive_constants(h, m_cs, c, nu);
}

void validate(const FountainGeometry& g) {
  require(g.a > 0.0, "geometry: aperture radius a must be positive");
  require(g.a_sel > 0.0, "geometry: a_sel must be positive");
  require(g.a_cutoff > 0.0, "geometry: a_cutoff must be positive");
  require(g.cavity_height > 0.0, "geometry: cavity height must be positive");
  require(g.L_det > 0.0, "geometry: L_det must be positive");
}

double offset_to_tilt(const FountainGeometry& g, double offset) {
  validate(g);
  return offset / g.L_det;
}

double tilt_to_offset(const FountainGeometry& g, double tilt) {
  validate(g);
  return tilt * g.L_det;
}

void validate(const TimingSchedule& t) {
  require(t.t1L > 0.0, "timing: t1L must be positive");
  require(t.t1L <= t.t1, "timing: t1L must not exceed t1");
  require(t.t1 < t.t2, "timing: t1 must precede t2");
  require(t.t2 <= t.t2L, "timing: t2 must not exceed t2L");
  require(t.t2L <= t.td, "timing: t2L must not exceed td");
}

double time_at_height(const TimingSchedule& t, double g, double dz, bool ascending) {
  // z(t) - z_cavity = v_c (t - t1) - g/2 (t - t1)^2 with v_c the upward
  // speed at t1; both Ramsey passages sit at dz = 0.
  const double v_c = vertical_velocity(t, g, t.t1);
  const double disc = v_c * v_c - 2.0 * g * dz;
  require(disc >= 0.0, "time_at_height: height above the apogee");
  const double root = std::sqrt(disc);
  return t.t1 + (ascending ? (v_c - root) : (v_c + root)) / g;
}

void validate(const CloudState& c) {
  require(c.w0 > 0.0, "cloud: w0 must be positive");
  require(c.u > 0.0, "cloud: u must be positive");
}

double w2L(const CloudState& cloud, const TimingSchedule& timing) {
  return std::sqrt(cloud.w0 * cloud.w0 + cloud.u * cloud.u * timing.t2L * timing.t2L);
}

double DetectionProfile::weight(Vec2 r) const {
  if (mode == DetectionMode::uniform) return 1.0;
  const Vec2 d = r - offset;
  double w;
  if (shape == BeamShape::radial) {
    w = gaussian_1e2(d.norm2(), w_det);
  } else {
    const double s = d.x * std::cos(profile_angle) + d.y * std::sin(profile_angle);
    w = gaussian_1e2(s * s, w_det);
  }
  if (collection_radius > 0.0) w *= gaussian_1e2(d.norm2(), collection_radius);
  return w;
}

Vec2 DetectionProfile::gradient(Vec2 r) const {
  if (mode == DetectionMode::uniform) return {};
  const Vec2 d = r - offset;
  const double w = weight(r);
  Vec2 grad;
  if (shape == BeamShape::radial) {
    grad = (-4.0 / (w_det * w_det)) * d;
  } else {
    const Vec2 axis{std::cos(profile_angle), std::sin(profile_angle)};
    grad = (-4.0 * d.dot(axis) / (w_det * w_det)) * axis;
  }
  if (collection_radius > 0.0) grad += (-4.0 / (collection_radius * collection_radius)) * d;
  return w * grad;
}

bool DetectionProfile::radially_symmetric() const {
  if (mode == DetectionMode::uniform) return true;
  return shape == BeamShape::radial && offset == Vec2{};
}

void validate(const DetectionProfile& d) {
  if (d.mode == DetectionMode::gaussian) require(d.w_det > 0.0, "detection: w_det must be positive");
  require(d.collection_radius >= 0.0, "detection: collection radius must be >= 0");
}

void validate(const MicrowaveDrive& d) {
  require(d.b1 >= 0.0 && d.b2 >= 0.0, "drive: amplitudes b1, b2 must be >= 0");
  require(d.eta > 0.0, "drive: eta must be positive");
  require(std::fabs(d.feed_phases[0] - d.feed_phases[1]) < std::numbers::pi,
          "drive: feed phase difference must be below pi");
  require(d.cavity_linewidth > 0.0, "drive: cavity linewidth must be positive");
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::degenerate_amplitude: return "degenerate-amplitude";
    case ErrorCode::degenerate_contrast: return "degenerate-contrast";
    case ErrorCode::accuracy_not_reached: return "accuracy-not-reached";
    case ErrorCode::no_atoms: return "no-atoms";
    case ErrorCode::slope_degenerate: return "slope-degenerate";
    case ErrorCode::vertex_undetermined: return "vertex-undetermined";
    case ErrorCode::insufficient_scan: return "insufficient-scan";
    case ErrorCode::ambiguous_calibration: return "ambiguous-calibration";
    case ErrorCode::invalid_ratio: return "invalid-ratio";
    case ErrorCode::parse_error: return "parse-error";
  }
  return "unknown";
}

}  // namespace fountain
