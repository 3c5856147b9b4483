#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace fountain {

namespace units {
inline constexpr double mm = 1e-3;
inline constexpr double um = 1e-6;
inline constexpr double mm_per_s = 1e-3;
inline constexpr double mrad = 1e-3;
}  // namespace units

/// Transverse (horizontal) vector in the cavity frame, metres or m/s.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return v *= s; }
  friend constexpr Vec2 operator*(Vec2 v, double s) { return v *= s; }
  friend constexpr Vec2 operator-(Vec2 v) { return {-v.x, -v.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;

  constexpr double norm2() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
};

inline Vec2 polar(double r, double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }

/// Fundamental constants and the quantities derived from them. Only
/// `derive_constants` establishes the recoil/wavenumber invariants; the
/// recoil override exists so a caller can switch lensing off.
struct PhysicalConstants {
  double h = 0.0;         // J s
  double m_cs = 0.0;      // kg
  double c = 0.0;         // m/s
  double nu_clock = 0.0;  // Hz
  double nu_recoil = 0.0; // Hz, h nu^2 / (2 m c^2)
  double k = 0.0;         // 1/m, 2 pi nu / c
  double g = 9.80665;     // m/s^2, local gravity used for fountain kinematics

  PhysicalConstants with_recoil(double nu_r) const {
    PhysicalConstants out = *this;
    out.nu_recoil = nu_r;
    return out;
  }
};

PhysicalConstants derive_constants(double h, double m_cs, double c, double nu_clock,
                                   double g = 9.80665);

/// CODATA 2018 values for 133Cs.
PhysicalConstants cesium_constants();

/// Aperture radii and cavity geometry. All z positions are relative to the
/// Ramsey cavity midplane.
struct FountainGeometry {
  double a = 5.0 * units::mm;          // Ramsey cavity aperture radius
  double a_sel = 5.0 * units::mm;      // lower (selection-cavity) aperture radius
  double a_cutoff = 5.0 * units::mm;   // cutoff waveguide bore radius
  double cavity_height = 43.0 * units::mm;
  double L_det = 3.7;                  // launch-to-detection baseline for offset <-> tilt, m

  /// Heights of the cutoff-waveguide / endcap corners.
  std::array<double, 2> corner_z() const { return {-0.5 * cavity_height, 0.5 * cavity_height}; }
};

void validate(const FountainGeometry& g);

/// Tilt (rad) that moves the detected cloud by `offset` (m) over L_det, and back.
double offset_to_tilt(const FountainGeometry& g, double offset);
double tilt_to_offset(const FountainGeometry& g, double tilt);

/// Passage times measured from launch. t1L/t2L are the lower aperture on
/// the way up and down; td is the detection time.
struct TimingSchedule {
  double t1 = 0.18;
  double t2 = 0.7;
  double t1L = 0.043;
  double t2L = 0.837;
  double td = 0.837;

  double ramsey_time() const { return t2 - t1; }
  double apogee_time() const { return 0.5 * (t1 + t2); }
};

void validate(const TimingSchedule& t);

/// Vertical velocity (positive upward) at time t for a ballistic launch whose
/// apogee lies midway between the two Ramsey passages.
inline double vertical_velocity(const TimingSchedule& t, double g, double time) {
  return g * (t.apogee_time() - time);
}

/// Time at which the atoms pass height dz above the cavity midplane, on the
/// way up (`ascending`) or down.
double time_at_height(const TimingSchedule& t, double g, double dz, bool ascending);

/// Launched cloud. W_r0(r0) = exp(-|r0 - offset|^2 / w0^2) (1/e radius) and
/// W_T(v) = exp(-v^2 / u^2).
struct CloudState {
  double w0 = 1.1 * units::mm;
  double u = 15.0 * units::mm_per_s;
  Vec2 offset{};
  Vec2 tilt{};  // rad; the cavity frame sees a transverse acceleration g * tilt
};

void validate(const CloudState& c);

/// 1/e radius of the cloud at the lower aperture on the way down.
double w2L(const CloudState& cloud, const TimingSchedule& timing);

inline double gaussian_1e(double r2, double w) { return std::exp(-r2 / (w * w)); }
inline double gaussian_1e2(double r2, double w) { return std::exp(-2.0 * r2 / (w * w)); }

enum class DetectionMode { uniform, gaussian };

/// `radial`: intensity exp(-2 r^2 / w^2). `single_axis`: a beam propagating
/// perpendicular to `profile_angle`, so only the coordinate along that
/// direction matters, exp(-2 s^2 / w^2).
enum class BeamShape { radial, single_axis };

/// Detection weight W_d. The laser uses the 1/e^2 convention.
struct DetectionProfile {
  DetectionMode mode = DetectionMode::uniform;
  BeamShape shape = BeamShape::single_axis;
  double w_det = 7.0 * units::mm;
  double profile_angle = 0.0;     // direction across the beam, rad from the feed axis
  double collection_radius = 0.0; // 1/e^2 radius of fluorescence collection, 0 = uniform
  Vec2 offset{};                  // centre of the detection region in the cavity frame

  double weight(Vec2 r) const;
  /// Gradient of `weight` with respect to position.
  Vec2 gradient(Vec2 r) const;
  bool radially_symmetric() const;
};

void validate(const DetectionProfile& d);

/// Scaled microwave amplitudes. b = 1 is an average pi/2 pulse over a
/// uniformly filled aperture; eta converts that average to the on-axis area.
struct MicrowaveDrive {
  double b1 = 0.9386;
  double b2 = 0.9386;
  double eta = 1.120;
  std::array<double, 2> feed_amplitudes{1.0, 1.0};
  std::array<double, 2> feed_phases{0.0, 0.0};
  double cavity_linewidth = 9192631770.0 / 19000.0;  // Hz
  double cavity_detuning = 0.0;                      // Hz
};

void validate(const MicrowaveDrive& d);

}  // namespace fountain
