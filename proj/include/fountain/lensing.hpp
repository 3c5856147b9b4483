#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fountain/core.hpp"
#include "fountain/parallel.hpp"

namespace fountain {

/// Whether the dipole kick and the tipping angles keep the full Bessel
/// dependence or only the terms through k^2.
enum class KickOrder { k2_truncated, all_orders };

/// Integration domain for the position at the first Ramsey passage.
enum class R1Domain { unbounded, clipped_to_a };

struct LensingQuadrature {
  double tolerance = 1e-3;
  std::size_t initial_radial_nodes = 16;
  std::size_t initial_azimuthal_nodes = 16;
  int max_levels = 4;  // grid doublings after the initial level
  unsigned workers = default_workers();
};

struct LensingConfig {
  PhysicalConstants constants = cesium_constants();
  FountainGeometry geometry;
  TimingSchedule timing;
  CloudState cloud;
  MicrowaveDrive drive;
  DetectionProfile detection;
  KickOrder order = KickOrder::all_orders;
  R1Domain r1_domain = R1Domain::clipped_to_a;
  bool include_lower_aperture = false;  // Theta(a_sel - r1L) on the way up
  LensingQuadrature quadrature;
};

/// Two-term lensing result. deltaP_* are changes in transition probability;
/// N is the detected-atom normalisation in m^4 (integral over r1 and the
/// undeflected lower-aperture position); deltaP_R is the normalised Ramsey
/// fringe amplitude.
struct LensingResult {
  double deltaP_term1 = 0.0;  // line integral around the lower aperture
  double deltaP_term2 = 0.0;  // surface integral of the d/d(nu_R) term
  double N = 0.0;
  double deltaP_R = 0.0;
  double shift_rel = 0.0;         // delta nu / nu
  double shift_term1_rel = 0.0;
  double shift_term2_rel = 0.0;
  double quadrature_error = 0.0;  // relative change at the last grid doubling
  std::size_t radial_nodes = 0;
  std::size_t azimuthal_nodes = 0;

  double deltaP() const { return deltaP_term1 + deltaP_term2; }
};

/// Closed-form k^2 result for a small centred cloud, uniform detection and
/// no clipping on the way up. Returns delta nu / nu.
double analytic_shift(const LensingConfig& config);

/// Transverse velocity change for the first cavity traversal,
/// -b1 eta pi^2 (nu_R / k^2) grad J0(k r1).
Vec2 velocity_kick(Vec2 r1, const MicrowaveDrive& drive, const PhysicalConstants& constants,
                   KickOrder order = KickOrder::all_orders);

/// Local pulse area (pi/2) b eta J0(k r).
double tipping_angle(Vec2 r, double b, double eta, double k, KickOrder order = KickOrder::all_orders);

/// Evaluates both lensing terms by tensor-product quadrature, doubling the
/// grid until the relative change falls below the configured tolerance.
/// Throws AccuracyNotReached (carrying the best shift estimate) when the
/// grid limit is reached first.
LensingResult full_shift(const LensingConfig& config);

/// Normalised Ramsey fringe amplitude for the configured b1, b2.
double fringe_contrast(const LensingConfig& config);

struct AmplitudeScanPoint {
  double b2 = 0.0;
  std::optional<LensingResult> result;
  std::string error;  // empty on success
  /// deltaP(2 b1) / (2 deltaP(b1)) when the linearity check was requested.
  std::optional<double> b1_linearity;
};

/// full_shift at each b2. Errors are recorded per point and never abort
/// the scan.
std::vector<AmplitudeScanPoint> amplitude_scan(const LensingConfig& config,
                                               std::span<const double> b2_values,
                                               bool check_b1_linearity = false);

/// b2 positions where deltaP_term1 changes sign, by linear interpolation
/// between neighbouring successful points.
std::vector<double> term1_zero_crossings(std::span<const AmplitudeScanPoint> scan);

}  // namespace fountain
