#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fountain/core.hpp"
#include "fountain/parallel.hpp"
#include "fountain/phase_field.hpp"

namespace fountain {

enum class FeedMode { both_balanced, single_phi0, single_pi, imbalanced };

/// Feed configuration. Only the m = 1 component depends on it: a single
/// feed at phi = 0 (pi) gives the full gradient with sign +1 (-1), balanced
/// feeds cancel it, and `imbalanced` scales it by `amplitude_imbalance`.
struct FeedConfig {
  FeedMode mode = FeedMode::both_balanced;
  double amplitude_imbalance = 0.0;
  double phase_imbalance = 0.0;  // rad

  double m1_sign() const;
};

enum class SamplingMode { random, quasi_random, stratified };

struct EnsembleSettings {
  std::size_t samples = 1u << 20;  // stratified mode rounds down to a fourth power
  SamplingMode mode = SamplingMode::random;
  std::uint64_t seed = 20110101;
  unsigned workers = default_workers();
  double max_stat_error = std::numeric_limits<double>::infinity();  // on deltaP
};

struct DcpConfig {
  PhysicalConstants constants = cesium_constants();
  FountainGeometry geometry;
  TimingSchedule timing;
  CloudState cloud;
  MicrowaveDrive drive;
  DetectionProfile detection;
  EnsembleSettings ensemble;
  std::optional<double> fringe_fwhm;  // Hz, default 1 / (2 T)
  int passage_nodes = 8;              // Gauss-Legendre nodes across each cavity traversal
};

struct DcpResult {
  double deltaP = 0.0;
  double shift_rel = 0.0;
  double stat_error = 0.0;        // standard error of deltaP
  double shift_stat_error = 0.0;  // same, in delta nu / nu
  double detected_fraction = 0.0;
  std::size_t samples = 0;
};

/// Change in transition probability from the Ramsey phase difference
/// phase(down) - phase(up), each averaged over the cavity traversal with
/// the TE011 field envelope, times (1/2) sin(theta1) sin(theta2). Atoms are
/// weighted by detection and clipped at t1L, t1, t2 and t2L. `tilt`
/// replaces cloud.tilt.
DcpResult simulate_dP(const DcpConfig& config, const PhaseField& field, const FeedConfig& feed, Vec2 tilt);

/// delta nu / nu = deltaP * 2 FWHM / pi / nu.
double dP_to_frequency(double deltaP, const TimingSchedule& timing, std::optional<double> fringe_fwhm = std::nullopt,
                       double nu_clock = 9192631770.0);

struct ScanRow {
  double x = 0.0;  // tilt (rad) or offset (m)
  double shift_rel = 0.0;
  double stat_error = 0.0;  // in delta nu / nu
  std::string error;
};

/// Half the difference between single-feed phi = 0 and phi = pi runs, per
/// tilt along `direction`. Both feeds see the same atoms, so the error is
/// that of the paired difference.
std::vector<ScanRow> tilt_scan(const DcpConfig& config, const PhaseField& field, std::span<const double> tilts,
                               Vec2 direction = {1.0, 0.0});

/// simulate_dP at each launch offset along `direction`, fixed tilt.
std::vector<ScanRow> offset_scan(const DcpConfig& config, const PhaseField& field, const FeedConfig& feed,
                                 std::span<const double> offsets, Vec2 direction = {1.0, 0.0},
                                 Vec2 tilt = {});

/// single_feed_shift * (phase_imbalance / 2) * (2 detuning_ratio).
double phase_imbalance_residual(double single_feed_shift, double phase_imbalance, double detuning_ratio);
double phase_imbalance_suppression(double phase_imbalance, double detuning_ratio);

/// Smallest radial distance from detected trajectories to the
/// cutoff-waveguide / endcap corners. Trajectories start inside the 1/e
/// launch envelope (centre `offset`) and must pass the lower aperture
/// a_sel at t2L on the way down.
double corner_clearance(const FountainGeometry& geometry, const TimingSchedule& timing, const CloudState& cloud,
                        Vec2 tilt, Vec2 offset, double g = 9.80665);

}  // namespace fountain
