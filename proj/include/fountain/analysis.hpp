#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace fountain {

struct WeightedPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma_y = 1.0;
};

/// Least-squares parameters (lowest order first) with their covariance and
/// the derived root or vertex.
struct FitResult {
  std::vector<double> parameters;
  std::vector<std::vector<double>> covariance;
  double derived = 0.0;
  double derived_sigma = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  std::vector<double> residuals;  // y - model, same order as the input

  double chi2_per_dof() const { return dof > 0 ? chi2 / dof : 0.0; }
};

struct FitOptions {
  /// Scale the covariance by chi2/dof when it exceeds one.
  bool inflate_by_chi2 = false;
};

/// Weighted polynomial fit of the given degree via the normal equations.
FitResult fit_polynomial(std::span<const WeightedPoint> points, int degree, FitOptions options = {});

/// Straight-line fit and its zero crossing x0 = -p0/p1 with first-order
/// error propagation (including the p0-p1 covariance).
FitResult fit_linear_zero_crossing(std::span<const WeightedPoint> points, FitOptions options = {});

enum class Extremum { maximum, minimum, either };

/// Quadratic fit and its vertex -c1 / (2 c2).
FitResult fit_parabola_vertex(std::span<const WeightedPoint> points, Extremum expect = Extremum::either,
                              FitOptions options = {});

/// Merges points whose x agree within `tolerance` into inverse-variance
/// weighted means.
std::vector<WeightedPoint> cluster_means(std::span<const WeightedPoint> points, double tolerance);

struct ContrastSample {
  double drive = 0.0;
  double contrast = 0.0;
};

struct AmplitudeCalibration {
  double scale = 0.0;                  // b = scale * drive
  std::vector<double> peak_drives;     // refined contrast maxima
  std::vector<double> peak_amplitudes; // b values they were matched to
  double residual_rms = 0.0;
};

/// Locates contrast maxima (3-point median smoothing, local comparison,
/// parabolic refinement) and fits b = scale * drive against
/// `expected_peaks`, the b values of successive maxima. The default
/// expectation is b = 1, 3, 5, ...; a cloud model whose maxima fall
/// slightly below the odd integers can be supplied instead. Maxima lower
/// than `min_relative_height` times the tallest one are side lobes near
/// contrast zeros and are skipped.
AmplitudeCalibration calibrate_amplitude(std::span<const ContrastSample> scan,
                                         std::span<const double> expected_peaks = {},
                                         double min_relative_height = 0.25);

/// Maxima of a model contrast curve C(b) near b = 1, 3, 5, ... (n_peaks of
/// them), found by golden-section search on [n - 1, n + 1].
std::vector<double> model_contrast_peaks(const std::function<double(double)>& contrast, int n_peaks);

struct DensityPair {
  double nu_high = 0.0;
  double nu_low = 0.0;
  double kappa = 0.0;
  double kappa_rel_unc = 0.0;
};

struct CollisionalCorrection {
  double corrected = 0.0;
  double type_b = 0.0;
};

/// Zero-density extrapolation nu_low - dnu / (kappa - 1) and the
/// propagated uncertainty of kappa, |dnu| kappa u_rel / (kappa - 1)^2.
CollisionalCorrection collisional_extrapolation(const DensityPair& pair);

}  // namespace fountain
