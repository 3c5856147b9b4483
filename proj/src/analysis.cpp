#include "fountain/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fountain/error.hpp"

namespace fountain {

FitResult fit_polynomial(std::span<const WeightedPoint> points, int degree, FitOptions options) {
  require(degree >= 0, "fit_polynomial: degree must be >= 0");
  const int n_par = degree + 1;
  require(static_cast<int>(points.size()) >= n_par, "fit: need at least " + std::to_string(n_par) + " points");
  std::vector<double> xs;
  for (const auto& p : points) {
    require(p.sigma_y > 0.0, "fit: sigma_y must be positive");
    xs.push_back(p.x);
  }
  std::sort(xs.begin(), xs.end());
  const auto distinct = std::unique(xs.begin(), xs.end()) - xs.begin();
  require(distinct >= n_par, "fit: need at least " + std::to_string(n_par) + " distinct x values");

  // Centre x so the normal matrix stays well conditioned, then map back.
  double x_mean = 0.0;
  double w_sum = 0.0;
  for (const auto& p : points) {
    const double w = 1.0 / (p.sigma_y * p.sigma_y);
    x_mean += w * p.x;
    w_sum += w;
  }
  x_mean /= w_sum;

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n_par, n_par);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_par);
  for (const auto& p : points) {
    const double w = 1.0 / (p.sigma_y * p.sigma_y);
    Eigen::VectorXd basis(n_par);
    double power = 1.0;
    for (int j = 0; j < n_par; ++j, power *= (p.x - x_mean)) basis(j) = power;
    normal += w * basis * basis.transpose();
    rhs += w * p.y * basis;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success) fail(ErrorCode::invalid_argument, "fit: singular normal equations");
  const Eigen::VectorXd centred = ldlt.solve(rhs);
  const Eigen::MatrixXd centred_cov = ldlt.solve(Eigen::MatrixXd::Identity(n_par, n_par));

  // c_j = sum_{i >= j} binom(i, j) (-x_mean)^(i-j) d_i
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(n_par, n_par);
  for (int i = 0; i < n_par; ++i) {
    double binom = 1.0;
    for (int j = i; j >= 0; --j) {
      shift(j, i) = binom * std::pow(-x_mean, i - j);
      binom = binom * j / (i - j + 1);
    }
  }
  const Eigen::VectorXd params = shift * centred;
  Eigen::MatrixXd cov = shift * centred_cov * shift.transpose();
  cov = 0.5 * (cov + cov.transpose());

  FitResult fit;
  fit.dof = static_cast<int>(points.size()) - n_par;
  for (const auto& p : points) {
    double model = 0.0;
    double power = 1.0;
    for (int j = 0; j < n_par; ++j, power *= (p.x - x_mean)) model += centred(j) * power;
    const double r = p.y - model;
    fit.residuals.push_back(r);
    fit.chi2 += r * r / (p.sigma_y * p.sigma_y);
  }
  if (options.inflate_by_chi2 && fit.dof > 0 && fit.chi2_per_dof() > 1.0) cov *= fit.chi2_per_dof();
  fit.parameters.assign(params.data(), params.data() + n_par);
  fit.covariance.assign(n_par, std::vector<double>(n_par));
  for (int i = 0; i < n_par; ++i) {
    for (int j = 0; j < n_par; ++j) fit.covariance[i][j] = cov(i, j);
  }
  return fit;
}

FitResult fit_linear_zero_crossing(std::span<const WeightedPoint> points, FitOptions options) {
  require(points.size() >= 2, "fit_linear_zero_crossing: need at least 2 points");
  FitResult fit = fit_polynomial(points, 1, options);
  const double p0 = fit.parameters[0];
  const double p1 = fit.parameters[1];
  const auto& c = fit.covariance;
  if (!(std::fabs(p1) > std::sqrt(c[1][1]))) {
    fail(ErrorCode::slope_degenerate, "fit_linear_zero_crossing: slope consistent with zero");
  }
  const double x0 = -p0 / p1;
  fit.derived = x0;
  fit.derived_sigma = std::sqrt(std::max(0.0, c[0][0] + 2.0 * x0 * c[0][1] + x0 * x0 * c[1][1])) / std::fabs(p1);
  return fit;
}

FitResult fit_parabola_vertex(std::span<const WeightedPoint> points, Extremum expect, FitOptions options) {
  require(points.size() >= 3, "fit_parabola_vertex: need at least 3 points");
  FitResult fit = fit_polynomial(points, 2, options);
  const double c1 = fit.parameters[1];
  const double c2 = fit.parameters[2];
  const auto& c = fit.covariance;
  if (!(std::fabs(c2) > std::sqrt(c[2][2]))) {
    fail(ErrorCode::vertex_undetermined, "fit_parabola_vertex: curvature consistent with zero");
  }
  if ((expect == Extremum::maximum && c2 > 0.0) || (expect == Extremum::minimum && c2 < 0.0)) {
    fail(ErrorCode::vertex_undetermined, "fit_parabola_vertex: curvature has the wrong sign");
  }
  const double vertex = -c1 / (2.0 * c2);
  // gradient of -c1/(2 c2) with respect to (c1, c2)
  const double d1 = -1.0 / (2.0 * c2);
  const double d2 = c1 / (2.0 * c2 * c2);
  fit.derived = vertex;
  fit.derived_sigma = std::sqrt(std::max(0.0, d1 * d1 * c[1][1] + 2.0 * d1 * d2 * c[1][2] + d2 * d2 * c[2][2]));
  return fit;
}

std::vector<WeightedPoint> cluster_means(std::span<const WeightedPoint> points, double tolerance) {
  std::vector<WeightedPoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  std::vector<WeightedPoint> out;
  std::size_t i = 0;
  while (i < sorted.size()) {
    double sw = 0.0, swx = 0.0, swy = 0.0;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].x - sorted[i].x <= tolerance; ++j) {
      require(sorted[j].sigma_y > 0.0, "cluster_means: sigma_y must be positive");
      const double w = 1.0 / (sorted[j].sigma_y * sorted[j].sigma_y);
      sw += w;
      swx += w * sorted[j].x;
      swy += w * sorted[j].y;
    }
    out.push_back({swx / sw, swy / sw, 1.0 / std::sqrt(sw)});
    i = j;
  }
  return out;
}

AmplitudeCalibration calibrate_amplitude(std::span<const ContrastSample> scan, std::span<const double> expected_peaks,
                                         double min_relative_height) {
  require(min_relative_height >= 0.0 && min_relative_height < 1.0,
          "calibrate_amplitude: min_relative_height must lie in [0, 1)");
  std::vector<ContrastSample> s(scan.begin(), scan.end());
  std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.drive < b.drive; });
  const std::size_t n = s.size();

  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || i + 1 == n) {
      smooth[i] = s[i].contrast;
      continue;
    }
    double w[3] = {s[i - 1].contrast, s[i].contrast, s[i + 1].contrast};
    std::sort(w, w + 3);
    smooth[i] = w[1];
  }

  std::vector<std::size_t> candidates;
  double tallest = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1])) continue;
    candidates.push_back(i);
    tallest = std::max(tallest, smooth[i]);
  }

  AmplitudeCalibration cal;
  for (const std::size_t i : candidates) {
    if (smooth[i] < min_relative_height * tallest) continue;
    // Vertex of the parabola through the three raw samples around the peak.
    const double x0 = s[i - 1].drive, x1 = s[i].drive, x2 = s[i + 1].drive;
    const double y0 = s[i - 1].contrast, y1 = s[i].contrast, y2 = s[i + 1].contrast;
    const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    const double A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    const double B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    double peak = x1;
    if (A < 0.0) peak = std::clamp(-B / (2.0 * A), x0, x2);
    cal.peak_drives.push_back(peak);
  }
  if (cal.peak_drives.size() < 2) {
    fail(ErrorCode::insufficient_scan, "calibrate_amplitude: scan must span at least two contrast maxima");
  }

  std::vector<double> expected(expected_peaks.begin(), expected_peaks.end());
  for (std::size_t i = expected.size(); i < cal.peak_drives.size(); ++i) {
    expected.push_back(2.0 * static_cast<double>(i) + 1.0);
  }
  // Every maximum implies its own scale; they must agree before they are
  // pooled, otherwise a maximum was missed or spurious.
  std::vector<double> ratios;
  for (std::size_t i = 0; i < cal.peak_drives.size(); ++i) {
    if (i > 0 && !(expected[i] > expected[i - 1])) {
      fail(ErrorCode::ambiguous_calibration, "calibrate_amplitude: expected peak amplitudes must increase");
    }
    ratios.push_back(expected[i] / cal.peak_drives[i]);
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (const double r : ratios) {
    if (!(r > 0.0) || std::fabs(r - median) > 0.25 * median) {
      fail(ErrorCode::ambiguous_calibration, "calibrate_amplitude: maxima do not map consistently onto n = 1, 3, 5, ...");
    }
  }

  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < cal.peak_drives.size(); ++i) {
    sxy += cal.peak_drives[i] * expected[i];
    sxx += cal.peak_drives[i] * cal.peak_drives[i];
  }
  cal.scale = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < cal.peak_drives.size(); ++i) {
    cal.peak_amplitudes.push_back(expected[i]);
    const double r = expected[i] - cal.scale * cal.peak_drives[i];
    ss += r * r;
  }
  cal.residual_rms = std::sqrt(ss / static_cast<double>(cal.peak_drives.size()));
  return cal;
}

std::vector<double> model_contrast_peaks(const std::function<double(double)>& contrast, int n_peaks) {
  constexpr double inv_phi = 0.6180339887498949;
  std::vector<double> peaks;
  for (int i = 0; i < n_peaks; ++i) {
    const double n = 2.0 * i + 1.0;
    double lo = std::max(1e-6, n - 1.0);
    double hi = n + 1.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = contrast(c);
    double fd = contrast(d);
    while (hi - lo > 1e-9) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - inv_phi * (hi - lo);
        fc = contrast(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + inv_phi * (hi - lo);
        fd = contrast(d);
      }
    }
    peaks.push_back(0.5 * (lo + hi));
  }
  return peaks;
}

CollisionalCorrection collisional_extrapolation(const DensityPair& pair) {
  if (!(pair.kappa > 1.0)) fail(ErrorCode::invalid_ratio, "collisional_extrapolation: kappa must exceed 1");
  require(pair.kappa_rel_unc >= 0.0, "collisional_extrapolation: kappa uncertainty must be >= 0");
  const double dnu = pair.nu_high - pair.nu_low;
  const double km1 = pair.kappa - 1.0;
  CollisionalCorrection out;
  out.corrected = pair.nu_low - dnu / km1;
  out.type_b = std::fabs(dnu) * pair.kappa * pair.kappa_rel_unc / (km1 * km1);
  return out;
}

}  // namespace fountain
