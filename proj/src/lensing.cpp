#include "fountain/lensing.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fountain/bessel.hpp"
#include "fountain/error.hpp"
#include "fountain/quadrature.hpp"

namespace fountain {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinContrast = 1e-6;
constexpr double kTruncationRadii = 6.0;

double j0_of(double x, KickOrder order) { return order == KickOrder::all_orders ? bessel_j0(x) : 1.0 - 0.25 * x * x; }
double j1_of(double x, KickOrder order) { return order == KickOrder::all_orders ? bessel_j1(x) : 0.5 * x; }

void validate(const LensingConfig& c) {
  validate(c.geometry);
  validate(c.timing);
  validate(c.cloud);
  validate(c.drive);
  validate(c.detection);
  require(c.quadrature.tolerance > 0.0, "lensing: quadrature tolerance must be positive");
  require(c.quadrature.max_levels >= 1, "lensing: need at least one grid doubling for an error estimate");
  require(c.quadrature.initial_radial_nodes >= 2 && c.quadrature.initial_azimuthal_nodes >= 4,
          "lensing: initial grid too small");
}

struct Sums {
  double n = 0.0;
  double contrast = 0.0;
  double line = 0.0;
  double surface = 0.0;
};

struct Level {
  Sums sums;
  double term1 = 0.0;
  double term2 = 0.0;
  double deltaP_R = 0.0;
};

// One tensor-product evaluation of N, the fringe amplitude and both terms.
Level evaluate(const LensingConfig& cfg, std::size_t n_radial, std::size_t n_azimuthal, bool with_shift) {
  const auto& t = cfg.timing;
  const auto& cloud = cfg.cloud;
  const auto& det = cfg.detection;
  const auto& drive = cfg.drive;
  const double k = cfg.constants.k;
  const double a = cfg.geometry.a;
  const double tau = t.t2L - t.t1;
  const double t12 = t.t2 - t.t1;
  const double t1d = t.td - t.t1;

  double r1_max = a;
  if (cfg.r1_domain == R1Domain::unbounded) {
    const double spread = std::sqrt(cloud.w0 * cloud.w0 + cloud.u * cloud.u * t.t1 * t.t1);
    r1_max = std::max(a, cloud.offset.norm() + kTruncationRadii * spread);
  }
  const bool symmetric = det.radially_symmetric() && cloud.offset == Vec2{};

  const QuadratureRule r1_rule = gauss_legendre(n_radial, 0.0, r1_max);
  const QuadratureRule alpha_rule = symmetric ? QuadratureRule{{0.0}, {2.0 * kPi}} : periodic_trapezoid(n_azimuthal);
  const QuadratureRule rho_rule = gauss_legendre(n_radial, 0.0, a);
  const QuadratureRule phi_rule = periodic_trapezoid(n_azimuthal);

  std::vector<Vec2> unit_phi(phi_rule.size());
  for (std::size_t j = 0; j < phi_rule.size(); ++j) unit_phi[j] = polar(1.0, phi_rule.nodes[j]);

  const auto weight_P = [&](Vec2 r1, Vec2 v) {
    const Vec2 r0 = r1 - t.t1 * v - cloud.offset;
    double p = gaussian_1e(v.norm2(), cloud.u) * gaussian_1e(r0.norm2(), cloud.w0);
    if (cfg.include_lower_aperture) {
      const Vec2 r1L = r1 - (t.t1 - t.t1L) * v;
      if (r1L.norm2() >= cfg.geometry.a_sel * cfg.geometry.a_sel) p = 0.0;
    }
    return p;
  };

  const std::size_t n_outer = r1_rule.size() * alpha_rule.size();
  const std::vector<Sums> partial = map_indexed(n_outer, cfg.quadrature.workers, [&](std::size_t idx) {
    const std::size_t ir = idx / alpha_rule.size();
    const std::size_t ia = idx % alpha_rule.size();
    const double r = r1_rule.nodes[ir];
    const double w_outer = r1_rule.weights[ir] * r * alpha_rule.weights[ia];
    const Vec2 r1 = polar(r, alpha_rule.nodes[ia]);
    const Vec2 kick = with_shift ? velocity_kick(r1, drive, cfg.constants, cfg.order) : Vec2{};
    const double sin1 = std::sin(tipping_angle(r1, drive.b1, drive.eta, k, cfg.order));

    Sums s;
    for (std::size_t ip = 0; ip < rho_rule.size(); ++ip) {
      const double rho = rho_rule.nodes[ip];
      const double w_rho = rho_rule.weights[ip] * rho;
      for (std::size_t jp = 0; jp < phi_rule.size(); ++jp) {
        const double w = w_outer * w_rho * phi_rule.weights[jp];
        const Vec2 r2L0 = rho * unit_phi[jp];
        const Vec2 v = (1.0 / tau) * (r2L0 - r1);
        const double p = weight_P(r1, v);
        if (p == 0.0) continue;
        const Vec2 r2 = r1 + t12 * v;
        const Vec2 rd = r1 + t1d * v;
        const double wd = det.weight(rd);
        const double r2n = r2.norm();
        const double theta2 = (kPi / 2.0) * drive.b2 * drive.eta * j0_of(k * r2n, cfg.order);
        const double sin2 = std::sin(theta2);
        s.n += w * p * wd;
        s.contrast += w * p * wd * sin1 * sin2;
        if (with_shift) {
          // Gradient of sin(theta(r2)) W_d(rd) with respect to the kick.
          Vec2 grad = t1d * sin2 * det.gradient(rd);
          if (r2n > 0.0) {
            const double dtheta = -(kPi / 2.0) * drive.b2 * drive.eta * k * j1_of(k * r2n, cfg.order);
            grad += (t12 * std::cos(theta2) * dtheta * wd / r2n) * r2;
          }
          s.surface += w * p * kick.dot(grad);
        }
      }
    }
    if (with_shift) {
      for (std::size_t jp = 0; jp < phi_rule.size(); ++jp) {
        const Vec2 r2L0 = a * unit_phi[jp];
        const Vec2 v = (1.0 / tau) * (r2L0 - r1);
        const double p = weight_P(r1, v);
        if (p == 0.0) continue;
        const Vec2 r2 = r1 + t12 * v;
        const double sin2 = std::sin(tipping_angle(r2, drive.b2, drive.eta, k, cfg.order));
        const double wd = det.weight(r1 + t1d * v);
        s.line += w_outer * phi_rule.weights[jp] * p * sin2 * wd * kick.dot(unit_phi[jp]);
      }
    }
    return s;
  });

  Level out;
  for (const Sums& s : partial) {
    out.sums.n += s.n;
    out.sums.contrast += s.contrast;
    out.sums.line += s.line;
    out.sums.surface += s.surface;
  }
  if (!(out.sums.n > 0.0)) fail(ErrorCode::no_atoms, "lensing: no atoms reach the detector");
  out.term1 = a * tau / (2.0 * out.sums.n) * out.sums.line;
  out.term2 = -out.sums.surface / (2.0 * out.sums.n);
  out.deltaP_R = out.sums.contrast / out.sums.n;
  return out;
}

LensingResult to_result(const LensingConfig& cfg, const Level& lv, double error, std::size_t nr, std::size_t na) {
  LensingResult r;
  r.deltaP_term1 = lv.term1;
  r.deltaP_term2 = lv.term2;
  r.N = lv.sums.n;
  r.deltaP_R = lv.deltaP_R;
  const double to_shift = 1.0 / (kPi * cfg.timing.ramsey_time() * lv.deltaP_R * cfg.constants.nu_clock);
  r.shift_term1_rel = lv.term1 * to_shift;
  r.shift_term2_rel = lv.term2 * to_shift;
  r.shift_rel = (lv.term1 + lv.term2) * to_shift;
  r.quadrature_error = error;
  r.radial_nodes = nr;
  r.azimuthal_nodes = na;
  return r;
}

double relative_change(const Level& coarse, const Level& fine) {
  const double scale = std::fabs(fine.term1) + std::fabs(fine.term2);
  double change = std::fabs(fine.deltaP_R - coarse.deltaP_R) / std::max(std::fabs(fine.deltaP_R), kMinContrast);
  if (scale > 0.0) {
    change = std::max(change, (std::fabs(fine.term1 - coarse.term1) + std::fabs(fine.term2 - coarse.term2)) / scale);
  }
  return change;
}

}  // namespace

double analytic_shift(const LensingConfig& config) {
  validate(config.timing);
  validate(config.cloud);
  const auto& t = config.timing;
  const auto& cl = config.cloud;
  const double a = config.geometry.a;
  const double x = config.drive.b1 * config.drive.eta * kPi / 2.0;
  const double nearest = std::round(x / kPi) * kPi;
  if (std::fabs(x - nearest) < 1e-6) {
    fail(ErrorCode::degenerate_amplitude, "analytic_shift: b1 eta pi/2 is a multiple of pi, fringe contrast vanishes");
  }
  const double w2 = w2L(cl, t) * w2L(cl, t);
  const double geometric = a * a * (cl.w0 * cl.w0 + t.t1 * t.t2L * cl.u * cl.u) * (t.t2L - t.t1) /
                           (w2 * w2 * std::expm1(a * a / w2) * (t.t2 - t.t1));
  return config.constants.nu_recoil / config.constants.nu_clock * (x / std::sin(x)) * geometric;
}

Vec2 velocity_kick(Vec2 r1, const MicrowaveDrive& drive, const PhysicalConstants& pc, KickOrder order) {
  const double r = r1.norm();
  if (r == 0.0) return {};
  // grad J0(k r) = -k J1(k r) r_hat
  const double magnitude = drive.b1 * drive.eta * kPi * kPi * pc.nu_recoil / pc.k * j1_of(pc.k * r, order);
  return (magnitude / r) * r1;
}

double tipping_angle(Vec2 r, double b, double eta, double k, KickOrder order) {
  return (kPi / 2.0) * b * eta * j0_of(k * r.norm(), order);
}

LensingResult full_shift(const LensingConfig& config) {
  validate(config);
  const auto& q = config.quadrature;
  std::size_t nr = q.initial_radial_nodes;
  std::size_t na = q.initial_azimuthal_nodes;
  Level coarse = evaluate(config, nr, na, true);
  double change = std::numeric_limits<double>::infinity();
  for (int level = 0; level < q.max_levels; ++level) {
    const Level fine = evaluate(config, 2 * nr, 2 * na, true);
    change = relative_change(coarse, fine);
    coarse = fine;
    nr *= 2;
    na *= 2;
    if (change < q.tolerance) break;
  }
  if (std::fabs(coarse.deltaP_R) < kMinContrast) {
    fail(ErrorCode::degenerate_contrast, "full_shift: Ramsey fringe amplitude vanishes");
  }
  LensingResult result = to_result(config, coarse, change, nr, na);
  if (!(change < q.tolerance)) {
    std::ostringstream msg;
    msg << "full_shift: relative change " << change << " after " << nr << " radial nodes exceeds tolerance "
        << q.tolerance;
    throw AccuracyNotReached(msg.str(), result.shift_rel, change);
  }
  return result;
}

double fringe_contrast(const LensingConfig& config) {
  validate(config);
  const auto& q = config.quadrature;
  std::size_t nr = q.initial_radial_nodes;
  std::size_t na = q.initial_azimuthal_nodes;
  Level coarse = evaluate(config, nr, na, false);
  for (int level = 0; level < q.max_levels; ++level) {
    const Level fine = evaluate(config, 2 * nr, 2 * na, false);
    const double change = relative_change(coarse, fine);
    coarse = fine;
    nr *= 2;
    na *= 2;
    if (change < q.tolerance) break;
  }
  return coarse.deltaP_R;
}

std::vector<AmplitudeScanPoint> amplitude_scan(const LensingConfig& config, std::span<const double> b2_values,
                                               bool check_b1_linearity) {
  std::vector<AmplitudeScanPoint> out;
  out.reserve(b2_values.size());
  for (const double b2 : b2_values) {
    AmplitudeScanPoint point;
    point.b2 = b2;
    try {
      require(b2 > 0.0, "amplitude_scan: b2 must be positive");
      LensingConfig c = config;
      c.drive.b2 = b2;
      point.result = full_shift(c);
      if (check_b1_linearity) {
        c.drive.b1 *= 2.0;
        const LensingResult doubled = full_shift(c);
        point.b1_linearity = doubled.deltaP() / (2.0 * point.result->deltaP());
      }
    } catch (const std::exception& e) {
      point.error = e.what();
    }
    out.push_back(std::move(point));
  }
  return out;
}

std::vector<double> term1_zero_crossings(std::span<const AmplitudeScanPoint> scan) {
  std::vector<double> crossings;
  const AmplitudeScanPoint* prev = nullptr;
  for (const auto& p : scan) {
    if (!p.result) continue;
    if (prev) {
      const double y0 = prev->result->deltaP_term1;
      const double y1 = p.result->deltaP_term1;
      if (y0 == 0.0) {
        crossings.push_back(prev->b2);
      } else if ((y0 < 0.0) != (y1 < 0.0) && y1 != 0.0) {
        crossings.push_back(prev->b2 + (p.b2 - prev->b2) * y0 / (y0 - y1));
      }
    }
    prev = &p;
  }
  return crossings;
}

}  // namespace fountain
