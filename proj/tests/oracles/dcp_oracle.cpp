#include "dcp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {
namespace {

constexpr double kPi = std::numbers::pi;

// Upward speed at a height z above the cavity midplane, given apogee time.
double vz_at(double t, double t_apogee, double g) { return g * (t_apogee - t); }

double tipping_product(const fountain::DcpConfig& c) {
  const double eta = c.drive.eta;
  return std::sin(0.5 * kPi * c.drive.b1 * eta) * std::sin(0.5 * kPi * c.drive.b2 * eta);
}

// Solve z(t) = dz by bisection; z(t) = g/2 [(t_ap - t1)^2 - (t_ap - t)^2].
double crossing_time(const fountain::TimingSchedule& t, double g, double dz, bool ascending) {
  const double t_ap = 0.5 * (t.t1 + t.t2);
  const auto z = [&](double time) { return 0.5 * g * ((t_ap - t.t1) * (t_ap - t.t1) - (t_ap - time) * (t_ap - time)); };
  double lo = ascending ? 0.0 : t_ap;
  double hi = ascending ? t_ap : 2.0 * t_ap;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const bool below = z(mid) < dz;
    if (ascending == below) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double two_point_ramsey_m0(const fountain::DcpConfig& c, double amplitude, double profile_radius) {
  const double H = c.geometry.cavity_height;
  const double z2 = H * H * (0.25 - 2.0 / (kPi * kPi));
  const double t_ap = 0.5 * (c.timing.t1 + c.timing.t2);
  const double g = c.constants.g;
  const double u2 = c.cloud.u * c.cloud.u;
  const double scale = amplitude * 4.0 * z2 / (H * profile_radius * profile_radius);
  const double up = scale * c.timing.t1 * u2 / vz_at(c.timing.t1, t_ap, g);
  const double down = scale * c.timing.t2 * u2 / vz_at(c.timing.t2, t_ap, g);
  return 0.5 * tipping_product(c) * (down - up);
}

double two_point_ramsey_m1(const fountain::DcpConfig& c, double amplitude, double profile_radius, double tilt_x) {
  // x(t) = x0 + v t + g tilt t^2 / 2. Envelope-weighted averages of dz and
  // dz^2 over a passage are 0 and <z^2>; the ensemble means of x0 and v are
  // the offset and zero.
  const double H = c.geometry.cavity_height;
  const double z2 = H * H * (0.25 - 2.0 / (kPi * kPi));
  const double t_ap = 0.5 * (c.timing.t1 + c.timing.t2);
  const double g = c.constants.g;
  const double acc = g * tilt_x;
  const auto mean_x = [&](double tc) {
    const double vz = vz_at(tc, t_ap, g);
    // <(tc + dz/vz)^2> = tc^2 + <z^2>/vz^2
    return c.cloud.offset.x + 0.5 * acc * (tc * tc + z2 / (vz * vz));
  };
  const double dphi = amplitude / profile_radius * (mean_x(c.timing.t2) - mean_x(c.timing.t1));
  return 0.5 * tipping_product(c) * dphi;
}

double brute_force_corner_clearance(const fountain::FountainGeometry& geo, const fountain::TimingSchedule& timing,
                                    double w0, fountain::Vec2 tilt, fountain::Vec2 offset, double g, int n) {
  using fountain::Vec2;
  const Vec2 acc = g * tilt;
  double worst = 0.0;
  for (const double z : {-0.5 * geo.cavity_height, 0.5 * geo.cavity_height}) {
    for (const bool ascending : {true, false}) {
      const double tc = crossing_time(timing, g, z, ascending);
      for (int i = 0; i < n; ++i) {
        const double alpha = 2.0 * kPi * i / n;
        const Vec2 r0 = offset + Vec2{w0 * std::cos(alpha), w0 * std::sin(alpha)};
        for (int j = 0; j < n; ++j) {
          const double beta = 2.0 * kPi * j / n;
          const Vec2 s{geo.a_sel * std::cos(beta), geo.a_sel * std::sin(beta)};
          // Launch velocity that lands on s at t2L.
          const Vec2 v = (1.0 / timing.t2L) * (s - r0 - (0.5 * timing.t2L * timing.t2L) * acc);
          const Vec2 r = r0 + tc * v + (0.5 * tc * tc) * acc;
          worst = std::max(worst, r.norm());
        }
      }
    }
  }
  return geo.a_cutoff - worst;
}

}  // namespace oracle
