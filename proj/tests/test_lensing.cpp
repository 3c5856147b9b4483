#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fountain/error.hpp"
#include "fountain/lensing.hpp"
#include "lensing_oracle.hpp"

using namespace fountain;

namespace {

LensingConfig uniform_config() {
  LensingConfig c;
  c.detection.mode = DetectionMode::uniform;
  return c;
}

}  // namespace

TEST_SUITE("lensing") {
  TEST_CASE("analytic shift matches direct substitution") {
    const LensingConfig c;
    const double nu_ratio = c.constants.nu_recoil / c.constants.nu_clock;
    const double x = c.drive.b1 * c.drive.eta * std::numbers::pi / 2.0;
    const double a = 5e-3, w0 = 1.1e-3, u = 15e-3, t1 = 0.18, t2 = 0.7, t2L = 0.837;
    const double w2 = w0 * w0 + u * u * t2L * t2L;
    const double expected = nu_ratio * x / std::sin(x) * a * a * (w0 * w0 + t1 * t2L * u * u) * (t2L - t1) /
                            (w2 * w2 * (std::exp(a * a / w2) - 1.0) * (t2 - t1));
    CHECK(analytic_shift(c) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(analytic_shift(c) == doctest::Approx(6.56e-17).epsilon(2e-3));
  }

  TEST_CASE("analytic shift vanishes for a large aperture") {
    LensingConfig c;
    const double base = analytic_shift(c);
    c.geometry.a = 10.0 * w2L(c.cloud, c.timing);
    c.geometry.a_sel = c.geometry.a_cutoff = c.geometry.a;
    CHECK(std::fabs(analytic_shift(c)) < 1e-4 * std::fabs(base));
  }

  TEST_CASE("analytic shift degenerate amplitude") {
    LensingConfig c;
    c.drive.b1 = 2.0 / c.drive.eta;
    try {
      analytic_shift(c);
      FAIL("expected degenerate amplitude");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_amplitude);
    }
  }

  TEST_CASE("velocity kick") {
    const auto k = cesium_constants();
    MicrowaveDrive d;
    CHECK(velocity_kick({0.0, 0.0}, d, k).norm() == 0.0);
    const Vec2 v = velocity_kick({5e-3, 0.0}, d, k);
    const double expected = d.b1 * d.eta * std::numbers::pi * std::numbers::pi * k.nu_recoil *
                            std::cyl_bessel_j(1.0, k.k * 5e-3) / k.k;
    CHECK(v.x == doctest::Approx(expected).epsilon(1e-12));
    CHECK(v.y == 0.0);
    CHECK(v.norm() == doctest::Approx(3.3e-8).epsilon(0.02));
    MicrowaveDrive d2 = d;
    d2.b1 *= 2.0;
    const Vec2 r{1.3e-3, -2.1e-3};
    CHECK(velocity_kick(r, d2, k).x == 2.0 * velocity_kick(r, d, k).x);
    CHECK(velocity_kick(r, d2, k).y == 2.0 * velocity_kick(r, d, k).y);
    // radial direction
    const Vec2 kv = velocity_kick(r, d, k);
    CHECK(std::fabs(kv.x * r.y - kv.y * r.x) < 1e-12 * kv.norm() * r.norm());
  }

  TEST_CASE("tipping angle") {
    const double k = cesium_constants().k;
    CHECK(tipping_angle({1e-3, 0.0}, 0.0, 1.12, k) == 0.0);
    CHECK(tipping_angle({}, 1.0, 1.12, k) == doctest::Approx(std::numbers::pi / 2.0 * 1.12));
    CHECK(std::fabs(tipping_angle({2.404826 / k, 0.0}, 1.0, 1.12, k)) < 1e-6);
  }

  TEST_CASE("full shift converges and satisfies the conversion invariant") {
    const auto c = uniform_config();
    const auto r = full_shift(c);
    CHECK(r.N > 0.0);
    CHECK(r.deltaP_R > 0.0);
    CHECK(r.quadrature_error <= c.quadrature.tolerance);
    const double conv = r.deltaP() / (std::numbers::pi * c.timing.ramsey_time() * r.deltaP_R * c.constants.nu_clock);
    CHECK(r.shift_rel == doctest::Approx(conv).epsilon(1e-12));
    CHECK(r.shift_term1_rel + r.shift_term2_rel == doctest::Approx(r.shift_rel).epsilon(1e-12));
  }

  TEST_CASE("no recoil, no lensing") {
    auto c = uniform_config();
    c.constants = c.constants.with_recoil(0.0);
    const auto r = full_shift(c);
    CHECK(r.shift_rel == 0.0);
    CHECK(analytic_shift(c) == 0.0);
  }

  TEST_CASE("k2 truncation with unbounded r1 reproduces the analytic form") {
    auto c = uniform_config();
    c.order = KickOrder::k2_truncated;
    c.r1_domain = R1Domain::unbounded;
    c.cloud.w0 = c.geometry.a / 5.0;
    const auto r = full_shift(c);
    CHECK(r.shift_rel == doctest::Approx(analytic_shift(c)).epsilon(0.02));
  }

  TEST_CASE("shift is positive for moderate amplitudes") {
    auto c = uniform_config();
    c.quadrature.tolerance = 1e-2;
    for (double b1 : {0.3, 0.7, 1.2}) {
      for (double b2 : {0.3, 0.7, 1.2}) {
        c.drive.b1 = b1;
        c.drive.b2 = b2;
        CHECK(full_shift(c).shift_rel > 0.0);
      }
    }
  }

  TEST_CASE("lower aperture leaves the shift essentially unchanged") {
    auto c = uniform_config();
    const double base = full_shift(c).shift_rel;
    c.include_lower_aperture = true;
    CHECK(full_shift(c).shift_rel == doctest::Approx(base).epsilon(0.01));
  }

  TEST_CASE("determinism and worker independence") {
    auto c = uniform_config();
    c.detection.mode = DetectionMode::gaussian;
    c.quadrature.workers = 1;
    const auto a = full_shift(c);
    c.quadrature.workers = 7;
    const auto b = full_shift(c);
    CHECK(a.shift_rel == b.shift_rel);
    CHECK(a.deltaP_term1 == b.deltaP_term1);
    CHECK(a.deltaP_term2 == b.deltaP_term2);
    CHECK(a.N == b.N);
  }

  TEST_CASE("vanishing fringe raises degenerate contrast") {
    auto c = uniform_config();
    c.drive.b2 = 0.0;
    try {
      full_shift(c);
      FAIL("expected degenerate contrast");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_contrast);
    }
  }

  TEST_CASE("unreachable tolerance raises accuracy-not-reached with an estimate") {
    auto c = uniform_config();
    c.quadrature.tolerance = 1e-15;
    c.quadrature.max_levels = 1;
    try {
      full_shift(c);
      FAIL("expected accuracy-not-reached");
    } catch (const AccuracyNotReached& e) {
      CHECK(e.code() == ErrorCode::accuracy_not_reached);
      CHECK(e.best_estimate() > 0.0);
    }
  }

  TEST_CASE("amplitude scan is a map over full_shift") {
    const auto c = uniform_config();
    const double b2s[] = {0.9386};
    const auto scan = amplitude_scan(c, b2s);
    REQUIRE(scan.size() == 1);
    REQUIRE(scan[0].result.has_value());
    const auto direct = full_shift(c);
    CHECK(scan[0].result->shift_rel == direct.shift_rel);
    CHECK(scan[0].result->deltaP_term1 == direct.deltaP_term1);
  }

  TEST_CASE("amplitude scan keeps going past a failing point") {
    const auto c = uniform_config();
    const double b2s[] = {0.9386, 0.0, 1.5};
    const auto scan = amplitude_scan(c, b2s, true);
    REQUIRE(scan.size() == 3);
    CHECK(scan[0].result.has_value());
    CHECK_FALSE(scan[1].result.has_value());
    CHECK_FALSE(scan[1].error.empty());
    CHECK(scan[2].result.has_value());
    REQUIRE(scan[0].b1_linearity.has_value());
    CHECK(*scan[0].b1_linearity == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("first-order consistency with the brute-force sum") {
    const auto c = uniform_config();
    const auto r = full_shift(c);
    const double d = oracle::brute_force_deltaP(c, 24, 1000.0);
    CHECK(d == doctest::Approx(r.deltaP()).epsilon(0.01));
  }
}
