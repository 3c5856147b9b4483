#include "fountain/dcp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fountain/bessel.hpp"
#include "fountain/error.hpp"
#include "fountain/philox.hpp"
#include "fountain/quadrature.hpp"

namespace fountain {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kBlock = 4096;

// Kronecker (R4) sequence step: powers of 1/phi_4, phi_4^5 = phi_4 + 1.
constexpr double kPhi4 = 1.1673039782614187;

struct Uniforms {
  const EnsembleSettings& settings;
  Philox4x32 rng;
  std::array<double, 4> shift{};
  std::array<double, 4> alpha{};
  std::size_t side = 0;

  explicit Uniforms(const EnsembleSettings& s) : settings(s), rng(s.seed) {
    shift = rng.uniforms(0, 1);
    double p = 1.0;
    for (int j = 0; j < 4; ++j) {
      p /= kPhi4;
      alpha[j] = p;
    }
    side = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(s.samples), 0.25) + 1e-9));
  }

  std::size_t count() const {
    if (settings.mode == SamplingMode::stratified) return side * side * side * side;
    return settings.samples;
  }

  std::array<double, 4> operator()(std::size_t i) const {
    switch (settings.mode) {
      case SamplingMode::random: return rng.uniforms(i);
      case SamplingMode::quasi_random: {
        std::array<double, 4> u{};
        for (int j = 0; j < 4; ++j) {
          double x = shift[j] + static_cast<double>(i + 1) * alpha[j];
          x -= std::floor(x);
          u[j] = std::clamp(x, 0x1p-53, 1.0 - 0x1p-53);
        }
        return u;
      }
      case SamplingMode::stratified: {
        const auto jitter = rng.uniforms(i);
        std::array<double, 4> u{};
        std::size_t rest = i;
        for (int j = 0; j < 4; ++j) {
          const std::size_t cell = rest % side;
          rest /= side;
          u[j] = (static_cast<double>(cell) + jitter[j]) / static_cast<double>(side);
        }
        return u;
      }
    }
    return {};
  }
};

// Per-trajectory quantities handed to an observable.
struct Trajectory {
  double sin1 = 0.0;
  double sin2 = 0.0;
  std::vector<std::pair<Vec2, double>> up;    // (position, z) across the upward traversal
  std::vector<std::pair<Vec2, double>> down;  // same for the downward traversal
};

struct Passage {
  std::vector<double> dz;       // height relative to the midplane
  std::vector<double> weights;  // normalised field-envelope weights
};

Passage make_passage(int nodes, double cavity_height) {
  const QuadratureRule rule = gauss_legendre(static_cast<std::size_t>(nodes), -1.0, 1.0);
  Passage p;
  double total = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double w = rule.weights[i] * std::cos(kPi * rule.nodes[i] / 2.0);
    p.dz.push_back(0.5 * cavity_height * rule.nodes[i]);
    p.weights.push_back(w);
    total += w;
  }
  for (double& w : p.weights) w /= total;
  return p;
}

struct BlockSums {
  double sw = 0.0;
  double swy = 0.0;
  double sw2 = 0.0;
  double sw2y = 0.0;
  double sw2y2 = 0.0;
};

struct EnsembleAverage {
  double mean = 0.0;
  double stat_error = 0.0;
  double detected_fraction = 0.0;
  std::size_t samples = 0;
};

double field_phase(const PhaseField& field, double sign, const Passage& passage,
                   const std::vector<std::pair<Vec2, double>>& path) {
  double acc = 0.0;
  for (std::size_t j = 0; j < path.size(); ++j) acc += passage.weights[j] * field.phase(path[j].first, path[j].second);
  return sign * acc;
}

template <typename Observable>
EnsembleAverage run_ensemble(const DcpConfig& cfg, Vec2 tilt, Observable&& observable) {
  validate(cfg.geometry);
  validate(cfg.timing);
  validate(cfg.cloud);
  validate(cfg.drive);
  validate(cfg.detection);
  require(cfg.ensemble.samples >= 1, "simulate_dP: ensemble size must be positive");
  require(cfg.passage_nodes >= 1, "simulate_dP: need at least one passage node");

  const auto& t = cfg.timing;
  const auto& geo = cfg.geometry;
  const auto& cloud = cfg.cloud;
  const double g = cfg.constants.g;
  const double k = cfg.constants.k;
  const Vec2 accel = g * tilt;
  const Passage passage = make_passage(cfg.passage_nodes, geo.cavity_height);
  const double vz_up = vertical_velocity(t, g, t.t1);
  const double vz_down = vertical_velocity(t, g, t.t2);
  const Uniforms uniforms(cfg.ensemble);
  const std::size_t n = uniforms.count();
  require(n >= 1, "simulate_dP: stratified ensemble needs at least 1 sample");
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  const double a2 = geo.a * geo.a;
  const double a_sel2 = geo.a_sel * geo.a_sel;

  const std::vector<BlockSums> partial = map_indexed(blocks, cfg.ensemble.workers, [&](std::size_t b) {
    BlockSums s;
    Trajectory tr;
    tr.up.resize(passage.dz.size());
    tr.down.resize(passage.dz.size());
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const auto u = uniforms(i);
      const Vec2 r0 = cloud.offset + polar(cloud.w0 * std::sqrt(-std::log(u[0])), 2.0 * kPi * u[1]);
      const Vec2 v = polar(cloud.u * std::sqrt(-std::log(u[2])), 2.0 * kPi * u[3]);
      const auto at = [&](double time) { return r0 + time * v + (0.5 * time * time) * accel; };

      const Vec2 r1 = at(t.t1);
      const Vec2 r2 = at(t.t2);
      if (at(t.t1L).norm2() >= a_sel2 || r1.norm2() >= a2 || r2.norm2() >= a2 || at(t.t2L).norm2() >= a_sel2) {
        continue;
      }
      const double w = cfg.detection.weight(at(t.td));
      if (w == 0.0) continue;

      for (std::size_t j = 0; j < passage.dz.size(); ++j) {
        const double dz = passage.dz[j];
        tr.up[j] = {at(t.t1 + dz / vz_up), dz};
        tr.down[j] = {at(t.t2 + dz / vz_down), dz};
      }
      tr.sin1 = std::sin((kPi / 2.0) * cfg.drive.b1 * cfg.drive.eta * bessel_j0(k * r1.norm()));
      tr.sin2 = std::sin((kPi / 2.0) * cfg.drive.b2 * cfg.drive.eta * bessel_j0(k * r2.norm()));
      const double y = observable(tr, passage);
      s.sw += w;
      s.swy += w * y;
      s.sw2 += w * w;
      s.sw2y += w * w * y;
      s.sw2y2 += w * w * y * y;
    }
    return s;
  });

  BlockSums total;
  for (const auto& s : partial) {
    total.sw += s.sw;
    total.swy += s.swy;
    total.sw2 += s.sw2;
    total.sw2y += s.sw2y;
    total.sw2y2 += s.sw2y2;
  }
  if (!(total.sw > 0.0)) fail(ErrorCode::no_atoms, "simulate_dP: no atoms reach the detector");
  EnsembleAverage out;
  out.samples = n;
  out.mean = total.swy / total.sw;
  const double var_num = std::max(0.0, total.sw2y2 - 2.0 * out.mean * total.sw2y + out.mean * out.mean * total.sw2);
  out.stat_error = std::sqrt(var_num) / total.sw;
  out.detected_fraction = total.sw / static_cast<double>(n);
  return out;
}

double effective_sign(const PhaseField& field, const FeedConfig& feed) {
  return (field.m == 1 && field.feed_driven) ? feed.m1_sign() : 1.0;
}

DcpResult to_result(const DcpConfig& cfg, const EnsembleAverage& avg) {
  DcpResult r;
  r.deltaP = avg.mean;
  r.stat_error = avg.stat_error;
  r.shift_rel = dP_to_frequency(avg.mean, cfg.timing, cfg.fringe_fwhm, cfg.constants.nu_clock);
  r.shift_stat_error = dP_to_frequency(avg.stat_error, cfg.timing, cfg.fringe_fwhm, cfg.constants.nu_clock);
  r.detected_fraction = avg.detected_fraction;
  r.samples = avg.samples;
  return r;
}

void check_accuracy(const DcpConfig& cfg, const DcpResult& r) {
  if (r.stat_error > cfg.ensemble.max_stat_error) {
    std::ostringstream msg;
    msg << "simulate_dP: statistical error " << r.stat_error << " exceeds bound " << cfg.ensemble.max_stat_error;
    throw AccuracyNotReached(msg.str(), r.deltaP, r.stat_error);
  }
}

}  // namespace

double FeedConfig::m1_sign() const {
  switch (mode) {
    case FeedMode::both_balanced: return 0.0;
    case FeedMode::single_phi0: return 1.0;
    case FeedMode::single_pi: return -1.0;
    case FeedMode::imbalanced: return amplitude_imbalance;
  }
  return 0.0;
}

DcpResult simulate_dP(const DcpConfig& config, const PhaseField& field, const FeedConfig& feed, Vec2 tilt) {
  validate(field);
  const double sign = effective_sign(field, feed);
  const auto avg = run_ensemble(config, tilt, [&](const Trajectory& tr, const Passage& p) {
    const double dphi = field_phase(field, sign, p, tr.down) - field_phase(field, sign, p, tr.up);
    return 0.5 * tr.sin1 * tr.sin2 * dphi;
  });
  DcpResult r = to_result(config, avg);
  check_accuracy(config, r);
  return r;
}

double dP_to_frequency(double deltaP, const TimingSchedule& timing, std::optional<double> fringe_fwhm,
                       double nu_clock) {
  const double fwhm = fringe_fwhm.value_or(1.0 / (2.0 * timing.ramsey_time()));
  require(fwhm > 0.0, "dP_to_frequency: fringe width must be positive");
  require(nu_clock > 0.0, "dP_to_frequency: clock frequency must be positive");
  return deltaP * 2.0 * fwhm / kPi / nu_clock;
}

std::vector<ScanRow> tilt_scan(const DcpConfig& config, const PhaseField& field, std::span<const double> tilts,
                               Vec2 direction) {
  validate(field);
  FeedConfig phi0{FeedMode::single_phi0};
  FeedConfig pi{FeedMode::single_pi};
  const double s0 = effective_sign(field, phi0);
  const double s1 = effective_sign(field, pi);
  const double dn = direction.norm();
  require(dn > 0.0, "tilt_scan: direction must be non-zero");
  std::vector<ScanRow> rows;
  for (const double tilt : tilts) {
    ScanRow row;
    row.x = tilt;
    try {
      require(std::fabs(tilt) <= 10e-3, "tilt_scan: tilt outside +-10 mrad");
      const auto avg = run_ensemble(config, (tilt / dn) * direction, [&](const Trajectory& tr, const Passage& p) {
        const double a = field_phase(field, s0, p, tr.down) - field_phase(field, s0, p, tr.up);
        const double b = field_phase(field, s1, p, tr.down) - field_phase(field, s1, p, tr.up);
        return 0.25 * tr.sin1 * tr.sin2 * (a - b);
      });
      const DcpResult r = to_result(config, avg);
      check_accuracy(config, r);
      row.shift_rel = r.shift_rel;
      row.stat_error = r.shift_stat_error;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScanRow> offset_scan(const DcpConfig& config, const PhaseField& field, const FeedConfig& feed,
                                 std::span<const double> offsets, Vec2 direction, Vec2 tilt) {
  const double dn = direction.norm();
  require(dn > 0.0, "offset_scan: direction must be non-zero");
  std::vector<ScanRow> rows;
  for (const double d : offsets) {
    ScanRow row;
    row.x = d;
    try {
      DcpConfig c = config;
      c.cloud.offset = (d / dn) * direction;
      const DcpResult r = simulate_dP(c, field, feed, tilt);
      row.shift_rel = r.shift_rel;
      row.stat_error = r.shift_stat_error;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double phase_imbalance_suppression(double phase_imbalance, double detuning_ratio) {
  require(std::fabs(phase_imbalance) < 0.1, "phase_imbalance_residual: |phase imbalance| must be below 0.1 rad");
  require(std::fabs(detuning_ratio) <= 0.5, "phase_imbalance_residual: |detuning ratio| must not exceed 0.5");
  return (phase_imbalance / 2.0) * (2.0 * detuning_ratio);
}

double phase_imbalance_residual(double single_feed_shift, double phase_imbalance, double detuning_ratio) {
  return single_feed_shift * phase_imbalance_suppression(phase_imbalance, detuning_ratio);
}

double corner_clearance(const FountainGeometry& geometry, const TimingSchedule& timing, const CloudState& cloud,
                        Vec2 tilt, Vec2 offset, double g) {
  validate(geometry);
  validate(timing);
  require(cloud.w0 >= 0.0, "corner_clearance: w0 must be >= 0");
  // Between launch and t2L a detected trajectory interpolates linearly
  // between r0 and r(t2L), plus the sag from the tilt acceleration:
  //   r(tc) = (1 - l) r0 + l s + (g tilt / 2) tc (tc - t2L),  l = tc / t2L.
  // Its largest excursion over r0 in the launch disk and s in the aperture
  // disk follows from the triangle inequality.
  double worst = 0.0;
  for (const double z : geometry.corner_z()) {
    for (const bool ascending : {true, false}) {
      const double tc = time_at_height(timing, g, z, ascending);
      const double l = tc / timing.t2L;
      const Vec2 centre = (1.0 - l) * offset + (0.5 * g * tc * (tc - timing.t2L)) * tilt;
      const double excursion = centre.norm() + (1.0 - l) * cloud.w0 + l * geometry.a_sel;
      worst = std::max(worst, excursion);
    }
  }
  return geometry.a_cutoff - worst;
}

}  // namespace fountain
