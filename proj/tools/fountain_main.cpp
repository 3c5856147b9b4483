#include <CLI11.hpp>
#include <iostream>

#include "fountain/cli.hpp"
#include "fountain/error.hpp"

namespace fc = fountain::cli;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> settings;
  std::string out_dir;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_file, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", c.settings, "override one config key, e.g. --set w0_mm=1.0");
  cmd->add_option("-o,--out", c.out_dir, "output directory");
  cmd->add_option("-j,--workers", c.workers, "worker threads");
}

fc::RunConfig resolve(const Common& c) {
  fc::RunConfig config;
  if (!c.config_file.empty()) fc::read_config_file(c.config_file, config);
  for (const auto& s : c.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      fountain::fail(fountain::ErrorCode::invalid_argument, "--set expects key=value, got '" + s + "'");
    }
    fc::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!c.out_dir.empty()) config.output_dir = c.out_dir;
  if (c.workers) {
    config.quadrature.workers = *c.workers;
    config.ensemble.workers = *c.workers;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atomic fountain microwave lensing and cavity-phase shift toolkit"};
  app.set_version_flag("--version", fc::kVersion);
  app.require_subcommand(1);
  Common common;

  auto* lensing = app.add_subcommand("lensing", "analytic and full microwave lensing shift");
  add_common(lensing, common);
  std::optional<double> nu_r;
  std::string b2_scan;
  fc::LensingOptions lensing_opts;
  lensing->add_option("--nu-r", nu_r, "override the recoil frequency (Hz)");
  lensing->add_option("--b2-scan", b2_scan, "amplitude scan lo:hi:step");
  lensing->add_flag("--b1-linearity", lensing_opts.b1_linearity, "also evaluate dP(2 b1) / 2 dP(b1) per scan point");

  auto* dcp = app.add_subcommand("dcp-scan", "tilt or offset scan of the cavity-phase shift");
  add_common(dcp, common);
  fc::DcpScanOptions dcp_opts;
  std::string dcp_range;
  std::string feed = "phi0";
  dcp->add_option("--field", dcp_opts.field, "'toy' or a phase-map file");
  dcp->add_option("--m", dcp_opts.toy_m, "azimuthal order of the toy field")->check(CLI::Range(0, 2));
  dcp->add_option("--amplitude", dcp_opts.amplitude, "phase amplitude (rad)");
  dcp->add_option("--scan", dcp_opts.scan, "tilt or offset")->check(CLI::IsMember({"tilt", "offset"}));
  dcp->add_option("--range", dcp_range, "lo:hi:step in mrad (tilt) or mm (offset)")->required();
  dcp->add_option("--direction-deg", dcp_opts.direction_deg, "scan direction in the transverse plane");
  dcp->add_option("--feed", feed, "feed mode for offset scans")->check(CLI::IsMember({"phi0", "pi", "both"}));
  dcp->add_flag("--fit-zero", dcp_opts.fit_zero, "fit a line and report its zero crossing");

  auto* tilt_fit = app.add_subcommand("tilt-fit", "weighted line fit and zero crossing of x,y,sigma points");
  add_common(tilt_fit, common);
  fc::FitCommandOptions fit_opts;
  tilt_fit->add_option("input", fit_opts.input, "CSV with columns x,y,sigma")->required()->check(CLI::ExistingFile);
  tilt_fit->add_option("--cluster", fit_opts.cluster_tolerance, "average points whose x agree within this");
  tilt_fit->add_flag("--inflate", fit_opts.inflate, "scale the covariance by chi2/dof when above one");

  auto* parabola = app.add_subcommand("parabola-fit", "weighted parabola fit and vertex");
  add_common(parabola, common);
  parabola->add_option("input", fit_opts.input, "CSV with columns x,y,sigma")->required()->check(CLI::ExistingFile);
  parabola->add_option("--cluster", fit_opts.cluster_tolerance, "average points whose x agree within this");
  parabola->add_flag("--inflate", fit_opts.inflate, "scale the covariance by chi2/dof when above one");
  parabola->add_option("--extremum", fit_opts.extremum, "max, min or either")
      ->check(CLI::IsMember({"max", "min", "either"}));

  auto* calibrate = app.add_subcommand("calibrate-b", "drive to amplitude scale from contrast maxima");
  add_common(calibrate, common);
  fc::CalibrationOptions cal_opts;
  calibrate->add_option("input", cal_opts.input, "CSV with columns drive,contrast")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--model-peaks", cal_opts.model_peaks, "take expected maxima from the cloud model");

  auto* collisional = app.add_subcommand("collisional", "zero-density extrapolation");
  add_common(collisional, common);
  fc::CollisionalOptions col_opts;
  collisional->add_option("--nu-high", col_opts.nu_high, "fractional frequency at high density")->required();
  collisional->add_option("--nu-low", col_opts.nu_low, "fractional frequency at low density")->required();
  collisional->add_option("--kappa", col_opts.kappa, "density ratio")->required();
  collisional->add_option("--kappa-rel-unc", col_opts.kappa_rel_unc, "relative uncertainty of the ratio")->required();

  auto* budget = app.add_subcommand("budget", "combine an uncertainty budget");
  add_common(budget, common);
  fc::BudgetOptions budget_opts;
  budget->add_option("input", budget_opts.input, "budget CSV")->required()->check(CLI::ExistingFile);
  budget->add_option("--ua", budget_opts.u_a, "type-A uncertainty (fractional)");
  budget->add_option("--decimals", budget_opts.decimals, "display decimals in units of 1e-16 (default: 2 significant figures)")
      ->check(CLI::Range(0, 12));

  CLI11_PARSE(app, argc, argv);

  try {
    fc::RunConfig config = resolve(common);
    if (nu_r) config.constants = config.constants.with_recoil(*nu_r);
    fc::validate_config(config);
    std::vector<std::string> args(argv + 1, argv + argc);
    const std::string name = app.get_subcommands().front()->get_name();
    fc::RunContext run(config, name, args);

    if (lensing->parsed()) {
      if (!b2_scan.empty()) lensing_opts.b2_scan = fc::parse_range(b2_scan);
      fc::cmd_lensing(config, lensing_opts, run, std::cout);
    } else if (dcp->parsed()) {
      dcp_opts.values = fc::parse_range(dcp_range);
      if (feed == "pi") {
        dcp_opts.feed.mode = fountain::FeedMode::single_pi;
      } else if (feed == "both") {
        dcp_opts.feed.mode = fountain::FeedMode::both_balanced;
      }
      fc::cmd_dcp_scan(config, dcp_opts, run, std::cout);
    } else if (tilt_fit->parsed()) {
      fc::cmd_tilt_fit(fit_opts, run, std::cout);
    } else if (parabola->parsed()) {
      fc::cmd_parabola_fit(fit_opts, run, std::cout);
    } else if (calibrate->parsed()) {
      fc::cmd_calibrate_b(config, cal_opts, run, std::cout);
    } else if (collisional->parsed()) {
      fc::cmd_collisional(col_opts, run, std::cout);
    } else if (budget->parsed()) {
      fc::cmd_budget(budget_opts, run, std::cout);
    }
    std::cout << "manifest = " << run.finish().string() << '\n';
  } catch (const fountain::Error& e) {
    std::cerr << "error (" << fountain::to_string(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
