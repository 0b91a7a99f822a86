#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "risloc/experiment.hpp"

namespace {

using namespace risloc;

ExperimentConfig assemble_config(const CLI::App* sub, const std::string& scale,
                                 const std::string& config_path,
                                 const std::string& out_dir, uint64_t seed,
                                 int threads) {
  ExperimentConfig config =
      default_config(scale == "paper" ? Scale::Paper : Scale::Desk);
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in)
      throw std::runtime_error("cannot read config file " + config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    apply_json_overrides(config, buffer.str());
  }
  if (sub->count("--out") > 0) config.out_dir = out_dir;
  if (sub->count("--seed") > 0) config.master_seed = seed;
  if (sub->count("--threads") > 0) config.threads = threads;
  validate_config(config);
  return config;
}

int run_peb_map(const ExperimentConfig& config) {
  const HeatmapResult result = run_peb_heatmap(config);
  int singular = 0;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const PebResult& p : result.points) {
    if (p.singular) {
      ++singular;
      continue;
    }
    lo = any ? std::min(lo, p.peb_m) : p.peb_m;
    hi = any ? std::max(hi, p.peb_m) : p.peb_m;
    any = true;
  }
  std::cout << "peb-map: " << result.points.size() << " points, " << singular
            << " singular";
  if (any) std::cout << ", peb range [" << lo << ", " << hi << "] m";
  std::cout << "\nwrote " << config.out_dir << "/peb_map.csv\n";
  return 0;
}

int run_efi_sweep(const ExperimentConfig& config) {
  const EfiSweepResult result = run_efi_vs_distance(config);
  if (!result.rows.empty()) {
    const EfiSweepRow& first = result.rows.front();
    const EfiSweepRow& last = result.rows.back();
    std::cout << "efi-sweep: " << result.rows.size() << " distances, "
              << "near distance EFI " << first.near_efi.distance << " -> "
              << last.near_efi.distance << " 1/m^2 over [" << first.d_ru_m
              << ", " << last.d_ru_m << "] m\n";
  }
  std::cout << "wrote " << config.out_dir << "/efi_vs_distance.csv\n";
  return 0;
}

int run_gain(const ExperimentConfig& config) {
  const GainComparisonResult result = run_gain_comparison(config);
  const size_t points = config.dbr_sweep.values().size();
  for (size_t c = 0; c < config.resource_configs.size(); ++c) {
    const GainPointSummary& near_bs = result.dbr_summary[c * points];
    const GainPointSummary& far_bs = result.dbr_summary[c * points + points - 1];
    std::cout << "gain-compare [" << config.resource_configs[c].label << "]: "
              << "d_BR " << near_bs.sweep_value << " m avg peb spatial/power "
              << near_bs.avg_spatial_peb_m << "/" << near_bs.avg_power_peb_m
              << " m; d_BR " << far_bs.sweep_value << " m "
              << far_bs.avg_spatial_peb_m << "/" << far_bs.avg_power_peb_m
              << " m\n";
  }
  std::cout << "wrote " << config.out_dir << "/gain_vs_dbr.csv, "
            << config.out_dir << "/gain_vs_spacing.csv, " << config.out_dir
            << "/gain_summary.json\n";
  return 0;
}

int run_focus(const ExperimentConfig& config) {
  const FocusEvalResult result = run_focusing_eval(config);
  for (const FocusPointComparison& c : result.comparisons) {
    std::cout << "focus-eval [" << c.variant << "]: async peb ";
    if (c.async_focus_singular)
      std::cout << "singular";
    else
      std::cout << c.async_peb_focus_m << " m";
    std::cout << " at focus vs " << c.async_peb_reference_m
              << " m at x=" << c.reference_x_m << " (ratio ";
    if (c.async_focus_singular)
      std::cout << "inf";
    else
      std::cout << c.async_peak_ratio;
    std::cout << "), snr " << c.snr_focus_db << " vs " << c.snr_reference_db
              << " dB\n";
  }
  std::cout << "wrote " << config.out_dir << "/focus_map_async.csv and friends\n";
  return 0;
}

int run_props(const ExperimentConfig& config) {
  const PropositionReport report = run_proposition_suite(config);
  int failures = 0;
  for (const CheckResult& c : report.checks) {
    if (c.pass) continue;
    ++failures;
    std::cout << "FAIL " << c.name << ": residual " << c.residual
              << " > threshold " << c.threshold;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
  }
  std::cout << "prop-suite: " << report.checks.size() << " checks, " << failures
            << " failures\n";
  std::cout << "wrote " << config.out_dir << "/prop_suite.json\n";
  return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Fisher-information performance bounds for surface-assisted uplink "
      "localization with an unsynchronized single-antenna transmitter"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string scale = "desk";
  uint64_t seed = 1;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON file overriding parts of the default configuration");
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--seed", seed, "master seed for all randomized pieces");
    sub->add_option("--threads", threads, "worker threads (default: 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--scale", scale,
                    "array scale: desk (default) or paper (full-size arrays)")
        ->check(CLI::IsMember({"desk", "paper"}));
  };

  CLI::App* peb_map = app.add_subcommand(
      "peb-map", "Position error bound over a planar grid of user positions");
  CLI::App* efi_sweep = app.add_subcommand(
      "efi-sweep",
      "Distance/azimuth/elevation EFI versus surface-user distance, exact "
      "versus planar user-side wavefront");
  CLI::App* gain_compare = app.add_subcommand(
      "gain-compare",
      "Average PEB with exact versus planar BS-surface wavefront over random "
      "phase profiles");
  CLI::App* focus_eval = app.add_subcommand(
      "focus-eval",
      "Near-field focusing profile: PEB/SNR maps, cuts and CRLB sweeps");
  CLI::App* prop_suite = app.add_subcommand(
      "prop-suite", "Randomized invariant checks of the information model");
  for (CLI::App* sub : {peb_map, efi_sweep, gain_compare, focus_eval, prop_suite})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const ExperimentConfig config =
        assemble_config(sub, scale, config_path, out_dir, seed, threads);
    if (sub == peb_map) return run_peb_map(config);
    if (sub == efi_sweep) return run_efi_sweep(config);
    if (sub == gain_compare) return run_gain(config);
    if (sub == focus_eval) return run_focus(config);
    return run_props(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
