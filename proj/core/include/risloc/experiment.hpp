#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risloc/fisher.hpp"

// Experiment configurations and the runners behind the command line tool.
// Every runner is deterministic in (config, master_seed, threads): trial
// seeds derive from the master seed and the trial index alone, parallel
// execution fills pre-indexed slots, and file output happens after the
// compute pass.

namespace risloc {

enum class Scale { Desk, Paper };

struct UraSpec {
  int rows = 1;
  int cols = 1;
  double spacing_m = 0.005;
  Plane plane = Plane::YZ;
};

struct ScenarioSpec {
  Vec3 bs_reference{8.0, -12.0, 2.0};
  Vec3 ris_reference{0.0, 0.0, 0.0};
  Vec3 ue_position{4.0, 2.1, -1.0};
  UraSpec bs_array;
  UraSpec ris_array;
  SignalConfig signal;
  ChannelModelFlags flags;

  ScenarioGeometry build_geometry() const;
};

enum class ProfileKind { Random, Focusing, Case1, Case2 };

struct ProfileSpec {
  ProfileKind kind = ProfileKind::Random;
  uint64_t seed = 1;
  Vec3 focus{4.0, 2.5, -1.0};  // Focusing
  int ref_antenna = 0;         // Focusing / Case2
  int n0 = 0;                  // Focusing / Case1
};

RisProfile make_profile(const ProfileSpec& spec, const ScenarioGeometry& geometry,
                        const SignalConfig& cfg, const ChannelModelFlags& flags);

enum class SnrPolicyKind { FixedReceivedSnr, FixedAlpha };

struct SnrPolicy {
  SnrPolicyKind kind = SnrPolicyKind::FixedReceivedSnr;
  double target_snr_db = 20.0;
};

struct GridSpec {
  double x_min_m = 0.5, x_max_m = 10.5;
  int nx = 30;
  double y_min_m = -5.0, y_max_m = 5.0;
  int ny = 30;
  double z_m = -1.0;

  std::vector<double> xs() const;
  std::vector<double> ys() const;
};

struct SweepSpec {
  double min_value = 1.0;
  double max_value = 100.0;
  int count = 25;
  bool log_spaced = true;

  std::vector<double> values() const;
};

struct ResourceConfig {
  std::string label;
  double bandwidth_hz = 0.0;
  int n_subcarriers = 1;
  int n_slots = 1;
};

struct FocusVariant {
  std::string label;
  int bs_rows = 2;
  int bs_cols = 2;
  double bandwidth_hz = 40e6;
};

struct FocusSpec {
  Vec3 point{4.0, 2.5, -1.0};
  int ref_antenna = 0;
  int n_subcarriers = 9;  // odd keeps the centre sub-carrier on the carrier
  int n0 = 4;
  double bandwidth_hz = 40e6;
  double cut_y_m = 2.5;
  double cut_x_min_m = 0.5;
  double cut_x_max_m = 8.0;
  int cut_count = 61;
  // Off-focus comparison point on the cut. It sits on the shoulder of the
  // focused beam (still well illuminated, a few dB below the focus) so the
  // comparison isolates the focusing-induced ambiguity; a point outside the
  // beam would have a bound dominated by plain SNR collapse instead.
  double reference_x_m = 4.25;
  std::vector<FocusVariant> variants;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  ProfileSpec profile;
  SnrPolicy snr;
  GridSpec grid;
  SweepSpec distance_sweep{1.0, 100.0, 25, true};
  SweepSpec dbr_sweep{2.0, 50.0, 8, true};
  SweepSpec spacing_sweep;  // BS element spacing, metres
  double spacing_sweep_dbr_m = 3.0;
  std::vector<ResourceConfig> resource_configs;
  FocusSpec focus;
  int trials = 100;
  int prop_seeds = 20;
  // Random-profile draws averaged per point of the distance sweep. A single
  // random profile has range-domain nulls that put wiggles on the EFI decay;
  // the mean over draws estimates the expected EFI, which is smooth.
  int efi_profile_draws = 25;
  uint64_t master_seed = 1;
  int threads = 1;
  std::string out_dir = "out";
};

// Desk defaults keep the physical apertures of the full-size setup with
// fewer elements (wider element pitch), which preserves the near-field
// behaviour the study relies on at a fraction of the cost. Paper scale uses
// the full 60x60 / 8x8 half-wavelength arrays.
ExperimentConfig default_config(Scale scale);

// Applies the keys present in the JSON text over the current values.
// Unknown keys and malformed values are rejected.
void apply_json_overrides(ExperimentConfig& config, const std::string& json_text);

// Range checks on counts, spacings and sweeps. apply_json_overrides runs this
// automatically; call it directly for configs assembled in code.
void validate_config(const ExperimentConfig& config);

// Full resolved configuration, round-trippable through apply_json_overrides.
std::string resolved_config_json(const ExperimentConfig& config);

// Deterministic per-trial seed, a pure function of (master seed, index).
uint64_t derive_seed(uint64_t master_seed, uint64_t index);

// Returns the gain alpha that makes the average per-sample SNR
// sum |mu|^2 / (N_B N T sigma^2) hit the target. The scenario's received
// energy must be nonzero.
double normalize_snr(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                     const ChannelModelFlags& flags, const RisProfile& profile,
                     double target_snr_db);

double average_sample_snr_db(const ScenarioGeometry& geometry,
                             const SignalConfig& cfg,
                             const ChannelModelFlags& flags,
                             const RisProfile& profile);

// Deterministic scenario jitter used by the invariant suite (and tests):
// resamples UE range/bearing, BS placement, gain, clock offset, noise and
// resource counts around the base scenario. Geometry stays away from the
// degenerate pole/coincidence regions.
ScenarioSpec randomized_scenario(const ScenarioSpec& base, uint64_t seed);

struct HeatmapResult {
  std::vector<double> xs, ys;
  std::vector<PebResult> points;  // index = iy * nx + ix
};

HeatmapResult run_peb_heatmap(const ExperimentConfig& config);

// One distance point of the sweep. With a random profile the EFI values are
// means over efi_profile_draws independent draws (expected EFI); any other
// profile kind is evaluated as configured, without averaging.
struct EfiSweepRow {
  double d_ru_m = 0.0;
  IntermediateEfi near_efi;
  IntermediateEfi far_efi;      // distance component identically zero
  double far_efi_azimuth = 0.0;  // from the reduced far-field FIM
  double far_efi_elevation = 0.0;
  bool far_reduced_defined = false;
};

struct EfiSweepResult {
  std::vector<EfiSweepRow> rows;
};

EfiSweepResult run_efi_vs_distance(const ExperimentConfig& config);

struct GainCell {
  int config_index = 0;
  double sweep_value = 0.0;  // d_BR or BS spacing, metres
  int trial = 0;
  PebResult spatial;  // exact BS-RIS wavefront
  PebResult power;    // planar BS-RIS wavefront
};

struct GainPointSummary {
  int config_index = 0;
  double sweep_value = 0.0;
  double avg_spatial_peb_m = 0.0;  // over trials where both FIMs invert
  double avg_power_peb_m = 0.0;
  double power_win_ratio = 0.0;  // fraction of paired trials power wins
  int paired_trials = 0;
  int singular_spatial = 0;
  int singular_power = 0;
};

struct GainComparisonResult {
  std::vector<GainCell> dbr_cells;
  std::vector<GainCell> spacing_cells;
  std::vector<GainPointSummary> dbr_summary;
  std::vector<GainPointSummary> spacing_summary;
};

GainComparisonResult run_gain_comparison(const ExperimentConfig& config);

struct FocusCutRow {
  std::string variant;
  double x_m = 0.0;
  PebResult async_peb;
  PebResult sync_peb;
  double snr_db = 0.0;
};

struct FocusPointComparison {
  std::string variant;
  double focus_x_m = 0.0;
  double reference_x_m = 0.0;
  // The asynchronous bound can be numerically singular at the exact focus
  // (the focusing phase makes position and clock nearly indistinguishable);
  // that is an outcome worth reporting, not an error. A singular focus
  // counts as an infinite peak ratio.
  bool async_focus_singular = false;
  double async_peb_focus_m = 0.0;
  double async_peb_reference_m = 0.0;
  double sync_peb_focus_m = 0.0;
  double sync_peb_reference_m = 0.0;
  double snr_focus_db = 0.0;
  double snr_reference_db = 0.0;
  // focus / reference async PEB; > 1 means the bound is WORSE at the focus
  // than off it even though the SNR is higher there. Infinity when the
  // focus FIM is singular.
  double async_peak_ratio = 0.0;
};

struct CrlbRow {
  std::string sweep;  // "bandwidth" or "bs_antennas"
  double setting = 0.0;
  bool defined = false;
  double sqrt_crlb_distance_m = 0.0;
  double sqrt_crlb_azimuth_rad = 0.0;
  double sqrt_crlb_elevation_rad = 0.0;
};

struct FocusEvalResult {
  HeatmapResult async_grid;
  HeatmapResult sync_grid;
  std::vector<double> snr_grid_db;  // same indexing as async_grid.points
  std::vector<FocusCutRow> cuts;
  std::vector<FocusPointComparison> comparisons;
  std::vector<CrlbRow> crlb_rows;
};

FocusEvalResult run_focusing_eval(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct PropositionReport {
  std::vector<CheckResult> checks;
  bool all_pass = false;
};

PropositionReport run_proposition_suite(const ExperimentConfig& config);

// Individual invariant checks, exposed so callers can run them on scenarios
// of their own choosing (including deliberately mismatched flags).
std::vector<CheckResult> check_farfield_distance_unobservable(
    const ScenarioGeometry& geometry, const SignalConfig& cfg,
    const ChannelModelFlags& flags, const RisProfile& profile);
std::vector<CheckResult> check_bs_antenna_replication(
    const ScenarioGeometry& geometry, const SignalConfig& cfg,
    const ChannelModelFlags& flags, const RisProfile& profile);
std::vector<CheckResult> check_alignment_batteries(
    const ScenarioGeometry& geometry, const SignalConfig& cfg);
std::vector<CheckResult> check_single_sample_rank(
    const ScenarioGeometry& geometry, const SignalConfig& cfg,
    const ChannelModelFlags& flags, const RisProfile& profile, uint64_t seed);
std::vector<CheckResult> check_time_space_equivalence(
    const ScenarioGeometry& geometry, const SignalConfig& cfg, uint64_t seed);

}  // namespace risloc
