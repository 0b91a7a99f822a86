#include "risloc/experiment.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace risloc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

double get_num(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

uint64_t get_u64(const json& j, const std::string& where) {
  if (!(j.is_number_unsigned() || (j.is_number_integer() && j.get<int64_t>() >= 0)))
    fail(where, "expected a non-negative integer");
  return j.get<uint64_t>();
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected a boolean");
  return j.get<bool>();
}

std::string get_str(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

Vec3 get_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of 3 numbers");
  return {get_num(j[0], where), get_num(j[1], where), get_num(j[2], where)};
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::string plane_name(Plane p) {
  switch (p) {
    case Plane::XY: return "xy";
    case Plane::XZ: return "xz";
    case Plane::YZ: return "yz";
  }
  return "yz";
}

Plane plane_from(const std::string& s, const std::string& where) {
  if (s == "xy") return Plane::XY;
  if (s == "xz") return Plane::XZ;
  if (s == "yz") return Plane::YZ;
  fail(where, "expected one of \"xy\", \"xz\", \"yz\"");
}

std::string wavefront_name(Wavefront w) {
  return w == Wavefront::Near ? "near" : "far";
}

Wavefront wavefront_from(const std::string& s, const std::string& where) {
  if (s == "near") return Wavefront::Near;
  if (s == "far") return Wavefront::Far;
  fail(where, "expected \"near\" or \"far\"");
}

std::string profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::Random: return "random";
    case ProfileKind::Focusing: return "focusing";
    case ProfileKind::Case1: return "case1";
    case ProfileKind::Case2: return "case2";
  }
  return "random";
}

ProfileKind profile_kind_from(const std::string& s, const std::string& where) {
  if (s == "random") return ProfileKind::Random;
  if (s == "focusing") return ProfileKind::Focusing;
  if (s == "case1") return ProfileKind::Case1;
  if (s == "case2") return ProfileKind::Case2;
  fail(where, "expected one of \"random\", \"focusing\", \"case1\", \"case2\"");
}

std::string snr_kind_name(SnrPolicyKind k) {
  return k == SnrPolicyKind::FixedReceivedSnr ? "fixed_received_snr" : "fixed_alpha";
}

SnrPolicyKind snr_kind_from(const std::string& s, const std::string& where) {
  if (s == "fixed_received_snr") return SnrPolicyKind::FixedReceivedSnr;
  if (s == "fixed_alpha") return SnrPolicyKind::FixedAlpha;
  fail(where, "expected \"fixed_received_snr\" or \"fixed_alpha\"");
}

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

void merge_ura(UraSpec& u, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "rows") u.rows = get_int(value, where + ".rows");
    else if (key == "cols") u.cols = get_int(value, where + ".cols");
    else if (key == "spacing_m") u.spacing_m = get_num(value, where + ".spacing_m");
    else if (key == "plane") u.plane = plane_from(get_str(value, where + ".plane"), where + ".plane");
    else fail(where, "unknown key \"" + key + "\"");
  }
}

json ura_json(const UraSpec& u) {
  return {{"rows", u.rows},
          {"cols", u.cols},
          {"spacing_m", u.spacing_m},
          {"plane", plane_name(u.plane)}};
}

void merge_signal(SignalConfig& s, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "carrier_hz") s.carrier_hz = get_num(value, where + ".carrier_hz");
    else if (key == "n_subcarriers") s.n_subcarriers = get_int(value, where + ".n_subcarriers");
    else if (key == "bandwidth_hz") s.bandwidth_hz = get_num(value, where + ".bandwidth_hz");
    else if (key == "n_slots") s.n_slots = get_int(value, where + ".n_slots");
    else if (key == "noise_var") s.noise_var = get_num(value, where + ".noise_var");
    else if (key == "alpha") s.alpha = get_num(value, where + ".alpha");
    else if (key == "xi_seconds") s.xi_seconds = get_num(value, where + ".xi_seconds");
    else fail(where, "unknown key \"" + key + "\"");
  }
}

json signal_json(const SignalConfig& s) {
  return {{"carrier_hz", s.carrier_hz},
          {"n_subcarriers", s.n_subcarriers},
          {"bandwidth_hz", s.bandwidth_hz},
          {"n_slots", s.n_slots},
          {"noise_var", s.noise_var},
          {"alpha", s.alpha},
          {"xi_seconds", s.xi_seconds}};
}

void merge_flags(ChannelModelFlags& f, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "ris_ue") f.ris_ue = wavefront_from(get_str(value, where + ".ris_ue"), where + ".ris_ue");
    else if (key == "bs_ris") f.bs_ris = wavefront_from(get_str(value, where + ".bs_ris"), where + ".bs_ris");
    else fail(where, "unknown key \"" + key + "\"");
  }
}

json flags_json(const ChannelModelFlags& f) {
  return {{"ris_ue", wavefront_name(f.ris_ue)}, {"bs_ris", wavefront_name(f.bs_ris)}};
}

void merge_scenario(ScenarioSpec& s, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "bs_reference") s.bs_reference = get_vec3(value, where + ".bs_reference");
    else if (key == "ris_reference") s.ris_reference = get_vec3(value, where + ".ris_reference");
    else if (key == "ue_position") s.ue_position = get_vec3(value, where + ".ue_position");
    else if (key == "bs_array") merge_ura(s.bs_array, value, where + ".bs_array");
    else if (key == "ris_array") merge_ura(s.ris_array, value, where + ".ris_array");
    else if (key == "signal") merge_signal(s.signal, value, where + ".signal");
    else if (key == "flags") merge_flags(s.flags, value, where + ".flags");
    else fail(where, "unknown key \"" + key + "\"");
  }
}

json scenario_json(const ScenarioSpec& s) {
  return {{"bs_reference", vec3_json(s.bs_reference)},
          {"ris_reference", vec3_json(s.ris_reference)},
          {"ue_position", vec3_json(s.ue_position)},
          {"bs_array", ura_json(s.bs_array)},
          {"ris_array", ura_json(s.ris_array)},
          {"signal", signal_json(s.signal)},
          {"flags", flags_json(s.flags)}};
}

void merge_profile(ProfileSpec& p, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") p.kind = profile_kind_from(get_str(value, where + ".kind"), where + ".kind");
    else if (key == "seed") p.seed = get_u64(value, where + ".seed");
    else if (key == "focus") p.focus = get_vec3(value, where + ".focus");
    else if (key == "ref_antenna") p.ref_antenna = get_int(value, where + ".ref_antenna");
    else if (key == "n0") p.n0 = get_int(value, where + ".n0");
    else fail(where, "unknown key \"" + key + "\"");
  }
}

json profile_json(const ProfileSpec& p) {
  return {{"kind", profile_kind_name(p.kind)},
          {"seed", p.seed},
          {"focus", vec3_json(p.focus)},
          {"ref_antenna", p.ref_antenna},
          {"n0", p.n0}};
}

void merge_snr(SnrPolicy& s, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") s.kind = snr_kind_from(get_str(value, where + ".kind"), where + ".kind");
    else if (key == "target_snr_db") s.target_snr_db = get_num(value, where + ".target_snr_db");
    else fail(where, "unknown key \"" + key + "\"");
  }
}

json snr_json(const SnrPolicy& s) {
  return {{"kind", snr_kind_name(s.kind)}, {"target_snr_db", s.target_snr_db}};
}

void merge_grid(GridSpec& g, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "x_min_m") g.x_min_m = get_num(value, where + ".x_min_m");
    else if (key == "x_max_m") g.x_max_m = get_num(value, where + ".x_max_m");
    else if (key == "nx") g.nx = get_int(value, where + ".nx");
    else if (key == "y_min_m") g.y_min_m = get_num(value, where + ".y_min_m");
    else if (key == "y_max_m") g.y_max_m = get_num(value, where + ".y_max_m");
    else if (key == "ny") g.ny = get_int(value, where + ".ny");
    else if (key == "z_m") g.z_m = get_num(value, where + ".z_m");
    else fail(where, "unknown key \"" + key + "\"");
  }
}

json grid_json(const GridSpec& g) {
  return {{"x_min_m", g.x_min_m}, {"x_max_m", g.x_max_m}, {"nx", g.nx},
          {"y_min_m", g.y_min_m}, {"y_max_m", g.y_max_m}, {"ny", g.ny},
          {"z_m", g.z_m}};
}

void merge_sweep(SweepSpec& s, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "min") s.min_value = get_num(value, where + ".min");
    else if (key == "max") s.max_value = get_num(value, where + ".max");
    else if (key == "count") s.count = get_int(value, where + ".count");
    else if (key == "log_spaced") s.log_spaced = get_bool(value, where + ".log_spaced");
    else fail(where, "unknown key \"" + key + "\"");
  }
}

json sweep_json(const SweepSpec& s) {
  return {{"min", s.min_value}, {"max", s.max_value}, {"count", s.count},
          {"log_spaced", s.log_spaced}};
}

void merge_resources(std::vector<ResourceConfig>& list, const json& j,
                     const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  list.clear();
  int i = 0;
  for (const auto& item : j) {
    const std::string at = where + "[" + std::to_string(i++) + "]";
    expect_object(item, at);
    ResourceConfig rc;
    for (const auto& [key, value] : item.items()) {
      if (key == "label") rc.label = get_str(value, at + ".label");
      else if (key == "bandwidth_hz") rc.bandwidth_hz = get_num(value, at + ".bandwidth_hz");
      else if (key == "n_subcarriers") rc.n_subcarriers = get_int(value, at + ".n_subcarriers");
      else if (key == "n_slots") rc.n_slots = get_int(value, at + ".n_slots");
      else fail(at, "unknown key \"" + key + "\"");
    }
    list.push_back(rc);
  }
}

json resources_json(const std::vector<ResourceConfig>& list) {
  json arr = json::array();
  for (const auto& rc : list)
    arr.push_back({{"label", rc.label},
                   {"bandwidth_hz", rc.bandwidth_hz},
                   {"n_subcarriers", rc.n_subcarriers},
                   {"n_slots", rc.n_slots}});
  return arr;
}

void merge_focus(FocusSpec& f, const json& j, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (key == "point") f.point = get_vec3(value, where + ".point");
    else if (key == "ref_antenna") f.ref_antenna = get_int(value, where + ".ref_antenna");
    else if (key == "n_subcarriers") f.n_subcarriers = get_int(value, where + ".n_subcarriers");
    else if (key == "n0") f.n0 = get_int(value, where + ".n0");
    else if (key == "bandwidth_hz") f.bandwidth_hz = get_num(value, where + ".bandwidth_hz");
    else if (key == "cut_y_m") f.cut_y_m = get_num(value, where + ".cut_y_m");
    else if (key == "cut_x_min_m") f.cut_x_min_m = get_num(value, where + ".cut_x_min_m");
    else if (key == "cut_x_max_m") f.cut_x_max_m = get_num(value, where + ".cut_x_max_m");
    else if (key == "cut_count") f.cut_count = get_int(value, where + ".cut_count");
    else if (key == "reference_x_m") f.reference_x_m = get_num(value, where + ".reference_x_m");
    else if (key == "variants") {
      if (!value.is_array()) fail(where + ".variants", "expected an array");
      f.variants.clear();
      int i = 0;
      for (const auto& item : value) {
        const std::string at = where + ".variants[" + std::to_string(i++) + "]";
        expect_object(item, at);
        FocusVariant v;
        for (const auto& [vkey, vvalue] : item.items()) {
          if (vkey == "label") v.label = get_str(vvalue, at + ".label");
          else if (vkey == "bs_rows") v.bs_rows = get_int(vvalue, at + ".bs_rows");
          else if (vkey == "bs_cols") v.bs_cols = get_int(vvalue, at + ".bs_cols");
          else if (vkey == "bandwidth_hz") v.bandwidth_hz = get_num(vvalue, at + ".bandwidth_hz");
          else fail(at, "unknown key \"" + vkey + "\"");
        }
        f.variants.push_back(v);
      }
    } else {
      fail(where, "unknown key \"" + key + "\"");
    }
  }
}

json focus_json(const FocusSpec& f) {
  json variants = json::array();
  for (const auto& v : f.variants)
    variants.push_back({{"label", v.label},
                        {"bs_rows", v.bs_rows},
                        {"bs_cols", v.bs_cols},
                        {"bandwidth_hz", v.bandwidth_hz}});
  return {{"point", vec3_json(f.point)},
          {"ref_antenna", f.ref_antenna},
          {"n_subcarriers", f.n_subcarriers},
          {"n0", f.n0},
          {"bandwidth_hz", f.bandwidth_hz},
          {"cut_y_m", f.cut_y_m},
          {"cut_x_min_m", f.cut_x_min_m},
          {"cut_x_max_m", f.cut_x_max_m},
          {"cut_count", f.cut_count},
          {"reference_x_m", f.reference_x_m},
          {"variants", variants}};
}

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

void check_signal(const SignalConfig& s, const std::string& where) {
  check(s.carrier_hz > 0, where + ": carrier_hz must be positive");
  check(s.n_subcarriers >= 1, where + ": n_subcarriers must be at least 1");
  check(s.bandwidth_hz >= 0, where + ": bandwidth_hz must be non-negative");
  check(s.n_subcarriers == 1 || s.bandwidth_hz > 0,
        where + ": bandwidth_hz must be positive with multiple sub-carriers");
  check(s.n_slots >= 1, where + ": n_slots must be at least 1");
  check(s.noise_var > 0, where + ": noise_var must be positive");
  check(s.alpha > 0, where + ": alpha must be positive");
  check(std::isfinite(s.xi_seconds), where + ": xi_seconds must be finite");
}

void check_sweep(const SweepSpec& s, const std::string& where) {
  check(s.count >= 1, where + ": count must be at least 1");
  check(s.min_value <= s.max_value, where + ": min must not exceed max");
  check(!s.log_spaced || s.min_value > 0, where + ": log spacing needs min > 0");
}

}  // namespace

ScenarioGeometry ScenarioSpec::build_geometry() const {
  ScenarioGeometry g;
  g.bs_reference = bs_reference;
  g.ris_reference = ris_reference;
  g.ue_position = ue_position;
  g.bs_offsets = build_ura(bs_array.rows, bs_array.cols, bs_array.spacing_m,
                           bs_array.plane);
  g.ris_offsets = build_ura(ris_array.rows, ris_array.cols, ris_array.spacing_m,
                            ris_array.plane);
  g.validate();
  return g;
}

std::vector<double> GridSpec::xs() const {
  std::vector<double> out(static_cast<size_t>(nx));
  for (int i = 0; i < nx; ++i)
    out[i] = nx == 1 ? x_min_m : x_min_m + (x_max_m - x_min_m) * i / (nx - 1);
  return out;
}

std::vector<double> GridSpec::ys() const {
  std::vector<double> out(static_cast<size_t>(ny));
  for (int i = 0; i < ny; ++i)
    out[i] = ny == 1 ? y_min_m : y_min_m + (y_max_m - y_min_m) * i / (ny - 1);
  return out;
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> out(static_cast<size_t>(count));
  if (count == 1) {
    out[0] = min_value;
    return out;
  }
  if (log_spaced) {
    const double lo = std::log(min_value), hi = std::log(max_value);
    for (int i = 0; i < count; ++i)
      out[i] = std::exp(lo + (hi - lo) * i / (count - 1));
    out.front() = min_value;
    out.back() = max_value;
  } else {
    for (int i = 0; i < count; ++i)
      out[i] = min_value + (max_value - min_value) * i / (count - 1);
  }
  return out;
}

RisProfile make_profile(const ProfileSpec& spec, const ScenarioGeometry& geometry,
                        const SignalConfig& cfg, const ChannelModelFlags& flags) {
  switch (spec.kind) {
    case ProfileKind::Random:
      return random_profile(geometry.n_ris(), cfg.n_slots, spec.seed);
    case ProfileKind::Focusing: {
      if (spec.n0 < 0 || spec.n0 >= cfg.n_subcarriers)
        throw std::invalid_argument("profile: n0 out of range");
      if (spec.ref_antenna < 0 || spec.ref_antenna >= geometry.n_bs())
        throw std::invalid_argument("profile: ref_antenna out of range");
      RisProfile one =
          focusing_profile(geometry, spec.focus, spec.ref_antenna, spec.n0, cfg);
      if (cfg.n_slots == 1) return one;
      RisProfile tiled(cfg.n_slots, one.n_elements);
      for (int t = 0; t < cfg.n_slots; ++t)
        for (int r = 0; r < one.n_elements; ++r) tiled.at(t, r) = one.at(0, r);
      return tiled;
    }
    case ProfileKind::Case1:
      if (spec.n0 < 0 || spec.n0 >= cfg.n_subcarriers)
        throw std::invalid_argument("profile: n0 out of range");
      return case1_profiles(geometry, cfg, spec.n0, flags);
    case ProfileKind::Case2:
      if (spec.ref_antenna < 0 || spec.ref_antenna >= geometry.n_bs())
        throw std::invalid_argument("profile: ref_antenna out of range");
      return case2_profiles(geometry, cfg, spec.ref_antenna, flags);
  }
  throw std::invalid_argument("profile: unknown kind");
}

ExperimentConfig default_config(Scale scale) {
  ExperimentConfig c;
  const double lambda = kSpeedOfLight / c.scenario.signal.carrier_hz;
  if (scale == Scale::Desk) {
    // Fewer elements at a wider pitch, same physical aperture as full scale.
    c.scenario.bs_array = {4, 4, lambda, Plane::YZ};
    c.scenario.ris_array = {12, 12, 2.5 * lambda, Plane::YZ};
  } else {
    c.scenario.bs_array = {8, 8, 0.5 * lambda, Plane::YZ};
    c.scenario.ris_array = {60, 60, 0.5 * lambda, Plane::YZ};
  }
  c.scenario.signal.n_subcarriers = 8;
  c.scenario.signal.bandwidth_hz = 400e6;
  c.scenario.signal.n_slots = 1;
  c.scenario.signal.xi_seconds = 5e-9;
  c.profile.n0 = c.scenario.signal.n_subcarriers / 2;
  c.spacing_sweep = {lambda / 64.0, 4.0 * lambda, 7, true};
  c.resource_configs = {{"narrow_single_slot", 300e6, 8, 1},
                        {"wide_single_slot", 2500e6, 8, 1},
                        {"wide_three_slots", 2500e6, 8, 3}};
  c.focus.variants = {{"base", 2, 2, 40e6},
                      {"more_antennas", 4, 4, 40e6},
                      {"more_bandwidth", 2, 2, 160e6}};
  return c;
}

void apply_json_overrides(ExperimentConfig& config, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  expect_object(j, "top level");
  for (const auto& [key, value] : j.items()) {
    if (key == "scenario") merge_scenario(config.scenario, value, "scenario");
    else if (key == "profile") merge_profile(config.profile, value, "profile");
    else if (key == "snr") merge_snr(config.snr, value, "snr");
    else if (key == "grid") merge_grid(config.grid, value, "grid");
    else if (key == "distance_sweep") merge_sweep(config.distance_sweep, value, "distance_sweep");
    else if (key == "dbr_sweep") merge_sweep(config.dbr_sweep, value, "dbr_sweep");
    else if (key == "spacing_sweep") merge_sweep(config.spacing_sweep, value, "spacing_sweep");
    else if (key == "spacing_sweep_dbr_m") config.spacing_sweep_dbr_m = get_num(value, "spacing_sweep_dbr_m");
    else if (key == "resource_configs") merge_resources(config.resource_configs, value, "resource_configs");
    else if (key == "focus") merge_focus(config.focus, value, "focus");
    else if (key == "trials") config.trials = get_int(value, "trials");
    else if (key == "prop_seeds") config.prop_seeds = get_int(value, "prop_seeds");
    else if (key == "efi_profile_draws") config.efi_profile_draws = get_int(value, "efi_profile_draws");
    else if (key == "master_seed") config.master_seed = get_u64(value, "master_seed");
    else if (key == "threads") config.threads = get_int(value, "threads");
    else if (key == "out_dir") config.out_dir = get_str(value, "out_dir");
    else fail("top level", "unknown key \"" + key + "\"");
  }
  validate_config(config);
}

void validate_config(const ExperimentConfig& c) {
  check(c.scenario.bs_array.rows >= 1 && c.scenario.bs_array.cols >= 1,
        "scenario.bs_array: rows and cols must be at least 1");
  check(c.scenario.bs_array.spacing_m > 0, "scenario.bs_array: spacing_m must be positive");
  check(c.scenario.ris_array.rows >= 1 && c.scenario.ris_array.cols >= 1,
        "scenario.ris_array: rows and cols must be at least 1");
  check(c.scenario.ris_array.spacing_m > 0, "scenario.ris_array: spacing_m must be positive");
  check_signal(c.scenario.signal, "scenario.signal");
  check(std::isfinite(c.snr.target_snr_db), "snr.target_snr_db must be finite");
  check(c.grid.nx >= 1 && c.grid.ny >= 1, "grid: nx and ny must be at least 1");
  check(c.grid.x_min_m <= c.grid.x_max_m, "grid: x_min_m must not exceed x_max_m");
  check(c.grid.y_min_m <= c.grid.y_max_m, "grid: y_min_m must not exceed y_max_m");
  check_sweep(c.distance_sweep, "distance_sweep");
  check_sweep(c.dbr_sweep, "dbr_sweep");
  check_sweep(c.spacing_sweep, "spacing_sweep");
  check(c.spacing_sweep_dbr_m > 0, "spacing_sweep_dbr_m must be positive");
  check(!c.resource_configs.empty(), "resource_configs must not be empty");
  for (size_t i = 0; i < c.resource_configs.size(); ++i) {
    const auto& rc = c.resource_configs[i];
    const std::string at = "resource_configs[" + std::to_string(i) + "]";
    check(!rc.label.empty(), at + ": label must not be empty");
    check(rc.n_subcarriers >= 1, at + ": n_subcarriers must be at least 1");
    check(rc.n_subcarriers == 1 || rc.bandwidth_hz > 0,
          at + ": bandwidth_hz must be positive with multiple sub-carriers");
    check(rc.n_slots >= 1, at + ": n_slots must be at least 1");
  }
  check(c.focus.n_subcarriers >= 1, "focus: n_subcarriers must be at least 1");
  check(c.focus.n0 >= 0 && c.focus.n0 < c.focus.n_subcarriers,
        "focus: n0 must index a sub-carrier");
  check(c.focus.n_subcarriers == 1 || c.focus.bandwidth_hz > 0,
        "focus: bandwidth_hz must be positive with multiple sub-carriers");
  check(c.focus.cut_count >= 2, "focus: cut_count must be at least 2");
  check(c.focus.cut_x_min_m < c.focus.cut_x_max_m,
        "focus: cut_x_min_m must be below cut_x_max_m");
  check(!c.focus.variants.empty(), "focus: variants must not be empty");
  for (size_t i = 0; i < c.focus.variants.size(); ++i) {
    const auto& v = c.focus.variants[i];
    const std::string at = "focus.variants[" + std::to_string(i) + "]";
    check(!v.label.empty(), at + ": label must not be empty");
    check(v.bs_rows >= 1 && v.bs_cols >= 1, at + ": bs_rows and bs_cols must be at least 1");
    check(c.focus.n_subcarriers == 1 || v.bandwidth_hz > 0,
          at + ": bandwidth_hz must be positive with multiple sub-carriers");
  }
  check(c.focus.ref_antenna >= 0, "focus: ref_antenna must be non-negative");
  check(c.trials >= 1, "trials must be at least 1");
  check(c.prop_seeds >= 1, "prop_seeds must be at least 1");
  check(c.efi_profile_draws >= 1, "efi_profile_draws must be at least 1");
  check(c.threads >= 1, "threads must be at least 1");
}

std::string resolved_config_json(const ExperimentConfig& c) {
  json j = {{"scenario", scenario_json(c.scenario)},
            {"profile", profile_json(c.profile)},
            {"snr", snr_json(c.snr)},
            {"grid", grid_json(c.grid)},
            {"distance_sweep", sweep_json(c.distance_sweep)},
            {"dbr_sweep", sweep_json(c.dbr_sweep)},
            {"spacing_sweep", sweep_json(c.spacing_sweep)},
            {"spacing_sweep_dbr_m", c.spacing_sweep_dbr_m},
            {"resource_configs", resources_json(c.resource_configs)},
            {"focus", focus_json(c.focus)},
            {"trials", c.trials},
            {"prop_seeds", c.prop_seeds},
            {"efi_profile_draws", c.efi_profile_draws},
            {"master_seed", c.master_seed},
            {"threads", c.threads},
            {"out_dir", c.out_dir}};
  return j.dump(2) + "\n";
}

uint64_t derive_seed(uint64_t master_seed, uint64_t index) {
  auto splitmix = [](uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  };
  return splitmix(master_seed ^ splitmix(index));
}

ScenarioSpec randomized_scenario(const ScenarioSpec& base, uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x72616e64));
  auto uni = [&rng](double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
  };
  ScenarioSpec s = base;
  // UE closer than the BS so the two can never coincide; angles keep both in
  // front of the surface and away from the pole axis.
  SphericalDirection ue{uni(1.2, 2.4), uni(1.05, 2.1), uni(-1.0, 1.0)};
  s.ue_position = spherical_to_cartesian(s.ris_reference, ue);
  SphericalDirection bs{uni(2.5, 5.0), uni(0.9, 2.2), uni(-1.2, 1.2)};
  s.bs_reference = spherical_to_cartesian(s.ris_reference, bs);
  s.signal.alpha = uni(0.5, 2.0);
  s.signal.xi_seconds = uni(-1e-8, 1e-8);
  s.signal.noise_var = uni(0.5, 2.0);
  const int subcarrier_choices[] = {2, 3, 4, 6, 8};
  s.signal.n_subcarriers = subcarrier_choices[rng() % 5];
  s.signal.bandwidth_hz = uni(1e8, 4e8);
  s.signal.n_slots = 1 + static_cast<int>(rng() % 2);
  return s;
}

}  // namespace risloc
