// Acceptance harness: one numbered criterion per invocation (or "all"),
// printing exactly one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are pinned as constants below; scenario families are fixed-seed
// and documented next to each criterion.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#ifndef _WIN32
#include <sys/wait.h>
#endif

#include "risloc/channel.hpp"
#include "risloc/experiment.hpp"
#include "risloc/fisher.hpp"
#include "risloc/geometry.hpp"
#include "risloc/numerics.hpp"
#include "risloc/ris_profile.hpp"
#include "risloc/signal.hpp"

using namespace risloc;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances ----------------------------------------------------
constexpr double kTolDerivativeRel = 1e-5;   // c1
constexpr double kTolReparamRel = 1e-8;      // c3
constexpr double kTolEfiIdentity = 1e-8;     // c4
constexpr double kTolRowMatchRel = 1e-10;    // c5, c6, c8
constexpr double kTolEfiVanish = 1e-8;       // c5, c9
constexpr double kTolPebScaleRel = 1e-8;     // c6
constexpr double kTolGainEntryRel = 1e-10;   // c9
constexpr double kTolEfiDecayFinal = 1e-2;   // c10: final/initial
constexpr double kTolGainParity = 0.05;      // c12a
constexpr double kTolMonotonicityRel = 1e-10;  // c14

// ---- runtime budgets, seconds ---------------------------------------------
constexpr double kRuntimeLimit[16] = {0,  5, 2, 2,  1,  2,   2,   2, 2,
                                      2, 30, 60, 300, 300, 2, 120};

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Options {
  std::string cli_path;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double unit_fraction(uint64_t seed, uint64_t salt) {
  return static_cast<double>(derive_seed(seed, salt) >> 11) * 0x1.0p-53;
}

int pick_index(uint64_t seed, uint64_t salt, int n) {
  return static_cast<int>(derive_seed(seed, salt) % static_cast<uint64_t>(n));
}

const ScenarioSpec& desk_scenario() {
  static const ScenarioSpec spec = default_config(Scale::Desk).scenario;
  return spec;
}

ScenarioSpec random_spec(uint64_t seed) {
  return randomized_scenario(desk_scenario(), seed);
}

// Family for the numerical-identity criteria (4, 6, 7, 14). The identities
// hold in exact arithmetic for any scenario, but verifying them at 1e-8
// requires the information matrix to be far from its rank cliff: the user is
// pulled close to the surface so the wavefront curvature separates the clock
// from the range, and the bandwidth is widened to 2.5 GHz for the same
// reason. Measured over the seed ranges used below this keeps cond(Jbar)
// under 1e7 and cond(J) under 1e8, leaving two orders of magnitude between
// rounding noise and the pinned tolerances.
ScenarioSpec conditioned_spec(uint64_t seed) {
  ScenarioSpec s = random_spec(seed);
  SphericalDirection dir = cartesian_to_spherical(s.ris_reference, s.ue_position);
  dir.distance = 0.35 + 0.25 * unit_fraction(seed, 41);
  s.ue_position = spherical_to_cartesian(s.ris_reference, dir);
  s.signal.n_subcarriers = 8;
  s.signal.bandwidth_hz = 2.5e9;
  s.signal.n_slots = 1;
  s.signal.pilots = MatrixC();
  return s;
}

RisProfile spec_profile(const ScenarioSpec& spec, const ScenarioGeometry& g,
                        uint64_t seed) {
  return random_profile(g.n_ris(), spec.signal.n_slots, seed);
}

double rel_gap_matrices(const MatrixD& a, const MatrixD& b) {
  const double scale = std::max(max_abs(a), max_abs(b));
  if (scale == 0.0) return 0.0;
  return max_abs(a - b) / scale;
}

ChannelModelFlags flag_combo(int i) {
  const Wavefront ru = (i & 1) ? Wavefront::Far : Wavefront::Near;
  const Wavefront br = (i & 2) ? Wavefront::Far : Wavefront::Near;
  return ChannelModelFlags{ru, br};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::path("acceptance_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- criterion 1: analytic derivatives vs central differences --------------
Outcome criterion_derivatives(const Options&) {
  Outcome out;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const uint64_t seed = 4100 + static_cast<uint64_t>(i);
    const ScenarioSpec spec = random_spec(seed);
    const ScenarioGeometry g = spec.build_geometry();
    const RisProfile profile = spec_profile(spec, g, 4200 + seed);
    const int b = pick_index(seed, 1, g.n_bs());
    const int n = pick_index(seed, 2, spec.signal.n_subcarriers);
    const int t = pick_index(seed, 3, spec.signal.n_slots);

    for (int combo = 0; combo < 4; ++combo) {
      const ChannelModelFlags flags = flag_combo(combo);
      const std::vector<double> steps = {1e-6, 1e-7, 1e-7, 1e-7, 1e-7};

      const auto f_pos = [&](const std::vector<double>& x) {
        ScenarioSpec s2 = spec;
        s2.signal.alpha = x[0];
        s2.signal.xi_seconds = x[1] / kSpeedOfLight;
        s2.ue_position = {x[2], x[3], x[4]};
        const std::complex<double> v =
            mu(b, n, t, s2.build_geometry(), s2.signal, flags, profile);
        return std::vector<double>{v.real(), v.imag()};
      };
      const std::vector<double> x0 = {
          spec.signal.alpha, spec.signal.xi_seconds * kSpeedOfLight,
          spec.ue_position.x, spec.ue_position.y, spec.ue_position.z};
      const MatrixD fd = central_diff(f_pos, x0, steps);
      const auto analytic = dmu_dtheta(b, n, t, g, spec.signal, flags, profile);

      double scale = 0.0;
      for (const auto& c : analytic) scale = std::max(scale, std::abs(c));
      for (int k = 0; k < 5; ++k) {
        const std::complex<double> fk{fd(0, k), fd(1, k)};
        worst = std::max(
            worst, std::abs(analytic[static_cast<size_t>(k)] - fk) / scale);
      }

      const SphericalDirection dir = g.ue_direction();
      const auto f_bar = [&](const std::vector<double>& x) {
        ScenarioSpec s2 = spec;
        s2.signal.alpha = x[0];
        s2.signal.xi_seconds = x[1] / kSpeedOfLight;
        s2.ue_position = spherical_to_cartesian(s2.ris_reference,
                                                {x[2], x[4], x[3]});
        const std::complex<double> v =
            mu(b, n, t, s2.build_geometry(), s2.signal, flags, profile);
        return std::vector<double>{v.real(), v.imag()};
      };
      const std::vector<double> xb = {
          spec.signal.alpha, spec.signal.xi_seconds * kSpeedOfLight,
          dir.distance, dir.azimuth, dir.elevation};
      const MatrixD fdb = central_diff(f_bar, xb, steps);
      const auto analytic_bar =
          dmu_dthetabar(b, n, t, g, spec.signal, flags, profile);

      double scale_bar = 0.0;
      for (const auto& c : analytic_bar)
        scale_bar = std::max(scale_bar, std::abs(c));
      for (int k = 0; k < 5; ++k) {
        const std::complex<double> fk{fdb(0, k), fdb(1, k)};
        worst = std::max(worst,
                         std::abs(analytic_bar[static_cast<size_t>(k)] - fk) /
                             scale_bar);
      }
    }
  }
  out.pass = worst <= kTolDerivativeRel;
  out.detail = "max relative gap " + fmt(worst) + " (tol " +
               fmt(kTolDerivativeRel) + ", 20 scenarios x 4 wavefront combos)";
  return out;
}

// ---- criterion 2: single-sample FIM rank ----------------------------------
Outcome criterion_single_sample_rank(const Options&) {
  Outcome out;
  int exact_two = 0;
  int worst_rank = 0;
  for (int i = 0; i < 50; ++i) {
    const uint64_t seed = 4300 + static_cast<uint64_t>(i);
    const ScenarioSpec spec = random_spec(seed);
    const ScenarioGeometry g = spec.build_geometry();
    const RisProfile profile = spec_profile(spec, g, 4350 + seed);
    const int b = pick_index(seed, 1, g.n_bs());
    const int n = pick_index(seed, 2, spec.signal.n_subcarriers);
    const int t = pick_index(seed, 3, spec.signal.n_slots);

    const MatrixD j =
        fim(Parameterization::Intermediate, g, spec.signal, spec.flags, profile,
            SampleMask::single(b, n, t));
    const int rank = numerical_rank(j);
    worst_rank = std::max(worst_rank, rank);
    if (rank == 2) ++exact_two;
  }
  out.pass = worst_rank <= 2 && exact_two == 50;
  out.detail = "rank <= 2 on 50/50, rank == 2 on " +
               std::to_string(exact_two) + "/50 (max rank " +
               std::to_string(worst_rank) + ")";
  return out;
}

// ---- criterion 3: reparameterization congruence ----------------------------
Outcome criterion_reparameterization(const Options&) {
  Outcome out;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const uint64_t seed = 4400 + static_cast<uint64_t>(i);
    const ScenarioSpec spec = random_spec(seed);
    const ScenarioGeometry g = spec.build_geometry();
    const RisProfile profile = spec_profile(spec, g, 4450 + seed);
    const ChannelModelFlags flags = flag_combo(i % 4);

    const MatrixD j_pos =
        fim(Parameterization::Position, g, spec.signal, flags, profile);
    const MatrixD j_bar =
        fim(Parameterization::Intermediate, g, spec.signal, flags, profile);
    const MatrixD t_jac = parameter_jacobian(g);
    const MatrixD mapped = t_jac.transposed() * j_bar * t_jac;
    worst = std::max(worst, frobenius_norm(mapped + (-1.0) * j_pos) /
                                frobenius_norm(j_pos));
  }
  out.pass = worst <= kTolReparamRel;
  out.detail = "max relative frobenius gap " + fmt(worst) + " (tol " +
               fmt(kTolReparamRel) + ", 20 seeds, all wavefront combos)";
  return out;
}

// ---- criterion 4: EFI/inverse identity -------------------------------------
Outcome criterion_efi_identity(const Options&) {
  Outcome out;
  double worst = 0.0;
  double worst_cond = 0.0;
  int evaluated = 0;
  for (int i = 0; i < 20; ++i) {
    const uint64_t seed = 4500 + static_cast<uint64_t>(i);
    const ScenarioSpec spec = conditioned_spec(seed);
    const ScenarioGeometry g = spec.build_geometry();
    const RisProfile profile = spec_profile(spec, g, 4550 + seed);
    const ChannelModelFlags near{};

    const MatrixD j_bar =
        fim(Parameterization::Intermediate, g, spec.signal, near, profile);
    const SymInverseResult inv = sym_inverse(j_bar);
    if (inv.singular) continue;
    ++evaluated;
    worst_cond = std::max(worst_cond, inv.condition);
    for (int k : {kDistanceIndex, kAzimuthIndex, kElevationIndex}) {
      const EfiResult e = efi(j_bar, k);
      if (!e.defined) {
        out.pass = false;
        out.detail = "EFI undefined at seed " + std::to_string(seed);
        return out;
      }
      worst = std::max(worst, std::abs(e.value * inv.inverse(k, k) - 1.0));
    }
  }
  out.pass = worst <= kTolEfiIdentity && evaluated >= 15;
  out.detail = "max |efi*inv - 1| " + fmt(worst) + " (tol " +
               fmt(kTolEfiIdentity) + "), " + std::to_string(evaluated) +
               "/20 invertible, max condition " + fmt(worst_cond);
  return out;
}

// ---- criterion 5: far-field RIS-UE collapse --------------------------------
Outcome criterion_farfield_collapse(const Options&) {
  Outcome out;
  double worst_row_gap = 0.0;
  double worst_efi = 0.0;
  int worst_rank_bar = 0, worst_rank_pos = 0;
  for (int i = 0; i < 20; ++i) {
    const uint64_t seed = 4600 + static_cast<uint64_t>(i);
    const ScenarioSpec spec = random_spec(seed);
    const ScenarioGeometry g = spec.build_geometry();
    const RisProfile profile = spec_profile(spec, g, 4650 + seed);

    for (Wavefront br : {Wavefront::Near, Wavefront::Far}) {
      const ChannelModelFlags flags{Wavefront::Far, br};
      const MatrixD j_bar =
          fim(Parameterization::Intermediate, g, spec.signal, flags, profile);
      const double scale = max_abs(j_bar);
      double row_gap = 0.0;
      for (int j = 0; j < 5; ++j)
        row_gap = std::max(row_gap, std::abs(j_bar(kClockIndex, j) -
                                             j_bar(kDistanceIndex, j)));
      worst_row_gap = std::max(worst_row_gap, row_gap / scale);
      worst_rank_bar = std::max(worst_rank_bar, numerical_rank(j_bar));

      const MatrixD j_pos =
          fim(Parameterization::Position, g, spec.signal, flags, profile);
      worst_rank_pos = std::max(worst_rank_pos, numerical_rank(j_pos));

      const EfiResult e = efi(j_bar, kDistanceIndex);
      if (!e.defined) {
        out.pass = false;
        out.detail = "distance EFI nuisance block singular at seed " +
                     std::to_string(seed);
        return out;
      }
      worst_efi = std::max(
          worst_efi,
          std::abs(e.value) / j_bar(kDistanceIndex, kDistanceIndex));
    }
  }
  out.pass = worst_row_gap <= kTolRowMatchRel && worst_rank_bar <= 4 &&
             worst_rank_pos <= 4 && worst_efi <= kTolEfiVanish;
  out.detail = "row gap " + fmt(worst_row_gap) + " (tol " +
               fmt(kTolRowMatchRel) + "), rank(Jbar) <= " +
               std::to_string(worst_rank_bar) + ", rank(J) <= " +
               std::to_string(worst_rank_pos) + ", efi(d)/[Jbar]dd " +
               fmt(worst_efi) + " (tol " + fmt(kTolEfiVanish) + ")";
  return out;
}

// ---- criterion 6: planar BS-RIS replication --------------------------------
Outcome criterion_bs_replication(const Options&) {
  Outcome out;
  double worst_pair = 0.0, worst_scale = 0.0, worst_peb = 0.0;
  int evaluated = 0;
  for (int i = 0; i < 20; ++i) {
    const uint64_t seed = 4700 + static_cast<uint64_t>(i);
    const ScenarioSpec spec = conditioned_spec(seed);
    const ScenarioGeometry g = spec.build_geometry();
    const RisProfile profile = spec_profile(spec, g, 4750 + seed);
    const ChannelModelFlags flags{Wavefront::Near, Wavefront::Far};

    const MatrixD j0 = per_antenna_fim(Parameterization::Position, 0, g,
                                       spec.signal, flags, profile);
    for (int b = 1; b < g.n_bs(); ++b) {
      const MatrixD jb = per_antenna_fim(Parameterization::Position, b, g,
                                         spec.signal, flags, profile);
      worst_pair = std::max(worst_pair, rel_gap_matrices(jb, j0));
    }

    const MatrixD j =
        fim(Parameterization::Position, g, spec.signal, flags, profile);
    worst_scale = std::max(
        worst_scale,
        rel_gap_matrices(j, static_cast<double>(g.n_bs()) * j0));

    const PebResult p1 = peb(j0, 2, 3);
    if (!p1.singular) {
      const PebResult p = peb(j, 2, 3);
      if (!p.singular) {
        ++evaluated;
        const double expected =
            p1.peb_m / std::sqrt(static_cast<double>(g.n_bs()));
        worst_peb = std::max(worst_peb,
                             std::abs(p.peb_m - expected) / p.peb_m);
      }
    }
  }
  out.pass = worst_pair <= kTolRowMatchRel && worst_scale <= kTolRowMatchRel &&
             worst_peb <= kTolPebScaleRel && evaluated >= 10;
  out.detail = "per-antenna gap " + fmt(worst_pair) + ", N_B*J_1 gap " +
               fmt(worst_scale) + " (tol " + fmt(kTolRowMatchRel) +
               "), peb scaling gap " + fmt(worst_peb) + " (tol " +
               fmt(kTolPebScaleRel) + ", " + std::to_string(evaluated) +
               "/20 invertible)";
  return out;
}

// ---- criterion 7: single carrier, single slot ------------------------------
Outcome criterion_single_carrier(const Options&) {
  Outcome out;
  int far_rank_ok = 0, far_singular = 0, near_invertible = 0;
  for (int i = 0; i < 20; ++i) {
    const uint64_t seed = 4800 + static_cast<uint64_t>(i);
    ScenarioSpec spec = conditioned_spec(seed);
    // Bring the array close enough that its aperture resolves the wavefront
    // curvature of the BS-RIS leg with a single carrier.
    SphericalDirection bs_dir =
        cartesian_to_spherical(spec.ris_reference, spec.bs_reference);
    bs_dir.distance = 1.2 + 0.8 * unit_fraction(seed, 43);
    spec.bs_reference = spherical_to_cartesian(spec.ris_reference, bs_dir);
    spec.signal.n_subcarriers = 1;
    spec.signal.bandwidth_hz = 0.0;
    spec.signal.n_slots = 1;

    const ScenarioGeometry g = spec.build_geometry();
    const RisProfile profile = spec_profile(spec, g, 4850 + seed);

    const ChannelModelFlags far_bs{Wavefront::Near, Wavefront::Far};
    const MatrixD j_far =
        fim(Parameterization::Intermediate, g, spec.signal, far_bs, profile);
    if (numerical_rank(j_far) == 2) ++far_rank_ok;
    if (sym_inverse(j_far).singular) ++far_singular;

    const ChannelModelFlags near{};
    const MatrixD j_near =
        fim(Parameterization::Intermediate, g, spec.signal, near, profile);
    if (!sym_inverse(j_near).singular) ++near_invertible;
  }
  out.pass = far_rank_ok == 20 && far_singular == 20 && near_invertible == 20;
  out.detail = "planar BS-RIS: rank 2 on " + std::to_string(far_rank_ok) +
               "/20, singular on " + std::to_string(far_singular) +
               "/20; near BS-RIS (16 antennas) invertible on " +
               std::to_string(near_invertible) + "/20";
  return out;
}

// ---- criterion 8: time-space trade ------------------------------------------
Outcome criterion_time_space(const Options&) {
  Outcome out;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const uint64_t seed = 4900 + static_cast<uint64_t>(i);
    const ScenarioSpec spec = random_spec(seed);
    const ScenarioGeometry g = spec.build_geometry();
    const auto checks = check_time_space_equivalence(g, spec.signal, seed);
    bool found = false;
    for (const CheckResult& c : checks) {
      if (c.name == "time_space_fim_match") {
        found = true;
        worst = std::max(worst, c.residual);
      }
      if (!c.pass) {
        out.pass = false;
        out.detail = c.name + " failed at seed " + std::to_string(seed) +
                     " (residual " + fmt(c.residual) + ")";
        return out;
      }
    }
    if (!found) {
      out.pass = false;
      out.detail = "time_space_fim_match check missing";
      return out;
    }
  }
  out.pass = worst <= kTolRowMatchRel;
  out.detail = "max FIM gap " + fmt(worst) + " (tol " + fmt(kTolRowMatchRel) +
               ", 10 seeds, battery replay vs one-shot array)";
  return out;
}

// ---- criterion 9: alignment batteries ---------------------------------------
Outcome criterion_alignment(const Options&) {
  Outcome out;
  double worst_efim = 0.0, worst_gain = 0.0;
  // Desk scenario plus five randomized ones.
  std::vector<ScenarioSpec> specs{desk_scenario()};
  for (int i = 0; i < 5; ++i)
    specs.push_back(random_spec(5000 + static_cast<uint64_t>(i)));

  for (const ScenarioSpec& spec : specs) {
    const auto checks =
        check_alignment_batteries(spec.build_geometry(), spec.signal);
    for (const CheckResult& c : checks) {
      if (!c.pass) {
        out.pass = false;
        out.detail = c.name + " failed (residual " + fmt(c.residual) + ")";
        return out;
      }
      if (c.name == "aligned_antenna_battery_efim_vanishes" ||
          c.name == "aligned_subcarrier_battery_efim_vanishes")
        worst_efim = std::max(worst_efim, c.residual);
      if (c.name == "aligned_antenna_battery_gain_entry")
        worst_gain = std::max(worst_gain, c.residual);
    }
  }
  out.pass = worst_efim <= kTolEfiVanish && worst_gain <= kTolGainEntryRel;
  out.detail = "max |efim_eta|/|eta block| " + fmt(worst_efim) + " (tol " +
               fmt(kTolEfiVanish) + "), gain entry gap " + fmt(worst_gain) +
               " (tol " + fmt(kTolGainEntryRel) + ")";
  return out;
}

// ---- criterion 10: EFI vs distance ------------------------------------------
Outcome criterion_efi_sweep(const Options&) {
  Outcome out;
  ExperimentConfig config = default_config(Scale::Desk);
  config.threads = 4;
  config.out_dir = scratch_dir("c10").string();
  const EfiSweepResult r = run_efi_vs_distance(config);

  bool decreasing = true, defined = true, angles_positive = true;
  for (size_t i = 0; i < r.rows.size(); ++i) {
    const EfiSweepRow& row = r.rows[i];
    defined = defined && row.near_efi.defined && row.far_efi.defined &&
              row.far_reduced_defined;
    angles_positive = angles_positive && row.near_efi.azimuth > 0.0 &&
                      row.near_efi.elevation > 0.0 &&
                      row.far_efi_azimuth > 0.0 &&
                      row.far_efi_elevation > 0.0;
    if (i > 0)
      decreasing =
          decreasing && row.near_efi.distance < r.rows[i - 1].near_efi.distance;
  }
  const double initial = r.rows.front().near_efi.distance;
  const double final_v = r.rows.back().near_efi.distance;
  const bool collapsed = final_v < kTolEfiDecayFinal * initial;

  out.pass = defined && decreasing && collapsed && angles_positive;
  out.detail = std::string("strictly decreasing: ") +
               (decreasing ? "yes" : "NO") + ", final/initial " +
               fmt(final_v / initial) + " (< " + fmt(kTolEfiDecayFinal) +
               "), angle EFIs positive: " + (angles_positive ? "yes" : "NO");
  return out;
}

// ---- criterion 11: PEB map near vs far regions ------------------------------
Outcome criterion_peb_map(const Options&) {
  Outcome out;
  ExperimentConfig config = default_config(Scale::Desk);
  config.threads = 4;
  config.out_dir = scratch_dir("c11").string();
  const HeatmapResult r = run_peb_heatmap(config);

  std::vector<double> near_pebs, far_pebs;
  const int nx = static_cast<int>(r.xs.size());
  for (size_t iy = 0; iy < r.ys.size(); ++iy)
    for (size_t ix = 0; ix < r.xs.size(); ++ix) {
      const Vec3 p{r.xs[ix], r.ys[iy], config.grid.z_m};
      const double d_ru = (p - config.scenario.ris_reference).norm();
      const PebResult& cell = r.points[iy * static_cast<size_t>(nx) + ix];
      const double peb_val =
          cell.singular ? std::numeric_limits<double>::infinity() : cell.peb_m;
      if (d_ru < 3.0) near_pebs.push_back(peb_val);
      if (d_ru > 8.0) far_pebs.push_back(peb_val);
    }

  const double near_median = median_of(near_pebs);
  const double far_median = median_of(far_pebs);
  out.pass = !near_pebs.empty() && !far_pebs.empty() &&
             near_median < far_median;
  out.detail = "median PEB " + fmt(near_median) + " m over " +
               std::to_string(near_pebs.size()) + " near points (d<3) vs " +
               fmt(far_median) + " m over " + std::to_string(far_pebs.size()) +
               " far points (d>8)";
  return out;
}

// ---- criterion 12: spatial vs power gain ------------------------------------
Outcome criterion_gain(const Options&) {
  Outcome out;
  ExperimentConfig config = default_config(Scale::Desk);
  config.threads = 4;
  config.out_dir = scratch_dir("c12").string();
  const GainComparisonResult r = run_gain_comparison(config);

  int narrow = -1, wide1 = -1, wide3 = -1;
  for (size_t i = 0; i < config.resource_configs.size(); ++i) {
    const std::string& label = config.resource_configs[i].label;
    if (label == "narrow_single_slot") narrow = static_cast<int>(i);
    if (label == "wide_single_slot") wide1 = static_cast<int>(i);
    if (label == "wide_three_slots") wide3 = static_cast<int>(i);
  }
  if (narrow < 0 || wide1 < 0 || wide3 < 0) {
    out.pass = false;
    out.detail = "resource configs missing expected labels";
    return out;
  }

  const auto& dbr_values = config.dbr_sweep;
  double max_dbr = dbr_values.values().back();
  double min_dbr = dbr_values.values().front();

  auto summary_at = [&](int cfg_idx, double sweep_value) {
    const GainPointSummary* found = nullptr;
    for (const GainPointSummary& s : r.dbr_summary)
      if (s.config_index == cfg_idx &&
          std::abs(s.sweep_value - sweep_value) < 1e-9)
        found = &s;
    return found;
  };

  // (a) Convergence at the largest separation. The deficient config keeps a
  // near-singular planar-model FIM at every separation, so parity is only
  // claimed for the resource-rich configs where both models invert reliably.
  bool parity = true;
  double worst_parity = 0.0;
  for (int idx : {wide1, wide3}) {
    const GainPointSummary* s = summary_at(idx, max_dbr);
    if (!s || s->paired_trials < config.trials / 2) {
      parity = false;
      continue;
    }
    const double gap =
        std::abs(s->avg_spatial_peb_m - s->avg_power_peb_m) / s->avg_power_peb_m;
    worst_parity = std::max(worst_parity, gap);
    parity = parity && gap <= kTolGainParity;
  }

  // (b) Deficient resources: exact wavefront model keeps the average bound
  // lower across the sweep.
  double spatial_mean = 0.0, power_mean = 0.0;
  int counted = 0;
  for (const GainPointSummary& s : r.dbr_summary) {
    if (s.config_index != narrow || s.paired_trials == 0) continue;
    spatial_mean += s.avg_spatial_peb_m;
    power_mean += s.avg_power_peb_m;
    ++counted;
  }
  const bool deficient_win =
      counted > 0 && spatial_mean / counted < power_mean / counted;

  // (c) Power-gain win ratio grows with resources at the smallest separation.
  const GainPointSummary* w_narrow = summary_at(narrow, min_dbr);
  const GainPointSummary* w_wide1 = summary_at(wide1, min_dbr);
  const GainPointSummary* w_wide3 = summary_at(wide3, min_dbr);
  bool ratio_monotone = w_narrow && w_wide1 && w_wide3 &&
                        w_narrow->power_win_ratio <= w_wide1->power_win_ratio &&
                        w_wide1->power_win_ratio <= w_wide3->power_win_ratio;

  out.pass = parity && deficient_win && ratio_monotone;
  out.detail =
      "(a) parity gap " + fmt(worst_parity) + " at d_BR=" + fmt(max_dbr) +
      " (tol " + fmt(kTolGainParity) + ", rich configs); (b) narrow avg " +
      fmt(counted ? spatial_mean / counted : -1.0) + " vs " +
      fmt(counted ? power_mean / counted : -1.0) + " m; (c) win ratios " +
      (w_narrow ? fmt(w_narrow->power_win_ratio) : "?") + " -> " +
      (w_wide1 ? fmt(w_wide1->power_win_ratio) : "?") + " -> " +
      (w_wide3 ? fmt(w_wide3->power_win_ratio) : "?");
  return out;
}

// ---- criterion 13: asynchronous focusing blind spot -------------------------
Outcome criterion_focusing(const Options&) {
  Outcome out;
  ExperimentConfig config = default_config(Scale::Desk);
  config.threads = 4;
  config.out_dir = scratch_dir("c13").string();
  const FocusEvalResult r = run_focusing_eval(config);

  auto find = [&](const std::string& label) -> const FocusPointComparison* {
    for (const FocusPointComparison& c : r.comparisons)
      if (c.variant == label) return &c;
    return nullptr;
  };
  const FocusPointComparison* base = find("base");
  const FocusPointComparison* antennas = find("more_antennas");
  const FocusPointComparison* bandwidth = find("more_bandwidth");
  if (!base || !antennas || !bandwidth) {
    out.pass = false;
    out.detail = "expected focus variants missing";
    return out;
  }

  auto ratio = [](const FocusPointComparison& c) {
    return c.async_focus_singular ? std::numeric_limits<double>::infinity()
                                  : c.async_peak_ratio;
  };
  auto inverted = [](const FocusPointComparison& c) {
    const double focus_peb = c.async_focus_singular
                                 ? std::numeric_limits<double>::infinity()
                                 : c.async_peb_focus_m;
    return focus_peb > c.async_peb_reference_m &&
           c.snr_focus_db > c.snr_reference_db;
  };

  bool async_inverted = true, sync_clean = true;
  for (const FocusPointComparison* c : {base, antennas, bandwidth}) {
    async_inverted = async_inverted && inverted(*c);
    sync_clean = sync_clean && c->sync_peb_focus_m < c->sync_peb_reference_m;
  }
  const bool ratio_drops = ratio(*antennas) < ratio(*base) &&
                           ratio(*bandwidth) < ratio(*base);

  out.pass = async_inverted && sync_clean && ratio_drops;
  auto show = [&](const FocusPointComparison& c) {
    return c.variant + ": ratio " +
           (c.async_focus_singular ? std::string("inf") : fmt(ratio(c)));
  };
  out.detail = std::string("async inversion: ") +
               (async_inverted ? "yes" : "NO") + ", sync inversion: " +
               (sync_clean ? "none" : "PRESENT") + "; " + show(*base) + ", " +
               show(*antennas) + ", " + show(*bandwidth);
  return out;
}

// ---- criterion 14: PEB monotonicity under nested masks ----------------------
Outcome criterion_monotonicity(const Options&) {
  Outcome out;
  int evaluated = 0;
  // Positive = PEB grew when samples were added; stays negative when the
  // bound strictly improved on every pair.
  double worst_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const uint64_t seed = 5200 + static_cast<uint64_t>(i);
    ScenarioSpec spec = conditioned_spec(seed);
    spec.signal.n_slots = 2;
    const ScenarioGeometry g = spec.build_geometry();
    const RisProfile profile =
        random_profile(g.n_ris(), spec.signal.n_slots, 5250 + seed);
    const ChannelModelFlags near{};

    SampleMask small;
    switch (i % 3) {
      case 0:
        small = SampleMask::single_slot(0);
        break;
      case 1:
        small.predicate = [](int b, int, int) { return b < 8; };
        break;
      default:
        small.predicate = [](int, int n, int) { return n < 4; };
        break;
    }

    const MatrixD j_small = fim(Parameterization::Position, g, spec.signal,
                                near, profile, small);
    const MatrixD j_big =
        fim(Parameterization::Position, g, spec.signal, near, profile);
    const PebResult p_small = peb(j_small, 2, 3);
    const PebResult p_big = peb(j_big, 2, 3);
    if (p_small.singular || p_big.singular) continue;
    ++evaluated;
    // Adding samples must not raise the bound: p_big <= p_small * (1 + tol).
    worst_violation =
        std::max(worst_violation,
                 (p_big.peb_m - p_small.peb_m) / p_small.peb_m);
  }
  out.pass = evaluated >= 20 && worst_violation <= kTolMonotonicityRel;
  out.detail = std::to_string(evaluated) +
               "/20 pairs invertible, worst relative increase " +
               fmt(worst_violation) + " (tol " + fmt(kTolMonotonicityRel) +
               ")";
  return out;
}

// ---- criterion 15: CLI determinism -------------------------------------------
int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
#ifndef _WIN32
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
#else
  return status;
#endif
}

std::map<std::string, std::string> read_tree(const fs::path& root,
                                             bool skip_sidecars) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel =
        fs::relative(entry.path(), root).generic_string();
    if (skip_sidecars && rel.size() > 12 &&
        rel.substr(rel.size() - 12) == ".config.json")
      continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    files[rel] = body.str();
  }
  return files;
}

Outcome criterion_cli_determinism(const Options& options) {
  Outcome out;
  if (options.cli_path.empty()) {
    out.pass = false;
    out.detail = "CLI path not provided (--cli)";
    return out;
  }
  const fs::path root = scratch_dir("c15");

  // Identical config means identical out_dir too (the resolved-config
  // sidecar records it), so reruns write into the same directory and the
  // first run's bytes are snapshotted in memory before the second run.
  const fs::path cfg_path = root / "small_map.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"grid": {"nx": 8, "ny": 6}})" << "\n";
  }

  struct Run {
    const char* subcommand;
    std::string extra;
  };
  const Run runs[] = {{"efi-sweep", ""},
                      {"prop-suite", ""},
                      {"peb-map", " --config " + cfg_path.string()}};

  for (const Run& run : runs) {
    const fs::path dir = root / run.subcommand;
    const std::string args = std::string(run.subcommand) + " --seed 7 " +
                             "--threads 4 --out " + dir.string() + run.extra;
    std::map<std::string, std::string> snapshot;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const int rc = run_cli(options.cli_path, args);
      if (rc != 0) {
        out.pass = false;
        out.detail = std::string(run.subcommand) + " exited with code " +
                     std::to_string(rc);
        return out;
      }
      auto tree = read_tree(dir, false);
      if (attempt == 0) {
        snapshot = std::move(tree);
      } else if (tree != snapshot) {
        out.pass = false;
        out.detail = std::string(run.subcommand) +
                     ": rerun with identical config differs byte-for-byte";
        return out;
      }
    }
  }

  // Thread count must not leak into the data files. The resolved-config
  // sidecar records the thread count, so only it is excluded here.
  const fs::path dir = root / "efi-sweep";
  const auto four_threads = read_tree(dir, true);
  if (run_cli(options.cli_path,
              "efi-sweep --seed 7 --threads 1 --out " + dir.string()) != 0) {
    out.pass = false;
    out.detail = "efi-sweep single-thread run failed";
    return out;
  }
  if (read_tree(dir, true) != four_threads) {
    out.pass = false;
    out.detail = "efi-sweep data files differ between --threads 1 and 4";
    return out;
  }

  out.pass = true;
  out.detail =
      "efi-sweep, prop-suite, peb-map byte-identical across reruns; "
      "efi-sweep data identical for --threads 1 vs 4";
  return out;
}

struct Criterion {
  int id;
  const char* label;
  Outcome (*run)(const Options&);
};

const Criterion kCriteria[] = {
    {1, "derivatives vs central differences", criterion_derivatives},
    {2, "single-sample FIM rank", criterion_single_sample_rank},
    {3, "reparameterization congruence", criterion_reparameterization},
    {4, "EFI diagonal-inverse identity", criterion_efi_identity},
    {5, "far-field RIS-UE collapse", criterion_farfield_collapse},
    {6, "planar BS-RIS replication", criterion_bs_replication},
    {7, "single carrier and slot", criterion_single_carrier},
    {8, "time-space battery equivalence", criterion_time_space},
    {9, "alignment batteries", criterion_alignment},
    {10, "EFI decay with distance", criterion_efi_sweep},
    {11, "PEB map near vs far", criterion_peb_map},
    {12, "spatial vs power gain", criterion_gain},
    {13, "async focusing blind spot", criterion_focusing},
    {14, "PEB monotonicity", criterion_monotonicity},
    {15, "CLI determinism", criterion_cli_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  Options options;
  std::vector<int> requested;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      options.cli_path = argv[++i];
    } else if (arg == "all") {
      for (const Criterion& c : kCriteria) requested.push_back(c.id);
    } else {
      requested.push_back(std::atoi(arg.c_str()));
    }
  }
  if (requested.empty()) {
    std::fprintf(stderr,
                 "usage: %s <criterion 1..15 | all> [--cli <path>]\n",
                 argv[0]);
    return 2;
  }

  bool all_pass = true;
  for (int id : requested) {
    const Criterion* criterion = nullptr;
    for (const Criterion& c : kCriteria)
      if (c.id == id) criterion = &c;
    if (!criterion) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion->run(options);
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const double limit = kRuntimeLimit[id];
    const bool in_budget = elapsed <= limit;
    const bool pass = outcome.pass && in_budget;
    all_pass = all_pass && pass;

    std::printf("%s criterion %2d (%s): %s [%.2f s%s]\n",
                pass ? "PASS" : "FAIL", id, criterion->label,
                outcome.detail.c_str(), elapsed,
                in_budget ? "" : (", over budget " + fmt(limit) + " s").c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
