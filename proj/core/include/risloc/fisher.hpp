#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>

#include "risloc/channel.hpp"
#include "risloc/geometry.hpp"
#include "risloc/numerics.hpp"
#include "risloc/ris_profile.hpp"
#include "risloc/signal.hpp"

// Fisher information of the noise-free samples mu_{b,n,t} under circularly
// symmetric complex Gaussian noise: J = sum (2/sigma^2) Re{ (dmu/dp)^H
// (dmu/dp)^T }. Two five-parameter bases are supported:
//
//   position:     [alpha, c*xi, x_U, y_U, z_U]        (metres for entries 1-4)
//   intermediate: [alpha, c*xi, d_RU, phi_RU, theta_RU]
//
// plus a four-parameter synchronised basis [alpha, x_U, y_U, z_U] and the
// reduced far-field basis [alpha, c*xi + d_RU, phi_RU, theta_RU] in which the
// clock offset and the RIS-UE reference distance only appear through their
// sum.

namespace risloc {

enum class Parameterization { Position, Intermediate };

// Intermediate-basis component indices.
inline constexpr int kAlphaIndex = 0;
inline constexpr int kClockIndex = 1;
inline constexpr int kDistanceIndex = 2;
inline constexpr int kAzimuthIndex = 3;
inline constexpr int kElevationIndex = 4;

// Selects which (antenna, sub-carrier, slot) samples enter a FIM. An empty
// predicate selects everything. Masks are pure functions of the indices so
// assemblies stay deterministic under any parallel schedule.
struct SampleMask {
  std::function<bool(int b, int n, int t)> predicate;

  bool selects(int b, int n, int t) const {
    return !predicate || predicate(b, n, t);
  }

  static SampleMask all() { return {}; }
  static SampleMask single(int b, int n, int t);
  static SampleMask single_antenna(int b);
  static SampleMask single_slot(int t);
  // Slot t samples antenna t only, all at sub-carrier n0.
  static SampleMask antenna_per_slot(int n0);
  // Slot t samples sub-carrier t only, all at antenna b0.
  static SampleMask subcarrier_per_slot(int b0);
  static SampleMask intersect(SampleMask a, SampleMask b);
};

// Partial derivatives of one sample with respect to the position basis /
// the intermediate basis. Convenience entry points for oracles and
// diagnostics; FIM assembly uses a shared workspace instead.
std::array<std::complex<double>, 5> dmu_dtheta(int b, int n, int t,
                                               const ScenarioGeometry& geometry,
                                               const SignalConfig& cfg,
                                               const ChannelModelFlags& flags,
                                               const RisProfile& profile);
std::array<std::complex<double>, 5> dmu_dthetabar(int b, int n, int t,
                                                  const ScenarioGeometry& geometry,
                                                  const SignalConfig& cfg,
                                                  const ChannelModelFlags& flags,
                                                  const RisProfile& profile);

// 5x5 FIM over the selected samples. Deterministic for a fixed n_threads;
// the threaded path agrees with the sequential one to rounding.
MatrixD fim(Parameterization parameterization, const ScenarioGeometry& geometry,
            const SignalConfig& cfg, const ChannelModelFlags& flags,
            const RisProfile& profile, const SampleMask& mask = SampleMask::all(),
            int n_threads = 1);

// 4x4 FIM over [alpha, x_U, y_U, z_U] for a receiver with known clock.
MatrixD fim_sync(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                 const ChannelModelFlags& flags, const RisProfile& profile,
                 const SampleMask& mask = SampleMask::all(), int n_threads = 1);

// 4x4 FIM over [alpha, c*xi + d_RU, phi_RU, theta_RU]. Only meaningful (and
// only accepted) when the RIS-UE link uses the far-field model, where the
// clock offset and reference distance are inseparable.
MatrixD fim_reduced_farfield(const ScenarioGeometry& geometry,
                             const SignalConfig& cfg,
                             const ChannelModelFlags& flags,
                             const RisProfile& profile,
                             const SampleMask& mask = SampleMask::all(),
                             int n_threads = 1);

// 5x5 FIM over [alpha, c*xi + d_RU, d_RU, phi_RU, theta_RU]. Algebraically a
// congruence transform of the intermediate FIM, but assembled directly from
// the curvature part of the distance derivative (d d_rU/d d_RU - 1 computed
// cancellation-free), which keeps the weak range information accurate when
// the surface aperture is small compared to d_RU. Backs the robust EFI path.
MatrixD fim_delay_merged(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                         const ChannelModelFlags& flags, const RisProfile& profile,
                         const SampleMask& mask = SampleMask::all(),
                         int n_threads = 1);

// FIM restricted to the samples of a single BS antenna.
MatrixD per_antenna_fim(Parameterization parameterization, int b,
                        const ScenarioGeometry& geometry, const SignalConfig& cfg,
                        const ChannelModelFlags& flags, const RisProfile& profile,
                        const SampleMask& mask = SampleMask::all());

// Equivalent Fisher information of component k after treating every other
// component as a nuisance: J_kk - J_kS J_SS^{-1} J_Sk. Undefined (with the
// nuisance-block rank reported) when the nuisance block is singular.
struct EfiResult {
  bool defined = false;
  double value = 0.0;
  int nuisance_rank = 0;
};
EfiResult efi(const MatrixD& fim_bar, int k);

// 3x3 equivalent FIM of [d_RU, phi, theta] after eliminating gain and clock
// from the intermediate FIM.
struct EfimResult {
  bool defined = false;
  MatrixD matrix;
  int nuisance_rank = 0;
};
EfimResult efim_eta(const MatrixD& fim_bar);

// Distance/azimuth/elevation EFIs computed through the delay-merged basis.
// Values match efi() on the intermediate FIM in exact arithmetic and remain
// accurate when c*xi and d_RU are nearly inseparable (weak curvature),
// where the plain Schur route loses everything to cancellation.
struct IntermediateEfi {
  bool defined = false;
  double distance = 0.0;   // 1/m^2
  double azimuth = 0.0;    // 1/rad^2
  double elevation = 0.0;  // 1/rad^2
};
IntermediateEfi intermediate_efi(const ScenarioGeometry& geometry,
                                 const SignalConfig& cfg,
                                 const ChannelModelFlags& flags,
                                 const RisProfile& profile,
                                 const SampleMask& mask = SampleMask::all(),
                                 int n_threads = 1);

// Rank classification (numerical_rank, the rank fields below) keeps the
// conservative kRankRelTol cutoff because rank statements are claims about
// structure. Bound evaluation is a different question: a FIM with condition
// 1e11 is still invertible to ~eps*cond relative accuracy, and refusing to
// invert it would report "singular" for scenarios whose error bound is
// merely large. PEB inversions therefore use this looser cutoff.
inline constexpr double kPebInversionRelTol = 1e-14;

// Position error bound sqrt(trace of the position block of J^{-1}). The
// block is [pos_begin, pos_begin + pos_count). Singular information is a
// reported outcome, not an error: no pseudo-inverse, no infinity.
struct PebResult {
  bool singular = false;
  double peb_m = 0.0;
  int rank = 0;
  double condition = 0.0;
};
PebResult peb(const MatrixD& fim, int pos_begin, int pos_count,
              double rel_tol = kPebInversionRelTol);

// Position error bound computed through the delay-merged basis: the merged
// FIM is inverted and mapped to Cartesian covariance by the closed-form
// spherical Jacobian. Equal to peb(fim(Position, ...), 2, 3) in exact
// arithmetic, but the rank decision happens where the weak curvature
// direction is represented accurately instead of buried under rounding of
// the dominant delay term, which keeps mid-range scenarios invertible.
PebResult position_peb_merged(const ScenarioGeometry& geometry,
                              const SignalConfig& cfg,
                              const ChannelModelFlags& flags,
                              const RisProfile& profile,
                              const SampleMask& mask = SampleMask::all(),
                              int n_threads = 1,
                              double rel_tol = kPebInversionRelTol);

// Jacobian T = d[alpha, c xi, d_RU, phi, theta] / d[alpha, c xi, x, y, z]
// evaluated at the scenario's UE position, so J_position = T^T J_bar T.
// Undefined on the pole axis where azimuth degenerates.
MatrixD parameter_jacobian(const ScenarioGeometry& geometry);

// Total received sample energy sum |mu|^2 over all (b, n, t).
double received_energy(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                       const ChannelModelFlags& flags, const RisProfile& profile);

// Bundle of everything a caller typically wants from one scenario.
struct FisherReport {
  MatrixD fim_position;
  MatrixD fim_intermediate;
  PebResult peb;
  EfiResult efi_distance;
  EfiResult efi_azimuth;
  EfiResult efi_elevation;
  EfimResult efim;
  int rank_position = 0;
  int rank_intermediate = 0;
  double condition_position = 0.0;
  double condition_intermediate = 0.0;
};
FisherReport build_fisher_report(const ScenarioGeometry& geometry,
                                 const SignalConfig& cfg,
                                 const ChannelModelFlags& flags,
                                 const RisProfile& profile,
                                 const SampleMask& mask = SampleMask::all(),
                                 int n_threads = 1);
std::string to_json_string(const FisherReport& report);

}  // namespace risloc
