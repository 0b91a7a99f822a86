#include "risloc/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

namespace risloc {

namespace {

using cd = std::complex<double>;

std::complex<double> unit_phase(double radians) {
  return {std::cos(radians), std::sin(radians)};
}

// Parameter bases the assembly loop can produce. Sync drops the clock from
// the position basis; ReducedFar and Merged are the far-field and
// curvature-split variants described in the header.
enum class Basis { Position, Intermediate, Sync, ReducedFar, Merged };

int basis_dim(Basis b) { return b == Basis::Sync || b == Basis::ReducedFar ? 4 : 5; }

// Everything that is fixed across samples for one (geometry, cfg, flags)
// triple: per-element distances and distance derivatives, per-sub-carrier
// channel blocks and phases.
struct Workspace {
  const ScenarioGeometry* geometry = nullptr;
  const SignalConfig* cfg = nullptr;
  ChannelModelFlags flags;
  SphericalDirection dir;
  int nb = 0, nr = 0, nn = 0, nt = 0;
  double two_over_sigma2 = 0.0;

  std::vector<double> wavenum;  // 2 pi f_n / c
  std::vector<cd> clock;        // exp(-j 2 pi f_n xi)
  std::vector<MatrixC> hbr;     // per n, nb x nr
  std::vector<std::vector<cd>> hru;  // per n, nr

  std::vector<std::array<double, 3>> dpos;  // d d_rU / d p_U
  std::vector<std::array<double, 3>> dbar;  // d d_rU / d (d_RU, phi, theta)
  std::vector<double> ddelta;               // d d_rU / d d_RU - 1
};

Workspace build_workspace(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                          const ChannelModelFlags& flags) {
  geometry.validate();
  cfg.validate();

  Workspace ws;
  ws.geometry = &geometry;
  ws.cfg = &cfg;
  ws.flags = flags;
  ws.dir = geometry.ue_direction();
  ws.nb = geometry.n_bs();
  ws.nr = geometry.n_ris();
  ws.nn = cfg.n_subcarriers;
  ws.nt = cfg.n_slots;
  ws.two_over_sigma2 = 2.0 / cfg.noise_var;

  ws.wavenum.resize(static_cast<size_t>(ws.nn));
  ws.clock.resize(static_cast<size_t>(ws.nn));
  ws.hbr.reserve(static_cast<size_t>(ws.nn));
  ws.hru.resize(static_cast<size_t>(ws.nn));
  for (int n = 0; n < ws.nn; ++n) {
    const double fn = subcarrier_freq(n, cfg);
    ws.wavenum[static_cast<size_t>(n)] = 2.0 * std::numbers::pi * fn / kSpeedOfLight;
    ws.clock[static_cast<size_t>(n)] =
        unit_phase(-2.0 * std::numbers::pi * fn * cfg.xi_seconds);
    ws.hbr.push_back(flags.bs_ris == Wavefront::Near ? h_br_near(n, geometry, cfg)
                                                     : h_br_far(n, geometry, cfg));
    ws.hru[static_cast<size_t>(n)] = h_ru(n, geometry, ws.dir, flags.ris_ue, cfg);
  }

  const double d = ws.dir.distance;
  const double st = std::sin(ws.dir.elevation);
  const double ct = std::cos(ws.dir.elevation);
  const double ca = std::cos(ws.dir.azimuth);
  const double sa = std::sin(ws.dir.azimuth);
  const Vec3 u{st * ca, st * sa, ct};

  ws.dpos.resize(static_cast<size_t>(ws.nr));
  ws.dbar.resize(static_cast<size_t>(ws.nr));
  ws.ddelta.resize(static_cast<size_t>(ws.nr));
  for (int r = 0; r < ws.nr; ++r) {
    const Vec3& off = geometry.ris_offsets[static_cast<size_t>(r)];
    const double gamma = gamma_ru(off, ws.dir);
    // d gamma / d azimuth and d gamma / d elevation.
    const double dg_da = off.x * st * sa - off.y * st * ca;
    const double dg_de = -off.x * ct * ca - off.y * ct * sa + off.z * st;

    if (flags.ris_ue == Wavefront::Near) {
      const double dru = distance_ru(r, geometry, ws.dir, Wavefront::Near);
      const Vec3 rel = geometry.ue_position - geometry.ris_element(r);
      ws.dpos[static_cast<size_t>(r)] = {rel.x / dru, rel.y / dru, rel.z / dru};
      ws.dbar[static_cast<size_t>(r)] = {(d + gamma) / dru, d / dru * dg_da,
                                         d / dru * dg_de};
      // (d + gamma - d_rU) / d_rU without the cancellation: the numerator
      // equals (gamma^2 - rho^2) / (d + gamma + d_rU).
      const double rho2 = off.dot(off);
      ws.ddelta[static_cast<size_t>(r)] =
          (gamma * gamma - rho2) / ((d + gamma + dru) * dru);
    } else {
      // d_rU = d_RU + gamma(phi, theta); gradient w.r.t. p_U via the exact
      // derivatives of d_RU and the unit direction.
      const double udotoff = off.dot(u);
      ws.dpos[static_cast<size_t>(r)] = {u.x - (off.x - udotoff * u.x) / d,
                                         u.y - (off.y - udotoff * u.y) / d,
                                         u.z - (off.z - udotoff * u.z) / d};
      ws.dbar[static_cast<size_t>(r)] = {1.0, dg_da, dg_de};
      ws.ddelta[static_cast<size_t>(r)] = 0.0;
    }
  }
  return ws;
}

// Per-sample derivative vector in the requested basis. htilde is the
// cascaded channel row for (b, n); phi the slot coefficients.
void sample_gradient(const Workspace& ws, Basis basis, int n, int t,
                     std::span<const cd> htilde, std::span<const cd> phi,
                     std::array<cd, 5>& v, int& dim) {
  dim = basis_dim(basis);

  // Weighted sums over the surface: s0 plain, sg[k] against the distance
  // derivative columns of the basis.
  cd s0{};
  std::array<cd, 3> sg{};
  for (int r = 0; r < ws.nr; ++r) {
    const cd w = phi[static_cast<size_t>(r)] * htilde[static_cast<size_t>(r)];
    s0 += w;
    switch (basis) {
      case Basis::Position:
      case Basis::Sync: {
        const auto& g = ws.dpos[static_cast<size_t>(r)];
        sg[0] += w * g[0];
        sg[1] += w * g[1];
        sg[2] += w * g[2];
        break;
      }
      case Basis::Intermediate: {
        const auto& g = ws.dbar[static_cast<size_t>(r)];
        sg[0] += w * g[0];
        sg[1] += w * g[1];
        sg[2] += w * g[2];
        break;
      }
      case Basis::ReducedFar: {
        const auto& g = ws.dbar[static_cast<size_t>(r)];
        sg[0] += w * g[1];
        sg[1] += w * g[2];
        break;
      }
      case Basis::Merged: {
        const auto& g = ws.dbar[static_cast<size_t>(r)];
        sg[0] += w * ws.ddelta[static_cast<size_t>(r)];
        sg[1] += w * g[1];
        sg[2] += w * g[2];
        break;
      }
    }
  }

  const SignalConfig& cfg = *ws.cfg;
  const cd base = cfg.pilot(n, t) * ws.clock[static_cast<size_t>(n)];
  const cd pref = cfg.alpha * base;  // alpha * x * exp(-j 2 pi f xi)
  const cd jk{0.0, -ws.wavenum[static_cast<size_t>(n)]};  // -j 2 pi f / c

  switch (basis) {
    case Basis::Position:
    case Basis::Intermediate:
      v[0] = base * s0;        // d mu / d alpha
      v[1] = jk * (pref * s0); // d mu / d (c xi)
      v[2] = jk * (pref * sg[0]);
      v[3] = jk * (pref * sg[1]);
      v[4] = jk * (pref * sg[2]);
      break;
    case Basis::Sync:
      v[0] = base * s0;
      v[1] = jk * (pref * sg[0]);
      v[2] = jk * (pref * sg[1]);
      v[3] = jk * (pref * sg[2]);
      break;
    case Basis::ReducedFar:
      v[0] = base * s0;
      v[1] = jk * (pref * s0);  // d mu / d (c xi + d_RU)
      v[2] = jk * (pref * sg[0]);
      v[3] = jk * (pref * sg[1]);
      break;
    case Basis::Merged:
      v[0] = base * s0;
      v[1] = jk * (pref * s0);    // common delay direction
      v[2] = jk * (pref * sg[0]); // curvature-only distance direction
      v[3] = jk * (pref * sg[1]);
      v[4] = jk * (pref * sg[2]);
      break;
  }
}

struct PartialFim {
  MatrixD sum;
  long selected = 0;
};

// Accumulates the mask-selected samples of sub-carriers [n_begin, n_end).
PartialFim accumulate_range(const Workspace& ws, Basis basis,
                            const RisProfile& profile, const SampleMask& mask,
                            int n_begin, int n_end) {
  const int dim = basis_dim(basis);
  PartialFim out;
  out.sum = MatrixD(dim, dim);

  std::vector<cd> htilde(static_cast<size_t>(ws.nr));
  std::array<cd, 5> v{};
  for (int n = n_begin; n < n_end; ++n) {
    const MatrixC& hb = ws.hbr[static_cast<size_t>(n)];
    const std::vector<cd>& hr = ws.hru[static_cast<size_t>(n)];
    for (int b = 0; b < ws.nb; ++b) {
      bool any = false;
      for (int t = 0; t < ws.nt && !any; ++t) any = mask.selects(b, n, t);
      if (!any) continue;

      for (int r = 0; r < ws.nr; ++r)
        htilde[static_cast<size_t>(r)] = hb(b, r) * hr[static_cast<size_t>(r)];

      for (int t = 0; t < ws.nt; ++t) {
        if (!mask.selects(b, n, t)) continue;
        ++out.selected;
        int d = 0;
        sample_gradient(ws, basis, n, t, htilde, profile.slot(t), v, d);
        for (int i = 0; i < d; ++i)
          for (int j = i; j < d; ++j) {
            const double re = v[i].real() * v[j].real() + v[i].imag() * v[j].imag();
            out.sum(i, j) += ws.two_over_sigma2 * re;
          }
      }
    }
  }
  return out;
}

MatrixD assemble(const Workspace& ws, Basis basis, const RisProfile& profile,
                 const SampleMask& mask, int n_threads) {
  if (profile.n_elements != ws.nr)
    throw std::invalid_argument("fim: profile element count != RIS size");
  if (profile.n_slots < ws.nt)
    throw std::invalid_argument("fim: profile has fewer slots than the signal");
  if (basis == Basis::ReducedFar && ws.flags.ris_ue != Wavefront::Far)
    throw std::invalid_argument(
        "fim_reduced_farfield: RIS-UE link must use the far-field model");

  const int dim = basis_dim(basis);
  MatrixD total(dim, dim);
  long selected = 0;

  const int workers = std::clamp(n_threads, 1, ws.nn);
  if (workers == 1) {
    PartialFim p = accumulate_range(ws, basis, profile, mask, 0, ws.nn);
    total = std::move(p.sum);
    selected = p.selected;
  } else {
    // Static partition of the sub-carrier axis; partials are joined in chunk
    // order so results depend only on the worker count, not the schedule.
    std::vector<PartialFim> partials(static_cast<size_t>(workers));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const int n0 = ws.nn * w / workers;
      const int n1 = ws.nn * (w + 1) / workers;
      threads.emplace_back([&, w, n0, n1] {
        partials[static_cast<size_t>(w)] =
            accumulate_range(ws, basis, profile, mask, n0, n1);
      });
    }
    for (auto& th : threads) th.join();
    for (const auto& p : partials) {
      total += p.sum;
      selected += p.selected;
    }
  }

  if (selected == 0)
    throw std::invalid_argument("fim: sample mask selects nothing");

  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < i; ++j) total(i, j) = total(j, i);
  return total;
}

std::array<cd, 5> single_gradient(Basis basis, int b, int n, int t,
                                  const ScenarioGeometry& geometry,
                                  const SignalConfig& cfg,
                                  const ChannelModelFlags& flags,
                                  const RisProfile& profile) {
  if (b < 0 || b >= geometry.n_bs())
    throw std::out_of_range("dmu: antenna index out of range");
  if (n < 0 || n >= cfg.n_subcarriers)
    throw std::out_of_range("dmu: sub-carrier index out of range");
  if (t < 0 || t >= cfg.n_slots)
    throw std::out_of_range("dmu: slot index out of range");
  if (profile.n_elements != geometry.n_ris())
    throw std::invalid_argument("dmu: profile element count != RIS size");
  if (profile.n_slots < cfg.n_slots)
    throw std::invalid_argument("dmu: profile has fewer slots than the signal");

  const Workspace ws = build_workspace(geometry, cfg, flags);
  std::vector<cd> htilde(static_cast<size_t>(ws.nr));
  const MatrixC& hb = ws.hbr[static_cast<size_t>(n)];
  for (int r = 0; r < ws.nr; ++r)
    htilde[static_cast<size_t>(r)] =
        hb(b, r) * ws.hru[static_cast<size_t>(n)][static_cast<size_t>(r)];
  std::array<cd, 5> v{};
  int dim = 0;
  sample_gradient(ws, basis, n, t, htilde, profile.slot(t), v, dim);
  return v;
}

// Scalar Schur complement of component k against the listed nuisance set.
double schur_onto(const MatrixD& m, int k, const std::vector<int>& nuisance,
                  bool& defined, int& nuisance_rank) {
  const int ns = static_cast<int>(nuisance.size());
  MatrixD jss(ns, ns);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) jss(i, j) = m(nuisance[i], nuisance[j]);
  const SymInverseResult inv = sym_inverse(jss);
  nuisance_rank = inv.rank;
  defined = !inv.singular;
  if (!defined) return 0.0;
  double corr = 0.0;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j)
      corr += m(k, nuisance[i]) * inv.inverse(i, j) * m(nuisance[j], k);
  return m(k, k) - corr;
}

}  // namespace

SampleMask SampleMask::single(int b, int n, int t) {
  return {[b, n, t](int bb, int nn, int tt) { return bb == b && nn == n && tt == t; }};
}

SampleMask SampleMask::single_antenna(int b) {
  return {[b](int bb, int, int) { return bb == b; }};
}

SampleMask SampleMask::single_slot(int t) {
  return {[t](int, int, int tt) { return tt == t; }};
}

SampleMask SampleMask::antenna_per_slot(int n0) {
  return {[n0](int b, int n, int t) { return n == n0 && b == t; }};
}

SampleMask SampleMask::subcarrier_per_slot(int b0) {
  return {[b0](int b, int n, int t) { return b == b0 && n == t; }};
}

SampleMask SampleMask::intersect(SampleMask a, SampleMask b) {
  if (!a.predicate) return b;
  if (!b.predicate) return a;
  return {[pa = std::move(a.predicate), pb = std::move(b.predicate)](
              int bb, int nn, int tt) { return pa(bb, nn, tt) && pb(bb, nn, tt); }};
}

std::array<std::complex<double>, 5> dmu_dtheta(int b, int n, int t,
                                               const ScenarioGeometry& geometry,
                                               const SignalConfig& cfg,
                                               const ChannelModelFlags& flags,
                                               const RisProfile& profile) {
  return single_gradient(Basis::Position, b, n, t, geometry, cfg, flags, profile);
}

std::array<std::complex<double>, 5> dmu_dthetabar(int b, int n, int t,
                                                  const ScenarioGeometry& geometry,
                                                  const SignalConfig& cfg,
                                                  const ChannelModelFlags& flags,
                                                  const RisProfile& profile) {
  return single_gradient(Basis::Intermediate, b, n, t, geometry, cfg, flags, profile);
}

MatrixD fim(Parameterization parameterization, const ScenarioGeometry& geometry,
            const SignalConfig& cfg, const ChannelModelFlags& flags,
            const RisProfile& profile, const SampleMask& mask, int n_threads) {
  const Workspace ws = build_workspace(geometry, cfg, flags);
  const Basis basis = parameterization == Parameterization::Position
                          ? Basis::Position
                          : Basis::Intermediate;
  return assemble(ws, basis, profile, mask, n_threads);
}

MatrixD fim_sync(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                 const ChannelModelFlags& flags, const RisProfile& profile,
                 const SampleMask& mask, int n_threads) {
  const Workspace ws = build_workspace(geometry, cfg, flags);
  return assemble(ws, Basis::Sync, profile, mask, n_threads);
}

MatrixD fim_reduced_farfield(const ScenarioGeometry& geometry,
                             const SignalConfig& cfg,
                             const ChannelModelFlags& flags,
                             const RisProfile& profile, const SampleMask& mask,
                             int n_threads) {
  const Workspace ws = build_workspace(geometry, cfg, flags);
  return assemble(ws, Basis::ReducedFar, profile, mask, n_threads);
}

MatrixD fim_delay_merged(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                         const ChannelModelFlags& flags, const RisProfile& profile,
                         const SampleMask& mask, int n_threads) {
  const Workspace ws = build_workspace(geometry, cfg, flags);
  return assemble(ws, Basis::Merged, profile, mask, n_threads);
}

MatrixD per_antenna_fim(Parameterization parameterization, int b,
                        const ScenarioGeometry& geometry, const SignalConfig& cfg,
                        const ChannelModelFlags& flags, const RisProfile& profile,
                        const SampleMask& mask) {
  if (b < 0 || b >= geometry.n_bs())
    throw std::out_of_range("per_antenna_fim: antenna index out of range");
  return fim(parameterization, geometry, cfg, flags, profile,
             SampleMask::intersect(mask, SampleMask::single_antenna(b)));
}

EfiResult efi(const MatrixD& fim_bar, int k) {
  if (fim_bar.rows() != fim_bar.cols())
    throw std::invalid_argument("efi: matrix must be square");
  if (k < 0 || k >= fim_bar.rows())
    throw std::invalid_argument("efi: component index out of range");

  std::vector<int> nuisance;
  for (int i = 0; i < fim_bar.rows(); ++i)
    if (i != k) nuisance.push_back(i);

  EfiResult out;
  out.value = schur_onto(fim_bar, k, nuisance, out.defined, out.nuisance_rank);
  return out;
}

EfimResult efim_eta(const MatrixD& fim_bar) {
  if (fim_bar.rows() != 5 || fim_bar.cols() != 5)
    throw std::invalid_argument("efim_eta: expected the 5x5 intermediate FIM");

  const MatrixD a = fim_bar.block(2, 2, 3, 3);
  const MatrixD b = fim_bar.block(2, 0, 3, 2);
  const MatrixD c = fim_bar.block(0, 0, 2, 2);
  const SymInverseResult inv = sym_inverse(c);

  EfimResult out;
  out.nuisance_rank = inv.rank;
  if (inv.singular) return out;
  out.defined = true;
  out.matrix = a - b * inv.inverse * b.transposed();
  return out;
}

IntermediateEfi intermediate_efi(const ScenarioGeometry& geometry,
                                 const SignalConfig& cfg,
                                 const ChannelModelFlags& flags,
                                 const RisProfile& profile, const SampleMask& mask,
                                 int n_threads) {
  const MatrixD jm = fim_delay_merged(geometry, cfg, flags, profile, mask, n_threads);

  // Basis order: [alpha, c xi + d, d(curvature), phi, theta]. The curvature
  // row carries the weak range information; it is eliminated by an explicit
  // rank-one downdate so the remaining block never mixes scales.
  const std::vector<int> wide{0, 1, 3, 4};
  MatrixD jww(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) jww(i, j) = jm(wide[i], wide[j]);

  IntermediateEfi out;
  const SymInverseResult invw = sym_inverse(jww);
  if (invw.singular) return out;

  double corr = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      corr += jm(2, wide[i]) * invw.inverse(i, j) * jm(wide[j], 2);
  out.distance = jm(2, 2) - corr;

  MatrixD a = jww;  // info over [alpha, c xi + d, phi, theta] after the downdate
  if (jm(2, 2) > 0.0) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        a(i, j) -= jm(wide[i], 2) * jm(2, wide[j]) / jm(2, 2);
  }

  // Positions of phi/theta inside `a`: 2 and 3.
  bool def_phi = false, def_theta = false;
  int rank_phi = 0, rank_theta = 0;
  const double ephi = schur_onto(a, 2, {0, 1, 3}, def_phi, rank_phi);
  const double etheta = schur_onto(a, 3, {0, 1, 2}, def_theta, rank_theta);
  if (!def_phi || !def_theta) return out;

  out.defined = true;
  out.azimuth = ephi;
  out.elevation = etheta;
  return out;
}

PebResult peb(const MatrixD& fim, int pos_begin, int pos_count,
              double rel_tol) {
  if (fim.rows() != fim.cols())
    throw std::invalid_argument("peb: matrix must be square");
  if (pos_begin < 0 || pos_count < 1 || pos_begin + pos_count > fim.rows())
    throw std::invalid_argument("peb: position block out of range");

  const SymInverseResult inv = sym_inverse(fim, rel_tol);
  PebResult out;
  out.rank = inv.rank;
  out.condition = inv.condition;
  if (inv.singular) {
    out.singular = true;
    return out;
  }
  double tr = 0.0;
  for (int i = pos_begin; i < pos_begin + pos_count; ++i) tr += inv.inverse(i, i);
  out.peb_m = std::sqrt(tr);
  return out;
}

PebResult position_peb_merged(const ScenarioGeometry& geometry,
                              const SignalConfig& cfg,
                              const ChannelModelFlags& flags,
                              const RisProfile& profile, const SampleMask& mask,
                              int n_threads, double rel_tol) {
  const MatrixD jm =
      fim_delay_merged(geometry, cfg, flags, profile, mask, n_threads);
  const SymInverseResult inv = sym_inverse(jm, rel_tol);
  PebResult out;
  out.rank = inv.rank;
  out.condition = inv.condition;
  if (inv.singular) {
    out.singular = true;
    return out;
  }

  // Merged basis order [alpha, c xi + d, d, phi, theta]; the position only
  // depends on the last three, through the spherical parameterization.
  const SphericalDirection dir = geometry.ue_direction();
  const double d = dir.distance;
  const double st = std::sin(dir.elevation);
  const double ct = std::cos(dir.elevation);
  const double ca = std::cos(dir.azimuth);
  const double sa = std::sin(dir.azimuth);
  MatrixD p(3, 5);
  p(0, 2) = st * ca;
  p(1, 2) = st * sa;
  p(2, 2) = ct;
  p(0, 3) = -d * st * sa;
  p(1, 3) = d * st * ca;
  p(0, 4) = d * ct * ca;
  p(1, 4) = d * ct * sa;
  p(2, 4) = -d * st;
  const MatrixD cov = p * inv.inverse * p.transposed();
  out.peb_m = std::sqrt(cov(0, 0) + cov(1, 1) + cov(2, 2));
  return out;
}

MatrixD parameter_jacobian(const ScenarioGeometry& geometry) {
  const SphericalDirection dir = geometry.ue_direction();
  const double d = dir.distance;
  const double st = std::sin(dir.elevation);
  const double ct = std::cos(dir.elevation);
  const double ca = std::cos(dir.azimuth);
  const double sa = std::sin(dir.azimuth);
  if (st == 0.0)
    throw DegenerateGeometryError("parameter_jacobian: UE on the pole axis");

  MatrixD t = MatrixD::identity(5);
  // d d_RU / d p = u^T
  t(2, 2) = st * ca;
  t(2, 3) = st * sa;
  t(2, 4) = ct;
  // d phi / d p
  t(3, 2) = -sa / (d * st);
  t(3, 3) = ca / (d * st);
  t(3, 4) = 0.0;
  // d theta / d p
  t(4, 2) = ct * ca / d;
  t(4, 3) = ct * sa / d;
  t(4, 4) = -st / d;
  return t;
}

double received_energy(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                       const ChannelModelFlags& flags, const RisProfile& profile) {
  if (profile.n_elements != geometry.n_ris())
    throw std::invalid_argument("received_energy: profile element count != RIS size");
  if (profile.n_slots < cfg.n_slots)
    throw std::invalid_argument("received_energy: profile has fewer slots than the signal");

  const Workspace ws = build_workspace(geometry, cfg, flags);
  std::vector<cd> htilde(static_cast<size_t>(ws.nr));
  double energy = 0.0;
  for (int n = 0; n < ws.nn; ++n) {
    const MatrixC& hb = ws.hbr[static_cast<size_t>(n)];
    for (int b = 0; b < ws.nb; ++b) {
      for (int r = 0; r < ws.nr; ++r)
        htilde[static_cast<size_t>(r)] =
            hb(b, r) * ws.hru[static_cast<size_t>(n)][static_cast<size_t>(r)];
      for (int t = 0; t < ws.nt; ++t) {
        const std::span<const cd> phi = profile.slot(t);
        cd s0{};
        for (int r = 0; r < ws.nr; ++r)
          s0 += phi[static_cast<size_t>(r)] * htilde[static_cast<size_t>(r)];
        energy += std::norm(cfg.alpha * cfg.pilot(n, t) * s0);
      }
    }
  }
  return energy;
}

FisherReport build_fisher_report(const ScenarioGeometry& geometry,
                                 const SignalConfig& cfg,
                                 const ChannelModelFlags& flags,
                                 const RisProfile& profile, const SampleMask& mask,
                                 int n_threads) {
  FisherReport rep;
  rep.fim_position =
      fim(Parameterization::Position, geometry, cfg, flags, profile, mask, n_threads);
  rep.fim_intermediate = fim(Parameterization::Intermediate, geometry, cfg, flags,
                             profile, mask, n_threads);
  rep.peb = peb(rep.fim_position, 2, 3);
  rep.efi_distance = efi(rep.fim_intermediate, kDistanceIndex);
  rep.efi_azimuth = efi(rep.fim_intermediate, kAzimuthIndex);
  rep.efi_elevation = efi(rep.fim_intermediate, kElevationIndex);
  rep.efim = efim_eta(rep.fim_intermediate);

  const SymEigenResult ep = sym_eigen(rep.fim_position);
  const SymEigenResult ei = sym_eigen(rep.fim_intermediate);
  auto rank_cond = [](const SymEigenResult& e, int& rank, double& cond) {
    double lo = std::abs(e.eigenvalues.front()), hi = 0.0;
    for (double lam : e.eigenvalues) {
      hi = std::max(hi, std::abs(lam));
      lo = std::min(lo, std::abs(lam));
    }
    rank = 0;
    for (double lam : e.eigenvalues)
      if (std::abs(lam) > kRankRelTol * hi) ++rank;
    cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  };
  rank_cond(ep, rep.rank_position, rep.condition_position);
  rank_cond(ei, rep.rank_intermediate, rep.condition_intermediate);
  return rep;
}

namespace {

nlohmann::json matrix_to_json(const MatrixD& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json efi_to_json(const EfiResult& e) {
  nlohmann::json j;
  j["defined"] = e.defined;
  if (e.defined) j["value"] = e.value;
  j["nuisance_rank"] = e.nuisance_rank;
  return j;
}

}  // namespace

std::string to_json_string(const FisherReport& report) {
  nlohmann::json j;
  j["fim_position"] = matrix_to_json(report.fim_position);
  j["fim_intermediate"] = matrix_to_json(report.fim_intermediate);
  j["peb"] = {{"singular", report.peb.singular},
              {"rank", report.peb.rank},
              {"condition", report.peb.condition}};
  if (!report.peb.singular) j["peb"]["peb_m"] = report.peb.peb_m;
  j["efi"] = {{"distance", efi_to_json(report.efi_distance)},
              {"azimuth", efi_to_json(report.efi_azimuth)},
              {"elevation", efi_to_json(report.efi_elevation)}};
  j["efim_eta"] = {{"defined", report.efim.defined},
                   {"nuisance_rank", report.efim.nuisance_rank}};
  if (report.efim.defined) j["efim_eta"]["matrix"] = matrix_to_json(report.efim.matrix);
  j["rank"] = {{"position", report.rank_position},
               {"intermediate", report.rank_intermediate}};
  j["condition"] = {{"position", report.condition_position},
                    {"intermediate", report.condition_intermediate}};
  return j.dump(2);
}

}  // namespace risloc
