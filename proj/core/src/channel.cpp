#include "risloc/channel.hpp"

#include <cmath>
#include <numbers>

namespace risloc {

namespace {

std::complex<double> unit_phase(double radians) {
  return {std::cos(radians), std::sin(radians)};
}

double delay_rad_per_metre(double freq_hz) {
  return 2.0 * std::numbers::pi * freq_hz / kSpeedOfLight;
}

}  // namespace

void SignalConfig::validate() const {
  if (n_subcarriers < 1) throw std::invalid_argument("SignalConfig: n_subcarriers must be >= 1");
  if (n_slots < 1) throw std::invalid_argument("SignalConfig: n_slots must be >= 1");
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("SignalConfig: carrier must be positive");
  if (bandwidth_hz < 0.0) throw std::invalid_argument("SignalConfig: bandwidth must be >= 0");
  if (n_subcarriers > 1 && !(bandwidth_hz > 0.0))
    throw std::invalid_argument("SignalConfig: several sub-carriers need bandwidth > 0");
  if (!(noise_var > 0.0)) throw std::invalid_argument("SignalConfig: noise variance must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("SignalConfig: alpha must be positive");
  if (!pilots.empty()) {
    if (pilots.rows() != n_subcarriers || pilots.cols() != n_slots)
      throw std::invalid_argument("SignalConfig: pilot matrix shape mismatch");
    for (const auto& x : pilots.data())
      if (std::abs(std::abs(x) - 1.0) > 1e-12)
        throw std::invalid_argument("SignalConfig: pilots must be unit modulus");
  }
}

double subcarrier_freq(int n, const SignalConfig& cfg) {
  if (n < 0 || n >= cfg.n_subcarriers)
    throw std::out_of_range("subcarrier_freq: index out of range");
  const double spacing = cfg.bandwidth_hz / cfg.n_subcarriers;
  return cfg.carrier_hz + (n - 0.5 * (cfg.n_subcarriers - 1)) * spacing;
}

std::vector<std::complex<double>> h_ru(int n, const ScenarioGeometry& geometry,
                                       const SphericalDirection& dir,
                                       Wavefront model, const SignalConfig& cfg) {
  const double k = delay_rad_per_metre(subcarrier_freq(n, cfg));
  std::vector<std::complex<double>> out(static_cast<size_t>(geometry.n_ris()));
  for (int r = 0; r < geometry.n_ris(); ++r)
    out[static_cast<size_t>(r)] = unit_phase(-k * distance_ru(r, geometry, dir, model));
  return out;
}

MatrixC h_br_near(int n, const ScenarioGeometry& geometry, const SignalConfig& cfg) {
  const double k = delay_rad_per_metre(subcarrier_freq(n, cfg));
  MatrixC out(geometry.n_bs(), geometry.n_ris());
  for (int b = 0; b < geometry.n_bs(); ++b) {
    const Vec3 pb = geometry.bs_element(b);
    for (int r = 0; r < geometry.n_ris(); ++r) {
      const double d = (pb - geometry.ris_element(r)).norm();
      if (d == 0.0)
        throw DegenerateGeometryError("h_br_near: BS and RIS elements coincide");
      out(b, r) = unit_phase(-k * d);
    }
  }
  return out;
}

MatrixC h_br_far(int n, const ScenarioGeometry& geometry, const SignalConfig& cfg) {
  const double k = delay_rad_per_metre(subcarrier_freq(n, cfg));
  // Arrival direction at the BS points towards the RIS; departure direction
  // at the RIS points towards the BS. First-order expansion of the
  // element-to-element distance is then d_BR + gamma_b + gamma_r.
  const SphericalDirection bs_to_ris =
      cartesian_to_spherical(geometry.bs_reference, geometry.ris_reference);
  const SphericalDirection ris_to_bs =
      cartesian_to_spherical(geometry.ris_reference, geometry.bs_reference);

  std::vector<std::complex<double>> a_bs(static_cast<size_t>(geometry.n_bs()));
  for (int b = 0; b < geometry.n_bs(); ++b)
    a_bs[static_cast<size_t>(b)] =
        unit_phase(-k * gamma_ru(geometry.bs_offsets[static_cast<size_t>(b)], bs_to_ris));
  std::vector<std::complex<double>> a_ris(static_cast<size_t>(geometry.n_ris()));
  for (int r = 0; r < geometry.n_ris(); ++r)
    a_ris[static_cast<size_t>(r)] =
        unit_phase(-k * gamma_ru(geometry.ris_offsets[static_cast<size_t>(r)], ris_to_bs));

  const std::complex<double> ref = unit_phase(-k * bs_to_ris.distance);
  MatrixC out(geometry.n_bs(), geometry.n_ris());
  for (int b = 0; b < geometry.n_bs(); ++b) {
    const std::complex<double> row = ref * a_bs[static_cast<size_t>(b)];
    for (int r = 0; r < geometry.n_ris(); ++r)
      out(b, r) = row * a_ris[static_cast<size_t>(r)];
  }
  return out;
}

std::vector<std::complex<double>> h_br_row(int b, int n,
                                           const ScenarioGeometry& geometry,
                                           Wavefront model, const SignalConfig& cfg) {
  if (b < 0 || b >= geometry.n_bs())
    throw std::out_of_range("h_br_row: antenna index out of range");
  const double k = delay_rad_per_metre(subcarrier_freq(n, cfg));
  std::vector<std::complex<double>> out(static_cast<size_t>(geometry.n_ris()));

  if (model == Wavefront::Near) {
    const Vec3 pb = geometry.bs_element(b);
    for (int r = 0; r < geometry.n_ris(); ++r) {
      const double d = (pb - geometry.ris_element(r)).norm();
      if (d == 0.0)
        throw DegenerateGeometryError("h_br_row: BS and RIS elements coincide");
      out[static_cast<size_t>(r)] = unit_phase(-k * d);
    }
    return out;
  }

  const SphericalDirection bs_to_ris =
      cartesian_to_spherical(geometry.bs_reference, geometry.ris_reference);
  const SphericalDirection ris_to_bs =
      cartesian_to_spherical(geometry.ris_reference, geometry.bs_reference);
  const std::complex<double> row =
      unit_phase(-k * (bs_to_ris.distance +
                       gamma_ru(geometry.bs_offsets[static_cast<size_t>(b)], bs_to_ris)));
  for (int r = 0; r < geometry.n_ris(); ++r)
    out[static_cast<size_t>(r)] =
        row * unit_phase(-k * gamma_ru(geometry.ris_offsets[static_cast<size_t>(r)], ris_to_bs));
  return out;
}

std::complex<double> mu(int b, int n, int t, const ScenarioGeometry& geometry,
                        const SignalConfig& cfg, const ChannelModelFlags& flags,
                        std::span<const std::complex<double>> slot_coefficients) {
  if (static_cast<int>(slot_coefficients.size()) != geometry.n_ris())
    throw std::invalid_argument("mu: slot coefficient count != RIS size");
  const double fn = subcarrier_freq(n, cfg);
  const SphericalDirection dir = geometry.ue_direction();
  const std::vector<std::complex<double>> hr = h_ru(n, geometry, dir, flags.ris_ue, cfg);
  const std::vector<std::complex<double>> hb = h_br_row(b, n, geometry, flags.bs_ris, cfg);

  std::complex<double> acc{0.0, 0.0};
  for (int r = 0; r < geometry.n_ris(); ++r)
    acc += slot_coefficients[static_cast<size_t>(r)] * hb[static_cast<size_t>(r)] *
           hr[static_cast<size_t>(r)];
  const std::complex<double> clock =
      unit_phase(-2.0 * std::numbers::pi * fn * cfg.xi_seconds);
  return cfg.alpha * cfg.pilot(n, t) * clock * acc;
}

std::complex<double> mu(int b, int n, int t, const ScenarioGeometry& geometry,
                        const SignalConfig& cfg, const ChannelModelFlags& flags,
                        const RisProfile& profile) {
  if (profile.n_elements != geometry.n_ris())
    throw std::invalid_argument("mu: profile element count != RIS size");
  if (t < 0 || t >= profile.n_slots)
    throw std::out_of_range("mu: slot index out of profile range");
  return mu(b, n, t, geometry, cfg, flags, profile.slot(t));
}

}  // namespace risloc
