#include "risloc/ris_profile.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "risloc/channel.hpp"

namespace risloc {

namespace {

std::complex<double> unit_phase(double radians) {
  return {std::cos(radians), std::sin(radians)};
}

// Cascaded per-element channel for one antenna under the given model flags,
// [h]_r = [h_br]_r * [h_ru]_r. The alignment profiles conjugate this.
std::vector<std::complex<double>> cascade(int b, int n,
                                          const ScenarioGeometry& geometry,
                                          const SignalConfig& cfg,
                                          const ChannelModelFlags& flags) {
  const SphericalDirection dir = geometry.ue_direction();
  const auto hr = h_ru(n, geometry, dir, flags.ris_ue, cfg);
  const auto hb = h_br_row(b, n, geometry, flags.bs_ris, cfg);
  std::vector<std::complex<double>> out(hr.size());
  for (size_t r = 0; r < hr.size(); ++r) out[r] = hb[r] * hr[r];
  return out;
}

}  // namespace

std::complex<double>& RisProfile::at(int t, int r) {
  if (t < 0 || t >= n_slots || r < 0 || r >= n_elements)
    throw std::out_of_range("RisProfile::at: index out of range");
  return coefficients[static_cast<size_t>(t) * n_elements + r];
}

const std::complex<double>& RisProfile::at(int t, int r) const {
  return const_cast<RisProfile*>(this)->at(t, r);
}

std::span<const std::complex<double>> RisProfile::slot(int t) const {
  if (t < 0 || t >= n_slots)
    throw std::out_of_range("RisProfile::slot: index out of range");
  return {coefficients.data() + static_cast<size_t>(t) * n_elements,
          static_cast<size_t>(n_elements)};
}

void RisProfile::validate() const {
  if (n_slots < 1 || n_elements < 1)
    throw std::invalid_argument("RisProfile: dimensions must be >= 1");
  if (coefficients.size() != static_cast<size_t>(n_slots) * n_elements)
    throw std::invalid_argument("RisProfile: coefficient count mismatch");
  for (const auto& c : coefficients)
    if (std::abs(std::abs(c) - 1.0) > 1e-12)
      throw std::invalid_argument("RisProfile: coefficients must be unit modulus");
}

RisProfile random_profile(int n_elements, int n_slots, uint64_t seed) {
  if (n_elements < 1 || n_slots < 1)
    throw std::invalid_argument("random_profile: dimensions must be >= 1");
  RisProfile p(n_slots, n_elements);
  std::mt19937_64 rng(seed);
  for (auto& c : p.coefficients) {
    // 53-bit mantissa draw; avoids the platform-defined std distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    c = unit_phase(2.0 * std::numbers::pi * u);
  }
  return p;
}

RisProfile focusing_profile(const ScenarioGeometry& geometry, const Vec3& focus,
                            int ref_antenna, int n0, const SignalConfig& cfg) {
  if (ref_antenna < 0 || ref_antenna >= geometry.n_bs())
    throw std::out_of_range("focusing_profile: antenna index out of range");
  const double k =
      2.0 * std::numbers::pi * subcarrier_freq(n0, cfg) / kSpeedOfLight;
  const Vec3 pb = geometry.bs_element(ref_antenna);

  RisProfile p(1, geometry.n_ris());
  for (int r = 0; r < geometry.n_ris(); ++r) {
    const Vec3 pr = geometry.ris_element(r);
    const double d_focus = (focus - pr).norm();
    if (d_focus == 0.0)
      throw DegenerateGeometryError("focusing_profile: focus on a RIS element");
    p.at(0, r) = unit_phase(k * ((pb - pr).norm() + d_focus));
  }
  return p;
}

RisProfile case1_profiles(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                          int n0, const ChannelModelFlags& flags) {
  if (n0 < 0 || n0 >= cfg.n_subcarriers)
    throw std::out_of_range("case1_profiles: sub-carrier index out of range");
  RisProfile p(geometry.n_bs(), geometry.n_ris());
  for (int t = 0; t < geometry.n_bs(); ++t) {
    const auto h = cascade(t, n0, geometry, cfg, flags);
    for (int r = 0; r < geometry.n_ris(); ++r)
      p.at(t, r) = std::conj(h[static_cast<size_t>(r)]);
  }
  return p;
}

RisProfile case2_profiles(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                          int b0, const ChannelModelFlags& flags) {
  if (b0 < 0 || b0 >= geometry.n_bs())
    throw std::out_of_range("case2_profiles: antenna index out of range");
  RisProfile p(cfg.n_subcarriers, geometry.n_ris());
  for (int t = 0; t < cfg.n_subcarriers; ++t) {
    const auto h = cascade(b0, t, geometry, cfg, flags);
    for (int r = 0; r < geometry.n_ris(); ++r)
      p.at(t, r) = std::conj(h[static_cast<size_t>(r)]);
  }
  return p;
}

std::vector<std::complex<double>> equivalent_time_profile(
    std::span<const std::complex<double>> base_slot,
    const ScenarioGeometry& geometry, int n, int ref_antenna, int antenna,
    const SignalConfig& cfg) {
  if (static_cast<int>(base_slot.size()) != geometry.n_ris())
    throw std::invalid_argument("equivalent_time_profile: slot size != RIS size");
  if (ref_antenna < 0 || ref_antenna >= geometry.n_bs() || antenna < 0 ||
      antenna >= geometry.n_bs())
    throw std::out_of_range("equivalent_time_profile: antenna index out of range");

  std::vector<std::complex<double>> out(base_slot.begin(), base_slot.end());
  if (antenna == ref_antenna) return out;

  const double k = 2.0 * std::numbers::pi * subcarrier_freq(n, cfg) / kSpeedOfLight;
  const Vec3 pa = geometry.bs_element(antenna);
  const Vec3 p0 = geometry.bs_element(ref_antenna);
  for (int r = 0; r < geometry.n_ris(); ++r) {
    const Vec3 pr = geometry.ris_element(r);
    const double diff = (pa - pr).norm() - (p0 - pr).norm();
    out[static_cast<size_t>(r)] *= unit_phase(-k * diff);
  }
  return out;
}

std::string to_json_string(const RisProfile& profile) {
  nlohmann::json slots = nlohmann::json::array();
  for (int t = 0; t < profile.n_slots; ++t) {
    nlohmann::json phases = nlohmann::json::array();
    for (int r = 0; r < profile.n_elements; ++r)
      phases.push_back(std::arg(profile.at(t, r)));
    slots.push_back(std::move(phases));
  }
  return slots.dump();
}

RisProfile profile_from_json(const std::string& json_text) {
  const nlohmann::json slots = nlohmann::json::parse(json_text);
  if (!slots.is_array() || slots.empty())
    throw std::invalid_argument("profile_from_json: expected a non-empty array");
  const size_t n_elements = slots.front().size();
  if (n_elements == 0)
    throw std::invalid_argument("profile_from_json: empty slot");

  RisProfile p(static_cast<int>(slots.size()), static_cast<int>(n_elements));
  for (size_t t = 0; t < slots.size(); ++t) {
    const auto& phases = slots[t];
    if (!phases.is_array() || phases.size() != n_elements)
      throw std::invalid_argument("profile_from_json: ragged slot sizes");
    for (size_t r = 0; r < n_elements; ++r)
      p.at(static_cast<int>(t), static_cast<int>(r)) =
          unit_phase(phases[r].get<double>());
  }
  return p;
}

}  // namespace risloc
