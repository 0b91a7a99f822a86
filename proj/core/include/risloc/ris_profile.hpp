#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "risloc/geometry.hpp"
#include "risloc/signal.hpp"

// Phase control of the reflecting surface. A profile stores one unit-modulus
// coefficient per (slot, element); the surface applies coefficient
// e^{j phase} to the signal bouncing off that element during that slot.

namespace risloc {

struct RisProfile {
  int n_slots = 0;
  int n_elements = 0;
  std::vector<std::complex<double>> coefficients;  // slot-major

  RisProfile() = default;
  RisProfile(int slots, int elements)
      : n_slots(slots),
        n_elements(elements),
        coefficients(static_cast<size_t>(slots) * elements, {1.0, 0.0}) {}

  std::complex<double>& at(int t, int r);
  const std::complex<double>& at(int t, int r) const;
  std::span<const std::complex<double>> slot(int t) const;

  // Enforces unit modulus to 1e-12 and consistent dimensions.
  void validate() const;
};

// Independent phases uniform on [0, 2pi), deterministic in the seed. The
// stream is fully specified (std::mt19937_64 with a fixed bit-to-phase map),
// so equal seeds give bitwise equal profiles on every platform.
RisProfile random_profile(int n_elements, int n_slots, uint64_t seed);

// Single-slot profile conjugating the cascaded BS-element/RIS-element/focus
// phases at sub-carrier n0: coefficient_r = exp(+j 2 pi f_n0 (d_{b0,r} +
// |focus - p_r|) / c) with exact Euclidean distances. A source at the focus
// then combines coherently at BS antenna b0 on that sub-carrier.
RisProfile focusing_profile(const ScenarioGeometry& geometry, const Vec3& focus,
                            int ref_antenna, int n0, const SignalConfig& cfg);

// Slot-per-antenna alignment battery: slot t conjugates antenna t's cascaded
// channel at the single sub-carrier n0 (profile has n_bs slots). Model flags
// select which channel the conjugation matches.
RisProfile case1_profiles(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                          int n0, const ChannelModelFlags& flags = {});

// Slot-per-sub-carrier alignment battery: slot t conjugates the cascaded
// channel of antenna b0 at sub-carrier t (profile has n_subcarriers slots).
RisProfile case2_profiles(const ScenarioGeometry& geometry, const SignalConfig& cfg,
                          int b0, const ChannelModelFlags& flags = {});

// Temporal replay of a spatial sample: returns the slot profile that makes
// reference antenna ref_antenna observe, at sub-carrier n, exactly what
// antenna `antenna` observes under base_slot. Each coefficient is rotated by
// the propagation difference exp(-j 2 pi f_n (d_{antenna,r} - d_{ref,r})/c);
// antenna == ref_antenna returns the base slot unchanged.
std::vector<std::complex<double>> equivalent_time_profile(
    std::span<const std::complex<double>> base_slot,
    const ScenarioGeometry& geometry, int n, int ref_antenna, int antenna,
    const SignalConfig& cfg);

// Serialisation as a JSON array of per-slot phase lists in radians.
std::string to_json_string(const RisProfile& profile);
RisProfile profile_from_json(const std::string& json_text);

}  // namespace risloc
