#pragma once

#include <complex>
#include <span>
#include <vector>

#include "risloc/geometry.hpp"
#include "risloc/numerics.hpp"
#include "risloc/ris_profile.hpp"
#include "risloc/signal.hpp"

// Cascaded uplink channel UE -> RIS -> BS at sub-carrier granularity. All
// links are pure delay phases: entry magnitudes are 1 and path loss is folded
// into the scalar gain alpha of SignalConfig.

namespace risloc {

// RIS-element-to-UE steering vector, [h]_r = exp(-j 2 pi f_n d_rU / c) with
// d_rU from the selected wavefront model.
std::vector<std::complex<double>> h_ru(int n, const ScenarioGeometry& geometry,
                                       const SphericalDirection& dir,
                                       Wavefront model, const SignalConfig& cfg);

// BS-RIS block, exact element-to-element distances: [H]_{b,r} =
// exp(-j 2 pi f_n |p_b - p_r| / c). Full rank for generic placements.
MatrixC h_br_near(int n, const ScenarioGeometry& geometry, const SignalConfig& cfg);

// Planar-wave BS-RIS block: rank-one product of the BS steering vector (RIS
// direction seen from the BS) and the RIS departure steering vector (BS seen
// from the RIS), scaled by the reference-path delay phase.
MatrixC h_br_far(int n, const ScenarioGeometry& geometry, const SignalConfig& cfg);

// One BS-RIS row (antenna b) under the selected wavefront model.
std::vector<std::complex<double>> h_br_row(int b, int n,
                                           const ScenarioGeometry& geometry,
                                           Wavefront model, const SignalConfig& cfg);

// Noise-free received sample at antenna b, sub-carrier n, slot t:
// mu = alpha * pilot(n,t) * exp(-j 2 pi f_n xi) * sum_r phi_t[r] *
//      [h_br]_r * [h_ru]_r.
std::complex<double> mu(int b, int n, int t, const ScenarioGeometry& geometry,
                        const SignalConfig& cfg, const ChannelModelFlags& flags,
                        const RisProfile& profile);

// Same sample with an explicit slot coefficient vector (profiles that vary
// per sub-carrier, as the temporal replay construction requires).
std::complex<double> mu(int b, int n, int t, const ScenarioGeometry& geometry,
                        const SignalConfig& cfg, const ChannelModelFlags& flags,
                        std::span<const std::complex<double>> slot_coefficients);

}  // namespace risloc
