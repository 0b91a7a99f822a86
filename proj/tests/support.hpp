#pragma once

// Shared fixtures for the test suite.
//
// oracle_* pin the scenario that an independent python implementation of the
// sample model was evaluated on; its outputs are frozen into test_channel.cpp
// and test_fisher.cpp. The arrays are irregular on purpose: a symmetric
// layout can make an index swap or a sign error invisible.

#include <complex>
#include <vector>

#include "risloc/fisher.hpp"
#include "risloc/geometry.hpp"
#include "risloc/numerics.hpp"
#include "risloc/ris_profile.hpp"
#include "risloc/signal.hpp"

namespace risloc_test {

inline risloc::ScenarioGeometry oracle_geometry() {
  risloc::ScenarioGeometry g;
  g.bs_reference = {8.0, -12.0, 2.0};
  g.ris_reference = {0.0, 0.0, 0.0};
  g.ue_position = {0.41, 0.23, -0.35};
  g.bs_offsets = {{0.0, 0.0, 0.0},
                  {0.001, 0.013, 0.003},
                  {-0.002, 0.021, -0.017}};
  g.ris_offsets = {{0.0, 0.010, 0.020},  {0.0, -0.013, 0.008},
                   {0.0, 0.005, -0.017}, {0.0, -0.009, -0.006},
                   {0.0, 0.047, -0.053}, {0.0, -0.051, 0.042},
                   {0.0, 0.058, 0.049},  {0.0, -0.044, -0.057},
                   {0.0, 0.002, 0.061}};
  return g;
}

inline risloc::SignalConfig oracle_signal() {
  risloc::SignalConfig cfg;
  cfg.carrier_hz = 28e9;
  cfg.n_subcarriers = 4;
  cfg.bandwidth_hz = 400e6;
  cfg.n_slots = 1;
  cfg.noise_var = 1.5;
  cfg.alpha = 0.8;
  cfg.xi_seconds = 3.2e-9;
  return cfg;
}

inline risloc::RisProfile oracle_profile() {
  const double phases[] = {0.3, -1.2, 2.0, 0.7, -0.4, 1.1, -2.6, 0.05, 1.9};
  risloc::RisProfile profile(1, 9);
  for (int r = 0; r < 9; ++r)
    profile.at(0, r) = std::polar(1.0, phases[r]);
  return profile;
}

// Largest entry difference relative to the largest entry of the reference.
inline double rel_max_diff(const risloc::MatrixD& a, const risloc::MatrixD& b) {
  double scale = risloc::max_abs(b);
  if (scale == 0.0) return risloc::max_abs(a);
  double diff = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      diff = std::max(diff, std::abs(a(i, j) - b(i, j)));
  return diff / scale;
}

inline risloc::MatrixD matrix_from_rows(
    const std::vector<std::vector<double>>& rows) {
  risloc::MatrixD m(static_cast<int>(rows.size()),
                    static_cast<int>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return m;
}

}  // namespace risloc_test
