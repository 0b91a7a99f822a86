#pragma once

#include <complex>
#include <stdexcept>

#include "risloc/geometry.hpp"
#include "risloc/numerics.hpp"

namespace risloc {

// Uplink OFDM resource description. The sub-carrier grid is centred on the
// carrier: f_n = carrier + (n - (N-1)/2) * bandwidth/N for n = 0..N-1, so the
// mean grid frequency equals the carrier. Pilots default to 1 for every
// (sub-carrier, slot) pair; when set explicitly they must stay unit modulus.
// xi_seconds is the unknown clock offset between UE and BS; its scaled form
// c*xi (metres) is what the estimation bounds carry.
struct SignalConfig {
  double carrier_hz = 28e9;
  int n_subcarriers = 1;
  double bandwidth_hz = 0.0;
  int n_slots = 1;
  MatrixC pilots;  // n_subcarriers x n_slots; empty means all-ones
  double noise_var = 1.0;
  double alpha = 1.0;       // complex channel gain magnitude (real by model)
  double xi_seconds = 0.0;  // clock offset

  std::complex<double> pilot(int n, int t) const {
    if (n < 0 || n >= n_subcarriers || t < 0 || t >= n_slots)
      throw std::out_of_range("pilot: index out of range");
    if (pilots.empty()) return {1.0, 0.0};
    return pilots(n, t);
  }

  void validate() const;
};

struct ChannelModelFlags {
  Wavefront ris_ue = Wavefront::Near;
  Wavefront bs_ris = Wavefront::Near;
};

double subcarrier_freq(int n, const SignalConfig& cfg);

}  // namespace risloc
