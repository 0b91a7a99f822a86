#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "risloc/channel.hpp"
#include "support.hpp"

using namespace risloc;
using std::complex;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Straight transcription of the sample model, sharing nothing with the
// library implementation beyond Vec3 arithmetic: exact euclidean legs for
// near wavefronts, reference distance plus offset projection for far ones.
complex<double> naive_mu(int b, int n, int t, const ScenarioGeometry& g,
                         const SignalConfig& cfg, const ChannelModelFlags& flags,
                         const RisProfile& profile) {
  const double fn = subcarrier_freq(n, cfg);
  const SphericalDirection ue = g.ue_direction();
  const SphericalDirection bs_from_ris =
      cartesian_to_spherical(g.ris_reference, g.bs_reference);
  const SphericalDirection ris_from_bs =
      cartesian_to_spherical(g.bs_reference, g.ris_reference);

  complex<double> acc{0.0, 0.0};
  for (int r = 0; r < g.n_ris(); ++r) {
    double d_br;
    if (flags.bs_ris == Wavefront::Near) {
      d_br = (g.bs_element(b) - g.ris_element(r)).norm();
    } else {
      d_br = bs_from_ris.distance +
             gamma_ru(g.bs_offsets[static_cast<size_t>(b)], ris_from_bs) +
             gamma_ru(g.ris_offsets[static_cast<size_t>(r)], bs_from_ris);
    }
    double d_ru;
    if (flags.ris_ue == Wavefront::Near) {
      d_ru = (g.ue_position - g.ris_element(r)).norm();
    } else {
      d_ru = ue.distance + gamma_ru(g.ris_offsets[static_cast<size_t>(r)], ue);
    }
    acc += profile.at(t, r) *
           std::polar(1.0, -kTwoPi * fn * (d_br + d_ru) / kSpeedOfLight);
  }
  return cfg.alpha * cfg.pilot(n, t) *
         std::polar(1.0, -kTwoPi * fn * cfg.xi_seconds) * acc;
}

}  // namespace

TEST_CASE("subcarrier grid is centred on the carrier") {
  SignalConfig cfg = risloc_test::oracle_signal();
  CHECK(subcarrier_freq(0, cfg) == doctest::Approx(27.85e9).epsilon(1e-15));
  CHECK(subcarrier_freq(1, cfg) == doctest::Approx(27.95e9).epsilon(1e-15));
  CHECK(subcarrier_freq(2, cfg) == doctest::Approx(28.05e9).epsilon(1e-15));
  CHECK(subcarrier_freq(3, cfg) == doctest::Approx(28.15e9).epsilon(1e-15));

  double mean = 0.0;
  for (int n = 0; n < cfg.n_subcarriers; ++n) mean += subcarrier_freq(n, cfg);
  CHECK(mean / cfg.n_subcarriers == doctest::Approx(28e9).epsilon(1e-15));

  SignalConfig single;
  single.carrier_hz = 28e9;
  CHECK(subcarrier_freq(0, single) == 28e9);
}

TEST_CASE("steering blocks are unit modulus with the documented phases") {
  const ScenarioGeometry g = risloc_test::oracle_geometry();
  const SignalConfig cfg = risloc_test::oracle_signal();
  const SphericalDirection ue = g.ue_direction();

  const auto hr = h_ru(1, g, ue, Wavefront::Near, cfg);
  REQUIRE(hr.size() == static_cast<size_t>(g.n_ris()));
  const double f1 = subcarrier_freq(1, cfg);
  for (int r = 0; r < g.n_ris(); ++r) {
    CHECK(std::abs(hr[static_cast<size_t>(r)]) ==
          doctest::Approx(1.0).epsilon(1e-14));
    const double d = (g.ue_position - g.ris_element(r)).norm();
    const complex<double> expected =
        std::polar(1.0, -kTwoPi * f1 * d / kSpeedOfLight);
    CHECK(std::abs(hr[static_cast<size_t>(r)] - expected) < 1e-9);
  }

  const MatrixC hbn = h_br_near(2, g, cfg);
  REQUIRE(hbn.rows() == g.n_bs());
  REQUIRE(hbn.cols() == g.n_ris());
  const double f2 = subcarrier_freq(2, cfg);
  const double d01 = (g.bs_element(0) - g.ris_element(1)).norm();
  CHECK(std::abs(hbn(0, 1) - std::polar(1.0, -kTwoPi * f2 * d01 /
                                                 kSpeedOfLight)) < 1e-9);

  // The planar block factors into steering vectors, so every 2x2 minor
  // vanishes.
  const MatrixC hbf = h_br_far(2, g, cfg);
  const complex<double> minor =
      hbf(0, 0) * hbf(1, 1) - hbf(0, 1) * hbf(1, 0);
  CHECK(std::abs(minor) < 1e-12);

  for (int b = 0; b < g.n_bs(); ++b) {
    const auto row = h_br_row(b, 2, g, Wavefront::Near, cfg);
    for (int r = 0; r < g.n_ris(); ++r)
      CHECK(std::abs(row[static_cast<size_t>(r)] - hbn(b, r)) < 1e-14);
  }
}

TEST_CASE("mu matches an independent transcription of the sample model") {
  ScenarioGeometry g;
  g.bs_reference = {5.0, -7.0, 1.5};
  g.ris_reference = {0.0, 0.0, 0.0};
  g.ue_position = {2.0, 1.1, -0.8};
  g.bs_offsets = build_ura(2, 2, 0.011, Plane::XZ);
  g.ris_offsets = build_ura(3, 2, 0.006, Plane::YZ);

  SignalConfig cfg;
  cfg.carrier_hz = 28e9;
  cfg.n_subcarriers = 3;
  cfg.bandwidth_hz = 250e6;
  cfg.n_slots = 2;
  cfg.alpha = 1.37;
  cfg.xi_seconds = 2.4e-9;
  cfg.pilots = MatrixC(3, 2);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(-std::numbers::pi,
                                             std::numbers::pi);
  for (int n = 0; n < 3; ++n)
    for (int t = 0; t < 2; ++t)
      cfg.pilots(n, t) = std::polar(1.0, uni(rng));
  cfg.validate();

  const RisProfile profile = random_profile(g.n_ris(), cfg.n_slots, 5);

  for (Wavefront ru : {Wavefront::Near, Wavefront::Far})
    for (Wavefront br : {Wavefront::Near, Wavefront::Far}) {
      const ChannelModelFlags flags{ru, br};
      for (int b = 0; b < g.n_bs(); ++b)
        for (int n = 0; n < cfg.n_subcarriers; ++n)
          for (int t = 0; t < cfg.n_slots; ++t) {
            const complex<double> got = mu(b, n, t, g, cfg, flags, profile);
            const complex<double> want =
                naive_mu(b, n, t, g, cfg, flags, profile);
            CHECK(std::abs(got - want) < 1e-9 * std::max(1.0, std::abs(want)));
          }
    }
}

TEST_CASE("mu with an explicit slot span matches the profile overload") {
  const ScenarioGeometry g = risloc_test::oracle_geometry();
  const SignalConfig cfg = risloc_test::oracle_signal();
  const RisProfile profile = risloc_test::oracle_profile();
  const ChannelModelFlags flags;

  for (int b = 0; b < g.n_bs(); ++b)
    for (int n = 0; n < cfg.n_subcarriers; ++n) {
      const complex<double> a = mu(b, n, 0, g, cfg, flags, profile);
      const complex<double> b_val = mu(b, n, 0, g, cfg, flags, profile.slot(0));
      CHECK(a == b_val);
    }
}

// Frozen outputs of the independent python oracle on the pinned scenario,
// all four wavefront combinations. Any sign flip, index swap or grid error
// moves these by orders of magnitude more than the tolerance.
TEST_CASE("mu reproduces the frozen cross-implementation values") {
  const ScenarioGeometry g = risloc_test::oracle_geometry();
  const SignalConfig cfg = risloc_test::oracle_signal();
  const RisProfile profile = risloc_test::oracle_profile();

  struct Expected {
    Wavefront ru, br;
    int b, n;
    double re, im;
  };
  const Expected table[] = {
      {Wavefront::Near, Wavefront::Near, 0, 0, -1.6136828090349522, -1.9847843356355999},
      {Wavefront::Near, Wavefront::Near, 0, 1, -0.33689269784024223, 2.4424144276386412},
      {Wavefront::Near, Wavefront::Near, 0, 2, 1.9393099318856468, -1.3511824447269802},
      {Wavefront::Near, Wavefront::Near, 0, 3, -2.1980370799127043, -0.49885633801569085},
      {Wavefront::Near, Wavefront::Near, 1, 0, -2.4636439081724366, -0.7433526401911681},
      {Wavefront::Near, Wavefront::Near, 1, 1, 1.0543648992105992, 2.2481150464306294},
      {Wavefront::Near, Wavefront::Near, 1, 2, 0.9411598486928563, -2.189355275300385},
      {Wavefront::Near, Wavefront::Near, 1, 3, -2.1637937669639347, 0.702589564093915},
      {Wavefront::Near, Wavefront::Far, 0, 0, -1.5907387650036524, -2.037766482333383},
      {Wavefront::Near, Wavefront::Far, 0, 1, -0.38381041354565537, 2.4602959394937787},
      {Wavefront::Near, Wavefront::Far, 0, 2, 1.976919145552845, -1.3336195463310558},
      {Wavefront::Near, Wavefront::Far, 0, 3, -2.2081939169606963, -0.5288676701410984},
      {Wavefront::Near, Wavefront::Far, 1, 0, -2.4560783176494083, -0.8066110292942744},
      {Wavefront::Near, Wavefront::Far, 1, 1, 1.0050312591579016, 2.2782183195550214},
      {Wavefront::Near, Wavefront::Far, 1, 2, 0.9887778708904308, -2.170038876257074},
      {Wavefront::Near, Wavefront::Far, 1, 3, -2.173038922718536, 0.6585766680896378},
      {Wavefront::Far, Wavefront::Near, 0, 0, -0.004224024914942948, -0.5143662462681352},
      {Wavefront::Far, Wavefront::Near, 0, 1, -0.3235261013872013, 0.3374114396483305},
      {Wavefront::Far, Wavefront::Near, 0, 2, 0.4216056333188135, -0.028507243128444472},
      {Wavefront::Far, Wavefront::Near, 0, 3, -0.30950400071938583, -0.2247740145383033},
      {Wavefront::Far, Wavefront::Near, 1, 0, -0.29338223678298814, -0.4319372644869796},
      {Wavefront::Far, Wavefront::Near, 1, 1, -0.09543517818801207, 0.46535735903340536},
      {Wavefront::Far, Wavefront::Near, 1, 2, 0.3541619844021948, -0.24314502352963377},
      {Wavefront::Far, Wavefront::Near, 1, 3, -0.3852690742143166, -0.047953826174769454},
      {Wavefront::Far, Wavefront::Far, 0, 0, -0.08997459129316221, -0.41127936385290353},
      {Wavefront::Far, Wavefront::Far, 0, 1, -0.18770519673887728, 0.331008638895331},
      {Wavefront::Far, Wavefront::Far, 0, 2, 0.3247869375391876, -0.1255814705639145},
      {Wavefront::Far, Wavefront::Far, 0, 3, -0.3169319822041719, -0.08742754642134948},
      {Wavefront::Far, Wavefront::Far, 1, 0, -0.3037765354986137, -0.29148920853108706},
      {Wavefront::Far, Wavefront::Far, 1, 1, 0.02067824985351141, 0.37996364284900014},
      {Wavefront::Far, Wavefront::Far, 1, 2, 0.21130916613031453, -0.2767773416572761},
      {Wavefront::Far, Wavefront::Far, 1, 3, -0.3177043571285281, 0.08457776704806028},
  };

  for (const Expected& e : table) {
    const ChannelModelFlags flags{e.ru, e.br};
    const complex<double> got = mu(e.b, e.n, 0, g, cfg, flags, profile);
    CAPTURE(e.b);
    CAPTURE(e.n);
    CHECK(std::abs(got - complex<double>{e.re, e.im}) < 1e-9);
  }
}
