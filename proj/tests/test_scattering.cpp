#include "doctest.h"

#include "oracles.hpp"
#include "spoint/error.hpp"
#include "spoint/scattering.hpp"

#include <cmath>
#include <numbers>

using namespace spoint;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_SUITE("scattering") {
  TEST_CASE("spherical Bessel functions match the standard library") {
    for (int l = 0; l <= 8; ++l)
      for (double x : {1e-3, 0.1, 0.9, 3.3, 12.0, 57.5}) {
        const BesselPair b = spherical_bessel(l, x);
        CAPTURE(l);
        CAPTURE(x);
        const double j = std::sph_bessel(l, x), n = std::sph_neumann(l, x);
        CHECK(b.j == doctest::Approx(j).epsilon(1e-10).scale(1e-300));
        CHECK(b.n == doctest::Approx(n).epsilon(1e-10));
      }
    CHECK_THROWS_AS(spherical_bessel(0, 0.0), InputError);
    CHECK_THROWS_AS(spherical_bessel(0, -1.0), InputError);
    CHECK_THROWS_AS(spherical_bessel(9, 1.0), InputError);
  }

  TEST_CASE("free phase shifts vanish") {
    const auto zero = RadialProfile::bump(0.0, 1.0);
    for (int l = 0; l <= 3; ++l)
      for (double k : {0.01, 1.0, 10.0}) CHECK(std::abs(phase_shift(zero, l, k)) < 1e-12);
  }

  TEST_CASE("square well s-wave") {
    const auto well = RadialProfile::step(-4.0, 1.0);
    for (double k : {0.05, 0.5, 1.0, 3.0, 8.0})
      CHECK(phase_shift(well, 0, k) == doctest::Approx(oracle::square_well_delta0(4.0, 1.0, k)).epsilon(1e-6));
  }

  TEST_CASE("high-energy phase shifts approach the Born estimate") {
    const auto q = RadialProfile::gaussian(-8.0, 1.0);
    const auto f = [&](double r) { return q(r); };
    const double R = q.support_radius();
    for (int l : {0, 1}) {
      const double born = oracle::born_tan_delta(f, l, 20.0, R);
      const double exact = std::tan(phase_shift(q, l, 20.0));
      CAPTURE(l);
      CHECK(exact == doctest::Approx(born).epsilon(0.05));
    }
    // farther out the first Born term dominates more strongly
    const double born = oracle::born_tan_delta(f, 0, 200.0, R);
    CHECK(std::tan(phase_shift(q, 0, 200.0)) == doctest::Approx(born).epsilon(5e-3));
  }

  TEST_CASE("phase curves are continuous from threshold") {
    const auto q = RadialProfile::gaussian(-25.0, 1.0);
    const double k_max = default_kmax(q);
    CHECK(k_max >= 40.0 / q.support_radius());
    for (int l = 0; l <= 2; ++l) {
      const PhaseCurve c = phase_curve(q, l, k_max, kMinPhasePoints);
      REQUIRE(c.k.size() == c.delta.size());
      CHECK(c.k.size() >= static_cast<std::size_t>(kMinPhasePoints));
      CHECK(c.k.front() == doctest::Approx(kThresholdFactor / q.support_radius()));
      CHECK(c.k.back() == doctest::Approx(k_max));
      for (std::size_t i = 1; i < c.k.size(); ++i) {
        CHECK(c.k[i] > c.k[i - 1]);
        CHECK(std::abs(c.delta[i] - c.delta[i - 1]) <= kPi / 4);
      }
      CHECK(c.at_kmax() > -kPi / 2);
      CHECK(c.at_kmax() <= kPi / 2);
      CHECK(std::abs(c.at_kmax()) < 0.02);
    }
  }

  TEST_CASE("Levinson's theorem") {
    const LevinsonReport free = levinson_check(RadialProfile::bump(0.0, 1.0), 2);
    CHECK(free.index == 0);
    CHECK(free.phase_index == 0);
    for (const auto& ch : free.channels) CHECK(std::abs(ch.delta_threshold) < 1e-12);

    const LevinsonReport well = levinson_check(RadialProfile::step(-4.0, 1.0), 2);
    CHECK(well.index == 1);
    CHECK(well.phase_index == 1);
    CHECK(well.channels[0].delta_threshold == doctest::Approx(kPi).epsilon(0.01));

    const auto deep = RadialProfile::gaussian(-25.0, 1.0);
    const LevinsonReport r = levinson_check(deep, 3);
    CHECK(r.index == r.phase_index);
    CHECK(r.max_defect < 0.02 * kPi);
    int index = 0;
    for (const auto& ch : r.channels) {
      CHECK(ch.bound_states == count_bound_states(deep, ch.l));
      CHECK(std::abs(ch.delta_kmax) < 0.02);
      index += (2 * ch.l + 1) * ch.bound_states;
    }
    CHECK(r.index == index);
  }
}
