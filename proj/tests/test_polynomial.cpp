#include "doctest.h"

#include "spoint/error.hpp"
#include "spoint/polynomial.hpp"

#include <random>

using namespace spoint;

TEST_SUITE("polynomial") {
  TEST_CASE("multi-index enumeration") {
    for (int k = 0; k <= 5; ++k) CHECK(static_cast<int>(multi_indices(k).size()) == jet_dimension(k));
    const auto m = multi_indices(1);
    CHECK(m[0] == MultiIndex{0, 0, 0});
    CHECK(m[1] == MultiIndex{1, 0, 0});
    CHECK(m[3] == MultiIndex{0, 0, 1});
  }

  TEST_CASE("solid harmonics are harmonic with the right count") {
    for (int L = 0; L <= 6; ++L) {
      const HarmonicBasis b = solid_harmonics(L);
      CHECK(static_cast<int>(b.members.size()) == (L + 1) * (L + 1));
      for (const auto& p : b.members) CHECK(p.laplacian().is_zero());
    }
    CHECK_THROWS_AS(solid_harmonics(7), InputError);
  }

  TEST_CASE("degree-two basis is the classical list") {
    const HarmonicBasis b = solid_harmonics(2);
    const Point y(0.3, -1.1, 0.7);
    const double expect[] = {1.0,
                             y[0],
                             y[1],
                             y[2],
                             y[0] * y[1],
                             y[1] * y[2],
                             y[0] * y[2],
                             y[0] * y[0] - y[1] * y[1],
                             y[0] * y[0] + y[1] * y[1] - 2 * y[2] * y[2]};
    for (int i = 0; i < 9; ++i) CHECK(b.members[i](y) == doctest::Approx(expect[i]));
  }

  TEST_CASE("shift and arithmetic") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const HarmonicBasis b = solid_harmonics(4);
    for (const auto& p : b.members) {
      const Point a(u(rng), u(rng), u(rng)), y(u(rng), u(rng), u(rng));
      CHECK(p.shifted(a)(y) == doctest::Approx(p(y - a)).epsilon(1e-12));
      CHECK((p * p)(y) == doctest::Approx(p(y) * p(y)).epsilon(1e-12));
    }
    const Polynomial x2 = Polynomial::monomial({2, 0, 0});
    CHECK(x2.laplacian()(Point::Zero()) == doctest::Approx(2.0));
    CHECK(x2.derivative(0).coefficient({1, 0, 0}) == 2.0);
  }
}
