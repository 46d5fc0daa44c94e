#include "doctest.h"

#include "spoint/error.hpp"
#include "spoint/potentials.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace spoint;

TEST_SUITE("potentials") {
  TEST_CASE("profile values") {
    const PotentialField g(RadialProfile::gaussian(-4.0, 1.0));
    CHECK(g(Point::Zero()) == doctest::Approx(-4.0));
    CHECK(g(Point(0.0, 0.0, 6.0)) == 0.0);

    const PotentialField two({{RadialProfile::gaussian(-2.0, 1.0), Point(1, 0, 0)},
                              {RadialProfile::gaussian(-2.0, 1.0), Point(-1, 0, 0)}});
    CHECK(two(Point::Zero()) == doctest::Approx(-4.0 * std::exp(-1.0)));
    CHECK_FALSE(two.is_radial());
    CHECK(g.is_radial());
  }

  TEST_CASE("support of a truncated gaussian") {
    const auto q = RadialProfile::gaussian(-4.0, 1.0);
    CHECK(q.support_radius() == doctest::Approx(std::sqrt(std::log(4e12))));
    CHECK(q.support_radius() == doctest::Approx(5.39).epsilon(1e-3));
  }

  TEST_CASE("support balls") {
    const Ball b1 = support_ball(PotentialField(RadialProfile::bump(-1.0, 1.0)));
    CHECK(b1.center.norm() == 0.0);
    CHECK(b1.radius == doctest::Approx(1.0));
    const Ball b2 = support_ball(PotentialField({{RadialProfile::bump(-1.0, 1.0), Point(1, 0, 0)},
                                                 {RadialProfile::bump(-1.0, 1.0), Point(-1, 0, 0)}}));
    CHECK(b2.center.norm() == doctest::Approx(0.0));
    CHECK(b2.radius == doctest::Approx(2.0));
  }

  TEST_CASE("coupling") {
    const PotentialField g(RadialProfile::gaussian(-4.0, 1.0));
    CHECK(g.with_coupling(0.0).identically_zero());
    CHECK(g.with_coupling(2.0)(Point::Zero()) == doctest::Approx(-8.0));
    const Point x(0.3, -0.2, 0.9);
    CHECK(g.with_coupling(1.0)(x) == g(x));
    CHECK_THROWS_AS(g.with_coupling(-1.0), InputError);
    CHECK(PotentialField::zero().identically_zero());
  }

  TEST_CASE("analytic derivatives match finite differences") {
    const std::vector<double> r_tab{0.0, 0.5, 1.0, 1.5, 2.0};
    const std::vector<double> v_tab{-3.0, -2.5, -1.2, -0.3, 0.0};
    const RadialProfile profiles[] = {RadialProfile::gaussian(-8.0, 1.3), RadialProfile::bump(-5.0, 2.0),
                                      RadialProfile::table(r_tab, v_tab)};
    for (const auto& q : profiles)
      for (double r : {0.2, 0.7, 1.1, 1.7}) {
        const double h = 1e-4;
        const auto d = q.derivatives(r);
        CHECK(d.d1 == doctest::Approx((q(r + h) - q(r - h)) / (2 * h)).epsilon(1e-5));
        CHECK(d.d2 == doctest::Approx((q(r + h) - 2 * q(r) + q(r - h)) / (h * h)).epsilon(1e-3));
      }
  }

  TEST_CASE("table profiles") {
    CHECK_THROWS_AS(RadialProfile::table({0.0, 1.0}, {-1.0, -0.5}), InputError);  // does not end at 0
    CHECK_THROWS_AS(RadialProfile::table({0.0, 1.0, 0.5}, {-1.0, 0.0, 0.0}), InputError);
    const auto q = RadialProfile::table({0.0, 1.0, 2.0}, {-2.0, -1.0, 0.0});
    CHECK(q(1.0) == doctest::Approx(-1.0));
    CHECK(q.support_radius() == doctest::Approx(2.0));

    const auto dir = std::filesystem::temp_directory_path() / "spoint_table_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream f(dir / "q.csv");
      f << "# r value\nr,value\n0,-2\n1,-1\n2,0\n";
    }
    const auto t = load_table_csv(dir / "q.csv");
    CHECK(t(1.0) == doctest::Approx(-1.0));
    {
      std::ofstream f(dir / "pot.txt");
      f << "shape = table\ntable = q.csv\n";
    }
    const auto p = load_potential(dir / "pot.txt");
    CHECK(p(Point(1, 0, 0)) == doctest::Approx(-1.0));
  }

  TEST_CASE("potential definitions") {
    const auto p = parse_potential("shape = gaussian\ndepth = -2\nwidth = 1\ncenter = 1 0 0\n"
                                   "shape = gaussian\ndepth = -2\nwidth = 1\ncenter = -1 0 0\n");
    CHECK(p.components().size() == 2);
    CHECK(p(Point::Zero()) == doctest::Approx(-4.0 * std::exp(-1.0)));
    const auto c = parse_potential("shape = bump\ndepth = -1\nradius = 2\ncoupling = 3\n");
    CHECK(c(Point::Zero()) == doctest::Approx(-3.0));
    CHECK_THROWS_AS(parse_potential("shape = hexagon\n"), InputError);
    CHECK_THROWS_AS(parse_potential("depth = -1\n"), InputError);
    CHECK_THROWS_AS(parse_potential("shape = gaussian\ndepth = abc\n"), InputError);
  }
}
