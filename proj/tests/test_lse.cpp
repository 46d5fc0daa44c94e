#include "doctest.h"

#include "oracles.hpp"
#include "spoint/error.hpp"
#include "spoint/lse.hpp"

#include <cmath>
#include <numbers>

using namespace spoint;

namespace {

constexpr double kPi = std::numbers::pi;

KernelPtr kernel(const PotentialField& p, int n) {
  return assemble_kernel(build_grid(support_ball(p), n), p);
}

}  // namespace

TEST_SUITE("lse") {
  TEST_CASE("volume grids") {
    const VolumeGrid g2 = build_grid(Ball{Point::Zero(), 1.0}, 2);
    CHECK(g2.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(g2.nodes[i].cwiseAbs().isApprox(Point::Constant(0.5)));
      CHECK(g2.weights[i] == doctest::Approx(1.0));
    }
    const VolumeGrid g16 = build_grid(Ball{Point::Zero(), 1.0}, 16);
    CHECK(std::abs(static_cast<double>(g16.size()) - kPi / 6 * 4096) < 150);
    const VolumeGrid g32 = build_grid(Ball{Point::Zero(), 1.0}, 32);
    double vol = 0.0;
    for (double w : g32.weights) vol += w;
    CHECK(std::abs(vol - 4 * kPi / 3) < 0.05);
    CHECK_THROWS_AS(build_grid(Ball{Point::Zero(), 1.0}, 1), InputError);
  }

  TEST_CASE("free space") {
    const PotentialField zero = PotentialField::zero();
    const KernelPtr K = kernel(zero, 8);
    CHECK(K->matrix().isZero(0.0));
    const ConventionCheck c = check_convention(*K);
    CHECK(c.sigma_min == doctest::Approx(1.0));
    CHECK(c.ok);

    const FieldSolution phi = solve_field(K, ConstantIncident{1.0});
    CHECK((phi.values.array() == 1.0).all());
    CHECK(eval_field(phi, Point(0.3, 0.1, -2.0)) == 1.0);

    const Polynomial y1y2 = Polynomial::monomial({1, 1, 0});
    const FieldSolution u = solve_field(K, PolynomialIncident{y1y2});
    for (std::size_t i = 0; i < K->size(); ++i) CHECK(u.values[i] == doctest::Approx(y1y2(K->grid().nodes[i])));

    const Point y(0.13, 0.21, -0.17);
    const FieldSolution G = green_function(K, y);
    for (std::size_t i = 0; i < K->size(); ++i)
      CHECK(G.values[i] == doctest::Approx(1.0 / (4 * kPi * (K->grid().nodes[i] - y).norm())).epsilon(1e-14));
  }

  TEST_CASE("distorted plane wave against the radial oracle") {
    const auto q = RadialProfile::gaussian(-8.0, 1.0);
    const KernelPtr K = kernel(PotentialField(q), 16);
    const FieldSolution phi = solve_field(K, ConstantIncident{1.0});
    CHECK(phi.residual < 1e-10);
    const oracle::Radial qf = [&](double r) { return q(r); };
    // away from the zero of Phi near r = 1.4
    for (double r : {2.0, 2.6, 3.5}) {
      const Point x = r * Point(1.0, 0.37, 0.21).normalized();
      CHECK(eval_field(phi, x) == doctest::Approx(oracle::radial_phi(qf, q.support_radius(), r)).epsilon(0.02));
    }
    // far field: Phi -> 1
    const double far = eval_field(phi, Point(0, 0, 200.0));
    CHECK(std::abs(far - 1.0) < 0.01);
  }

  TEST_CASE("near-node evaluation is rejected") {
    const KernelPtr K = kernel(PotentialField(RadialProfile::gaussian(-2.0, 1.0)), 8);
    const FieldSolution phi = solve_field(K, ConstantIncident{1.0});
    const Point node = K->grid().nodes[K->size() / 2];
    CHECK_THROWS_AS(eval_field(phi, node + Point::Constant(0.01 * K->grid().h)), InputError);
  }

  TEST_CASE("Green function reciprocity and far field") {
    const PotentialField p(RadialProfile::gaussian(-8.0, 1.0));
    const KernelPtr K = kernel(p, 16);
    const Point x(0.71, -0.33, 0.52), y(-0.44, 0.9, 0.27);
    const FieldSolution Gy = green_function(K, y), Gx = green_function(K, x);
    CHECK(eval_field(Gy, x) == doctest::Approx(eval_field(Gx, y)).epsilon(5e-3));

  }

  TEST_CASE("Green function far field approaches Phi") {
    // 4 pi |x| G(x, y) -> Phi(y) with an O(1/|x|) correction, removed by
    // extrapolating from |x| and 2|x|. A moderate coupling keeps both sides
    // well inside their discretisation error.
    const PotentialField p(RadialProfile::gaussian(-2.0, 1.0));
    const KernelPtr K = kernel(p, 16);
    const FieldSolution phi = solve_field(K, ConstantIncident{1.0});
    const double R = support_ball(p).radius;
    const Point dir = Point(0.3, 0.5, 0.81).normalized();
    for (const Point& y : {Point(0.11, 0.13, 0.17), Point(-0.44, 0.9, 0.27), Point(1.7, 0.4, -1.1)}) {
      const FieldSolution G = green_function(K, y);
      auto scaled = [&](double t) { return 4 * kPi * t * eval_field(G, t * dir); };
      const double limit = 2 * scaled(20 * R) - scaled(10 * R);
      CHECK(limit == doctest::Approx(eval_field(phi, y)).epsilon(0.01));
    }
  }

  TEST_CASE("convention check tracks the critical coupling") {
    const auto q = RadialProfile::gaussian(-1.0, 1.0);
    const double alpha_c = oracle::critical_coupling(q, 1.0, 4.0);
    auto sigma = [&](double a) {
      return check_convention(*kernel(PotentialField(q.with_coupling(a)), 12)).sigma_min;
    };
    const double half = sigma(0.5 * alpha_c), crit = sigma(alpha_c);
    CHECK(half > 0.3);
    CHECK(crit < 0.1 * half);
    CHECK_THROWS_AS(assemble_kernel(build_grid(Ball{Point::Zero(), 1.0}, 8), PotentialField(q)), InputError);
  }
}
