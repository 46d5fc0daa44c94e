#include "doctest.h"

#include "oracles.hpp"
#include "spoint/kernels.hpp"
#include "spoint/lse.hpp"

#include <omp.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace spoint;

namespace {

struct Fixture {
  VolumeGrid grid;
  std::vector<double> q;

  explicit Fixture(int n) {
    const PotentialField p(RadialProfile::gaussian(-8.0, 1.0));
    grid = build_grid(support_ball(p), n);
    for (const Point& x : grid.nodes) q.push_back(p(x));
  }
};

std::vector<Point> random_points(int count, double radius, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("serial and parallel assembly agree bitwise") {
    const Fixture f(10);
    Eigen::MatrixXd Ks, Kp;
    kernels::serial::assemble(f.grid, f.q, Ks);
    kernels::parallel::assemble(f.grid, f.q, Kp);
    CHECK(Ks.rows() == static_cast<Eigen::Index>(f.grid.size()));
    CHECK((Ks.array() == Kp.array()).all());
  }

  TEST_CASE("evaluation is independent of the thread count") {
    const Fixture f(10);
    const auto rho = kernels::Density::build(f.grid, 1, f.q);
    const auto pts = random_points(200, 4.0, 11);
    std::vector<double> a(pts.size()), b(pts.size()), c(pts.size());
    kernels::serial::evaluate(f.grid, rho, pts, a);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    kernels::parallel::evaluate(f.grid, rho, pts, b);
    omp_set_num_threads(3);
    kernels::parallel::evaluate(f.grid, rho, pts, c);
    Eigen::MatrixXd K1, K3;
    kernels::parallel::assemble(f.grid, f.q, K3);
    omp_set_num_threads(1);
    kernels::parallel::assemble(f.grid, f.q, K1);
    omp_set_num_threads(saved);
    CHECK(a == b);
    CHECK(a == c);
    CHECK((K1.array() == K3.array()).all());
  }

  TEST_CASE("matrix entries") {
    const Fixture f(8);
    Eigen::MatrixXd K;
    const std::vector<double> zero(f.grid.size(), 0.0);
    kernels::parallel::assemble(f.grid, zero, K);
    CHECK(K.isZero(0.0));

    kernels::parallel::assemble(f.grid, f.q, K);
    const double h = f.grid.h;
    // a pair of nodes that are not face neighbours
    const int i = 0;
    int j = -1;
    for (int k = 1; k < static_cast<int>(f.grid.size()); ++k)
      if ((f.grid.nodes[k] - f.grid.nodes[i]).norm() > 1.5 * h) {
        j = k;
        break;
      }
    REQUIRE(j > 0);
    const double r = (f.grid.nodes[i] - f.grid.nodes[j]).norm();
    CHECK(K(i, j) == doctest::Approx(h * h * h * f.q[j] / (4 * std::numbers::pi * r)));
    const double diag = h * h * f.q[i] * (kernels::kZetaSelf - 6 * kernels::kZetaLaplacian) / (4 * std::numbers::pi);
    CHECK(K(i, i) == doctest::Approx(diag));
  }

  TEST_CASE("quadrature of the gaussian Newton potential converges") {
    // f = e^{-r^2} on a lattice; row sums of K with q = f are int f / (4 pi |x - s|).
    auto node_error = [](int n) {
      const VolumeGrid g = build_grid(Ball{Point::Zero(), 5.5}, n);
      std::vector<double> f;
      for (const Point& x : g.nodes) f.push_back(std::exp(-x.squaredNorm()));
      Eigen::MatrixXd K;
      kernels::parallel::assemble(g, f, K);
      const Eigen::VectorXd s = K.rowwise().sum();
      double worst = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (g.nodes[i].norm() < 3.0)
          worst = std::max(worst, std::abs(s[i] - oracle::gaussian_newton_potential(g.nodes[i].norm())));
      return worst;
    };
    const double e18 = node_error(18), e27 = node_error(27);
    CHECK(e18 < 5e-4);
    CHECK(e18 / e27 > 1.5 * 1.5 * 1.5 * 1.5);  // at least fourth order
  }

  TEST_CASE("off-grid evaluation of the gaussian Newton potential") {
    const VolumeGrid g = build_grid(Ball{Point::Zero(), 5.5}, 16);
    std::vector<double> f;
    for (const Point& x : g.nodes) f.push_back(std::exp(-x.squaredNorm()));
    const auto rho = kernels::Density::build(g, 1, f);
    const auto pts = random_points(100, 2.5, 5);
    std::vector<double> out(pts.size());
    kernels::parallel::evaluate(g, rho, pts, out);
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      worst = std::max(worst, std::abs(out[i] - oracle::gaussian_newton_potential(pts[i].norm())));
    CHECK(worst < 5e-3);
    // far away the field is the total mass over 4 pi r
    const std::vector<Point> far{Point(30.0, 0.0, 0.0)};
    std::vector<double> v(1);
    kernels::parallel::evaluate(g, rho, far, v);
    CHECK(v[0] == doctest::Approx(std::pow(std::numbers::pi, 1.5) / (4 * std::numbers::pi * 30.0)).epsilon(1e-3));
  }
}
