#include "doctest.h"

#include "spoint/error.hpp"
#include "spoint/jets.hpp"
#include "spoint/radial.hpp"

#include <cmath>
#include <random>

using namespace spoint;

namespace {

KernelPtr kernel(const PotentialField& p, int n) {
  return assemble_kernel(build_grid(support_ball(p), n), p);
}

}  // namespace

TEST_SUITE("jets") {
  TEST_CASE("free jet matrices have full rank") {
    const KernelPtr K = kernel(PotentialField::zero(), 8);
    const QHarmonicBasis basis = q_harmonic_basis(K, 2);
    REQUIRE(basis.members.size() == 9);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int i = 0; i < 10; ++i) {
      const Point a(u(rng), u(rng), u(rng));
      const JetMatrix J = jet_matrix(basis, a, 2);
      CHECK(J.values.rows() == 9);
      CHECK(J.values.cols() == jet_dimension(2));
      CHECK(numerical_rank(J, kDefaultTauRel) == 9);
      CHECK(J.ratio() > 0.5);
    }
  }

  TEST_CASE("the constant member has Taylor row (1, 0, ..., 0)") {
    const KernelPtr K = kernel(PotentialField::zero(), 8);
    const QHarmonicBasis basis = q_harmonic_basis(K, 2);
    JetOptions opt;
    opt.normalise = false;
    const JetMatrix J = jet_matrix(basis, Point(0.2, -0.1, 0.3), 2, opt);
    CHECK(J.taylor(0, 0) == doctest::Approx(1.0));
    for (Eigen::Index c = 1; c < J.taylor.cols(); ++c) CHECK(std::abs(J.taylor(0, c)) < 1e-12);
    // y1 y2 has a single unit coefficient at (1, 1, 0) about the origin
    const JetMatrix J0 = jet_matrix(basis, Point::Zero(), 2, opt);
    const auto cols = multi_indices(2);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double expect = cols[c] == MultiIndex{1, 1, 0} ? 1.0 : 0.0;
      CHECK(J0.taylor(4, static_cast<Eigen::Index>(c)) == doctest::Approx(expect).epsilon(1e-8));
    }
  }

  TEST_CASE("numerical rank") {
    Eigen::MatrixXd M = Eigen::MatrixXd::Random(9, 10);
    const int r = numerical_rank(singular_values(M), kDefaultTauRel);
    CHECK(r == 9);
    CHECK(numerical_rank(singular_values(1e6 * M), kDefaultTauRel) == r);
    CHECK(numerical_rank(singular_values(1e-6 * M), kDefaultTauRel) == r);
    M.row(3).setZero();
    CHECK(numerical_rank(singular_values(M), kDefaultTauRel) == 8);
    CHECK(numerical_rank(singular_values(Eigen::MatrixXd::Zero(3, 3)), kDefaultTauRel) == 0);
  }

  TEST_CASE("radial potentials preserve parity of the degree-one members") {
    const KernelPtr K = kernel(PotentialField(RadialProfile::gaussian(-3.0, 1.0)), 10);
    const QHarmonicBasis basis = q_harmonic_basis(K, 1);
    const Point x(0.37, -0.52, 0.81);
    const Point pts[2] = {x, Point(-x)};
    const std::vector<double> v = basis.batch->evaluate(pts);
    const int F = basis.batch->fields();
    CHECK(v[0] == doctest::Approx(v[F]).epsilon(1e-8));
    for (int f = 1; f < F; ++f) CHECK(std::abs(v[f] + v[F + f]) < 1e-8 * std::abs(v[f]) + 1e-12);
  }

  TEST_CASE("the degree-zero member is Phi") {
    const KernelPtr K = kernel(PotentialField(RadialProfile::gaussian(-3.0, 1.0)), 10);
    const QHarmonicBasis basis = q_harmonic_basis(K, 1);
    const FieldSolution phi = solve_field(K, ConstantIncident{1.0});
    CHECK((basis.members[0].values - phi.values).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("free space has no s-points") {
    const KernelPtr K = kernel(PotentialField::zero(), 8);
    ScanBox box;
    box.resolution = {8, 8, 8};
    CHECK(scan_spoints(K, 1, box).candidates.empty());
    CHECK(scan_spoints(K, 2, box).candidates.empty());
  }

  TEST_CASE("m = 1 scan finds the radial zero of Phi") {
    const auto q = RadialProfile::gaussian(-8.0, 1.0);
    const KernelPtr K = kernel(PotentialField(q), 12);
    const SSphereReport spheres = find_s_spheres(q, 1);
    REQUIRE(spheres.spheres.size() == 1);
    const double R = spheres.spheres[0].radius;
    ScanBox box;
    box.lo = Point::Constant(-2.0);
    box.hi = Point::Constant(2.0);
    box.resolution = {12, 12, 12};
    const ScanReport rep = scan_spoints(K, 1, box);
    REQUIRE(!rep.candidates.empty());
    const double cell = box.spacing().maxCoeff();
    for (const Candidate& c : rep.candidates) {
      CHECK(std::abs(c.x.norm() - R) < 2 * cell);
      CHECK(c.status == "bisection");
    }
    CHECK_THROWS_AS(scan_spoints(K, 4, box), InputError);
  }

  TEST_CASE("zero refinement") {
    const auto line = [](const Point& x) { return 2.0 * (x.x() - 0.3); };
    const ZeroRefinement z = refine_zero(line, Point(0, 0, 0), Point(1, 0, 0));
    CHECK(z.converged);
    CHECK(std::abs(z.x.x() - 0.3) < 1e-6);
    CHECK(std::abs(z.value) <= 1e-6 * 1.4);
    CHECK_THROWS_AS(refine_zero(line, Point(0.5, 0, 0), Point(1, 0, 0)), InputError);

    const KernelPtr free = kernel(PotentialField::zero(), 6);
    const FieldSolution one = solve_field(free, ConstantIncident{1.0});
    const FieldBatch free_phi(std::span<const FieldSolution>(&one, 1));
    CHECK_THROWS_AS(refine_phi_zero(free_phi, Point(0, 0, 0), Point(1, 0, 0)), InputError);

    const KernelPtr K = kernel(PotentialField(RadialProfile::gaussian(-8.0, 1.0)), 12);
    const FieldSolution phi = solve_field(K, ConstantIncident{1.0});
    const FieldBatch batch(std::span<const FieldSolution>(&phi, 1));
    const ZeroRefinement zp = refine_phi_zero(batch, Point(0.5, 0.1, 0.2), Point(2.5, 0.3, 0.1));
    CHECK(zp.converged);
    CHECK(std::abs(zp.value) < 1e-4);
  }
}
