#pragma once

// Jets of q-harmonic polynomials and s-point scans.
//
// A q-harmonic basis of degree L is the set of solutions with the (L+1)^2
// solid harmonics as incident terms. Its jet matrix at a point a holds the
// Taylor coefficients D^j u(a) / j!, |j| <= k, computed by central finite
// differences of the Nystrom interpolant. Rank deficiency of the degree
// 2m-2 jet matrix marks an s-point of order m; for m = 1 the criterion is
// a zero of Phi.

#include "spoint/lse.hpp"
#include "spoint/polynomial.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace spoint {

struct QHarmonicBasis {
  HarmonicBasis harmonics;
  std::vector<FieldSolution> members;
  std::shared_ptr<const FieldBatch> batch;

  int degree() const { return harmonics.degree; }
  const KernelOperator& op() const { return batch->op(); }
};

QHarmonicBasis q_harmonic_basis(const KernelPtr& K, int L, double tau = kDefaultTauConv);

struct JetOptions {
  /// Finite-difference step; 0 selects h/2 of the volume grid.
  double h_fd = 0.0;
  bool richardson = false;
  /// Rotate rows to the shifted-harmonic basis and whiten them so the free
  /// jet matrix has orthonormal rows. Rank is unchanged.
  bool normalise = true;
};

struct JetMatrix {
  Point a = Point::Zero();
  int order = 0;
  /// Rows: basis members; columns: D^j u(a) / j! for multi_indices(order).
  Eigen::MatrixXd taylor;
  /// Normalised matrix used for the rank decision (== taylor if disabled).
  Eigen::MatrixXd values;
  Eigen::VectorXd singular_values;  // of `values`, descending

  /// sigma_min / sigma_1 (0 for a zero matrix).
  double ratio() const;
};

/// Throws InputError when the stencil leaves the computational domain, the
/// cube of half-width 2R around the grid ball.
JetMatrix jet_matrix(const QHarmonicBasis& basis, const Point& a, int k, const JetOptions& opt = {});
std::vector<JetMatrix> jet_matrices(const QHarmonicBasis& basis, std::span<const Point> points, int k,
                                    const JetOptions& opt = {});

/// Number of singular values above tau_rel * sigma_1.
int numerical_rank(const Eigen::VectorXd& singular_values, double tau_rel);
int numerical_rank(const JetMatrix& J, double tau_rel);
/// Singular values of an arbitrary matrix, descending.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& M);

inline constexpr double kDefaultTauRel = 1e-3;

struct ScanBox {
  Point lo = Point::Constant(-1.0);
  Point hi = Point::Constant(1.0);
  /// Points per axis; an axis with 1 point is sampled at its midpoint.
  std::array<int, 3> resolution{16, 16, 16};

  std::size_t size() const;
  Point point(int i, int j, int k) const;
  Point spacing() const;
};

struct Candidate {
  Point x = Point::Zero();
  double diagnostic = 0.0;
  /// "bisection", "bisection-max-iterations", "local-min", "threshold".
  std::string status;
};

struct ScanReport {
  int m = 1;
  ScanBox box;
  int grid_n = 0;
  double tau_rel = kDefaultTauRel;
  /// m >= 3 relies on the rank criterion beyond its proven range.
  bool conditional = false;
  std::string diagnostic_name;  // "phi" or "sigma_ratio"
  std::vector<Point> points;
  std::vector<double> diagnostic;
  std::vector<Candidate> candidates;
};

struct ScanOptions {
  double tau_rel = kDefaultTauRel;
  double tau_conv = kDefaultTauConv;
  JetOptions jet;
  bool refine = true;
};

/// m = 1: sign changes of Phi between 6-neighbours, refined by bisection.
/// m >= 2: points with sigma_ratio < tau_rel plus local minima refined by a
/// compass search and kept if the refined ratio is below tau_rel.
ScanReport scan_spoints(const KernelPtr& K, int m, const ScanBox& box, const ScanOptions& opt = {});

struct ZeroRefinement {
  Point x = Point::Zero();
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Bisection on the segment [a, b] to |f| <= 1e-6 max(|f(a)|, |f(b)|) or 40
/// iterations. Throws InputError if f(a), f(b) have the same sign.
ZeroRefinement refine_zero(const std::function<double(const Point&)>& f, const Point& a, const Point& b);
ZeroRefinement refine_phi_zero(const FieldBatch& phi, const Point& a, const Point& b);

/// Whitespace CSV "x y z diagnostic" with a '#' header.
void write_scan_csv(const ScanReport& r, const std::filesystem::path& path);

}  // namespace spoint
