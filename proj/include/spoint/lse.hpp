#pragma once

// Zero-energy Lippmann-Schwinger equations
//
//     u(x) = p0(x) - int q(s) u(s) / (4 pi |x - s|) ds
//
// discretised by Nystrom quadrature on the cubes of a uniform lattice inside a
// ball. The incident term p0 is a constant (distorted plane wave Phi), a
// harmonic polynomial (q-harmonic polynomials) or a free Green pole (G(., y)).

#include "spoint/kernels.hpp"
#include "spoint/polynomial.hpp"
#include "spoint/potentials.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace spoint {

/// Quadrature nodes of a ball: the lattice cells whose centres lie inside it.
struct VolumeGrid : kernels::NodeSet {
  Ball ball;
  int n = 0;  // cells per axis of the bounding cube
  double h = 0.0;
  std::vector<double> weights;
};

/// Cell centres of an n^3 lattice over the bounding cube of `ball` that lie in
/// the ball; weights h^3 with h = 2R/n. Throws InputError for n < 2.
VolumeGrid build_grid(const Ball& ball, int n);

struct ConstantIncident {
  double value = 1.0;
};
struct PolynomialIncident {
  Polynomial p;
};
/// 1 / (4 pi |x - y|)
struct PoleIncident {
  Point y;
};
using Incident = std::variant<ConstantIncident, PolynomialIncident, PoleIncident>;

double eval_incident(const Incident& inc, const Point& x);

struct ConventionCheck {
  double sigma_min = 0.0;
  double tau = 1e-3;
  bool ok = false;
  /// "svd" (full spectrum) or "inverse-iteration" (LU-based, large systems).
  std::string method;
};

inline constexpr double kDefaultTauConv = 1e-3;
/// Systems up to this size get an exact SVD in check_convention.
inline constexpr std::size_t kSvdLimit = 1200;

class KernelOperator {
 public:
  KernelOperator(std::shared_ptr<const VolumeGrid> grid, PotentialField potential);

  const VolumeGrid& grid() const { return *grid_; }
  const PotentialField& potential() const { return potential_; }
  /// q at each grid node.
  const std::vector<double>& q() const { return q_; }
  const Eigen::MatrixXd& matrix() const { return K_; }
  std::size_t size() const { return q_.size(); }

  /// Smallest singular value of I + K (cached).
  double sigma_min() const;
  const std::string& sigma_method() const;

  /// Solve (I + K) U = B column-wise with one step of iterative refinement.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  const Eigen::PartialPivLU<Eigen::MatrixXd>& lu() const;

  std::shared_ptr<const VolumeGrid> grid_;
  PotentialField potential_;
  std::vector<double> q_;
  Eigen::MatrixXd K_;

  mutable std::once_flag lu_once_, sigma_once_;
  mutable std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  mutable double sigma_min_ = 0.0;
  mutable std::string sigma_method_;
};

using KernelPtr = std::shared_ptr<const KernelOperator>;

/// Throws InputError when the grid ball does not contain support_ball(p).
KernelPtr assemble_kernel(std::shared_ptr<const VolumeGrid> grid, const PotentialField& p);
KernelPtr assemble_kernel(const VolumeGrid& grid, const PotentialField& p);

ConventionCheck check_convention(const KernelOperator& K, double tau = kDefaultTauConv);

/// A pole solution is carried as u = G0(., y) + v. The regular part v solves
/// (I + K) v = -S with S(x) = int q(s) G0(s, y) / (4 pi |x - s|) ds; S is the
/// closed-form potential of a Gaussian-weighted linear model of q around y
/// plus a bounded remainder integrated on the lattice.
struct PoleSource {
  Point y = Point::Zero();
  double q0 = 0.0;
  Point grad = Point::Zero();
  double sigma = 1.0;
  kernels::Density remainder;  // one field

  PoleSource(const KernelOperator& K, const Point& y);
  std::vector<double> evaluate(const KernelOperator& K, std::span<const Point> points, bool serial = false) const;
};

struct FieldSolution {
  KernelPtr op;
  Incident incident;
  Eigen::VectorXd values;  // node values
  double residual = 0.0;   // ||(I+K)u - p0|| / ||p0|| (for poles: of the regular part)
};

/// Throws ConventionViolated when sigma_min(I+K) <= tau, InputError when a pole
/// incident sits within h/10 of a node.
FieldSolution solve_field(const KernelPtr& K, const Incident& incident, double tau = kDefaultTauConv);
std::vector<FieldSolution> solve_fields(const KernelPtr& K, const std::vector<Incident>& incidents,
                                        double tau = kDefaultTauConv);

/// Nystrom interpolant p0(x) - int (q u)(s) / (4 pi |x - s|) ds.
/// Throws InputError within h/10 of a node carrying q != 0 (use the node value).
double eval_field(const FieldSolution& u, const Point& x);

FieldSolution green_function(const KernelPtr& K, const Point& y, double tau = kDefaultTauConv);

/// Several solutions on one operator evaluated together.
class FieldBatch {
 public:
  explicit FieldBatch(std::span<const FieldSolution> fields);

  int fields() const { return static_cast<int>(incidents_.size()); }
  const KernelOperator& op() const { return *op_; }

  /// Row-major P x F values. No near-node check: the interpolant is smooth
  /// through the nodes and reproduces node values there.
  std::vector<double> evaluate(std::span<const Point> points) const;
  /// Same as evaluate() but through the serial reference kernel.
  std::vector<double> evaluate_serial(std::span<const Point> points) const;

  /// Distance from x to the nearest node with q != 0 (infinity if none).
  double distance_to_active_node(const Point& x) const;

 private:
  KernelPtr op_;
  std::vector<Incident> incidents_;
  kernels::Density density_;  // q times the regular part of each field
  std::vector<std::pair<int, PoleSource>> poles_;
};

/// Whitespace-separated "x y z value" with a '#' header line.
void write_field_csv(const FieldSolution& u, const std::filesystem::path& path);

}  // namespace spoint
