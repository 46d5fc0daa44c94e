#pragma once

// Dense Laplace-kernel loops of the volume Nystrom discretisation.
//
// Each routine exists twice: `parallel::` distributes independent matrix
// columns / evaluation points over OpenMP threads, `serial::` is a plain
// single-threaded reference kept for testing and benchmarking. Every output
// entry is a fixed-order sum, so parallel results do not depend on the thread
// count.
//
// Quadrature: the punctured trapezoidal rule on a cubic lattice of spacing h
// with the local corrections
//
//     int f(s)/|x_i - s| ds ~ h^3 sum_{j != i} f_j/|x_i - x_j|
//                              + h^2 (Z0 f_i + Z1 h^2 (Lap_h f)_i),
//
// Z0 = -zeta_lattice(1/2), Z1 the next Epstein-zeta coefficient; the error is
// O(h^6) for smooth compactly supported f. Off-lattice targets use Gaussian
// singularity subtraction with a local second-order Taylor model of f.

#include "spoint/potentials.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace spoint::kernels {

using CellIndex = std::array<int, 3>;

/// Lattice-sum constants of the corrected trapezoidal rule for 1/|x|.
inline constexpr double kZetaSelf = 2.8372974794806;
inline constexpr double kZetaLaplacian = 0.0444327;

/// Cube lattice with cell centres origin + h (c + 1/2), c in [0, n)^3.
struct Lattice {
  Point origin = Point::Zero();
  double h = 1.0;
  int n = 0;

  CellIndex cell_of(const Point& x) const;
  Point centre(const CellIndex& c) const;
};

/// Lattice cells that carry quadrature nodes.
struct NodeSet {
  Lattice lattice;
  std::vector<Point> nodes;
  std::vector<CellIndex> cells;
  std::vector<int> lookup;  // n^3 -> node index or -1

  std::size_t size() const { return nodes.size(); }
  int node_at(const CellIndex& c) const;
};

/// Densities f = q u of F fields on a node set, with central-difference
/// gradients and Hessians at every node (entries outside the set are zero).
struct Density {
  int fields = 0;
  std::vector<double> f;       // node-major: [node * F + field]
  std::vector<double> taylor;  // [node * F + field] * 9: g_x g_y g_z H_xx H_yy H_zz H_xy H_xz H_yz

  static Density build(const NodeSet& nodes, int fields, std::span<const double> f);
};

namespace parallel {

/// Corrected-trapezoid matrix K with (I + K) u = p0 the discrete equation:
/// K(i, j) = h^3 q_j / (4 pi |x_i - x_j|) (+ Laplacian correction on face
/// neighbours), K(i, i) = h^2 q_i (Z0 - 6 Z1) / (4 pi).
void assemble(const NodeSet& nodes, std::span<const double> q, Eigen::MatrixXd& K);

/// out[p * F + f] ~ int f(s) / (4 pi |x_p - s|) ds for each field.
void evaluate(const NodeSet& nodes, const Density& rho, std::span<const Point> points, std::span<double> out);

}  // namespace parallel

namespace serial {

void assemble(const NodeSet& nodes, std::span<const double> q, Eigen::MatrixXd& K);
void evaluate(const NodeSet& nodes, const Density& rho, std::span<const Point> points, std::span<double> out);

}  // namespace serial

}  // namespace spoint::kernels
