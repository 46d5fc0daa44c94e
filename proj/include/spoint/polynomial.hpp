#pragma once

#include "spoint/potentials.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace spoint {

using MultiIndex = std::array<int, 3>;

/// All multi-indices with |j| <= k, graded by |j| then lexicographically
/// descending (x-power first). Size is (k+1)(k+2)(k+3)/6.
std::vector<MultiIndex> multi_indices(int k);

/// Number of partial derivatives of order <= k in three variables.
constexpr int jet_dimension(int k) { return (k + 1) * (k + 2) * (k + 3) / 6; }

/// Real polynomial in three variables stored as monomial coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  static Polynomial constant(double c);
  static Polynomial monomial(MultiIndex e, double c = 1.0);

  double operator()(const Point& x) const;
  int degree() const;
  bool is_zero() const { return terms_.empty(); }

  Polynomial laplacian() const;
  Polynomial derivative(int axis) const;
  /// p(y - a) expanded in monomials of y.
  Polynomial shifted(const Point& a) const;

  double coefficient(const MultiIndex& e) const;
  const std::map<MultiIndex, double>& terms() const { return terms_; }

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  std::string to_string() const;

 private:
  void add_term(const MultiIndex& e, double c);
  std::map<MultiIndex, double> terms_;
};

/// Degree-graded basis of (L+1)^2 harmonic polynomials with integer
/// coefficients. For L <= 2 the members are, in order,
/// 1; y1, y2, y3; y1 y2, y2 y3, y1 y3, y1^2 - y2^2, y1^2 + y2^2 - 2 y3^2.
struct HarmonicBasis {
  int degree = 0;
  std::vector<Polynomial> members;
  std::vector<int> member_degree;
};

/// Supported for 0 <= L <= 6; throws InputError otherwise.
HarmonicBasis solid_harmonics(int L);

}  // namespace spoint
