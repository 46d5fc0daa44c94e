#include "spoint/polynomial.hpp"

#include "spoint/error.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace spoint {

std::vector<MultiIndex> multi_indices(int k) {
  std::vector<MultiIndex> out;
  for (int deg = 0; deg <= k; ++deg)
    for (int a = deg; a >= 0; --a)
      for (int b = deg - a; b >= 0; --b) out.push_back({a, b, deg - a - b});
  return out;
}

Polynomial Polynomial::constant(double c) { return monomial({0, 0, 0}, c); }

Polynomial Polynomial::monomial(MultiIndex e, double c) {
  Polynomial p;
  p.add_term(e, c);
  return p;
}

void Polynomial::add_term(const MultiIndex& e, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::operator()(const Point& x) const {
  double sum = 0.0;
  for (const auto& [e, c] : terms_)
    sum += c * std::pow(x.x(), e[0]) * std::pow(x.y(), e[1]) * std::pow(x.z(), e[2]);
  return sum;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

double Polynomial::coefficient(const MultiIndex& e) const {
  const auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

Polynomial Polynomial::derivative(int axis) const {
  Polynomial out;
  for (const auto& [e, c] : terms_) {
    if (e[axis] == 0) continue;
    MultiIndex f = e;
    f[axis] -= 1;
    out.add_term(f, c * e[axis]);
  }
  return out;
}

Polynomial Polynomial::laplacian() const {
  Polynomial out;
  for (int axis = 0; axis < 3; ++axis) out += derivative(axis).derivative(axis);
  return out;
}

Polynomial Polynomial::shifted(const Point& a) const {
  // (y - a)^e = prod_i sum_k C(e_i, k) y^k (-a_i)^(e_i - k)
  Polynomial out;
  for (const auto& [e, c] : terms_) {
    std::array<std::vector<double>, 3> factor;
    for (int i = 0; i < 3; ++i) {
      factor[i].assign(e[i] + 1, 0.0);
      double binom = 1.0;
      for (int k = 0; k <= e[i]; ++k) {
        factor[i][k] = binom * std::pow(-a[i], e[i] - k);
        binom = binom * (e[i] - k) / (k + 1);
      }
    }
    for (int i = 0; i <= e[0]; ++i)
      for (int j = 0; j <= e[1]; ++j)
        for (int k = 0; k <= e[2]; ++k)
          out.add_term({i, j, k}, c * factor[0][i] * factor[1][j] * factor[2][k]);
  }
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_)
      out.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
  return out;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    os << (first ? "" : " + ") << c;
    static const char* names[] = {"y1", "y2", "y3"};
    for (int i = 0; i < 3; ++i)
      if (e[i] > 0) os << "*" << names[i] << (e[i] > 1 ? "^" + std::to_string(e[i]) : "");
    first = false;
  }
  return os.str();
}

namespace {

// Exact rational with small integers; adequate for L <= 6.
struct Rational {
  long long num = 0, den = 1;
  void normalize() {
    const long long g = std::gcd(num, den);
    if (g != 0) num /= g, den /= g;
    if (den < 0) num = -num, den = -den;
  }
};

// Re and Im of (x + i y)^m as integer polynomials.
std::pair<Polynomial, Polynomial> planar_harmonics(int m) {
  Polynomial re, im;
  long long binom = 1;
  for (int k = 0; k <= m; ++k) {
    // term C(m,k) x^(m-k) (i y)^k
    const double c = static_cast<double>(binom);
    const MultiIndex e{m - k, k, 0};
    switch (k % 4) {
      case 0: re += Polynomial::monomial(e, c); break;
      case 1: im += Polynomial::monomial(e, c); break;
      case 2: re += Polynomial::monomial(e, -c); break;
      case 3: im += Polynomial::monomial(e, -c); break;
    }
    binom = binom * (m - k) / (k + 1);
  }
  return {re, im};
}

// sum_j a_j z^(n-2j) (x^2+y^2)^j with a_{j+1} = -a_j (n-2j)(n-2j-1) / (4 (j+1)(j+1+m)),
// scaled to coprime integers.
Polynomial zonal_factor(int l, int m) {
  const int n = l - m;
  std::vector<Rational> a{{1, 1}};
  for (int j = 0; 2 * (j + 1) <= n; ++j) {
    Rational next{-a[j].num * (n - 2 * j) * (n - 2 * j - 1), a[j].den * 4 * (j + 1) * (j + 1 + m)};
    next.normalize();
    a.push_back(next);
  }
  long long lcm = 1;
  for (const auto& r : a) lcm = std::lcm(lcm, r.den);
  Polynomial out;
  const Polynomial s = Polynomial::monomial({2, 0, 0}) + Polynomial::monomial({0, 2, 0});
  for (std::size_t j = 0; j < a.size(); ++j) {
    Polynomial term = Polynomial::monomial({0, 0, n - 2 * static_cast<int>(j)},
                                           static_cast<double>(a[j].num * (lcm / a[j].den)));
    for (std::size_t p = 0; p < j; ++p) term = term * s;
    out += term;
  }
  return out;
}

// Divide by the gcd of the coefficients and make the leading coefficient (in
// descending x-power order) positive.
Polynomial canonical(Polynomial p) {
  long long g = 0;
  for (const auto& [e, c] : p.terms()) g = std::gcd(g, static_cast<long long>(std::llround(std::abs(c))));
  const double lead = p.terms().rbegin()->second;
  const double scale = (lead < 0 ? -1.0 : 1.0) / static_cast<double>(g == 0 ? 1 : g);
  return scale * p;
}

}  // namespace

HarmonicBasis solid_harmonics(int L) {
  if (L < 0 || L > 6) throw InputError("solid_harmonics: degree must be in [0, 6]");
  HarmonicBasis basis;
  basis.degree = L;
  for (int l = 0; l <= L; ++l) {
    std::vector<Polynomial> cos_part(l + 1), sin_part(l + 1);
    for (int m = 0; m <= l; ++m) {
      auto [re, im] = planar_harmonics(m);
      const Polynomial zf = zonal_factor(l, m);
      cos_part[m] = canonical(re * zf);
      if (m > 0) sin_part[m] = canonical(im * zf);
    }
    std::vector<Polynomial> level;
    if (l == 1) {
      level = {cos_part[1], sin_part[1], cos_part[0]};
    } else if (l == 2) {
      level = {sin_part[2], sin_part[1], cos_part[1], cos_part[2], cos_part[0]};
    } else {
      level.push_back(cos_part[0]);
      for (int m = 1; m <= l; ++m) {
        level.push_back(cos_part[m]);
        level.push_back(sin_part[m]);
      }
    }
    for (auto& p : level) {
      basis.members.push_back(std::move(p));
      basis.member_degree.push_back(l);
    }
  }
  return basis;
}

}  // namespace spoint
