#include "spoint/jets.hpp"

#include "spoint/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

namespace spoint {

QHarmonicBasis q_harmonic_basis(const KernelPtr& K, int L, double tau) {
  QHarmonicBasis b;
  b.harmonics = solid_harmonics(L);
  std::vector<Incident> incidents;
  for (const auto& p : b.harmonics.members) incidents.push_back(PolynomialIncident{p});
  b.members = solve_fields(K, incidents, tau);
  b.batch = std::make_shared<const FieldBatch>(b.members);
  return b;
}

double JetMatrix::ratio() const {
  if (singular_values.size() == 0 || singular_values(0) == 0.0) return 0.0;
  return singular_values(singular_values.size() - 1) / singular_values(0);
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return {};
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
}

int numerical_rank(const Eigen::VectorXd& sv, double tau_rel) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > tau_rel * sv(0) ? 1 : 0;
  return r;
}

int numerical_rank(const JetMatrix& J, double tau_rel) { return numerical_rank(J.singular_values, tau_rel); }

namespace {

using Offset = std::array<int, 3>;

// Second-order central stencils for d^n/dx^n, offsets in units of the step.
const std::vector<std::pair<int, double>>& stencil_1d(int n) {
  static const std::vector<std::pair<int, double>> s[5] = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
  };
  if (n < 0 || n > 4) throw InputError("jet order above 4 per axis is not supported");
  return s[n];
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

struct Stencil {
  double unit = 0.0;              // offsets are multiples of this length
  std::vector<Offset> offsets;
  // Per multi-index: (offset index, weight) with 1 / (h^|j| j!) folded in.
  std::vector<std::vector<std::pair<int, double>>> weights;
};

Stencil build_stencil(int k, double h, bool richardson) {
  Stencil st;
  st.unit = richardson ? 0.5 * h : h;
  std::map<Offset, int> index;
  auto id = [&](const Offset& o) {
    auto [it, inserted] = index.emplace(o, static_cast<int>(st.offsets.size()));
    if (inserted) st.offsets.push_back(o);
    return it->second;
  };
  for (const auto& j : multi_indices(k)) {
    std::map<int, double> w;
    const double jfact = factorial(j[0]) * factorial(j[1]) * factorial(j[2]);
    const int order = j[0] + j[1] + j[2];
    auto add = [&](int scale, double step, double coef) {
      const double norm = coef / (std::pow(step, order) * jfact);
      for (const auto& [ox, wx] : stencil_1d(j[0]))
        for (const auto& [oy, wy] : stencil_1d(j[1]))
          for (const auto& [oz, wz] : stencil_1d(j[2])) w[id({ox * scale, oy * scale, oz * scale})] += norm * wx * wy * wz;
    };
    if (richardson) {
      add(1, 0.5 * h, 4.0 / 3.0);
      add(2, h, -1.0 / 3.0);
    } else {
      add(1, h, 1.0);
    }
    std::vector<std::pair<int, double>> row;
    for (const auto& [i, c] : w)
      if (c != 0.0) row.emplace_back(i, c);
    st.weights.push_back(std::move(row));
  }
  return st;
}

// Maps raw Taylor rows to the whitened shifted-harmonic frame.
struct Normaliser {
  bool enabled = false;
  std::vector<MultiIndex> monomials;   // up to degree L
  Eigen::MatrixXd coeff_pinv;          // M x F
  Eigen::MatrixXd lower;               // F x F, free jet matrix = lower * Q

  Normaliser(const HarmonicBasis& hb, int k, bool want) {
    const int L = hb.degree;
    const auto F = static_cast<Eigen::Index>(hb.members.size());
    if (!want || k < L) return;
    enabled = true;
    monomials = multi_indices(L);
    Eigen::MatrixXd C(F, static_cast<Eigen::Index>(monomials.size()));
    for (Eigen::Index i = 0; i < F; ++i)
      for (std::size_t c = 0; c < monomials.size(); ++c)
        C(i, static_cast<Eigen::Index>(c)) = hb.members[i].coefficient(monomials[c]);
    coeff_pinv = C.completeOrthogonalDecomposition().pseudoInverse();
    // Free Taylor rows at 0 up to order k: coefficients of the harmonics.
    const auto cols = multi_indices(k);
    Eigen::MatrixXd Ck(F, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index i = 0; i < F; ++i)
      for (std::size_t c = 0; c < cols.size(); ++c) Ck(i, static_cast<Eigen::Index>(c)) = hb.members[i].coefficient(cols[c]);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Ck.transpose());
    lower = qr.matrixQR().topRows(F).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
  }

  Eigen::MatrixXd apply(const HarmonicBasis& hb, const Point& a, const Eigen::MatrixXd& taylor) const {
    if (!enabled) return taylor;
    const auto F = static_cast<Eigen::Index>(hb.members.size());
    Eigen::MatrixXd S(F, static_cast<Eigen::Index>(monomials.size()));
    for (Eigen::Index i = 0; i < F; ++i) {
      const Polynomial s = hb.members[i].shifted(a);
      for (std::size_t c = 0; c < monomials.size(); ++c) S(i, static_cast<Eigen::Index>(c)) = s.coefficient(monomials[c]);
    }
    const Eigen::MatrixXd T = S * coeff_pinv;  // p_i(y - a) = sum_j T_ij p_j(y)
    return lower.triangularView<Eigen::Lower>().solve(T * taylor);
  }
};

void check_domain(const KernelOperator& op, const Point& x) {
  const auto& g = op.grid();
  const double half = 2.0 * g.ball.radius;
  if (((x - g.ball.center).array().abs() > half).any())
    throw InputError("jet stencil leaves the computational domain (cube of half-width 2R around the grid ball)");
}

}  // namespace

std::vector<JetMatrix> jet_matrices(const QHarmonicBasis& basis, std::span<const Point> points, int k,
                                    const JetOptions& opt) {
  if (k < 0) throw InputError("jet order must be nonnegative");
  const KernelOperator& op = basis.op();
  const double h = opt.h_fd > 0.0 ? opt.h_fd : 0.5 * op.grid().h;
  const Stencil st = build_stencil(k, h, opt.richardson);
  const auto S = st.offsets.size();
  std::vector<Point> eval;
  eval.reserve(points.size() * S);
  for (const auto& a : points)
    for (const auto& o : st.offsets) {
      const Point x = a + st.unit * Point(o[0], o[1], o[2]);
      check_domain(op, x);
      eval.push_back(x);
    }
  const std::vector<double> v = basis.batch->evaluate(eval);
  const int F = basis.batch->fields();
  const Normaliser norm(basis.harmonics, k, opt.normalise);
  const auto J = static_cast<Eigen::Index>(st.weights.size());
  std::vector<JetMatrix> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    JetMatrix& m = out[p];
    m.a = points[p];
    m.order = k;
    m.taylor.setZero(F, J);
    for (Eigen::Index c = 0; c < J; ++c)
      for (const auto& [s, w] : st.weights[c])
        for (int f = 0; f < F; ++f) m.taylor(f, c) += w * v[(p * S + s) * F + f];
    m.values = norm.apply(basis.harmonics, m.a, m.taylor);
    m.singular_values = singular_values(m.values);
  }
  return out;
}

JetMatrix jet_matrix(const QHarmonicBasis& basis, const Point& a, int k, const JetOptions& opt) {
  const Point pts[1] = {a};
  return std::move(jet_matrices(basis, pts, k, opt).front());
}

std::size_t ScanBox::size() const {
  return static_cast<std::size_t>(resolution[0]) * resolution[1] * resolution[2];
}

Point ScanBox::point(int i, int j, int k) const {
  const int idx[3] = {i, j, k};
  Point x;
  for (int a = 0; a < 3; ++a)
    x[a] = resolution[a] == 1 ? 0.5 * (lo[a] + hi[a]) : lo[a] + (hi[a] - lo[a]) * idx[a] / (resolution[a] - 1);
  return x;
}

Point ScanBox::spacing() const {
  Point s;
  for (int a = 0; a < 3; ++a) s[a] = resolution[a] == 1 ? 0.0 : (hi[a] - lo[a]) / (resolution[a] - 1);
  return s;
}

ZeroRefinement refine_zero(const std::function<double(const Point&)>& f, const Point& a, const Point& b) {
  double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return {a, 0.0, 0, true};
  if (fb == 0.0) return {b, 0.0, 0, true};
  if ((fa > 0.0) == (fb > 0.0)) throw InputError("refine_zero: endpoint values have the same sign");
  const double target = 1e-6 * std::max(std::abs(fa), std::abs(fb));
  Point lo = a, hi = b;
  ZeroRefinement r;
  for (r.iterations = 1; r.iterations <= 40; ++r.iterations) {
    r.x = 0.5 * (lo + hi);
    r.value = f(r.x);
    if (std::abs(r.value) <= target) {
      r.converged = true;
      return r;
    }
    if ((r.value > 0.0) == (fa > 0.0)) {
      lo = r.x;
      fa = r.value;
    } else {
      hi = r.x;
    }
  }
  r.iterations = 40;
  return r;
}

ZeroRefinement refine_phi_zero(const FieldBatch& phi, const Point& a, const Point& b) {
  return refine_zero(
      [&](const Point& x) {
        const Point p[1] = {x};
        return phi.evaluate(p).front();
      },
      a, b);
}

namespace {

std::size_t flat(const ScanBox& b, int i, int j, int k) {
  return (static_cast<std::size_t>(i) * b.resolution[1] + j) * b.resolution[2] + k;
}

void scan_phi(const KernelPtr& K, ScanReport& rep, const ScanOptions& opt) {
  const FieldSolution phi = solve_field(K, ConstantIncident{}, opt.tau_conv);
  const FieldBatch batch(std::span<const FieldSolution>(&phi, 1));
  rep.diagnostic = batch.evaluate(rep.points);
  const auto& b = rep.box;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (int i = 0; i < b.resolution[0]; ++i)
    for (int j = 0; j < b.resolution[1]; ++j)
      for (int k = 0; k < b.resolution[2]; ++k) {
        const std::size_t p = flat(b, i, j, k);
        const int nb[3][3] = {{i + 1, j, k}, {i, j + 1, k}, {i, j, k + 1}};
        for (int a = 0; a < 3; ++a) {
          if (nb[a][a] >= b.resolution[a]) continue;
          const std::size_t q = flat(b, nb[a][0], nb[a][1], nb[a][2]);
          if ((rep.diagnostic[p] > 0.0) != (rep.diagnostic[q] > 0.0)) edges.emplace_back(p, q);
        }
      }
  rep.candidates.resize(edges.size());
  const auto ne = static_cast<long>(edges.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long e = 0; e < ne; ++e) {
    const auto [p, q] = edges[e];
    Candidate& c = rep.candidates[e];
    if (!opt.refine) {
      c.x = 0.5 * (rep.points[p] + rep.points[q]);
      c.diagnostic = 0.5 * (rep.diagnostic[p] + rep.diagnostic[q]);
      c.status = "edge-midpoint";
      continue;
    }
    const ZeroRefinement z = refine_phi_zero(batch, rep.points[p], rep.points[q]);
    c.x = z.x;
    c.diagnostic = z.value;
    c.status = z.converged ? "bisection" : "bisection-max-iterations";
  }
}

void scan_jets(const KernelPtr& K, int m, ScanReport& rep, const ScanOptions& opt) {
  const int k = 2 * m - 2;
  const QHarmonicBasis basis = q_harmonic_basis(K, k, opt.tau_conv);
  const auto jets = jet_matrices(basis, rep.points, k, opt.jet);
  rep.diagnostic.resize(jets.size());
  for (std::size_t i = 0; i < jets.size(); ++i) rep.diagnostic[i] = jets[i].ratio();
  const auto& b = rep.box;
  const Point spacing = b.spacing();
  const auto ratio_at = [&](const Point& x) { return jet_matrix(basis, x, k, opt.jet).ratio(); };
  std::vector<std::size_t> minima;
  for (int i = 0; i < b.resolution[0]; ++i)
    for (int j = 0; j < b.resolution[1]; ++j)
      for (int kk = 0; kk < b.resolution[2]; ++kk) {
        const std::size_t p = flat(b, i, j, kk);
        const double v = rep.diagnostic[p];
        bool is_min = false, has_neighbour = false;
        bool lower_neighbour = false;
        const int nb[6][3] = {{i - 1, j, kk}, {i + 1, j, kk}, {i, j - 1, kk}, {i, j + 1, kk}, {i, j, kk - 1}, {i, j, kk + 1}};
        for (const auto& n : nb) {
          if (n[0] < 0 || n[1] < 0 || n[2] < 0 || n[0] >= b.resolution[0] || n[1] >= b.resolution[1] ||
              n[2] >= b.resolution[2])
            continue;
          has_neighbour = true;
          if (rep.diagnostic[flat(b, n[0], n[1], n[2])] < v) lower_neighbour = true;
        }
        is_min = has_neighbour && !lower_neighbour;
        if (is_min && opt.refine) {
          minima.push_back(p);
        } else if (v < rep.tau_rel) {
          rep.candidates.push_back({rep.points[p], v, "threshold"});
        }
      }
  // Compass search around each grid minimum, confined to the box.
  for (std::size_t p : minima) {
    Point x = rep.points[p];
    double best = rep.diagnostic[p];
    Point step = 0.5 * spacing;
    int evals = 0;
    while (step.maxCoeff() > 1e-3 * spacing.maxCoeff() && evals < 200) {
      bool moved = false;
      for (int a = 0; a < 3 && !moved; ++a) {
        if (step[a] == 0.0) continue;
        for (int s : {-1, 1}) {
          Point y = x;
          y[a] = std::clamp(y[a] + s * step[a], b.lo[a], b.hi[a]);
          if (y == x) continue;
          const double r = ratio_at(y);
          ++evals;
          if (r < best) {
            best = r;
            x = y;
            moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    if (best < rep.tau_rel) rep.candidates.push_back({x, best, "local-min"});
  }
}

}  // namespace

ScanReport scan_spoints(const KernelPtr& K, int m, const ScanBox& box, const ScanOptions& opt) {
  if (m < 1 || m > 3) throw InputError("scan order m must be 1, 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (box.resolution[a] < 1) throw InputError("scan resolution must be positive");
    if (box.hi[a] < box.lo[a]) throw InputError("scan box has hi < lo");
  }
  ScanReport rep;
  rep.m = m;
  rep.box = box;
  rep.grid_n = K->grid().n;
  rep.tau_rel = opt.tau_rel;
  rep.conditional = m >= 3;
  rep.diagnostic_name = m == 1 ? "phi" : "sigma_ratio";
  rep.points.reserve(box.size());
  for (int i = 0; i < box.resolution[0]; ++i)
    for (int j = 0; j < box.resolution[1]; ++j)
      for (int k = 0; k < box.resolution[2]; ++k) rep.points.push_back(box.point(i, j, k));
  if (m == 1)
    scan_phi(K, rep, opt);
  else
    scan_jets(K, m, rep, opt);
  return rep;
}

void write_scan_csv(const ScanReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "# x y z " << r.diagnostic_name << "\n" << std::setprecision(12);
  for (std::size_t i = 0; i < r.points.size(); ++i)
    out << r.points[i].x() << ' ' << r.points[i].y() << ' ' << r.points[i].z() << ' ' << r.diagnostic[i] << '\n';
}

}  // namespace spoint
