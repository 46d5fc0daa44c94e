#include "spoint/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spoint::kernels {

namespace {

constexpr double kInvFourPi = 0.25 / std::numbers::pi;

// Gaussian width of the subtraction function in lattice units, and its cutoff.
constexpr double kSigmaCells = 1.5;
constexpr double kCutoffSigmas = 6.0;

constexpr std::array<CellIndex, 6> kFaces{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

CellIndex add(const CellIndex& a, const CellIndex& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

// Local quadratic model of each field around x, blended trilinearly from the
// Taylor expansions at the 8 surrounding nodes.
struct LocalModel {
  std::vector<double> f, g, H;  // F, 3F, 6F
  bool active = false;
};

void local_model(const NodeSet& ns, const Density& rho, const Point& x, LocalModel& m) {
  const int F = rho.fields;
  m.f.assign(F, 0.0);
  m.g.assign(3 * F, 0.0);
  m.H.assign(6 * F, 0.0);
  m.active = false;
  const double h = ns.lattice.h;
  const Point t = (x - ns.lattice.origin) / h - Point::Constant(0.5);
  const CellIndex base{static_cast<int>(std::floor(t.x())), static_cast<int>(std::floor(t.y())),
                       static_cast<int>(std::floor(t.z()))};
  const Point lam = t - Point(base[0], base[1], base[2]);
  for (int c = 0; c < 8; ++c) {
    const CellIndex off{c & 1, (c >> 1) & 1, (c >> 2) & 1};
    const int id = ns.node_at(add(base, off));
    if (id < 0) continue;
    const double w = (off[0] ? lam.x() : 1.0 - lam.x()) * (off[1] ? lam.y() : 1.0 - lam.y()) *
                     (off[2] ? lam.z() : 1.0 - lam.z());
    if (w == 0.0) continue;
    const Point d = x - ns.nodes[id];
    for (int fi = 0; fi < F; ++fi) {
      const double* tay = &rho.taylor[(static_cast<std::size_t>(id) * F + fi) * 9];
      const double fv = rho.f[static_cast<std::size_t>(id) * F + fi];
      const double gx = tay[0], gy = tay[1], gz = tay[2];
      const double hxx = tay[3], hyy = tay[4], hzz = tay[5], hxy = tay[6], hxz = tay[7], hyz = tay[8];
      const double Hd0 = hxx * d.x() + hxy * d.y() + hxz * d.z();
      const double Hd1 = hxy * d.x() + hyy * d.y() + hyz * d.z();
      const double Hd2 = hxz * d.x() + hyz * d.y() + hzz * d.z();
      const double T = fv + gx * d.x() + gy * d.y() + gz * d.z() + 0.5 * (d.x() * Hd0 + d.y() * Hd1 + d.z() * Hd2);
      m.f[fi] += w * T;
      m.g[3 * fi + 0] += w * (gx + Hd0);
      m.g[3 * fi + 1] += w * (gy + Hd1);
      m.g[3 * fi + 2] += w * (gz + Hd2);
      for (int k = 0; k < 6; ++k) m.H[6 * fi + k] += w * tay[3 + k];
    }
  }
  for (double v : m.f) m.active |= (v != 0.0);
  for (double v : m.g) m.active |= (v != 0.0);
  for (double v : m.H) m.active |= (v != 0.0);
}

// Lattice sums of chi/|t|, chi t_a/|t|, chi t_a t_b/|t| (t = s - x, s over the
// infinite lattice, t = 0 omitted), each times h^3.
struct GaussianMoments {
  double a0 = 0.0;
  std::array<double, 3> a1{};
  std::array<double, 6> a2{};  // xx yy zz xy xz yz
};

GaussianMoments gaussian_moments(const Lattice& lat, const Point& x) {
  const double h = lat.h;
  const double sigma = kSigmaCells * h;
  const double cut = kCutoffSigmas * sigma;
  const double inv_s2 = 1.0 / (sigma * sigma);
  const int K = static_cast<int>(std::ceil(cut / h)) + 1;
  const CellIndex c = lat.cell_of(x);
  GaussianMoments m;
  const double w = h * h * h;
  const double tiny = 1e-12 * h;
  for (int i = -K; i <= K; ++i)
    for (int j = -K; j <= K; ++j)
      for (int k = -K; k <= K; ++k) {
        const Point s = lat.centre({c[0] + i, c[1] + j, c[2] + k});
        const double tx = s.x() - x.x(), ty = s.y() - x.y(), tz = s.z() - x.z();
        const double r2 = tx * tx + ty * ty + tz * tz;
        if (r2 > cut * cut) continue;
        const double r = std::sqrt(r2);
        if (r < tiny) continue;
        const double v = w * std::exp(-r2 * inv_s2) / r;
        m.a0 += v;
        m.a1[0] += v * tx;
        m.a1[1] += v * ty;
        m.a1[2] += v * tz;
        m.a2[0] += v * tx * tx;
        m.a2[1] += v * ty * ty;
        m.a2[2] += v * tz * tz;
        m.a2[3] += v * tx * ty;
        m.a2[4] += v * tx * tz;
        m.a2[5] += v * ty * tz;
      }
  return m;
}

// Replace the lattice sum of the local model by its exact integral:
// int chi/|t| = 2 pi sigma^2, int chi t_a t_b/|t| = delta_ab (2 pi / 3) sigma^4.
double subtraction_correction(const LocalModel& lm, const GaussianMoments& gm, int fi, double h) {
  const double sigma = kSigmaCells * h;
  const double s2 = sigma * sigma;
  const double* g = &lm.g[3 * fi];
  const double* H = &lm.H[6 * fi];
  const double lattice = lm.f[fi] * gm.a0 + g[0] * gm.a1[0] + g[1] * gm.a1[1] + g[2] * gm.a1[2] +
                         0.5 * (H[0] * gm.a2[0] + H[1] * gm.a2[1] + H[2] * gm.a2[2]) +
                         H[3] * gm.a2[3] + H[4] * gm.a2[4] + H[5] * gm.a2[5];
  const double exact = lm.f[fi] * 2.0 * std::numbers::pi * s2 +
                       (std::numbers::pi / 3.0) * s2 * s2 * (H[0] + H[1] + H[2]);
  return exact - lattice;
}

}  // namespace

CellIndex Lattice::cell_of(const Point& x) const {
  const Point t = (x - origin) / h;
  return {static_cast<int>(std::floor(t.x())), static_cast<int>(std::floor(t.y())),
          static_cast<int>(std::floor(t.z()))};
}

Point Lattice::centre(const CellIndex& c) const {
  return origin + h * Point(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
}

int NodeSet::node_at(const CellIndex& c) const {
  const int n = lattice.n;
  for (int a = 0; a < 3; ++a)
    if (c[a] < 0 || c[a] >= n) return -1;
  return lookup[(static_cast<std::size_t>(c[0]) * n + c[1]) * n + c[2]];
}

Density Density::build(const NodeSet& ns, int fields, std::span<const double> f) {
  Density d;
  d.fields = fields;
  d.f.assign(f.begin(), f.end());
  d.taylor.assign(d.f.size() * 9, 0.0);
  const double h = ns.lattice.h;
  const double inv2h = 0.5 / h, invh2 = 1.0 / (h * h), inv4h2 = 0.25 / (h * h);
  auto value = [&](const CellIndex& c, int fi) {
    const int id = ns.node_at(c);
    return id < 0 ? 0.0 : d.f[static_cast<std::size_t>(id) * fields + fi];
  };
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const CellIndex c = ns.cells[i];
    for (int fi = 0; fi < fields; ++fi) {
      double* t = &d.taylor[(i * fields + fi) * 9];
      const double f0 = d.f[i * fields + fi];
      for (int a = 0; a < 3; ++a) {
        CellIndex up = c, dn = c;
        up[a] += 1;
        dn[a] -= 1;
        const double fu = value(up, fi), fd = value(dn, fi);
        t[a] = (fu - fd) * inv2h;
        t[3 + a] = (fu - 2.0 * f0 + fd) * invh2;
      }
      constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
      for (int p = 0; p < 3; ++p) {
        const int a = pairs[p][0], b = pairs[p][1];
        auto at = [&](int sa, int sb) {
          CellIndex e = c;
          e[a] += sa;
          e[b] += sb;
          return value(e, fi);
        };
        t[6 + p] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) * inv4h2;
      }
    }
  }
  return d;
}

namespace parallel {

void assemble(const NodeSet& ns, std::span<const double> q, Eigen::MatrixXd& K) {
  const auto n = static_cast<Eigen::Index>(ns.size());
  K.resize(n, n);
  const double h = ns.lattice.h;
  const double w = h * h * h * kInvFourPi;
  const double self = h * h * (kZetaSelf - 6.0 * kZetaLaplacian) * kInvFourPi;
  const double face = h * h * kZetaLaplacian * kInvFourPi;
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) {
    double* col = K.col(j).data();
    const double qj = q[j];
    if (qj == 0.0) {
      std::fill(col, col + n, 0.0);
      continue;
    }
    const Point sj = ns.nodes[j];
    const double scale = w * qj;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dx = ns.nodes[i].x() - sj.x();
      const double dy = ns.nodes[i].y() - sj.y();
      const double dz = ns.nodes[i].z() - sj.z();
      col[i] = scale / std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    col[j] = self * qj;
    for (const auto& off : kFaces) {
      const int k = ns.node_at(add(ns.cells[j], off));
      if (k >= 0) col[k] += face * qj;
    }
  }
}

void evaluate(const NodeSet& ns, const Density& rho, std::span<const Point> points, std::span<double> out) {
  const int F = rho.fields;
  const double h = ns.lattice.h;
  const double w = h * h * h;
  const double tiny = 1e-12 * h;
  // Nodes with any nonzero density, in node order.
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    bool any = false;
    for (int fi = 0; fi < F; ++fi) any |= rho.f[j * F + fi] != 0.0;
    if (any) active.push_back(j);
  }
  const auto np = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel
  {
    std::vector<double> acc(F);
    LocalModel lm;
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t p = 0; p < np; ++p) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const Point x = points[p];
      for (const std::size_t j : active) {
        const Point& s = ns.nodes[j];
        const double dx = x.x() - s.x(), dy = x.y() - s.y(), dz = x.z() - s.z();
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (r < tiny) continue;
        const double k = w / r;
        const double* d = &rho.f[j * F];
        for (int fi = 0; fi < F; ++fi) acc[fi] += k * d[fi];
      }
      local_model(ns, rho, x, lm);
      if (lm.active) {
        const GaussianMoments gm = gaussian_moments(ns.lattice, x);
        for (int fi = 0; fi < F; ++fi) acc[fi] += subtraction_correction(lm, gm, fi, h);
      }
      for (int fi = 0; fi < F; ++fi) out[p * F + fi] = acc[fi] * kInvFourPi;
    }
  }
}

}  // namespace parallel

namespace serial {

// Same per-entry arithmetic as the parallel versions, in plain loops, so the
// two agree bit for bit.

void assemble(const NodeSet& ns, std::span<const double> q, Eigen::MatrixXd& K) {
  const auto n = static_cast<Eigen::Index>(ns.size());
  const double h = ns.lattice.h;
  const double w = h * h * h * kInvFourPi;
  const double self = h * h * (kZetaSelf - 6.0 * kZetaLaplacian) * kInvFourPi;
  const double face = h * h * kZetaLaplacian * kInvFourPi;
  K.setZero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (q[j] == 0.0) continue;
      if (i == j) {
        K(i, j) = self * q[j];
        continue;
      }
      const double dx = ns.nodes[i].x() - ns.nodes[j].x();
      const double dy = ns.nodes[i].y() - ns.nodes[j].y();
      const double dz = ns.nodes[i].z() - ns.nodes[j].z();
      K(i, j) = w * q[j] / std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (q[j] == 0.0) continue;
    for (const auto& off : kFaces) {
      const int k = ns.node_at(add(ns.cells[j], off));
      if (k >= 0) K(k, j) += face * q[j];
    }
  }
}

void evaluate(const NodeSet& ns, const Density& rho, std::span<const Point> points, std::span<double> out) {
  const int F = rho.fields;
  const double h = ns.lattice.h;
  const double w = h * h * h;
  LocalModel lm;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point x = points[p];
    local_model(ns, rho, x, lm);
    GaussianMoments gm;
    if (lm.active) gm = gaussian_moments(ns.lattice, x);
    for (int fi = 0; fi < F; ++fi) {
      double sum = 0.0;
      for (std::size_t j = 0; j < ns.size(); ++j) {
        const double fj = rho.f[j * F + fi];
        if (fj == 0.0) continue;
        const double dx = x.x() - ns.nodes[j].x(), dy = x.y() - ns.nodes[j].y(), dz = x.z() - ns.nodes[j].z();
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (r < 1e-12 * h) continue;
        sum += (w / r) * fj;
      }
      if (lm.active) sum += subtraction_correction(lm, gm, fi, h);
      out[p * F + fi] = sum * kInvFourPi;
    }
  }
}

}  // namespace serial

}  // namespace spoint::kernels
