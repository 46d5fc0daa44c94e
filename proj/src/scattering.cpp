#include "spoint/scattering.hpp"

#include "spoint/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spoint {

namespace {

constexpr double kPi = std::numbers::pi;

// Power series of j_l, accurate for x <= 1.
double bessel_j_series(int l, double x) {
  double lead = 1.0;
  for (int k = 1; k <= l; ++k) lead *= x / (2.0 * k + 1.0);
  const double t = -0.5 * x * x;
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 30; ++n) {
    term *= t / (n * (2.0 * l + 2.0 * n + 1.0));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return lead * sum;
}

double bessel_j(int l, double x) {
  if (x <= 1.0) return bessel_j_series(l, x);
  const double j0 = std::sin(x) / x;
  if (l == 0) return j0;
  if (x >= l) {
    double a = j0, b = std::sin(x) / (x * x) - std::cos(x) / x;
    for (int k = 1; k < l; ++k) {
      const double c = (2.0 * k + 1.0) / x * b - a;
      a = b;
      b = c;
    }
    return b;
  }
  // Miller's downward recurrence, normalised by j_0.
  const int start = l + 20 + static_cast<int>(x);
  double jp = 0.0, jc = 1e-30, out = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm = (2.0 * k + 1.0) / x * jc - jp;
    jp = jc;
    jc = jm;
    if (k - 1 == l) out = jc;
    if (std::abs(jc) > 1e250) {
      jp *= 1e-250;
      jc *= 1e-250;
      out *= 1e-250;
    }
  }
  return out * j0 / jc;
}

double bessel_n(int l, double x) {
  double a = -std::cos(x) / x;
  if (l == 0) return a;
  double b = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int k = 1; k < l; ++k) {
    const double c = (2.0 * k + 1.0) / x * b - a;
    a = b;
    b = c;
  }
  return b;
}

double fold(double d) {
  while (d > 0.5 * kPi) d -= kPi;
  while (d <= -0.5 * kPi) d += kPi;
  return d;
}

}  // namespace

BesselPair spherical_bessel(int l, double x) {
  if (!(x > 0.0)) throw InputError("spherical_bessel: x must be positive");
  if (l < 0 || l > 8) throw InputError("spherical_bessel: l must be in [0, 8]");
  return {bessel_j(l, x), bessel_n(l, x)};
}

double phase_shift(const RadialProfile& q, int l, double k, double step) {
  if (!(k > 0.0)) throw InputError("phase_shift: k must be positive");
  if (l < 0 || l > 8) throw InputError("phase_shift: l must be in [0, 8]");
  if (q.identically_zero()) return 0.0;
  const double R = q.support_radius();
  const RadialSolution s(q, l, k * k, std::min(step, 0.02 / k));
  const auto [phi, dphi] = s.state(R);
  // Riccati functions x j_l(x), x n_l(x) and their derivatives at kR.
  const double x = k * R;
  const BesselPair b = spherical_bessel(l, x);
  double dj, dn;
  if (l == 0) {
    const BesselPair b1 = spherical_bessel(1, x);
    dj = -b1.j;
    dn = -b1.n;
  } else {
    const BesselPair bm = spherical_bessel(l - 1, x);
    dj = bm.j - (l + 1.0) / x * b.j;
    dn = bm.n - (l + 1.0) / x * b.n;
  }
  const double rj = x * b.j, rn = x * b.n;
  const double drj = b.j + x * dj, drn = b.n + x * dn;
  // phi ~ rj cos(delta) - rn sin(delta); no division, so nodes of phi at R are harmless.
  const double num = dphi * rj - k * phi * drj;
  const double den = dphi * rn - k * phi * drn;
  return fold(std::atan2(num, den));
}

double default_kmax(const RadialProfile& q) {
  const double R = q.support_radius();
  if (q.identically_zero() || R == 0.0) return 40.0;  // unit length scale, as in phase_curve
  constexpr int kQuad = 2000;
  double integral = 0.0;
  for (int i = 0; i < kQuad; ++i) integral += std::abs(q((i + 0.5) * R / kQuad));
  integral *= R / kQuad;
  return std::max(40.0 / R, integral / 0.02);
}

PhaseCurve phase_curve(const RadialProfile& q, int l, double k_max, int n_k, double step) {
  if (n_k < kMinPhasePoints) throw InputError("phase_curve: need at least 64 k points");
  const double R = q.identically_zero() ? 1.0 : q.support_radius();
  const double k_min = kThresholdFactor / R;
  if (!(k_max > k_min)) throw InputError("phase_curve: k_max must exceed k_min");
  PhaseCurve c;
  c.l = l;
  c.k.resize(n_k);
  for (int i = 0; i < n_k; ++i) c.k[i] = k_min * std::pow(k_max / k_min, static_cast<double>(i) / (n_k - 1));
  std::vector<double> raw(n_k);
  const auto eval_all = [&](const std::vector<double>& ks, std::vector<double>& out) {
    out.resize(ks.size());
    const auto n = static_cast<long>(ks.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) out[i] = phase_shift(q, l, ks[i], step);
  };
  eval_all(c.k, raw);
  constexpr double kJump = 0.25 * kPi;
  const auto unwrap = [](const std::vector<double>& r) {
    std::vector<double> d(r.size());
    d.back() = r.back();
    for (std::size_t i = r.size() - 1; i-- > 0;) d[i] = r[i] + kPi * std::round((d[i + 1] - r[i]) / kPi);
    return d;
  };
  for (int round = 0;; ++round) {
    c.delta = unwrap(raw);
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i + 1 < c.k.size(); ++i)
      if (std::abs(c.delta[i + 1] - c.delta[i]) > kJump) bad.push_back(i);
    if (bad.empty()) break;
    if (round == 3) throw NumericalFailure("phase_curve: phase jump persists after 3 refinements (l = " +
                                           std::to_string(l) + ", sharp resonance?)");
    std::vector<double> extra;
    for (std::size_t i : bad)
      for (int s = 1; s < 8; ++s) extra.push_back(c.k[i] * std::pow(c.k[i + 1] / c.k[i], s / 8.0));
    std::vector<double> extra_raw;
    eval_all(extra, extra_raw);
    std::vector<std::pair<double, double>> merged;
    for (std::size_t i = 0; i < c.k.size(); ++i) merged.emplace_back(c.k[i], raw[i]);
    for (std::size_t i = 0; i < extra.size(); ++i) merged.emplace_back(extra[i], extra_raw[i]);
    std::sort(merged.begin(), merged.end());
    c.k.clear();
    raw.clear();
    for (const auto& [k, d] : merged) {
      c.k.push_back(k);
      raw.push_back(d);
    }
    c.refinements = round + 1;
  }
  return c;
}

LevinsonReport levinson_check(const RadialProfile& q, int L_max, double k_max, int n_k, double step) {
  if (L_max < 0) throw InputError("levinson_check: L_max must be nonnegative");
  LevinsonReport rep;
  rep.k_max = k_max > 0.0 ? k_max : default_kmax(q);
  rep.n_k = n_k;
  rep.k_min = kThresholdFactor / (q.identically_zero() ? 1.0 : q.support_radius());
  for (int l = 0; l <= L_max; ++l) {
    LevinsonChannel ch;
    ch.l = l;
    ch.bound_states = count_bound_states(q, l, step);
    const PhaseCurve c = phase_curve(q, l, rep.k_max, n_k, step);
    ch.delta_threshold = c.at_threshold();
    ch.delta_kmax = c.at_kmax();
    ch.defect = std::abs(ch.delta_threshold - kPi * ch.bound_states);
    rep.index += (2 * l + 1) * ch.bound_states;
    rep.phase_index += (2 * l + 1) * static_cast<int>(std::lround(ch.delta_threshold / kPi));
    rep.max_defect = std::max(rep.max_defect, ch.defect);
    rep.channels.push_back(ch);
    rep.curves.push_back(c);
  }
  return rep;
}

LevinsonReport levinson_check(const PotentialField& p, int L_max, double k_max, int n_k, double step) {
  return levinson_check(p.radial_profile(), L_max, k_max, n_k, step);
}

}  // namespace spoint
