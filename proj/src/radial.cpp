#include "spoint/radial.hpp"

#include "spoint/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace spoint {

namespace {

constexpr double kRescaleAt = 1e150;
constexpr int kBisectionSteps = 200;

template <std::size_t N, class F>
std::array<double, N> rk4_step(const F& rhs, double r, const std::array<double, N>& y, double h) {
  auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  const auto k1 = rhs(r, y);
  const auto k2 = rhs(r + 0.5 * h, axpy(y, 0.5 * h, k1));
  const auto k3 = rhs(r + 0.5 * h, axpy(y, 0.5 * h, k2));
  const auto k4 = rhs(r + h, axpy(y, h, k3));
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Potential sampled from the inside at the support edge, so that step
// profiles keep their inner value on the last RK4 stage.
double q_inside(const RadialProfile& q, double r, double r_in) {
  return q(std::min(r, std::nextafter(r_in, 0.0)));
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double flo) {
  for (int it = 0; it < kBisectionSteps && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

const RadialProfile& radial_of(const PotentialField& p) { return p.radial_profile(); }

}  // namespace

RadialSolution::RadialSolution(RadialProfile profile, int l, double energy, double step)
    : profile_(std::move(profile)), l_(l), energy_(energy) {
  if (l < 0) throw InputError("channel l must be nonnegative");
  if (!(step > 0.0)) throw InputError("radial step must be positive");
  dr_ = step;
  if (energy_ == 0.0 && profile_.identically_zero()) {
    r_in_ = 0.0;
    w_ = {1.0};
    dw_ = {0.0};
    return;
  }
  const double R = profile_.support_radius();
  const auto steps = std::max<long>(2, static_cast<long>(std::ceil(R / step)));
  dr_ = R / static_cast<double>(steps);
  r_in_ = R;
  w_.resize(steps + 1);
  dw_.resize(steps + 1);
  w_[0] = 1.0;
  dw_[0] = 0.0;
  const auto s0 = series(dr_);
  w_[1] = s0[0];
  dw_[1] = s0[1];
  const double E = energy_;
  const double c = 2.0 * (l_ + 1);
  const auto rhs = [&](double r, const std::array<double, 2>& y) -> std::array<double, 2> {
    return {y[1], (q_inside(profile_, r, r_in_) - E) * y[0] - c / r * y[1]};
  };
  std::array<double, 2> y{w_[1], dw_[1]};
  for (long i = 1; i < steps; ++i) {
    y = rk4_step(rhs, i * dr_, y, dr_);
    if (std::abs(y[0]) > kRescaleAt) {
      const double s = std::abs(y[0]);
      for (long j = 0; j <= i; ++j) {
        w_[j] /= s;
        dw_[j] /= s;
      }
      y[0] /= s;
      y[1] /= s;
      scale_ *= s;
    }
    w_[i + 1] = y[0];
    dw_[i + 1] = y[1];
  }
  if (energy_ == 0.0) {
    // Outside: w = a + b r^{-(2l+1)}.
    const double w = w_.back(), dw = dw_.back();
    const int p = 2 * l_ + 1;
    b_ = -dw * std::pow(R, p + 1) / p;
    a_ = w + dw * R / p;
  }
}

std::array<double, 2> RadialSolution::series(double r) const {
  // w = 1 + c2 r^2 + c4 r^4 about the origin, q'(0) = 0.
  const RadialValue q0 = profile_.derivatives(0.0);
  const double v0 = q0.value - energy_;
  const double c2 = v0 / (4.0 * l_ + 6.0);
  const double c4 = (v0 * c2 + 0.5 * q0.d2) / (8.0 * l_ + 20.0);
  const double r2 = r * r;
  return {(1.0 + c2 * r2 + c4 * r2 * r2) / scale_, (2.0 * c2 * r + 4.0 * c4 * r2 * r) / scale_};
}

std::array<double, 2> RadialSolution::w_state(double r) const {
  const auto last = static_cast<long>(w_.size()) - 1;
  const long i = std::min<long>(last, static_cast<long>(std::floor(r / dr_)));
  if (i <= 0) return series(r);
  const double ri = i * dr_;
  std::array<double, 2> y{w_[i], dw_[i]};
  const double h = r - ri;
  if (h == 0.0) return y;
  const double E = energy_;
  const double c = 2.0 * (l_ + 1);
  const auto rhs = [&](double s, const std::array<double, 2>& v) -> std::array<double, 2> {
    return {v[1], (q_inside(profile_, s, r_in_) - E) * v[0] - c / s * v[1]};
  };
  return rk4_step(rhs, ri, y, h);
}

double RadialSolution::reduced_value(double r) const {
  if (r < 0.0) throw InputError("radius must be nonnegative");
  if (r <= r_in_) return w_state(r)[0];
  if (energy_ != 0.0) throw InputError("radial solution at E != 0 is only stored inside the support");
  return a_ + b_ * std::pow(r, -(2 * l_ + 1));
}

std::array<double, 2> RadialSolution::state(double r) const {
  if (!(r > 0.0)) throw InputError("radius must be positive");
  const double rl = std::pow(r, l_);
  if (r <= r_in_) {
    const auto [w, dw] = w_state(r);
    return {rl * r * w, (l_ + 1) * rl * w + rl * r * dw};
  }
  if (energy_ != 0.0) throw InputError("radial solution at E != 0 is only stored inside the support");
  const double rinv = 1.0 / (rl * r);  // r^{-(l+1)}
  return {a_ * rl * r + b_ * r * rinv, (l_ + 1) * a_ * rl - l_ * b_ * rinv};
}

std::vector<double> RadialSolution::derivatives(double r, int order) const {
  if (order < 0 || order > 4) throw InputError("derivative order must be in [0, 4]");
  const auto [phi, dphi] = state(r);
  std::vector<double> d(order + 1);
  d[0] = phi;
  if (order >= 1) d[1] = dphi;
  if (order < 2) return d;
  // V = l(l+1)/r^2 + q - E and its first two derivatives.
  const RadialValue q = profile_.derivatives(r);
  const double ll = l_ * (l_ + 1.0);
  const double V[3] = {ll / (r * r) + q.value - energy_, -2.0 * ll / (r * r * r) + q.d1,
                       6.0 * ll / (r * r * r * r) + q.d2};
  // phi^{(n+2)} = sum_i C(n,i) V^{(i)} phi^{(n-i)}
  static constexpr int binom[3][3] = {{1, 0, 0}, {1, 1, 0}, {1, 2, 1}};
  for (int n = 0; n + 2 <= order; ++n) {
    double s = 0.0;
    for (int i = 0; i <= n; ++i) s += binom[n][i] * V[i] * d[n - i];
    d[n + 2] = s;
  }
  return d;
}

double RadialSolution::resonance_ratio() const {
  if (r_in_ == 0.0) return 1.0;
  const double R = r_in_;
  const auto [phi, dphi] = state(R);
  const double lead = std::abs(a_) * std::pow(R, l_ + 1);
  const double size = std::max(std::abs(phi), R * std::abs(dphi));
  return size > 0.0 ? lead / size : 0.0;
}

std::vector<double> RadialSolution::inner_zeros() const {
  std::vector<double> out;
  if (w_.size() < 2) return out;
  const auto f = [this](double r) { return w_state(r)[0]; };
  std::size_t last = 0;  // last index with nonzero w
  for (std::size_t i = 1; i < w_.size(); ++i) {
    if (w_[i] == 0.0) continue;
    if ((w_[i] > 0.0) != (w_[last] > 0.0)) out.push_back(bisect(f, last * dr_, i * dr_, w_[last]));
    last = i;
  }
  return out;
}

std::optional<double> RadialSolution::outer_zero() const {
  if (energy_ != 0.0 || a_ == 0.0) return std::nullopt;
  const double t = -b_ / a_;
  if (!(t > 0.0)) return std::nullopt;
  const double r = std::pow(t, 1.0 / (2 * l_ + 1));
  if (r <= r_in_) return std::nullopt;
  return r;
}

std::vector<RadialSolution::Sample> RadialSolution::sample(double r_max, double dr) const {
  std::vector<Sample> out;
  for (long i = 1;; ++i) {
    const double r = i * dr;
    if (r > r_max * (1.0 + 1e-12)) break;
    const auto [phi, dphi] = state(r);
    out.push_back({r, phi, dphi});
  }
  return out;
}

RadialSolution integrate_regular(const PotentialField& p, int l, double r_max, double step) {
  const RadialProfile& q = radial_of(p);
  if (l < 0) throw InputError("channel l must be nonnegative");
  if (r_max < 3.0 * q.support_radius()) throw InputError("r_max must be at least 3 R_supp");
  return RadialSolution(q, l, 0.0, step);
}

int count_bound_states(const RadialProfile& q, int l, double step) {
  const RadialSolution s(q, l, 0.0, step);
  if (s.resonance_ratio() < kResonanceThreshold)
    throw ConventionViolated("zero-energy resonance in channel l = " + std::to_string(l));
  return static_cast<int>(s.inner_zeros().size()) + (s.outer_zero() ? 1 : 0);
}

int count_bound_states(const PotentialField& p, int l, double step) {
  return count_bound_states(radial_of(p), l, step);
}

RadialPhi::RadialPhi(const RadialProfile& q, double step) : s0_(q, 0, 0.0, step) {
  if (s0_.resonance_ratio() < kResonanceThreshold)
    throw ConventionViolated("zero-energy s-wave resonance: asymptotic slope A vanishes");
  A_ = s0_.outer_a();
  B_ = s0_.outer_b();
}

double RadialPhi::operator()(double r) const { return s0_.reduced_value(std::abs(r)) / A_; }

std::vector<double> RadialPhi::zeros() const {
  auto z = s0_.inner_zeros();
  if (auto o = s0_.outer_zero()) z.push_back(*o);
  return z;
}

RadialPhi radial_phi(const PotentialField& p, double step) { return RadialPhi(radial_of(p), step); }

double s_wave_slope(const RadialProfile& q, double step) { return RadialSolution(q, 0, 0.0, step).outer_a(); }

std::vector<double> critical_couplings(const RadialProfile& q, int l, double alpha_max, double step) {
  if (!(alpha_max > 0.0)) throw InputError("alpha_max must be positive");
  const auto a_of = [&](double alpha) { return RadialSolution(q.with_coupling(alpha), l, 0.0, step).outer_a(); };
  constexpr int kSamples = 200;
  std::vector<double> out;
  double lo = 0.0, flo = 1.0;
  for (int k = 1; k <= kSamples; ++k) {
    const double hi = alpha_max * k / kSamples;
    const double fhi = a_of(hi);
    if ((fhi > 0.0) != (flo > 0.0)) out.push_back(bisect(a_of, lo, hi, flo));
    lo = hi;
    flo = fhi;
  }
  return out;
}

KramSystem::KramSystem(const RadialProfile& q, int L, double step) {
  if (L < 0) throw InputError("channel count must be nonnegative");
  channels_.reserve(L + 1);
  for (int l = 0; l <= L; ++l) channels_.emplace_back(q, l, 0.0, step);
}

namespace {

Eigen::MatrixXd kram_matrix(const KramSystem& sys, int m, int l, double r) {
  if (m < 0 || m > l || l > sys.max_channel()) throw InputError("Kram determinant needs 0 <= m <= l <= L");
  if (l - m > 4) throw InputError("Kram determinants use derivatives up to order 4 (l - m <= 4)");
  if (r < sys.step()) throw InputError("Kram determinant below the series start radius");
  const int n = l - m + 1;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    const auto d = sys.channel(m + i).derivatives(r, n - 1);
    for (int k = 0; k < n; ++k) M(i, k) = d[k];
  }
  return M;
}

}  // namespace

double KramSystem::kram(int m, int l, double r) const { return kram_matrix(*this, m, l, r).determinant(); }

double KramSystem::kram_normalised(int m, int l, double r) const {
  Eigen::MatrixXd M = kram_matrix(*this, m, l, r);
  double rk = 1.0;
  for (Eigen::Index k = 1; k < M.cols(); ++k) {
    rk *= r;
    M.col(k) *= rk;
  }
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double nrm = M.row(i).norm();
    if (nrm > 0.0) M.row(i) /= nrm;
  }
  return M.determinant();
}

double KramSystem::jet_det_product(int l, double r) const {
  double d = kram(0, l, r);
  for (int m = 1; m <= l; ++m) {
    const double f = kram(m, l, r);
    d *= f * f;
  }
  return d;
}

double kram_det(const PotentialField& p, int m, int l, double r, double step) {
  return KramSystem(radial_of(p), l, step).kram(m, l, r);
}

double jet_det_product(const PotentialField& p, int l, double r, double step) {
  return KramSystem(radial_of(p), l, step).jet_det_product(l, r);
}

ZeroCount zero_count(const std::function<double(double)>& f, std::span<const double> samples, double touch_tol) {
  ZeroCount out;
  if (samples.empty()) return out;
  std::vector<double> v(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) v[i] = f(samples[i]);
  std::size_t last = samples.size();  // last index with a nonzero value
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (v[i] == 0.0) continue;
    if (last < samples.size() && (v[i] > 0.0) != (v[last] > 0.0))
      out.zeros.push_back(bisect(f, samples[last], samples[i], v[last]));
    last = i;
  }
  out.count = static_cast<int>(out.zeros.size());
  // Touching zeros: local minima of |f| without a sign change.
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const double a = std::abs(v[i - 1]), b = std::abs(v[i]), c = std::abs(v[i + 1]);
    if (!(b <= a && b <= c)) continue;
    if ((v[i - 1] > 0.0) != (v[i + 1] > 0.0) || (v[i] > 0.0) != (v[i + 1] > 0.0)) continue;
    // Golden-section search for the minimum of |f|.
    double lo = samples[i - 1], hi = samples[i + 1];
    constexpr double g = 0.6180339887498949;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = std::abs(f(x1)), f2 = std::abs(f(x2));
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = std::abs(f(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = std::abs(f(x2));
      }
    }
    if (std::min(f1, f2) < touch_tol) out.tangential.push_back(0.5 * (lo + hi));
  }
  return out;
}

std::vector<double> kram_samples(const KramSystem& sys, int m, int l) {
  (void)m;
  (void)l;
  std::vector<double> r;
  const double dr = sys.step();
  const double R = sys.inner_radius();
  for (long i = 1; i * dr <= R * (1.0 + 1e-12); ++i) r.push_back(i * dr);
  // Free region: the outer forms a r^{j+1} + b r^{-j} approach their leading
  // terms; six decades beyond max(R, step) leave relative corrections far
  // below the sampling resolution.
  const double start = r.empty() ? dr : r.back();
  constexpr int kPerDecade = 200, kDecades = 6;
  for (int k = 1; k <= kPerDecade * kDecades; ++k) r.push_back(start * std::pow(10.0, static_cast<double>(k) / kPerDecade));
  return r;
}

ZeroCount kram_zeros(const KramSystem& sys, int m, int l) {
  const auto r = kram_samples(sys, m, l);
  return zero_count([&](double x) { return sys.kram_normalised(m, l, x); }, r);
}

SumRuleReport verify_sum_rule(const KramSystem& sys, int m, int l) {
  SumRuleReport rep;
  rep.m = m;
  rep.l = l;
  for (int j = m; j <= l; ++j) {
    const auto& s = sys.channel(j);
    if (s.resonance_ratio() < kResonanceThreshold)
      throw ConventionViolated("zero-energy resonance in channel l = " + std::to_string(j));
    rep.counts.push_back(static_cast<int>(s.inner_zeros().size()) + (s.outer_zero() ? 1 : 0));
  }
  for (int k = 0; k <= l - m; ++k) rep.predicted += (k % 2 == 0 ? 1 : -1) * rep.counts[k];
  const ZeroCount z = kram_zeros(sys, m, l);
  rep.measured = z.count;
  rep.zeros = z.zeros;
  rep.tangential = z.tangential;
  rep.pass = rep.measured == rep.predicted && rep.tangential.empty();
  return rep;
}

SumRuleReport verify_sum_rule(const PotentialField& p, int m, int l, double step) {
  return verify_sum_rule(KramSystem(radial_of(p), l, step), m, l);
}

SSphereReport find_s_spheres(const RadialProfile& q, int m, double step) {
  if (m < 1) throw InputError("s-point order m must be at least 1");
  SSphereReport rep;
  rep.m = m;
  if (m == 1) {
    rep.diagnostic = "phi";
    const RadialPhi phi(q, step);
    for (double r : phi.zeros()) rep.spheres.push_back({r, "phi"});
    return rep;
  }
  const int l = 2 * m - 2;
  rep.diagnostic = "delta_" + std::to_string(l);
  const KramSystem sys(q, l, step);
  if (sys.channel(0).resonance_ratio() < kResonanceThreshold)
    throw ConventionViolated("zero-energy s-wave resonance: asymptotic slope A vanishes");
  for (int k = 0; k <= l; ++k) {
    const ZeroCount z = kram_zeros(sys, k, l);
    for (double r : z.zeros) rep.spheres.push_back({r, "kram " + std::to_string(k) + "/" + std::to_string(l)});
    rep.tangential.insert(rep.tangential.end(), z.tangential.begin(), z.tangential.end());
  }
  std::sort(rep.spheres.begin(), rep.spheres.end(), [](const SSphere& a, const SSphere& b) { return a.radius < b.radius; });
  std::sort(rep.tangential.begin(), rep.tangential.end());
  return rep;
}

SSphereReport find_s_spheres(const PotentialField& p, int m, double step) {
  return find_s_spheres(radial_of(p), m, step);
}

RadialPsi::RadialPsi(const RadialProfile& q, double step) : q_(q), phi_(q, step) {
  const RadialSolution& s0 = phi_.solution();
  dr_ = s0.step();
  r_in_ = s0.inner_radius();
  const double A = phi_.slope();
  const double BA = phi_.intercept() / A;
  if (r_in_ == 0.0) return;  // q == 0: Psi = r^2
  const auto steps = static_cast<long>(std::llround(r_in_ / dr_));
  y_.resize(steps + 1);
  y_[0] = {1.0, 0.0, 0.0, 0.0};
  y_[1] = series(dr_);
  const auto rhs = [&](double r, const std::array<double, 4>& y) -> std::array<double, 4> {
    const double qv = q_inside(q_, r, r_in_);
    return {y[1], qv * y[0] - 2.0 / r * y[1], y[3], qv * y[2] + 6.0 * y[0] / A - 2.0 / r * y[3]};
  };
  for (long i = 1; i < steps; ++i) y_[i + 1] = rk4_step(rhs, i * dr_, y_[i], dr_);
  // Outside: Psi_raw = r^2 + 3 (B/A) r + c1 + c0 / r.
  const double R = r_in_;
  const double P = y_.back()[2], dP = y_.back()[3];
  const double c0 = R * R * (2.0 * R + 3.0 * BA - dP);
  const double c1 = P - R * R - 3.0 * BA * R - c0 / R;
  shift_ = c1;
  c0_ = c0 - c1 * BA;
}

std::array<double, 4> RadialPsi::series(double r) const {
  const double A = phi_.slope();
  const RadialValue q0 = q_.derivatives(0.0);
  const double c2 = q0.value / 6.0;
  const double c4 = (q0.value * c2 + 0.5 * q0.d2) / 20.0;
  const double p4 = q0.value / (10.0 * A);
  const double r2 = r * r;
  return {1.0 + c2 * r2 + c4 * r2 * r2, 2.0 * c2 * r + 4.0 * c4 * r2 * r, r2 / A + p4 * r2 * r2,
          2.0 * r / A + 4.0 * p4 * r2 * r};
}

std::array<double, 4> RadialPsi::inner_state(double r) const {
  const double A = phi_.slope();
  const auto last = static_cast<long>(y_.size()) - 1;
  const long i = std::min<long>(last, static_cast<long>(std::floor(r / dr_)));
  if (i <= 0) return series(r);
  const double ri = i * dr_;
  const double h = r - ri;
  if (h == 0.0) return y_[i];
  const auto rhs = [&](double s, const std::array<double, 4>& y) -> std::array<double, 4> {
    const double qv = q_inside(q_, s, r_in_);
    return {y[1], qv * y[0] - 2.0 / s * y[1], y[3], qv * y[2] + 6.0 * y[0] / A - 2.0 / s * y[3]};
  };
  return rk4_step(rhs, ri, y_[i], h);
}

double RadialPsi::operator()(double r) const {
  r = std::abs(r);
  if (r > r_in_) {
    const double BA = phi_.intercept() / phi_.slope();
    return r * r + 3.0 * BA * r + c0_ / r;
  }
  const auto y = inner_state(r);
  return y[2] - shift_ * y[0] / phi_.slope();
}

double RadialPsi::laplacian(double r, double h) const {
  if (!(r > 2.0 * h)) throw InputError("laplacian: need r > 2h");
  const double pm2 = (*this)(r - 2 * h), pm1 = (*this)(r - h), p0 = (*this)(r), pp1 = (*this)(r + h),
               pp2 = (*this)(r + 2 * h);
  const double d2 = (-pp2 + 16.0 * pp1 - 30.0 * p0 + 16.0 * pm1 - pm2) / (12.0 * h * h);
  const double d1 = (-pp2 + 8.0 * pp1 - 8.0 * pm1 + pm2) / (12.0 * h);
  return d2 + 2.0 * d1 / r;
}

std::vector<double> RadialPsi::residual_radii(double r_max, int samples, double h) const {
  if (samples < 1 || !(r_max > 3.0 * h)) throw InputError("identity_residual: need samples >= 1 and r_max > 3h");
  std::vector<double> radii;
  for (int k = 0; k < samples; ++k) {
    const double r = 3.0 * h + (r_max - 3.0 * h) * (k + 0.5) / samples;
    // the stencil must not straddle the jump of a step profile
    if (!q_.smooth() && std::abs(r - r_in_) < 2.5 * h) continue;
    radii.push_back(r);
  }
  return radii;
}

double RadialPsi::identity_residual(double r_max, int samples, double h) const {
  double worst = 0.0;
  for (double r : residual_radii(r_max, samples, h))
    worst = std::max(worst, std::abs(phi_(r) + (-laplacian(r, h) + q_(r) * (*this)(r)) / 6.0));
  return worst;
}

double RadialPsi::printed_form_residual(double r_max, int samples, double h) const {
  double worst = 0.0;
  for (double r : residual_radii(r_max, samples, h))
    worst = std::max(worst, std::abs(phi_(r) + (laplacian(r, h) + q_(r) * (*this)(r)) / 6.0));
  return worst;
}

RadialPsi solve_psi_radial(const PotentialField& p, double step) { return RadialPsi(radial_of(p), step); }

}  // namespace spoint
