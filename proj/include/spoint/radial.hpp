#pragma once

// Radial reduction for q = q(|x|).
//
// Regular solutions of -phi'' + l(l+1)/r^2 phi + (q - E) phi = 0 are carried
// as w = phi / r^{l+1}, which is smooth at the origin:
//
//     w'' + 2(l+1)/r w' = (q - E) w,   w(0) = 1, w'(0) = 0.
//
// Inside the support w is integrated by fixed-step RK4 on a grid that ends
// exactly at R_supp. For E = 0 the solution beyond R_supp is the free form
// phi = a r^{l+1} + b r^{-l}, evaluated in closed form.

#include "spoint/potentials.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spoint {

inline constexpr double kDefaultRadialStep = 1e-3;

/// phi_l and phi_l' of the regular solution, normalised to r^{l+1} at 0.
class RadialSolution {
 public:
  RadialSolution(RadialProfile profile, int l, double energy, double step);

  int l() const { return l_; }
  double energy() const { return energy_; }
  double step() const { return dr_; }
  /// Radius where the numerical integration stops (0 for q == 0).
  double inner_radius() const { return r_in_; }
  const RadialProfile& profile() const { return profile_; }

  /// (phi, phi') at r > 0. For E = 0 exact free form beyond inner_radius().
  std::array<double, 2> state(double r) const;
  double value(double r) const { return state(r)[0]; }
  /// phi / r^{l+1} for r >= 0.
  double reduced_value(double r) const;
  /// phi^{(n)}(r) for n = 0..order, order <= 4, from the ODE recursion.
  std::vector<double> derivatives(double r, int order) const;

  /// Zero-energy outer coefficients: phi = a r^{l+1} + b r^{-l} for r >= inner_radius().
  double outer_a() const { return a_; }
  double outer_b() const { return b_; }
  /// Zero-energy resonance measure |a| r^{l+1} / max(|phi|, r |phi'|) at inner_radius().
  double resonance_ratio() const;

  /// Nodes of phi in (0, inner_radius()], located by bisection.
  std::vector<double> inner_zeros() const;
  /// Zero of the free outer form, if any lies beyond inner_radius().
  std::optional<double> outer_zero() const;

  /// Samples (r, phi, phi') on [step, r_max].
  struct Sample {
    double r, phi, dphi;
  };
  std::vector<Sample> sample(double r_max, double dr) const;

 private:
  std::array<double, 2> series(double r) const;
  std::array<double, 2> w_state(double r) const;  // (w, w') with one RK4 substep

  RadialProfile profile_;
  int l_ = 0;
  double energy_ = 0.0;
  double dr_ = kDefaultRadialStep;
  double r_in_ = 0.0;
  double scale_ = 1.0;         // stored w are divided by this after overflow rescaling
  std::vector<double> w_, dw_; // w, w' at r_i = i * dr_, i = 0..steps
  double a_ = 1.0, b_ = 0.0;
};

/// Throws InputError for l < 0, r_max < 3 R_supp or a non-radial potential.
RadialSolution integrate_regular(const PotentialField& p, int l, double r_max,
                                 double step = kDefaultRadialStep);

/// Number of negative eigenvalues of the l-th partial operator, counted as
/// nodes of the zero-energy regular solution on (0, inf), outer zero included.
/// Throws ConventionViolated at a zero-energy resonance.
int count_bound_states(const RadialProfile& q, int l, double step = kDefaultRadialStep);
int count_bound_states(const PotentialField& p, int l, double step = kDefaultRadialStep);

inline constexpr double kResonanceThreshold = 1e-9;

/// Phi(r) = phi_0(r) / (A r), with phi_0 -> A r + B beyond the support.
class RadialPhi {
 public:
  /// Throws ConventionViolated when |A| is at the resonance threshold.
  explicit RadialPhi(const RadialProfile& q, double step = kDefaultRadialStep);

  double operator()(double r) const;
  double slope() const { return A_; }
  double intercept() const { return B_; }
  const RadialSolution& solution() const { return s0_; }
  /// Sign changes of Phi on (0, inf).
  std::vector<double> zeros() const;

 private:
  RadialSolution s0_;
  double A_ = 1.0, B_ = 0.0;
};

RadialPhi radial_phi(const PotentialField& p, double step = kDefaultRadialStep);

/// Signed asymptotic slope A of phi_0 (no convention check).
double s_wave_slope(const RadialProfile& q, double step = kDefaultRadialStep);

/// Couplings alpha in (0, alpha_max] at which channel l gains a bound state,
/// i.e. roots of the outer coefficient a_l(alpha).
std::vector<double> critical_couplings(const RadialProfile& q, int l, double alpha_max,
                                       double step = kDefaultRadialStep);

/// Regular solutions phi_0..phi_L with Kram determinants.
class KramSystem {
 public:
  KramSystem(const RadialProfile& q, int L, double step = kDefaultRadialStep);

  int max_channel() const { return static_cast<int>(channels_.size()) - 1; }
  const RadialSolution& channel(int l) const { return channels_.at(l); }
  double inner_radius() const { return channels_.front().inner_radius(); }
  double step() const { return channels_.front().step(); }

  /// Delta^m_l(r): rows phi_m..phi_l, columns derivatives 0..l-m (l - m <= 4).
  double kram(int m, int l, double r) const;
  /// Delta^m_l with column k scaled by r^k, divided by the product of its row
  /// norms: same sign, in [-1, 1], constant for q == 0.
  double kram_normalised(int m, int l, double r) const;
  /// delta_l = Delta^0_l (Delta^1_l)^2 ... (Delta^l_l)^2.
  double jet_det_product(int l, double r) const;

 private:
  std::vector<RadialSolution> channels_;
};

/// Single evaluation; throws InputError for r below the series start radius.
double kram_det(const PotentialField& p, int m, int l, double r, double step = kDefaultRadialStep);
double jet_det_product(const PotentialField& p, int l, double r, double step = kDefaultRadialStep);

struct ZeroCount {
  int count = 0;                   // transversal zeros
  std::vector<double> zeros;       // bisection-refined
  std::vector<double> tangential;  // touching zeros, not counted
};

/// Sign changes of f between consecutive samples, each refined by bisection.
/// Local minima of |f| that fall below `touch_tol` without a sign change are
/// reported as tangential.
ZeroCount zero_count(const std::function<double(double)>& f, std::span<const double> samples,
                     double touch_tol = 1e-8);

/// Sample radii for zero searches: the inner grid of the system plus a
/// logarithmic outer grid far enough for the free asymptotics to dominate.
std::vector<double> kram_samples(const KramSystem& sys, int m, int l);

ZeroCount kram_zeros(const KramSystem& sys, int m, int l);

struct SumRuleReport {
  int m = 0, l = 0;
  int measured = 0;
  int predicted = 0;
  std::vector<int> counts;  // N_m..N_l
  std::vector<double> zeros;
  std::vector<double> tangential;
  bool pass = false;
};

SumRuleReport verify_sum_rule(const KramSystem& sys, int m, int l);
SumRuleReport verify_sum_rule(const PotentialField& p, int m, int l, double step = kDefaultRadialStep);

struct SSphere {
  double radius = 0.0;
  /// "phi" for m = 1; "kram m/l" for the vanishing factor of delta_l otherwise.
  std::string factor;
};

struct SSphereReport {
  int m = 1;
  std::string diagnostic;  // "phi" or "delta_<l>"
  std::vector<SSphere> spheres;
  std::vector<double> tangential;
};

/// m = 1: zeros of Phi; m >= 2: zeros of the factors of delta_{2m-2}.
SSphereReport find_s_spheres(const RadialProfile& q, int m, double step = kDefaultRadialStep);
SSphereReport find_s_spheres(const PotentialField& p, int m, double step = kDefaultRadialStep);

/// Psi with (-Lap + q) Psi = -6 Phi, Psi ~ r^2 at infinity and no constant
/// term in its outer expansion r^2 + 3 (B/A) r + c / r.
class RadialPsi {
 public:
  explicit RadialPsi(const RadialProfile& q, double step = kDefaultRadialStep);

  double operator()(double r) const;
  const RadialPhi& phi() const { return phi_; }
  /// Coefficient of 1/r in the outer expansion.
  double inverse_coefficient() const { return c0_; }
  /// max |Phi + (-Lap + q) Psi / 6| over `samples` radii in (0, r_max], with
  /// the radial Laplacian from a fourth-order stencil of spacing h.
  double identity_residual(double r_max, int samples, double h = 2e-3) const;
  /// Same samples for Phi = -(Lap + q) Psi / 6, which already fails for q == 0
  /// (residual 2). Kept for comparison only.
  double printed_form_residual(double r_max, int samples, double h = 2e-3) const;
  /// Psi'' + 2 Psi' / r by the fourth-order stencil.
  double laplacian(double r, double h = 2e-3) const;

 private:
  std::array<double, 4> series(double r) const;
  std::vector<double> residual_radii(double r_max, int samples, double h) const;
  std::array<double, 4> inner_state(double r) const;  // (w0, w0', Psi, Psi') before the shift

  RadialProfile q_;
  RadialPhi phi_;
  double dr_ = kDefaultRadialStep;
  double r_in_ = 0.0;
  std::vector<std::array<double, 4>> y_;
  double shift_ = 0.0;  // Psi = Psi_raw - shift * Phi
  double c0_ = 0.0;
};

RadialPsi solve_psi_radial(const PotentialField& p, double step = kDefaultRadialStep);

}  // namespace spoint
