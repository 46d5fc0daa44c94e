#pragma once

// Partial-wave phase shifts of radial potentials and Levinson checks.

#include "spoint/potentials.hpp"
#include "spoint/radial.hpp"

#include <vector>

namespace spoint {

struct BesselPair {
  double j = 0.0;  // regular
  double n = 0.0;  // irregular, n_0(x) = -cos(x)/x
};

/// Spherical Bessel functions j_l, n_l for x > 0, 0 <= l <= 8.
BesselPair spherical_bessel(int l, double x);

/// delta_l(k) in (-pi/2, pi/2], matched at the support radius.
double phase_shift(const RadialProfile& q, int l, double k, double step = kDefaultRadialStep);

struct PhaseCurve {
  int l = 0;
  std::vector<double> k;
  std::vector<double> delta;  // continuous branch, delta(k_max) in (-pi/2, pi/2]
  int refinements = 0;

  double at_threshold() const { return delta.front(); }
  double at_kmax() const { return delta.back(); }
};

inline constexpr double kThresholdFactor = 1e-3;  // k_min = kThresholdFactor / R_supp
inline constexpr int kMinPhasePoints = 64;

/// Log-spaced grid on [k_min, k_max] with adaptive insertion where consecutive
/// values jump by more than pi/4. Throws NumericalFailure if a jump persists
/// after three refinement rounds.
PhaseCurve phase_curve(const RadialProfile& q, int l, double k_max, int n_k, double step = kDefaultRadialStep);

/// k_max large enough that the first Born estimate int |q| dr / k is below
/// 0.02, and at least 40 / R_supp.
double default_kmax(const RadialProfile& q);

struct LevinsonChannel {
  int l = 0;
  int bound_states = 0;
  double delta_threshold = 0.0;  // delta_l(k_min)
  double delta_kmax = 0.0;
  double defect = 0.0;           // |delta_l(k_min) - pi N_l|
};

struct LevinsonReport {
  std::vector<LevinsonChannel> channels;
  double k_min = 0.0, k_max = 0.0;
  int n_k = 0;
  int index = 0;        // sum (2l+1) N_l
  int phase_index = 0;  // sum (2l+1) round(delta_l(k_min) / pi)
  double max_defect = 0.0;
  std::vector<PhaseCurve> curves;
};

LevinsonReport levinson_check(const RadialProfile& q, int L_max, double k_max = 0.0, int n_k = 256,
                              double step = kDefaultRadialStep);
LevinsonReport levinson_check(const PotentialField& p, int L_max, double k_max = 0.0, int n_k = 256,
                              double step = kDefaultRadialStep);

}  // namespace spoint
