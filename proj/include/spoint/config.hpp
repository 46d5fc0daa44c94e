#pragma once

// Run configuration: key = value lines, '#' comments, and an optional
// [potential] section whose lines are handed to parse_potential.
//
//   n = 24
//   orders = 1 2
//   scan_lo = -4 -4 -4
//   scan_hi = 4 4 4
//   scan_resolution = 32        # or three integers
//   [potential]
//   shape = gaussian
//   depth = -8
//   width = 1
//
// `potential_file = path` may replace the section.

#include "spoint/jets.hpp"
#include "spoint/potentials.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spoint {

struct AlphaRange {
  double from = 0.0, to = 0.0, step = 0.0;
  std::vector<double> values() const;
};

/// Parses "A:B:STEP"; throws InputError on malformed input.
AlphaRange parse_alpha_range(const std::string& s);

struct RunConfig {
  std::optional<PotentialField> potential;
  std::string potential_source;  // text of the potential definition, for the report
  int n = 16;
  std::optional<ScanBox> box;    // default: bounding cube of the support ball
  int scan_resolution = 24;
  std::vector<int> orders{1};
  int L_max = 2;
  double k_max = 0.0;            // 0: automatic
  int n_k = 256;
  double tau_conv = kDefaultTauConv;
  double tau_rel = kDefaultTauRel;
  double radial_step = 1e-3;
  bool richardson = false;
  int phi_samples = 20;
  std::filesystem::path out = "out";
  std::optional<AlphaRange> alpha_range;
  bool alpha_relative = true;    // sweep values in units of the first critical coupling
  bool allow_critical = false;

  /// Throws InputError when the potential is missing or a bound is violated.
  void validate() const;
  /// Scan box in effect.
  ScanBox scan_box() const;
};

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

}  // namespace spoint
