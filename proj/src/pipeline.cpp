#include "spoint/pipeline.hpp"

#include "spoint/jets.hpp"
#include "spoint/lse.hpp"
#include "spoint/radial.hpp"
#include "spoint/scattering.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace spoint {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::pair<Command, const char*>, 6> kCommandNames{{
    {Command::kConvention, "convention"},
    {Command::kScan, "scan"},
    {Command::kRadial, "radial"},
    {Command::kLevinson, "levinson"},
    {Command::kSweep, "sweep"},
    {Command::kAll, "all"},
}};

json vec3(const Point& x) { return json::array({x.x(), x.y(), x.z()}); }

json tagged(double value, double tolerance, bool pass) {
  return json{{"value", value}, {"tolerance", tolerance}, {"pass", pass}};
}

// Whitespace-separated columns with a '#' header, readable by gnuplot.
class Table {
 public:
  Table(const std::filesystem::path& path, const std::vector<std::string>& columns) : out_(path) {
    if (!out_) throw InputError("cannot write " + path.string());
    out_ << '#';
    for (const auto& c : columns) out_ << ' ' << c;
    out_ << '\n' << std::setprecision(12);
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ' ';
      if (std::isnan(values[i]))
        out_ << "nan";
      else
        out_ << values[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

class Runner {
 public:
  explicit Runner(const RunConfig& cfg) : cfg_(cfg), p_(*cfg.potential) {
    if (p_.is_radial()) q_ = p_.radial_profile();
  }

  json report = json::object();
  json timings = json::object();
  std::vector<std::string> warnings;
  ExitCode code = ExitCode::kOk;

  template <class F>
  void stage(const char* name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      f();
    } catch (...) {
      timings[name] = seconds_since(t0);
      throw;
    }
    timings[name] = seconds_since(t0);
  }

  // Returns false when the zero-energy convention fails.
  bool convention();
  void scan();
  void radial();
  void levinson();
  void sweep();
  void phi_cross_check();

  bool radial_available() const { return q_.has_value(); }

  void require_radial(const char* what) const {
    if (!q_) throw InputError(std::string(what) + " needs a single-component radial potential");
  }

  void raise(ExitCode c) { code = std::max(code, c); }

 private:
  static double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  const KernelPtr& kernel() {
    if (!K_) {
      auto grid = std::make_shared<const VolumeGrid>(build_grid(support_ball(p_), cfg_.n));
      K_ = assemble_kernel(grid, p_);
    }
    return K_;
  }

  const FieldBatch& phi_batch() {
    if (!phi_) {
      const FieldSolution u = solve_field(kernel(), ConstantIncident{1.0}, cfg_.tau_conv);
      phi_ = std::make_unique<FieldBatch>(std::span<const FieldSolution>(&u, 1));
    }
    return *phi_;
  }

  Point centre() const { return p_.components().front().center; }

  const RunConfig& cfg_;
  const PotentialField& p_;
  std::optional<RadialProfile> q_;
  KernelPtr K_;
  std::unique_ptr<FieldBatch> phi_;
  std::optional<bool> convention_ok_;
};

bool Runner::convention() {
  if (convention_ok_) return *convention_ok_;
  json j;
  const auto& K = kernel();
  const VolumeGrid& g = K->grid();
  j["grid"] = {{"n", g.n}, {"h", g.h}, {"nodes", g.size()}, {"ball_center", vec3(g.ball.center)},
               {"ball_radius", g.ball.radius}};
  const ConventionCheck c = check_convention(*K, cfg_.tau_conv);
  j["sigma_min"] = tagged(c.sigma_min, c.tau, c.ok);
  j["sigma_method"] = c.method;
  bool ok = c.ok;
  if (q_) {
    const RadialSolution s0(*q_, 0, 0.0, cfg_.radial_step);
    const double ratio = s0.resonance_ratio();
    const bool slope_ok = ratio >= kResonanceThreshold;
    j["radial_slope"] = {{"A", s0.outer_a()},
                         {"resonance_ratio", tagged(ratio, kResonanceThreshold, slope_ok)}};
    ok = ok && slope_ok;
  } else {
    j["radial_slope"] = {{"oracle", "none"}};
  }
  j["ok"] = ok;
  report["convention"] = j;
  if (!ok) {
    raise(ExitCode::kConventionViolated);
    warnings.push_back("zero-energy convention violated: I + K is (nearly) singular or the s-wave slope vanishes");
  }
  convention_ok_ = ok;
  return ok;
}

void Runner::scan() {
  const ScanBox box = cfg_.scan_box();
  ScanOptions opt;
  opt.tau_rel = cfg_.tau_rel;
  opt.tau_conv = cfg_.tau_conv;
  opt.jet.richardson = cfg_.richardson;

  json scans = json::array();
  for (int m : cfg_.orders) {
    const ScanReport r = scan_spoints(kernel(), m, box, opt);
    write_scan_csv(r, cfg_.out / ("scan_m" + std::to_string(m) + ".csv"));

    json s;
    s["m"] = m;
    s["diagnostic"] = r.diagnostic_name;
    s["conditional"] = r.conditional;
    s["tau_rel"] = r.tau_rel;
    s["grid_n"] = r.grid_n;
    s["box"] = {{"lo", vec3(box.lo)},
                {"hi", vec3(box.hi)},
                {"resolution", json::array({box.resolution[0], box.resolution[1], box.resolution[2]})}};
    s["csv"] = "scan_m" + std::to_string(m) + ".csv";
    json cands = json::array();
    for (const Candidate& c : r.candidates)
      cands.push_back({{"x", vec3(c.x)},
                       {"radius", (c.x - centre()).norm()},
                       {"diagnostic", c.diagnostic},
                       {"status", c.status}});
    s["candidates"] = cands;

    if (q_) {
      const SSphereReport spheres = find_s_spheres(*q_, m, cfg_.radial_step);
      const double tol = 2.0 * box.spacing().maxCoeff();
      double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
      for (const Point& x : r.points) {
        const double d = (x - centre()).norm();
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
      }
      auto nearest = [](double v, const std::vector<double>& set) {
        double best = std::numeric_limits<double>::infinity();
        for (double s : set) best = std::min(best, std::abs(v - s));
        return best;
      };
      std::vector<double> cand_r, sphere_r;
      for (const Candidate& c : r.candidates) cand_r.push_back((c.x - centre()).norm());
      for (const SSphere& sp : spheres.spheres) sphere_r.push_back(sp.radius);

      bool pass = true;
      json matched = json::array();
      for (double R : sphere_r) {
        const bool in_box = R >= dmin && R <= dmax;
        const double err = nearest(R, cand_r);
        if (in_box) pass = pass && err <= tol;
        matched.push_back({{"radius", R}, {"in_box", in_box}, {"nearest_candidate", std::isfinite(err) ? json(err) : json()}});
      }
      double worst = 0.0;
      for (double c : cand_r) worst = std::max(worst, nearest(c, sphere_r));
      pass = pass && worst <= tol;
      s["radial_oracle"] = {{"diagnostic", spheres.diagnostic},
                            {"spheres", matched},
                            {"max_candidate_offset", std::isfinite(worst) ? json(worst) : json()},
                            {"tolerance", tol},
                            {"pass", pass}};
    } else {
      s["radial_oracle"] = {{"oracle", "none"}};
    }
    scans.push_back(s);
  }
  report["scans"] = scans;
}

void Runner::radial() {
  require_radial("the radial stage");
  const RadialProfile& q = *q_;
  const int L = cfg_.L_max;
  json j;
  j["step"] = cfg_.radial_step;
  j["support_radius"] = q.support_radius();

  json counts = json::array();
  for (int l = 0; l <= L; ++l) counts.push_back(count_bound_states(q, l, cfg_.radial_step));
  j["bound_states"] = counts;

  const RadialPhi phi(q, cfg_.radial_step);
  j["phi"] = {{"slope", phi.slope()}, {"intercept", phi.intercept()}, {"zeros", phi.zeros()}};

  bool tangential = false;
  json spheres = json::array();
  for (int m : cfg_.orders) {
    const SSphereReport s = find_s_spheres(q, m, cfg_.radial_step);
    json list = json::array();
    for (const SSphere& sp : s.spheres) list.push_back({{"radius", sp.radius}, {"factor", sp.factor}});
    spheres.push_back({{"m", m}, {"diagnostic", s.diagnostic}, {"spheres", list}, {"tangential", s.tangential}});
    tangential = tangential || !s.tangential.empty();
  }
  j["s_spheres"] = spheres;

  const KramSystem sys(q, L, cfg_.radial_step);
  json rules = json::array();
  bool all_pass = true;
  for (int l = 0; l <= L; ++l)
    for (int m = 0; m <= l; ++m) {
      const SumRuleReport r = verify_sum_rule(sys, m, l);
      rules.push_back({{"m", m},
                       {"l", l},
                       {"measured", r.measured},
                       {"predicted", r.predicted},
                       {"pass", r.pass},
                       {"zeros", r.zeros},
                       {"tangential", r.tangential}});
      all_pass = all_pass && r.pass;
      tangential = tangential || !r.tangential.empty();
    }
  j["sum_rule"] = {{"tolerance", 0}, {"pass", all_pass}, {"table", rules}};

  const RadialPsi psi(q, cfg_.radial_step);
  const double r_max = std::max(3.0 * q.support_radius(), 1.0);
  constexpr int kResidualSamples = 400;
  const double res = psi.identity_residual(r_max, kResidualSamples);
  j["psi"] = {{"identity", "(-Lap + q) Psi = -6 Phi"},
              {"residual", tagged(res, kPsiResidualTol, res <= kPsiResidualTol)},
              {"printed_form", "Phi = -(Lap + q) Psi / 6"},
              {"printed_form_residual", psi.printed_form_residual(r_max, kResidualSamples)},
              {"linear_coefficient", 3.0 * phi.intercept() / phi.slope()},
              {"inverse_coefficient", psi.inverse_coefficient()}};
  report["radial"] = j;

  if (tangential) {
    raise(ExitCode::kConventionViolated);
    warnings.push_back("tangential zero of a radial determinant: the spectrum is degenerate");
  }

  // curves
  std::vector<std::string> cols{"r"};
  for (int l = 0; l <= L; ++l) cols.push_back("phi_" + std::to_string(l));
  cols.push_back("Phi");
  std::vector<std::pair<int, int>> pairs;
  for (int l = 0; l <= L; ++l)
    for (int m = 0; m <= l; ++m) {
      pairs.emplace_back(m, l);
      cols.push_back("kram_" + std::to_string(m) + "_" + std::to_string(l));
    }
  for (int l = 0; l <= L; ++l) cols.push_back("delta_" + std::to_string(l));
  cols.push_back("Psi");
  Table t(cfg_.out / "radial_curves.csv", cols);
  const double r_out = 1.5 * std::max(q.support_radius(), 1.0);
  constexpr int kCurvePoints = 400;
  for (int i = 1; i <= kCurvePoints; ++i) {
    const double r = r_out * i / kCurvePoints;
    std::vector<double> row{r};
    for (int l = 0; l <= L; ++l) row.push_back(sys.channel(l).value(r));
    row.push_back(phi(r));
    for (auto [m, l] : pairs) row.push_back(sys.kram(m, l, r));
    for (int l = 0; l <= L; ++l) row.push_back(sys.jet_det_product(l, r));
    row.push_back(psi(r));
    t.row(row);
  }
}

void Runner::levinson() {
  require_radial("the Levinson check");
  const LevinsonReport r = levinson_check(*q_, cfg_.L_max, cfg_.k_max, cfg_.n_k, cfg_.radial_step);
  json chans = json::array();
  bool pass = r.index == r.phase_index;
  for (const LevinsonChannel& c : r.channels) {
    const double defect_tol = kLevinsonDefectTol * std::numbers::pi;
    const bool d_ok = c.defect <= defect_tol;
    const bool k_ok = std::abs(c.delta_kmax) <= kPhaseKmaxTol;
    pass = pass && d_ok && k_ok;
    chans.push_back({{"l", c.l},
                     {"bound_states", c.bound_states},
                     {"delta_threshold", c.delta_threshold},
                     {"defect", tagged(c.defect, defect_tol, d_ok)},
                     {"delta_kmax", tagged(c.delta_kmax, kPhaseKmaxTol, k_ok)}});
  }
  for (const PhaseCurve& c : r.curves) {
    Table t(cfg_.out / ("phase_l" + std::to_string(c.l) + ".csv"), {"k", "delta"});
    for (std::size_t i = 0; i < c.k.size(); ++i) t.row({c.k[i], c.delta[i]});
  }
  report["levinson"] = {{"k_min", r.k_min},
                        {"k_max", r.k_max},
                        {"n_k", r.n_k},
                        {"index", r.index},
                        {"phase_index", r.phase_index},
                        {"max_defect", r.max_defect},
                        {"pass", pass},
                        {"channels", chans}};
}

void Runner::sweep() {
  require_radial("the coupling sweep");
  if (!cfg_.alpha_range) throw InputError("sweep needs alpha_range");
  const RadialProfile& q = *q_;
  const std::vector<double> raw = cfg_.alpha_range->values();

  // The first s-wave critical coupling defines the relative units.
  constexpr double kCriticalSearchMax = 64.0;
  double alpha_c = std::numeric_limits<double>::quiet_NaN();
  {
    const auto crit = critical_couplings(q, 0, kCriticalSearchMax, cfg_.radial_step);
    if (!crit.empty()) alpha_c = crit.front();
  }
  if (cfg_.alpha_relative && !std::isfinite(alpha_c))
    throw InputError("no s-wave critical coupling below 64; use alpha_units = absolute");
  const double unit = cfg_.alpha_relative ? alpha_c : 1.0;
  std::vector<double> alphas;
  for (double a : raw) alphas.push_back(a * unit);
  const double a_lo = *std::min_element(alphas.begin(), alphas.end());
  const double a_hi = *std::max_element(alphas.begin(), alphas.end());

  json crossings = json::array();
  for (int l = 0; l <= cfg_.L_max; ++l)
    for (double c : critical_couplings(q, l, a_hi * (1.0 + 1e-9), cfg_.radial_step))
      if (c >= a_lo) crossings.push_back({{"l", l}, {"alpha", c}, {"alpha_rel", c / alpha_c}});
  if (!crossings.empty() && !cfg_.allow_critical) {
    std::ostringstream msg;
    msg << "alpha range crosses " << crossings.size()
        << " critical coupling(s); pass --allow-critical to sweep through them";
    throw InputError(msg.str());
  }

  const bool want_m2 = std::find(cfg_.orders.begin(), cfg_.orders.end(), 2) != cfg_.orders.end();
  std::vector<std::string> cols{"alpha", "alpha_rel", "A"};
  for (int l = 0; l <= cfg_.L_max; ++l) cols.push_back("N_" + std::to_string(l));
  cols.insert(cols.end(), {"spheres_m1", "r_m1_max"});
  if (want_m2) cols.insert(cols.end(), {"spheres_m2", "r_m2_max"});
  Table t(cfg_.out / "sweep.csv", cols);

  json rows = json::array();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double a : alphas) {
    const RadialProfile qa = q.with_coupling(a);
    json row{{"alpha", a}, {"alpha_rel", a / alpha_c}};
    std::vector<double> csv{a, a / alpha_c};
    try {
      std::vector<int> counts;
      for (int l = 0; l <= cfg_.L_max; ++l) counts.push_back(count_bound_states(qa, l, cfg_.radial_step));
      const RadialPhi phi(qa, cfg_.radial_step);
      const std::vector<double> z1 = phi.zeros();
      const int total = std::accumulate(counts.begin(), counts.end(), 0);
      row["status"] = "ok";
      row["A"] = phi.slope();
      row["bound_states"] = counts;
      row["spheres_m1"] = z1;
      csv.push_back(phi.slope());
      for (int n : counts) csv.push_back(n);
      csv.push_back(static_cast<double>(z1.size()));
      csv.push_back(z1.empty() ? nan : *std::max_element(z1.begin(), z1.end()));
      bool any_sphere = !z1.empty();
      if (want_m2) {
        std::vector<double> z2;
        for (const SSphere& s : find_s_spheres(qa, 2, cfg_.radial_step).spheres) z2.push_back(s.radius);
        row["spheres_m2"] = z2;
        csv.push_back(static_cast<double>(z2.size()));
        csv.push_back(z2.empty() ? nan : *std::max_element(z2.begin(), z2.end()));
        any_sphere = any_sphere || !z2.empty();
      }
      row["classification"] = std::string(total > 0 ? "bound state" : "no bound state") + ", " +
                              (any_sphere ? "s-sphere" : "no s-sphere");
      // conjecture probe: a discrete spectrum exists exactly when s-points exist
      row["conjecture_consistent"] = (total > 0) == any_sphere;
    } catch (const ConventionViolated& e) {
      row["status"] = "convention-violated";
      row["message"] = e.what();
      csv.resize(cols.size(), nan);
    }
    t.row(csv);
    rows.push_back(row);
  }
  report["sweep"] = {{"alpha_c", std::isfinite(alpha_c) ? json(alpha_c) : json()},
                     {"units", cfg_.alpha_relative ? "critical" : "absolute"},
                     {"crossings", crossings},
                     {"rows", rows}};
}

void Runner::phi_cross_check() {
  if (!q_) {
    report["cross_checks"] = {{"phi", {{"oracle", "none"}}}};
    return;
  }
  const RadialPhi radial_phi(*q_, cfg_.radial_step);
  const std::vector<double> zeros = radial_phi.zeros();
  const double R = kernel()->grid().ball.radius;
  const int S = cfg_.phi_samples;

  std::vector<double> pool;
  for (int k = 0; k < 4 * S; ++k) {
    const double r = R * (k + 0.5) / (4 * S);
    const bool near_zero =
        std::any_of(zeros.begin(), zeros.end(), [&](double z) { return std::abs(r - z) < kPhiZeroExclusion; });
    if (!near_zero) pool.push_back(r);
  }
  std::vector<double> radii;
  for (int i = 0; i < S && !pool.empty(); ++i) radii.push_back(pool[i * pool.size() / S]);

  const Point dir = Point(1.0, 0.37, 0.21).normalized();
  std::vector<Point> pts;
  for (double r : radii) pts.push_back(centre() + r * dir);
  const std::vector<double> phi3 = phi_batch().evaluate(pts);

  json samples = json::array();
  double worst = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double ref = radial_phi(radii[i]);
    const double err = std::abs(phi3[i] - ref) / std::abs(ref);
    worst = std::max(worst, err);
    samples.push_back({{"r", radii[i]}, {"phi_3d", phi3[i]}, {"phi_radial", ref}, {"relative_error", err}});
  }
  report["cross_checks"] = {
      {"phi",
       {{"direction", vec3(dir)},
        {"zero_exclusion", kPhiZeroExclusion},
        {"max_relative_error", tagged(worst, kPhiAgreementTol, worst <= kPhiAgreementTol)},
        {"samples", samples}}}};
}

json config_echo(const RunConfig& c) {
  const ScanBox b = c.scan_box();
  json j;
  j["potential"] = c.potential_source;
  j["n"] = c.n;
  j["orders"] = c.orders;
  j["L_max"] = c.L_max;
  j["k_max"] = c.k_max;
  j["n_k"] = c.n_k;
  j["tau_conv"] = c.tau_conv;
  j["tau_rel"] = c.tau_rel;
  j["radial_step"] = c.radial_step;
  j["richardson"] = c.richardson;
  j["phi_samples"] = c.phi_samples;
  j["scan_lo"] = vec3(b.lo);
  j["scan_hi"] = vec3(b.hi);
  j["scan_resolution"] = json::array({b.resolution[0], b.resolution[1], b.resolution[2]});
  if (c.alpha_range)
    j["alpha_range"] = {{"from", c.alpha_range->from}, {"to", c.alpha_range->to}, {"step", c.alpha_range->step}};
  j["alpha_units"] = c.alpha_relative ? "critical" : "absolute";
  j["allow_critical"] = c.allow_critical;
  return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

}  // namespace

Command parse_command(const std::string& name) {
  for (const auto& [c, n] : kCommandNames)
    if (name == n) return c;
  throw InputError("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  for (const auto& [k, n] : kCommandNames)
    if (k == c) return n;
  return "?";
}

RunResult run_pipeline(Command cmd, const RunConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw InputError("cannot create output directory " + cfg.out.string() + ": " + ec.message());

  Runner run(cfg);
  RunResult result;
  result.report["schema"] = kReportSchema;
  result.report["command"] = to_string(cmd);
  result.report["config"] = config_echo(cfg);

  try {
    switch (cmd) {
      case Command::kConvention:
        run.stage("convention", [&] { run.convention(); });
        break;
      case Command::kScan: {
        bool ok = false;
        run.stage("convention", [&] { ok = run.convention(); });
        if (ok) run.stage("scan", [&] { run.scan(); });
        break;
      }
      case Command::kRadial:
        run.stage("radial", [&] { run.radial(); });
        break;
      case Command::kLevinson:
        run.stage("levinson", [&] { run.levinson(); });
        break;
      case Command::kSweep:
        run.stage("sweep", [&] { run.sweep(); });
        break;
      case Command::kAll: {
        bool ok = false;
        run.stage("convention", [&] { ok = run.convention(); });
        if (!ok) break;
        run.stage("scan", [&] { run.scan(); });
        if (run.radial_available()) {
          run.stage("radial", [&] { run.radial(); });
          run.stage("levinson", [&] { run.levinson(); });
          if (cfg.alpha_range) run.stage("sweep", [&] { run.sweep(); });
        }
        run.stage("cross_checks", [&] { run.phi_cross_check(); });
        break;
      }
    }
  } catch (const Error& e) {
    run.raise(e.exit_code());
    result.message = e.what();
  } catch (const std::bad_alloc&) {
    run.raise(ExitCode::kNumericalFailure);
    result.message = "out of memory; reduce n";
  }

  for (auto it = run.report.begin(); it != run.report.end(); ++it) result.report[it.key()] = it.value();
  result.code = run.code;
  if (result.message.empty() && !run.warnings.empty()) result.message = run.warnings.front();
  result.report["status"] = {{"exit_code", static_cast<int>(result.code)},
                             {"message", result.message},
                             {"warnings", run.warnings}};
  result.timings = run.timings;

  write_json(result.report, cfg.out / "report.json");
  write_json(result.timings, cfg.out / "timings.json");
  return result;
}

}  // namespace spoint
