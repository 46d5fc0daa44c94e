#include "doctest.h"

#include "spoint/pipeline.hpp"
#include "spoint/radial.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spoint;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spoint_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig config(const std::string& text, const std::string& name) {
  RunConfig c = parse_config(text);
  c.out = scratch(name);
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const std::string kFree = "n = 8\nscan_resolution = 6\n[potential]\nshape = bump\ndepth = 0\nradius = 1\n";
const std::string kGauss = "n = 10\nL_max = 1\nscan_resolution = 8\n[potential]\nshape = gaussian\ndepth = -1\nwidth = 1\n";

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("commands round-trip through their names") {
    for (Command c : {Command::kConvention, Command::kScan, Command::kRadial, Command::kLevinson, Command::kSweep,
                      Command::kAll})
      CHECK(parse_command(to_string(c)) == c);
    CHECK_THROWS_AS(parse_command("everything"), InputError);
  }

  TEST_CASE("free convention") {
    const RunConfig c = config(kFree, "free_convention");
    const RunResult r = run_pipeline(Command::kConvention, c);
    CHECK(r.code == ExitCode::kOk);
    CHECK(r.report["schema"] == kReportSchema);
    CHECK(r.report["convention"]["ok"] == true);
    CHECK(r.report["convention"]["sigma_min"]["value"].get<double>() == doctest::Approx(1.0));
    CHECK(fs::exists(c.out / "report.json"));
    CHECK(fs::exists(c.out / "timings.json"));
    CHECK(r.report["status"]["exit_code"] == 0);
  }

  TEST_CASE("a critical coupling violates the convention") {
    const double alpha_c = critical_couplings(RadialProfile::gaussian(-1.0, 1.0), 0, 4.0).front();
    std::ostringstream text;
    text.precision(17);
    text << "n = 8\n[potential]\nshape = gaussian\ndepth = " << -alpha_c << "\nwidth = 1\n";
    const RunResult r = run_pipeline(Command::kConvention, config(text.str(), "critical"));
    CHECK(r.code == ExitCode::kConventionViolated);
    CHECK(r.report["convention"]["ok"] == false);
    CHECK(!r.report["status"]["warnings"].empty());
  }

  TEST_CASE("scans") {
    const RunConfig c = config(kFree, "free_scan");
    const RunResult free = run_pipeline(Command::kScan, c);
    CHECK(free.code == ExitCode::kOk);
    CHECK(free.report["scans"][0]["candidates"].empty());
    CHECK(fs::exists(c.out / "scan_m1.csv"));

    const std::string two =
        "n = 10\nscan_resolution = 6\n[potential]\n"
        "shape = bump\ndepth = -12\nradius = 1\ncenter = -1.2 0 0\n"
        "shape = bump\ndepth = -12\nradius = 1\ncenter = 1.2 0 0\n";
    const RunResult r = run_pipeline(Command::kScan, config(two, "two_bumps"));
    CHECK(r.code == ExitCode::kOk);
    CHECK(r.report["scans"][0]["radial_oracle"]["oracle"] == "none");
  }

  TEST_CASE("radial stages need a radial potential") {
    const std::string two =
        "n = 8\n[potential]\nshape = bump\ndepth = -1\nradius = 1\ncenter = -1 0 0\n"
        "shape = bump\ndepth = -1\nradius = 1\ncenter = 1 0 0\n";
    const RunResult r = run_pipeline(Command::kRadial, config(two, "nonradial"));
    CHECK(r.code == ExitCode::kInputError);
    CHECK(!r.message.empty());
  }

  TEST_CASE("reports are reproducible byte for byte") {
    const RunConfig a = config(kGauss, "repro_a");
    const RunConfig b = config(kGauss, "repro_b");
    run_pipeline(Command::kAll, a);
    run_pipeline(Command::kAll, b);
    const std::string ra = slurp(a.out / "report.json");
    CHECK(!ra.empty());
    CHECK(ra == slurp(b.out / "report.json"));
    CHECK(slurp(a.out / "scan_m1.csv") == slurp(b.out / "scan_m1.csv"));
  }

  TEST_CASE("sweeps") {
    const RunResult sub = run_pipeline(Command::kSweep, config("alpha_range = 0.5:0.9:0.2\n" + kGauss, "sweep_sub"));
    REQUIRE(sub.code == ExitCode::kOk);
    for (const auto& row : sub.report["sweep"]["rows"]) {
      CHECK(row["classification"] == "no bound state, no s-sphere");
      CHECK(row["conjecture_consistent"] == true);
    }

    const RunResult super = run_pipeline(Command::kSweep, config("alpha_range = 1.1:2.0:0.1\n" + kGauss, "sweep_super"));
    REQUIRE(super.code == ExitCode::kOk);
    double previous = 1e300;
    for (const auto& row : super.report["sweep"]["rows"]) {
      CHECK(row["classification"] == "bound state, s-sphere");
      const double R = row["spheres_m1"][0].get<double>();
      CHECK(R < previous);
      previous = R;
    }

    const RunResult across = run_pipeline(Command::kSweep, config("alpha_range = 0.5:1.5:0.25\n" + kGauss, "sweep_across"));
    CHECK(across.code == ExitCode::kInputError);
    CHECK(across.message.find("critical") != std::string::npos);
  }

  TEST_CASE("free Levinson table") {
    const RunResult r = run_pipeline(Command::kLevinson, config(kFree, "free_levinson"));
    CHECK(r.code == ExitCode::kOk);
    CHECK(r.report["levinson"]["index"] == 0);
    for (const auto& ch : r.report["levinson"]["channels"]) {
      CHECK(ch["bound_states"] == 0);
      CHECK(ch["delta_threshold"].get<double>() == 0.0);
    }
  }
}
