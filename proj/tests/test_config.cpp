#include "doctest.h"

#include "spoint/config.hpp"
#include "spoint/error.hpp"

#include <filesystem>
#include <fstream>

using namespace spoint;

namespace {

const char* const kGaussian = R"(
n = 20          # lattice
orders = 1 2
L_max = 3
scan_lo = -2 -2 -1
scan_hi = 2 2 1
scan_resolution = 10 10 5
alpha_range = 0.5:1.5:0.25
[potential]
shape = gaussian
depth = -8
width = 1
)";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parse a full configuration") {
    const RunConfig c = parse_config(kGaussian);
    CHECK(c.n == 20);
    CHECK(c.orders == std::vector<int>{1, 2});
    CHECK(c.L_max == 3);
    REQUIRE(c.potential);
    CHECK(c.potential->is_radial());
    CHECK(c.potential->radial_profile()(0.0) == doctest::Approx(-8.0));
    const ScanBox b = c.scan_box();
    CHECK(b.lo.isApprox(Point(-2, -2, -1)));
    CHECK(b.resolution == std::array<int, 3>{10, 10, 5});
    REQUIRE(c.alpha_range);
    CHECK(c.alpha_range->values() == std::vector<double>{0.5, 0.75, 1.0, 1.25, 1.5});
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("default scan box is the support cube") {
    const RunConfig c = parse_config("[potential]\nshape = bump\ndepth = -3\nradius = 1.5\n");
    const ScanBox b = c.scan_box();
    CHECK(b.lo.isApprox(Point::Constant(-1.5)));
    CHECK(b.hi.isApprox(Point::Constant(1.5)));
    CHECK(b.resolution[0] == c.scan_resolution);
  }

  TEST_CASE("malformed input is rejected") {
    CHECK_THROWS_AS(parse_config("colour = blue\n"), InputError);
    CHECK_THROWS_AS(parse_config("n = twelve\n"), InputError);
    CHECK_THROWS_AS(parse_config("n = 12.5\n"), InputError);
    CHECK_THROWS_AS(parse_config("n 12\n"), InputError);
    CHECK_THROWS_AS(parse_config("[geometry]\n"), InputError);
    CHECK_THROWS_AS(parse_config("scan_lo = 0 0 0\n"), InputError);
    CHECK_THROWS_AS(parse_config("scan_resolution = 1 2\n"), InputError);
    CHECK_THROWS_AS(parse_config("alpha_units = furlongs\n"), InputError);
    CHECK_THROWS_AS(parse_config("[potential]\nshape = hexagon\n"), InputError);
  }

  TEST_CASE("validation bounds") {
    CHECK_THROWS_AS(parse_config("n = 12\n").validate(), InputError);  // no potential
    const std::string pot = "[potential]\nshape = gaussian\ndepth = -1\nwidth = 1\n";
    CHECK_THROWS_AS(parse_config("n = 3\n" + pot).validate(), InputError);
    CHECK_THROWS_AS(parse_config("n = 49\n" + pot).validate(), InputError);
    CHECK_NOTHROW(parse_config("n = 4\n" + pot).validate());
    CHECK_NOTHROW(parse_config("n = 48\n" + pot).validate());
    CHECK_THROWS_AS(parse_config("orders = 4\n" + pot).validate(), InputError);
    CHECK_THROWS_AS(parse_config("L_max = 5\n" + pot).validate(), InputError);
    CHECK_THROWS_AS(parse_config("n_k = 10\n" + pot).validate(), InputError);
    CHECK_THROWS_AS(parse_config("scan_lo = 1 0 0\nscan_hi = 0 1 1\n" + pot).validate(), InputError);
  }

  TEST_CASE("alpha ranges") {
    const AlphaRange r = parse_alpha_range("1.1:2.0:0.1");
    const auto v = r.values();
    REQUIRE(v.size() == 10);
    CHECK(v.front() == doctest::Approx(1.1));
    CHECK(v.back() == doctest::Approx(2.0));
    CHECK(parse_alpha_range("2:2:1").values().size() == 1);
    CHECK_THROWS_AS(parse_alpha_range("1:2"), InputError);
    CHECK_THROWS_AS(parse_alpha_range("2:1:0.1"), InputError);
    CHECK_THROWS_AS(parse_alpha_range("1:2:0"), InputError);
    CHECK_THROWS_AS(parse_alpha_range("-1:2:0.5"), InputError);
    CHECK_THROWS_AS(parse_alpha_range("a:2:0.5"), InputError);
  }

  TEST_CASE("potential files resolve relative to the config") {
    const auto dir = std::filesystem::temp_directory_path() / "spoint_config_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "well.pot") << "shape = step\ndepth = -4\nradius = 1\n";
    std::ofstream(dir / "run.cfg") << "n = 8\npotential_file = well.pot\n";
    const RunConfig c = load_config(dir / "run.cfg");
    REQUIRE(c.potential);
    CHECK(c.potential->radial_profile()(0.5) == doctest::Approx(-4.0));
    CHECK_THROWS_AS(parse_config("potential_file = missing.pot\n", dir), InputError);
    CHECK_THROWS_AS(load_config(dir / "absent.cfg"), InputError);
    std::filesystem::remove_all(dir);
  }
}
