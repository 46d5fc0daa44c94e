#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace spoint {

using Point = Eigen::Vector3d;

/// Value of a radial function together with its first two r-derivatives.
struct RadialValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Profile shapes. Depth is the signed value at r = 0 (negative = attractive).
struct Gaussian {
  double depth = -1.0;
  double width = 1.0;
};

/// C-infinity mollifier depth * exp(1 - 1/(1 - (r/radius)^2)), zero for r >= radius.
struct Bump {
  double depth = -1.0;
  double radius = 1.0;
};

/// Constant depth on [0, radius). Not smooth; accepted for closed-form checks
/// of the radial pipeline and scattering module.
struct Step {
  double depth = -1.0;
  double radius = 1.0;
};

/// Sampled (r, value) pairs interpolated by a clamped cubic spline with zero
/// slope at both ends. The last sample defines the support radius and must be 0.
struct Table {
  std::vector<double> r;
  std::vector<double> value;
  std::vector<double> second;  // spline second derivatives at the samples
};

using Shape = std::variant<Gaussian, Bump, Step, Table>;

inline constexpr double kGaussianTruncation = 1e-12;
inline constexpr double kTaperFraction = 0.05;

class RadialProfile {
 public:
  static RadialProfile gaussian(double depth, double width);
  static RadialProfile bump(double depth, double radius);
  static RadialProfile step(double depth, double radius);
  /// Throws InputError when r is not strictly increasing, sizes differ or the
  /// profile does not end at zero.
  static RadialProfile table(std::vector<double> r, std::vector<double> value);

  double operator()(double r) const { return derivatives(r).value; }
  /// q, q', q'' at r (coupling included). Zero beyond the support radius.
  RadialValue derivatives(double r) const;

  const Shape& shape() const { return shape_; }
  double coupling() const { return coupling_; }
  double support_radius() const { return support_radius_; }
  bool smooth() const { return !std::holds_alternative<Step>(shape_); }
  bool identically_zero() const;

  RadialProfile with_coupling(double alpha) const;

 private:
  RadialProfile(Shape shape, double support_radius)
      : shape_(std::move(shape)), support_radius_(support_radius) {}

  Shape shape_;
  double coupling_ = 1.0;
  double support_radius_ = 0.0;
};

struct Ball {
  Point center = Point::Zero();
  double radius = 0.0;
};

class PotentialField {
 public:
  struct Component {
    RadialProfile profile;
    Point center;
  };

  PotentialField() = default;
  explicit PotentialField(std::vector<Component> components);
  /// Single profile centred at the origin.
  explicit PotentialField(RadialProfile profile);

  /// The zero potential (empty list is not allowed, so it is a zero-depth bump).
  static PotentialField zero();

  double operator()(const Point& x) const;

  const std::vector<Component>& components() const { return components_; }
  bool is_radial() const;
  /// The profile of a radially symmetric field; throws InputError otherwise.
  const RadialProfile& radial_profile() const;
  bool identically_zero() const;

  PotentialField with_coupling(double alpha) const;

 private:
  std::vector<Component> components_;
};

double eval_potential(const PotentialField& p, const Point& x);

/// Smallest ball containing every component support ball. Exact for one or two
/// components; for more, an enclosing ball from a Badoiu-Clarkson iteration.
Ball support_ball(const PotentialField& p);

/// Throws InputError for alpha < 0.
PotentialField with_coupling(const PotentialField& p, double alpha);

/// key=value definition: shape, depth, width, radius, center, coupling, table.
/// A new `shape` key starts a new component.
PotentialField parse_potential(const std::string& text,
                               const std::filesystem::path& base_dir = {});
PotentialField load_potential(const std::filesystem::path& path);
/// Two-column CSV (r, value); '#' lines and a non-numeric header are skipped.
RadialProfile load_table_csv(const std::filesystem::path& path);

}  // namespace spoint
