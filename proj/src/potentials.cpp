#include "spoint/potentials.hpp"

#include "spoint/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spoint {

namespace {

// Second-order forward-mode jet in r.
struct Jet {
  double v, d1, d2;
};

Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
Jet operator*(Jet a, Jet b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
Jet operator*(double s, Jet a) { return {s * a.v, s * a.d1, s * a.d2}; }
Jet operator+(double s, Jet a) { return {s + a.v, a.d1, a.d2}; }
Jet reciprocal(Jet a) {
  const double inv = 1.0 / a.v;
  const double d1 = -a.d1 * inv * inv;
  const double d2 = (2.0 * a.d1 * a.d1 * inv - a.d2) * inv * inv;
  return {inv, d1, d2};
}
Jet operator/(Jet a, Jet b) { return a * reciprocal(b); }
Jet exp(Jet a) {
  const double e = std::exp(a.v);
  return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
}

// exp(-1/t) for t > 0, 0 otherwise.
Jet smooth_zero(Jet t) {
  // exp(-1/t) underflows below t = 1e-3; skip to avoid inf * 0 in the jet.
  if (t.v <= 1e-3) return {0.0, 0.0, 0.0};
  return exp(-1.0 * reciprocal(t));
}

// 1 for t <= 0, 0 for t >= 1, C-infinity in between.
Jet smooth_step_down(Jet t) {
  if (t.v <= 0.0) return {1.0, 0.0, 0.0};
  if (t.v >= 1.0) return {0.0, 0.0, 0.0};
  const Jet a = smooth_zero(1.0 + (-1.0 * t));
  const Jet b = smooth_zero(t);
  return a / (a + b);
}

Jet gaussian_jet(const Gaussian& g, double support, double r) {
  const Jet x{r / g.width, 1.0 / g.width, 0.0};
  Jet v = g.depth * exp(-1.0 * (x * x));
  const double taper_start = (1.0 - kTaperFraction) * support;
  if (r > taper_start) {
    const double len = kTaperFraction * support;
    v = v * smooth_step_down(Jet{(r - taper_start) / len, 1.0 / len, 0.0});
  }
  return v;
}

Jet bump_jet(const Bump& b, double r) {
  const Jet s{r / b.radius, 1.0 / b.radius, 0.0};
  const Jet one_minus = 1.0 + (-1.0 * (s * s));
  if (one_minus.v <= 1e-3) return {0.0, 0.0, 0.0};
  return b.depth * exp(1.0 + (-1.0 * reciprocal(one_minus)));
}

// Natural second-derivative solve for a clamped cubic spline (zero end slopes).
std::vector<double> clamped_spline(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> u(n, 0.0), m(n, 0.0);
  // Boundary rows encode y'(x0) = 0 and y'(x_{n-1}) = 0.
  {
    const double h = x[1] - x[0];
    m[0] = -0.5;
    u[0] = (3.0 / h) * ((y[1] - y[0]) / h);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
    const double p = sig * m[i - 1] + 2.0;
    m[i] = (sig - 1.0) / p;
    const double du = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    u[i] = (6.0 * du / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
  }
  const double h = x[n - 1] - x[n - 2];
  const double un = (3.0 / h) * (0.0 - (y[n - 1] - y[n - 2]) / h);
  const double qn = 0.5;
  m[n - 1] = (un - qn * u[n - 2]) / (qn * m[n - 2] + 1.0);
  for (std::size_t k = n - 1; k-- > 0;) m[k] = m[k] * m[k + 1] + u[k];
  return m;
}

RadialValue table_eval(const Table& t, double r) {
  const auto& x = t.r;
  if (r <= x.front()) return {t.value.front(), 0.0, 0.0};
  if (r >= x.back()) return {0.0, 0.0, 0.0};
  const auto it = std::upper_bound(x.begin(), x.end(), r);
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double h = x[hi] - x[lo];
  const double a = (x[hi] - r) / h;
  const double b = (r - x[lo]) / h;
  const double ylo = t.value[lo], yhi = t.value[hi];
  const double mlo = t.second[lo], mhi = t.second[hi];
  RadialValue out;
  out.value = a * ylo + b * yhi + ((a * a * a - a) * mlo + (b * b * b - b) * mhi) * h * h / 6.0;
  out.d1 = (yhi - ylo) / h - (3.0 * a * a - 1.0) / 6.0 * h * mlo + (3.0 * b * b - 1.0) / 6.0 * h * mhi;
  out.d2 = a * mlo + b * mhi;
  return out;
}

}  // namespace

RadialProfile RadialProfile::gaussian(double depth, double width) {
  if (!(width > 0.0)) throw InputError("gaussian width must be positive");
  const double mag = std::abs(depth);
  const double support = mag > kGaussianTruncation
                             ? width * std::sqrt(std::log(mag / kGaussianTruncation))
                             : 0.0;
  return RadialProfile(Gaussian{depth, width}, support);
}

RadialProfile RadialProfile::bump(double depth, double radius) {
  if (!(radius > 0.0)) throw InputError("bump radius must be positive");
  return RadialProfile(Bump{depth, radius}, radius);
}

RadialProfile RadialProfile::step(double depth, double radius) {
  if (!(radius > 0.0)) throw InputError("step radius must be positive");
  return RadialProfile(Step{depth, radius}, radius);
}

RadialProfile RadialProfile::table(std::vector<double> r, std::vector<double> value) {
  if (r.size() != value.size()) throw InputError("table: r and value columns differ in length");
  if (r.size() < 3) throw InputError("table: need at least 3 samples");
  if (r.front() < 0.0) throw InputError("table: negative radius");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1])) throw InputError("table: r samples are not strictly increasing");
  double vmax = 0.0;
  for (double v : value) vmax = std::max(vmax, std::abs(v));
  if (std::abs(value.back()) > 1e-12 * std::max(vmax, 1.0))
    throw InputError("table: last sample must be zero (compact support)");
  value.back() = 0.0;
  Table t{std::move(r), std::move(value), {}};
  t.second = clamped_spline(t.r, t.value);
  const double support = t.r.back();
  return RadialProfile(std::move(t), support);
}

RadialValue RadialProfile::derivatives(double r) const {
  r = std::abs(r);
  if (r >= support_radius_) return {};
  RadialValue out = std::visit(
      [&](const auto& s) -> RadialValue {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          const Jet j = gaussian_jet(s, support_radius_, r);
          return {j.v, j.d1, j.d2};
        } else if constexpr (std::is_same_v<T, Bump>) {
          const Jet j = bump_jet(s, r);
          return {j.v, j.d1, j.d2};
        } else if constexpr (std::is_same_v<T, Step>) {
          return {s.depth, 0.0, 0.0};
        } else {
          return table_eval(s, r);
        }
      },
      shape_);
  out.value *= coupling_;
  out.d1 *= coupling_;
  out.d2 *= coupling_;
  return out;
}

RadialProfile RadialProfile::with_coupling(double alpha) const {
  RadialProfile copy = *this;
  copy.coupling_ *= alpha;
  return copy;
}

PotentialField::PotentialField(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InputError("potential has no components");
}

PotentialField::PotentialField(RadialProfile profile)
    : components_{Component{std::move(profile), Point::Zero()}} {}

PotentialField PotentialField::zero() {
  return PotentialField(RadialProfile::bump(0.0, 1.0));
}

double PotentialField::operator()(const Point& x) const {
  double sum = 0.0;
  for (const auto& c : components_) sum += c.profile((x - c.center).norm());
  return sum;
}

bool PotentialField::is_radial() const {
  return components_.size() == 1 && components_.front().center.isZero(0.0);
}

const RadialProfile& PotentialField::radial_profile() const {
  if (!is_radial()) throw InputError("potential is not radially symmetric about the origin");
  return components_.front().profile;
}

bool RadialProfile::identically_zero() const {
  if (coupling_ == 0.0 || support_radius_ == 0.0) return true;
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Table>) {
          return std::all_of(s.value.begin(), s.value.end(), [](double v) { return v == 0.0; });
        } else {
          return s.depth == 0.0;
        }
      },
      shape_);
}

bool PotentialField::identically_zero() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const Component& c) { return c.profile.identically_zero(); });
}

PotentialField PotentialField::with_coupling(double alpha) const {
  if (alpha < 0.0) throw InputError("coupling must be nonnegative");
  PotentialField out = *this;
  for (auto& c : out.components_) c.profile = c.profile.with_coupling(alpha);
  return out;
}

double eval_potential(const PotentialField& p, const Point& x) { return p(x); }

PotentialField with_coupling(const PotentialField& p, double alpha) { return p.with_coupling(alpha); }

Ball support_ball(const PotentialField& p) {
  const auto& comps = p.components();
  if (comps.empty()) throw InputError("potential has no components");
  auto enclosing_radius = [&](const Point& c) {
    double r = 0.0;
    for (const auto& k : comps) r = std::max(r, (k.center - c).norm() + k.profile.support_radius());
    return r;
  };
  if (comps.size() == 1) return {comps[0].center, comps[0].profile.support_radius()};
  if (comps.size() == 2) {
    const auto& a = comps[0];
    const auto& b = comps[1];
    const double ra = a.profile.support_radius(), rb = b.profile.support_radius();
    const double d = (b.center - a.center).norm();
    if (d + rb <= ra) return {a.center, ra};
    if (d + ra <= rb) return {b.center, rb};
    const double radius = 0.5 * (d + ra + rb);
    const Point dir = (b.center - a.center) / d;
    return {a.center + (radius - ra) * dir, radius};
  }
  // Badoiu-Clarkson: step toward the farthest supporting point with 1/(k+1).
  Point c = Point::Zero();
  for (const auto& k : comps) c += k.center;
  c /= static_cast<double>(comps.size());
  for (int it = 1; it <= 4000; ++it) {
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const double r = (comps[i].center - c).norm() + comps[i].profile.support_radius();
      if (r > best) best = r, far = i;
    }
    Point dir = c - comps[far].center;
    const double dn = dir.norm();
    dir = dn > 0.0 ? Point(dir / dn) : Point(Point::UnitX());
    const Point farthest = comps[far].center + comps[far].profile.support_radius() * dir;
    c += (farthest - c) / (it + 1.0);
  }
  return {c, enclosing_radius(c)};
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw InputError("potential: cannot parse number for '" + key + "': " + v);
}

Point to_point(const std::string& key, std::string v) {
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  Point p;
  if (!(in >> p.x() >> p.y() >> p.z())) throw InputError("potential: '" + key + "' needs three coordinates");
  std::string rest;
  if (in >> rest) throw InputError("potential: '" + key + "' has trailing text");
  return p;
}

struct ComponentSpec {
  std::string shape;
  double depth = -1.0;
  double width = 1.0;
  double radius = 1.0;
  double coupling = 1.0;
  Point center = Point::Zero();
  std::string table;
  bool has_radius = false;
};

}  // namespace

PotentialField parse_potential(const std::string& text, const std::filesystem::path& base_dir) {
  std::vector<ComponentSpec> specs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("potential: line " + std::to_string(lineno) + " is not key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "shape") {
      specs.emplace_back();
      specs.back().shape = value;
      continue;
    }
    if (specs.empty()) throw InputError("potential: '" + key + "' given before any 'shape'");
    auto& s = specs.back();
    if (key == "depth") s.depth = to_double(key, value);
    else if (key == "width") s.width = to_double(key, value);
    else if (key == "radius") s.radius = to_double(key, value), s.has_radius = true;
    else if (key == "coupling") s.coupling = to_double(key, value);
    else if (key == "center") s.center = to_point(key, value);
    else if (key == "table") s.table = value;
    else throw InputError("potential: unknown key '" + key + "'");
  }
  if (specs.empty()) throw InputError("potential: no component defined");

  std::vector<PotentialField::Component> comps;
  for (const auto& s : specs) {
    if (s.coupling < 0.0) throw InputError("potential: coupling must be nonnegative");
    RadialProfile prof = [&] {
      if (s.shape == "gaussian") return RadialProfile::gaussian(s.depth, s.width);
      if (s.shape == "bump") return RadialProfile::bump(s.depth, s.radius);
      if (s.shape == "step") return RadialProfile::step(s.depth, s.radius);
      if (s.shape == "zero") return RadialProfile::bump(0.0, 1.0);
      if (s.shape == "table") {
        if (s.table.empty()) throw InputError("potential: table shape needs 'table=<csv path>'");
        std::filesystem::path path(s.table);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        return load_table_csv(path);
      }
      throw InputError("potential: unknown shape '" + s.shape + "'");
    }();
    comps.push_back({prof.with_coupling(s.coupling), s.center});
  }
  return PotentialField(std::move(comps));
}

PotentialField load_potential(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open potential file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_potential(ss.str(), path.parent_path());
}

RadialProfile load_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open table " + path.string());
  std::vector<double> r, v;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a = 0.0, b = 0.0;
    if (!(ls >> a >> b)) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw InputError("table: malformed row '" + line + "'");
    }
    first = false;
    r.push_back(a);
    v.push_back(b);
  }
  return RadialProfile::table(std::move(r), std::move(v));
}

}  // namespace spoint
