#include "spoint/config.hpp"

#include "spoint/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace spoint {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> numbers(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError("config: '" + key + "' expects numbers, got '" + v + "'");
    }
  }
  if (out.empty()) throw InputError("config: '" + key + "' has no value");
  return out;
}

double number(const std::string& key, const std::string& v) {
  const auto n = numbers(key, v);
  if (n.size() != 1) throw InputError("config: '" + key + "' expects one number");
  return n.front();
}

int integer(const std::string& key, const std::string& v) {
  const double d = number(key, v);
  if (d != std::floor(d)) throw InputError("config: '" + key + "' expects an integer");
  return static_cast<int>(d);
}

bool boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("config: '" + key + "' expects true or false");
}

Point point3(const std::string& key, const std::string& v) {
  const auto n = numbers(key, v);
  if (n.size() != 3) throw InputError("config: '" + key + "' expects three numbers");
  return {n[0], n[1], n[2]};
}

}  // namespace

std::vector<double> AlphaRange::values() const {
  std::vector<double> out;
  const long count = std::lround(std::floor((to - from) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) out.push_back(from + step * static_cast<double>(i));
  return out;
}

AlphaRange parse_alpha_range(const std::string& s) {
  const auto a = s.find(':');
  const auto b = a == std::string::npos ? a : s.find(':', a + 1);
  if (b == std::string::npos) throw InputError("alpha range must be A:B:STEP, got '" + s + "'");
  AlphaRange r;
  r.from = number("alpha_range", s.substr(0, a));
  r.to = number("alpha_range", s.substr(a + 1, b - a - 1));
  r.step = number("alpha_range", s.substr(b + 1));
  if (!(r.step > 0.0) || r.to < r.from || r.from < 0.0)
    throw InputError("alpha range needs 0 <= A <= B and STEP > 0");
  return r;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section;
  std::string potential_text;
  std::optional<Point> lo, hi;
  std::optional<std::array<int, 3>> res;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body != "[potential]") throw InputError("config line " + std::to_string(lineno) + ": unknown section " + body);
      section = "potential";
      continue;
    }
    if (section == "potential") {
      potential_text += body + "\n";
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string v = trim(body.substr(eq + 1));
    if (key == "n") {
      c.n = integer(key, v);
    } else if (key == "orders" || key == "m") {
      c.orders.clear();
      for (double d : numbers(key, v)) c.orders.push_back(static_cast<int>(d));
    } else if (key == "L_max") {
      c.L_max = integer(key, v);
    } else if (key == "k_max") {
      c.k_max = number(key, v);
    } else if (key == "n_k") {
      c.n_k = integer(key, v);
    } else if (key == "tau_conv") {
      c.tau_conv = number(key, v);
    } else if (key == "tau_rel") {
      c.tau_rel = number(key, v);
    } else if (key == "radial_step") {
      c.radial_step = number(key, v);
    } else if (key == "richardson") {
      c.richardson = boolean(key, v);
    } else if (key == "phi_samples") {
      c.phi_samples = integer(key, v);
    } else if (key == "out") {
      c.out = v;
    } else if (key == "scan_lo") {
      lo = point3(key, v);
    } else if (key == "scan_hi") {
      hi = point3(key, v);
    } else if (key == "scan_resolution") {
      const auto n = numbers(key, v);
      if (n.size() == 1) {
        c.scan_resolution = static_cast<int>(n[0]);
      } else if (n.size() == 3) {
        res = std::array<int, 3>{static_cast<int>(n[0]), static_cast<int>(n[1]), static_cast<int>(n[2])};
      } else {
        throw InputError("config: scan_resolution expects one or three integers");
      }
    } else if (key == "alpha_range") {
      c.alpha_range = parse_alpha_range(v);
    } else if (key == "alpha_units") {
      if (v != "critical" && v != "absolute") throw InputError("config: alpha_units is critical or absolute");
      c.alpha_relative = v == "critical";
    } else if (key == "allow_critical") {
      c.allow_critical = boolean(key, v);
    } else if (key == "potential_file") {
      std::filesystem::path p = v;
      if (p.is_relative()) p = base_dir / p;
      std::ifstream f(p);
      if (!f) throw InputError("cannot read potential file " + p.string());
      std::stringstream ss;
      ss << f.rdbuf();
      potential_text += ss.str();
    } else {
      throw InputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!potential_text.empty()) {
    c.potential = parse_potential(potential_text, base_dir);
    c.potential_source = potential_text;
  }
  if (lo || hi || res) {
    if (!lo || !hi) throw InputError("config: scan_lo and scan_hi must be given together");
    ScanBox b;
    b.lo = *lo;
    b.hi = *hi;
    b.resolution = res.value_or(std::array<int, 3>{c.scan_resolution, c.scan_resolution, c.scan_resolution});
    c.box = b;
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void RunConfig::validate() const {
  if (!potential) throw InputError("config: no potential given ([potential] section or potential_file)");
  if (n < 4 || n > 48) throw InputError("config: n must be in [4, 48]");
  if (!(tau_conv > 0.0) || !(tau_rel > 0.0)) throw InputError("config: thresholds must be positive");
  if (!(radial_step > 0.0)) throw InputError("config: radial_step must be positive");
  if (orders.empty()) throw InputError("config: orders is empty");
  for (int m : orders)
    if (m < 1 || m > 3) throw InputError("config: orders must be 1, 2 or 3");
  if (L_max < 0 || L_max > 4) throw InputError("config: L_max must be in [0, 4]");
  if (n_k < 64) throw InputError("config: n_k must be at least 64");
  if (k_max < 0.0) throw InputError("config: k_max must be nonnegative");
  if (phi_samples < 1) throw InputError("config: phi_samples must be positive");
  const ScanBox b = scan_box();
  for (int a = 0; a < 3; ++a)
    if (b.resolution[a] < 1 || b.hi[a] < b.lo[a]) throw InputError("config: invalid scan box");
}

ScanBox RunConfig::scan_box() const {
  if (box) return *box;
  ScanBox b;
  const Ball ball = support_ball(*potential);
  b.lo = ball.center - Point::Constant(ball.radius);
  b.hi = ball.center + Point::Constant(ball.radius);
  b.resolution = {scan_resolution, scan_resolution, scan_resolution};
  return b;
}

}  // namespace spoint
