#include "spoint/lse.hpp"

#include "spoint/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

namespace spoint {

VolumeGrid build_grid(const Ball& ball, int n) {
  if (n < 2) throw InputError("build_grid: resolution must be at least 2");
  if (!(ball.radius > 0.0)) throw InputError("build_grid: ball radius must be positive");
  VolumeGrid g;
  g.ball = ball;
  g.n = n;
  g.h = 2.0 * ball.radius / n;
  g.lattice.origin = ball.center - Point::Constant(ball.radius);
  g.lattice.h = g.h;
  g.lattice.n = n;
  g.lookup.assign(static_cast<std::size_t>(n) * n * n, -1);
  const double w = g.h * g.h * g.h;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Point c = g.lattice.origin + g.h * Point(i + 0.5, j + 0.5, k + 0.5);
        if ((c - ball.center).norm() > ball.radius) continue;
        g.lookup[(static_cast<std::size_t>(i) * n + j) * n + k] = static_cast<int>(g.nodes.size());
        g.nodes.push_back(c);
        g.weights.push_back(w);
        g.cells.push_back({i, j, k});
      }
  return g;
}

double eval_incident(const Incident& inc, const Point& x) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantIncident>) {
          return v.value;
        } else if constexpr (std::is_same_v<T, PolynomialIncident>) {
          return v.p(x);
        } else {
          return 0.25 / (std::numbers::pi * (x - v.y).norm());
        }
      },
      inc);
}

namespace {

constexpr double kPi = std::numbers::pi;
// Width of the Gaussian weight around a pole, in cells.
constexpr double kPoleSigmaCells = 2.0;

Point potential_gradient(const PotentialField& p, const Point& y) {
  Point g = Point::Zero();
  for (const auto& c : p.components()) {
    const Point t = y - c.center;
    const double r = t.norm();
    if (r > 0.0) g += (c.profile.derivatives(r).d1 / r) * t;
  }
  return g;
}

// int e^{-t^2/s^2} / (|t| |x - y - t|) dt at d = |x - y|.
double gaussian_pole_monopole(double s, double d) {
  const double out = 2.0 * std::pow(kPi, 1.5) * s * std::erfc(d / s);
  if (d < 1e-8 * s) return 2.0 * kPi * s * s + out;
  return (2.0 * kPi * s * s / d) * -std::expm1(-d * d / (s * s)) + out;
}

// int e^{-t^2/s^2} cos(t, e) / |x - y - t| dt = value * cos(x - y, e).
double gaussian_pole_dipole(double s, double d) {
  const double u = d * d / (s * s);
  const double in = d < 1e-8 * s ? 0.0 : 0.5 * s * s * s * s * (-std::expm1(-u) - u * std::exp(-u)) / (d * d);
  const double out = 0.5 * std::sqrt(kPi) * s * d * std::erfc(d / s);
  return (4.0 * kPi / 3.0) * (in + out);
}

}  // namespace

PoleSource::PoleSource(const KernelOperator& K, const Point& pole) : y(pole) {
  const auto& g = K.grid();
  q0 = K.potential()(y);
  grad = potential_gradient(K.potential(), y);
  sigma = kPoleSigmaCells * g.h;
  std::vector<double> rho(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const Point t = g.nodes[j] - y;
    const double r = t.norm();
    const double chi = std::exp(-t.squaredNorm() / (sigma * sigma));
    rho[j] = (K.q()[j] - (q0 + grad.dot(t)) * chi) / (4.0 * kPi * r);
  }
  remainder = kernels::Density::build(g, 1, rho);
}

std::vector<double> PoleSource::evaluate(const KernelOperator& K, std::span<const Point> points, bool serial) const {
  std::vector<double> out(points.size());
  if (serial)
    kernels::serial::evaluate(K.grid(), remainder, points, out);
  else
    kernels::parallel::evaluate(K.grid(), remainder, points, out);
  const double gn = grad.norm();
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point t = points[p] - y;
    const double d = t.norm();
    double v = q0 * gaussian_pole_monopole(sigma, d);
    if (gn > 0.0 && d > 0.0) v += gaussian_pole_dipole(sigma, d) * grad.dot(t) / d;
    out[p] += v / (16.0 * kPi * kPi);
  }
  return out;
}

KernelOperator::KernelOperator(std::shared_ptr<const VolumeGrid> grid, PotentialField potential)
    : grid_(std::move(grid)), potential_(std::move(potential)) {
  q_.resize(grid_->size());
  for (std::size_t i = 0; i < q_.size(); ++i) q_[i] = potential_(grid_->nodes[i]);
  kernels::parallel::assemble(*grid_, q_, K_);
}

const Eigen::PartialPivLU<Eigen::MatrixXd>& KernelOperator::lu() const {
  std::call_once(lu_once_, [this] {
    Eigen::MatrixXd A = K_;
    A.diagonal().array() += 1.0;
    lu_ = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(std::move(A));
  });
  return *lu_;
}

double KernelOperator::sigma_min() const {
  std::call_once(sigma_once_, [this] {
    const auto n = static_cast<Eigen::Index>(size());
    if (n == 0) {
      sigma_min_ = 1.0;
      sigma_method_ = "empty";
      return;
    }
    if (static_cast<std::size_t>(n) <= kSvdLimit) {
      Eigen::MatrixXd A = K_;
      A.diagonal().array() += 1.0;
      Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
      sigma_min_ = svd.singularValues()(n - 1);
      sigma_method_ = "svd";
      return;
    }
    // Power iteration on (A^T A)^{-1}: 1/||A^{-1} x|| decreases to sigma_min
    // from above for unit x.
    const auto& f = lu();
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i));
    x.normalize();
    double estimate = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 500; ++it) {
      const Eigen::VectorXd y = f.solve(x);
      const double next = 1.0 / y.norm();
      Eigen::VectorXd z = f.transpose().solve(y);
      x = z / z.norm();
      const bool converged = std::abs(estimate - next) <= 1e-9 * next;
      estimate = next;
      if (converged && it > 3) break;
    }
    sigma_min_ = estimate;
    sigma_method_ = "inverse-iteration";
  });
  return sigma_min_;
}

const std::string& KernelOperator::sigma_method() const {
  sigma_min();
  return sigma_method_;
}

Eigen::MatrixXd KernelOperator::solve(const Eigen::MatrixXd& rhs) const {
  const auto& f = lu();
  Eigen::MatrixXd u = f.solve(rhs);
  Eigen::MatrixXd r = rhs - u - K_ * u;
  u += f.solve(r);
  return u;
}

KernelPtr assemble_kernel(std::shared_ptr<const VolumeGrid> grid, const PotentialField& p) {
  const Ball sb = support_ball(p);
  const Ball& gb = grid->ball;
  if ((sb.center - gb.center).norm() + sb.radius > gb.radius * (1.0 + 1e-12))
    throw InputError("assemble_kernel: grid ball does not cover the potential support");
  return std::make_shared<const KernelOperator>(std::move(grid), p);
}

KernelPtr assemble_kernel(const VolumeGrid& grid, const PotentialField& p) {
  return assemble_kernel(std::make_shared<const VolumeGrid>(grid), p);
}

ConventionCheck check_convention(const KernelOperator& K, double tau) {
  ConventionCheck c;
  c.tau = tau;
  c.sigma_min = K.sigma_min();
  c.ok = c.sigma_min > tau;
  c.method = K.sigma_method();
  return c;
}

std::vector<FieldSolution> solve_fields(const KernelPtr& K, const std::vector<Incident>& incidents,
                                        double tau) {
  const auto& grid = K->grid();
  for (const auto& inc : incidents) {
    if (const auto* pole = std::get_if<PoleIncident>(&inc)) {
      for (const auto& s : grid.nodes)
        if ((s - pole->y).norm() <= 0.1 * grid.h)
          throw InputError("pole incident lies within h/10 of a grid node; offset y");
    }
  }
  const auto check = check_convention(*K, tau);
  if (!check.ok)
    throw ConventionViolated("I+K is numerically singular: sigma_min = " + std::to_string(check.sigma_min) +
                             " <= tau_conv = " + std::to_string(tau));
  const auto n = static_cast<Eigen::Index>(K->size());
  Eigen::MatrixXd rhs(n, static_cast<Eigen::Index>(incidents.size()));
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(incidents.size()));
  for (std::size_t f = 0; f < incidents.size(); ++f) {
    const auto col = static_cast<Eigen::Index>(f);
    if (const auto* pole = std::get_if<PoleIncident>(&incidents[f])) {
      // solve for the regular part
      const std::vector<double> S = PoleSource(*K, pole->y).evaluate(*K, grid.nodes);
      for (Eigen::Index i = 0; i < n; ++i) {
        rhs(i, col) = -S[i];
        singular(i, col) = eval_incident(incidents[f], grid.nodes[i]);
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) rhs(i, col) = eval_incident(incidents[f], grid.nodes[i]);
    }
  }
  const Eigen::MatrixXd v = K->solve(rhs);
  const Eigen::MatrixXd res = rhs - v - K->matrix() * v;
  std::vector<FieldSolution> out;
  out.reserve(incidents.size());
  for (std::size_t f = 0; f < incidents.size(); ++f) {
    const auto col = static_cast<Eigen::Index>(f);
    const double scale = rhs.col(col).norm();
    out.push_back({K, incidents[f], v.col(col) + singular.col(col),
                   scale > 0.0 ? res.col(col).norm() / scale : res.col(col).norm()});
  }
  return out;
}

FieldSolution solve_field(const KernelPtr& K, const Incident& incident, double tau) {
  return std::move(solve_fields(K, {incident}, tau).front());
}

FieldSolution green_function(const KernelPtr& K, const Point& y, double tau) {
  return solve_field(K, PoleIncident{y}, tau);
}

FieldBatch::FieldBatch(std::span<const FieldSolution> fields) {
  if (fields.empty()) throw InputError("FieldBatch: no fields");
  op_ = fields.front().op;
  for (const auto& f : fields) {
    if (f.op != op_) throw InputError("FieldBatch: fields must share one operator");
    incidents_.push_back(f.incident);
  }
  const auto& grid = op_->grid();
  const auto& q = op_->q();
  const auto F = static_cast<int>(fields.size());
  std::vector<double> f(q.size() * F);
  for (int k = 0; k < F; ++k) {
    const auto* pole = std::get_if<PoleIncident>(&incidents_[k]);
    if (pole) poles_.emplace_back(k, PoleSource(*op_, pole->y));
    for (std::size_t j = 0; j < q.size(); ++j) {
      double u = fields[k].values(static_cast<Eigen::Index>(j));
      if (pole) u -= eval_incident(incidents_[k], grid.nodes[j]);
      f[j * F + k] = q[j] * u;
    }
  }
  density_ = kernels::Density::build(grid, F, f);
}

namespace {

void add_incidents(std::span<const Point> points, const std::vector<Incident>& incidents,
                   std::vector<double>& out) {
  const auto F = incidents.size();
  for (std::size_t p = 0; p < points.size(); ++p)
    for (std::size_t f = 0; f < F; ++f) out[p * F + f] = eval_incident(incidents[f], points[p]) - out[p * F + f];
}

}  // namespace

std::vector<double> FieldBatch::evaluate(std::span<const Point> points) const {
  const int F = fields();
  std::vector<double> out(points.size() * F);
  kernels::parallel::evaluate(op_->grid(), density_, points, out);
  add_incidents(points, incidents_, out);
  for (const auto& [k, src] : poles_) {
    const std::vector<double> S = src.evaluate(*op_, points);
    for (std::size_t p = 0; p < points.size(); ++p) out[p * F + k] -= S[p];
  }
  return out;
}

std::vector<double> FieldBatch::evaluate_serial(std::span<const Point> points) const {
  const int F = fields();
  std::vector<double> out(points.size() * F);
  kernels::serial::evaluate(op_->grid(), density_, points, out);
  add_incidents(points, incidents_, out);
  for (const auto& [k, src] : poles_) {
    const std::vector<double> S = src.evaluate(*op_, points, true);
    for (std::size_t p = 0; p < points.size(); ++p) out[p * F + k] -= S[p];
  }
  return out;
}

double FieldBatch::distance_to_active_node(const Point& x) const {
  const auto& grid = op_->grid();
  const auto& q = op_->q();
  const auto c = grid.lattice.cell_of(x);
  double best = std::numeric_limits<double>::infinity();
  // A node closer than h/2 must sit in the cell of x or an adjacent one.
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj)
      for (int dk = -1; dk <= 1; ++dk) {
        const int id = grid.node_at({c[0] + di, c[1] + dj, c[2] + dk});
        if (id < 0 || q[id] == 0.0) continue;
        best = std::min(best, (grid.nodes[id] - x).norm());
      }
  return best;
}

double eval_field(const FieldSolution& u, const Point& x) {
  FieldBatch batch(std::span<const FieldSolution>(&u, 1));
  if (batch.distance_to_active_node(x) <= 0.1 * u.op->grid().h)
    throw InputError("eval_field: point within h/10 of a grid node; use the node value");
  const Point pts[1] = {x};
  return batch.evaluate(pts).front();
}

void write_field_csv(const FieldSolution& u, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "# x y z value\n" << std::setprecision(17);
  const auto& nodes = u.op->grid().nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out << nodes[i].x() << ' ' << nodes[i].y() << ' ' << nodes[i].z() << ' '
        << u.values(static_cast<Eigen::Index>(i)) << '\n';
}

}  // namespace spoint
