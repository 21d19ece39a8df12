#include "sol/plants.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sol/errors.hpp"

namespace sol {
namespace {

constexpr double kMassMatrixMaxCondition = 1e12;

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    throw std::invalid_argument(std::string("plant: ") + what + " must be positive");
  }
}

Eigen::VectorXd pendulum_dynamics(const PendulumParams& p, const Eigen::VectorXd& x, double u) {
  Eigen::VectorXd dx(2);
  dx[0] = -x[1];
  dx[1] = -(p.gravity / p.length) * std::sin(x[0]) - (p.friction / p.mass) * x[1] +
          u / (p.mass * p.length * p.length);
  return dx;
}

Eigen::VectorXd lorenz_dynamics(const LorenzParams& p, const Eigen::VectorXd& x, double u) {
  Eigen::VectorXd dx(3);
  dx[0] = p.sigma * (x[1] - x[0]) + u;
  dx[1] = -x[1] + x[0] * (p.rho - x[2]);
  dx[2] = x[0] * x[1] - p.beta * x[2];
  return dx;
}

Eigen::VectorXd cartpole_dynamics(const CartpoleParams& p, const Eigen::VectorXd& x, double u) {
  const double s = std::sin(x[0]);
  const double c = std::cos(x[0]);
  const double m = p.pole_mass, M = p.cart_mass, L = p.pole_length, g = p.gravity;
  const double denom = M + m * s * s;
  Eigen::VectorXd dx(4);
  dx[0] = x[1];
  dx[1] = (-u * c - m * L * x[1] * x[1] * s * c + (M + m) * g * s) / (L * denom);
  dx[2] = x[3];
  dx[3] = (u + m * s * (L * x[1] * x[1] - g * c)) / denom;
  return dx;
}

Eigen::VectorXd double_pendulum_dynamics(const DoublePendulumParams& p, const Eigen::VectorXd& x,
                                         double u) {
  const double th1 = x[1], th2 = x[2];
  const double dq = x[3], dth1 = x[4], dth2 = x[5];
  const double s1 = std::sin(th1), c1 = std::cos(th1);
  const double s2 = std::sin(th2), c2 = std::cos(th2);
  const double s12 = std::sin(th1 - th2), c12 = std::cos(th1 - th2);
  const double m12 = p.mass1 + p.mass2;

  Eigen::Matrix3d mass;
  mass << p.cart_mass + m12, p.length1 * m12 * c1, p.mass2 * p.length2 * c2,
      p.length1 * m12 * c1, p.length1 * p.length1 * m12, p.length1 * p.length2 * p.mass2 * c12,
      p.length2 * p.mass2 * c2, p.length1 * p.length2 * p.mass2 * c12,
      p.length2 * p.length2 * p.mass2;

  Eigen::Vector3d rhs;
  rhs[0] = p.length1 * m12 * dth1 * dth1 * s1 + p.mass2 * p.length2 * dth2 * dth2 * s2 -
           p.damping_cart * dq + u;
  rhs[1] = -p.length1 * p.length2 * p.mass2 * dth2 * dth2 * s12 +
           p.gravity * m12 * p.length1 * s1 - p.damping1 * th1;
  rhs[2] = p.length1 * p.length2 * p.mass2 * dth1 * dth1 * s12 +
           p.gravity * p.length2 * p.mass2 * s2 - p.damping2 * th2;

  // The mass matrix is symmetric positive definite for physical parameters;
  // guard conditioning before trusting the solve.
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eigs(mass);
  const double lo = eigs.eigenvalues().minCoeff();
  const double hi = eigs.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMassMatrixMaxCondition) {
    throw NumericalError("double pendulum: mass matrix is singular or ill-conditioned");
  }
  const Eigen::Vector3d accel = mass.ldlt().solve(rhs);

  Eigen::VectorXd dx(6);
  dx[0] = dq;
  dx[1] = dth1;
  dx[2] = dth2;
  dx[3] = accel[0];
  dx[4] = accel[1];
  dx[5] = accel[2];
  return dx;
}

Eigen::VectorXd box(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double d : values) v[k++] = d;
  return v;
}

}  // namespace

int PlantSpec::state_dim() const {
  switch (id) {
    case PlantId::kPendulum:
      return 2;
    case PlantId::kLorenz:
      return 3;
    case PlantId::kCartpole:
      return 4;
    case PlantId::kDoublePendulum:
      return 6;
  }
  return 0;  // unreachable
}

void PlantSpec::validate() const {
  const int n = state_dim();
  if (domain_lower.size() != n || domain_upper.size() != n) {
    throw std::invalid_argument("plant: domain box must match the state dimension");
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(domain_lower[i]) || !std::isfinite(domain_upper[i]) ||
        !(domain_lower[i] < domain_upper[i])) {
      throw std::invalid_argument("plant: domain bounds must be finite with lower < upper");
    }
  }
  if (!(timeout_s > 0.0)) throw std::invalid_argument("plant: timeout must be positive");

  if (const auto* p = std::get_if<PendulumParams>(&params)) {
    if (id != PlantId::kPendulum) throw std::invalid_argument("plant: id/params mismatch");
    require_positive(p->mass, "mass");
    require_positive(p->length, "length");
    require_positive(p->gravity, "gravity");
    if (p->friction < 0.0) throw std::invalid_argument("plant: friction must be nonnegative");
  } else if (std::get_if<LorenzParams>(&params)) {
    if (id != PlantId::kLorenz) throw std::invalid_argument("plant: id/params mismatch");
  } else if (const auto* c = std::get_if<CartpoleParams>(&params)) {
    if (id != PlantId::kCartpole) throw std::invalid_argument("plant: id/params mismatch");
    require_positive(c->pole_mass, "pole mass");
    require_positive(c->cart_mass, "cart mass");
    require_positive(c->pole_length, "pole length");
    require_positive(c->gravity, "gravity");
  } else if (const auto* d = std::get_if<DoublePendulumParams>(&params)) {
    if (id != PlantId::kDoublePendulum) throw std::invalid_argument("plant: id/params mismatch");
    require_positive(d->cart_mass, "cart mass");
    require_positive(d->mass1, "mass1");
    require_positive(d->mass2, "mass2");
    require_positive(d->length1, "length1");
    require_positive(d->length2, "length2");
    require_positive(d->gravity, "gravity");
    if (d->damping_cart < 0.0 || d->damping1 < 0.0 || d->damping2 < 0.0) {
      throw std::invalid_argument("plant: damping must be nonnegative");
    }
  }
}

PlantSpec PlantSpec::pendulum() {
  PlantSpec spec;
  spec.id = PlantId::kPendulum;
  spec.params = PendulumParams{};
  const double two_pi = 2.0 * std::numbers::pi;
  spec.domain_lower = box({-two_pi, -20.0});
  spec.domain_upper = box({two_pi, 20.0});
  spec.timeout_s = 10.0;
  return spec;
}

PlantSpec PlantSpec::lorenz() {
  PlantSpec spec;
  spec.id = PlantId::kLorenz;
  spec.params = LorenzParams{};
  // Generous guard box: transients from corners of the +-40 initial-state
  // cube overshoot it well before any controller can act (the input only
  // reaches the first state), so the envelope is sized to catch divergence,
  // not to grade regulation.
  spec.domain_lower = box({-100.0, -100.0, -100.0});
  spec.domain_upper = box({100.0, 100.0, 100.0});
  spec.timeout_s = 10.0;
  return spec;
}

PlantSpec PlantSpec::cartpole() {
  PlantSpec spec;
  spec.id = PlantId::kCartpole;
  spec.params = CartpoleParams{};
  const double two_pi = 2.0 * std::numbers::pi;
  spec.domain_lower = box({-two_pi, -25.0, -5.0, -25.0});
  spec.domain_upper = box({two_pi, 25.0, 5.0, 25.0});
  spec.timeout_s = 15.0;
  return spec;
}

PlantSpec PlantSpec::double_pendulum() {
  PlantSpec spec;
  spec.id = PlantId::kDoublePendulum;
  spec.params = DoublePendulumParams{};
  const double half_pi = 0.5 * std::numbers::pi;
  spec.domain_lower = box({-5.0, -half_pi, -half_pi, -10.0, -10.0, -10.0});
  spec.domain_upper = box({5.0, half_pi, half_pi, 10.0, 10.0, 10.0});
  spec.timeout_s = 15.0;
  return spec;
}

Eigen::VectorXd dynamics(const PlantSpec& plant, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
  if (x.size() != plant.state_dim()) {
    throw std::invalid_argument("dynamics: state dimension mismatch");
  }
  if (u.size() != plant.input_dim()) {
    throw std::invalid_argument("dynamics: input dimension mismatch");
  }
  switch (plant.id) {
    case PlantId::kPendulum:
      return pendulum_dynamics(std::get<PendulumParams>(plant.params), x, u[0]);
    case PlantId::kLorenz:
      return lorenz_dynamics(std::get<LorenzParams>(plant.params), x, u[0]);
    case PlantId::kCartpole:
      return cartpole_dynamics(std::get<CartpoleParams>(plant.params), x, u[0]);
    case PlantId::kDoublePendulum:
      return double_pendulum_dynamics(std::get<DoublePendulumParams>(plant.params), x, u[0]);
  }
  throw std::invalid_argument("dynamics: unknown plant");  // unreachable
}

bool in_domain(const PlantSpec& plant, const Eigen::VectorXd& x) {
  if (x.size() != plant.state_dim()) {
    throw std::invalid_argument("in_domain: state dimension mismatch");
  }
  for (int i = 0; i < x.size(); ++i) {
    if (!(plant.domain_lower[i] < x[i] && x[i] < plant.domain_upper[i])) return false;
  }
  return true;
}

Eigen::VectorXd rk4_step(const DerivativeFn& f, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double h, long step) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4_step: step size must be positive");
  const Eigen::VectorXd k1 = f(x, u);
  const Eigen::VectorXd k2 = f(x + 0.5 * h * k1, u);
  const Eigen::VectorXd k3 = f(x + 0.5 * h * k2, u);
  const Eigen::VectorXd k4 = f(x + h * k3, u);
  Eigen::VectorXd next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) {
    throw DivergenceError("rk4_step: state stopped being finite", step);
  }
  return next;
}

void SimClock::validate() const {
  if (!(sample_period > 0.0)) throw std::invalid_argument("clock: sample period must be positive");
  if (control_every < 1) throw std::invalid_argument("clock: control divisor must be >= 1");
  if (step < 0) throw std::invalid_argument("clock: step must be nonnegative");
}

}  // namespace sol
