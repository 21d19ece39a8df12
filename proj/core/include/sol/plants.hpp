#pragma once

#include <functional>
#include <variant>

#include <Eigen/Core>

namespace sol {

enum class PlantId { kPendulum, kLorenz, kCartpole, kDoublePendulum };

/// Torque-driven pendulum, angle measured from the upright equilibrium:
///   x1' = -x2
///   x2' = -(g/l) sin(x1) - (k/m) x2 + u / (m l^2)
struct PendulumParams {
  double mass = 0.1;      // kg
  double length = 0.5;    // m
  double friction = 0.1;  // kg m^2 / s
  double gravity = 9.8;   // m / s^2
};

/// Lorenz system with the input entering the first state:
///   x1' = sigma (x2 - x1) + u
///   x2' = -x2 + x1 (rho - x3)
///   x3' = x1 x2 - beta x3
struct LorenzParams {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

/// Cart-pole, pole angle x1 measured from upright, cart driven by force u.
/// State: (pole angle, pole rate, cart position, cart velocity).
struct CartpoleParams {
  double pole_mass = 0.1;    // kg
  double cart_mass = 1.0;    // kg
  double pole_length = 0.8;  // m
  double gravity = 9.8;      // m / s^2
};

/// Double inverted pendulum on a cart, both angles measured from the top
/// equilibrium, cart driven by force u. State: (cart position, angle 1,
/// angle 2, cart velocity, rate 1, rate 2). Accelerations come from solving
/// the symmetric positive-definite mass matrix system each call.
struct DoublePendulumParams {
  double cart_mass = 6.0;  // kg
  double mass1 = 3.0;      // kg
  double mass2 = 1.0;      // kg
  double length1 = 1.0;    // m
  double length2 = 2.0;    // m
  double damping_cart = 10.0;
  double damping1 = 1.0;
  double damping2 = 0.5;
  double gravity = 9.8;  // m / s^2
};

/// A benchmark plant: continuous-time dynamics plus the operating envelope
/// the episodes run in (axis-aligned domain box, wall-clock-free sim timeout).
struct PlantSpec {
  PlantId id = PlantId::kPendulum;
  std::variant<PendulumParams, LorenzParams, CartpoleParams, DoublePendulumParams> params;
  Eigen::VectorXd domain_lower;  // size n
  Eigen::VectorXd domain_upper;  // size n
  double timeout_s = 10.0;       // simulated-time cap per episode

  [[nodiscard]] int state_dim() const;
  [[nodiscard]] int input_dim() const { return 1; }
  /// Throws std::invalid_argument on nonpositive masses/lengths, mis-sized
  /// or non-ordered domain bounds, or a nonpositive timeout.
  void validate() const;

  // Factory functions preloaded with each benchmark's published parameters,
  // domain box, and timeout.
  static PlantSpec pendulum();
  static PlantSpec lorenz();
  static PlantSpec cartpole();
  static PlantSpec double_pendulum();
};

/// Exact continuous-time derivative f(x, u) of the plant. u has size 1 for
/// every bundled plant. Throws NumericalError if the double-pendulum mass
/// matrix loses positive definiteness or conditioning (should not occur
/// inside the domain box).
Eigen::VectorXd dynamics(const PlantSpec& plant, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u);

/// Strict interior test against the domain box; a state exactly on the
/// boundary counts as outside.
bool in_domain(const PlantSpec& plant, const Eigen::VectorXd& x);

using DerivativeFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// One classical fourth-order Runge-Kutta step of size h with u held
/// constant. Throws DivergenceError (carrying `step` when nonnegative) if
/// the result stops being finite.
Eigen::VectorXd rk4_step(const DerivativeFn& f, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double h, long step = -1);

/// Shared time base: states are sampled every `sample_period` seconds and
/// the control is recomputed every `control_every` samples (held in between).
struct SimClock {
  double sample_period = 5e-3;  // seconds between measurements
  int control_every = 2;        // samples per control update
  long step = 0;                // current sample index

  [[nodiscard]] bool is_control_step() const { return step % control_every == 0; }
  [[nodiscard]] double time() const { return sample_period * static_cast<double>(step); }
  [[nodiscard]] double control_period() const {
    return sample_period * static_cast<double>(control_every);
  }
  void validate() const;
};

}  // namespace sol
