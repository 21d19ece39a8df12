#pragma once

#include <Eigen/Core>

#include "sol/basis.hpp"
#include "sol/sysid.hpp"

namespace sol {

/// Discounted quadratic running cost  exp(-gamma t) (x'Qx + u'Ru) with
/// diagonal R, expressed about the regulation target x_ref (states entering
/// the cost are pre-shifted by x_ref).
struct CostSpec {
  Eigen::MatrixXd Q;       // n x n, symmetric positive semidefinite
  Eigen::VectorXd r_diag;  // m positive input weights
  double gamma = 0.0;      // discount rate, >= 0
  Eigen::VectorXd x_ref;   // regulation target, size n

  void validate() const;
};

/// State-cost matrix lifted into feature space: Q occupies the top-left
/// n-by-n block (the features start with the linear block x1..xn), zeros
/// elsewhere. Throws if p < n or Q is not square.
Eigen::MatrixXd make_qbar(const Eigen::MatrixXd& Q, int p);

/// Coefficients of the quadratic-in-features value surrogate
/// V(x) = Phi(x)' P Phi(x), advanced online alongside the model.
struct ValueParams {
  Eigen::MatrixXd P;   // p x p, kept symmetric
  double gamma = 0.0;  // discount rate baked into the propagation

  static ValueParams zero(int p, double gamma);
};

/// Right-hand side D(P, x) of the parameter flow dP/dt = D integrated
/// forward from P = 0:
///
///   D = Qbar + P J W + W' J' P - gamma P - (P J) G (J' P),
///   G = sum_j (W_j Phi) r_j^{-1} (W_j Phi)',
///
/// with J = dPhi/dx (p-by-n), W the drift coefficients, and W_j the input
/// coupling maps, everything evaluated at the (shifted) state x and frozen
/// model. D is symmetric whenever P is. With P = 0 it equals Qbar exactly.
Eigen::MatrixXd p_dot(const ValueParams& params, const Eigen::VectorXd& x,
                      const ModelCoefficients& model, const Eigen::MatrixXd& qbar,
                      const Eigen::VectorXd& r_diag);

/// One RK4 step of size dt of the parameter flow with x and the model
/// frozen, followed by an exact symmetrization P <- (P + P')/2. Throws
/// DivergenceError if the result stops being finite.
ValueParams step_P(const ValueParams& params, const Eigen::VectorXd& x,
                   const ModelCoefficients& model, const Eigen::MatrixXd& qbar,
                   const Eigen::VectorXd& r_diag, double dt);

/// Greedy feedback  u_j = -r_j^{-1} Phi' P J W_j Phi  at the (shifted)
/// state x — the unconstrained minimizer of the instantaneous Hamiltonian.
Eigen::VectorXd control(const Eigen::VectorXd& x, const ValueParams& params,
                        const ModelCoefficients& model, const Eigen::VectorXd& r_diag);

/// V(x) = Phi(x)' P Phi(x).
double value(const Eigen::VectorXd& x, const ValueParams& params, const BasisSet& basis);

/// Analytic gradient dV/dx = 2 J' P Phi (exact for symmetric P).
Eigen::VectorXd value_gradient(const Eigen::VectorXd& x, const ValueParams& params,
                               const BasisSet& basis);

/// Instantaneous discounted cost rate  exp(-gamma t) (x'Qx + u'Ru)  at a
/// pre-shifted state.
double running_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const CostSpec& cost,
                    double t);

}  // namespace sol
