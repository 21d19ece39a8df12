#include "sol/valuegrad.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "sol/errors.hpp"

namespace sol {

void CostSpec::validate() const {
  const Eigen::Index n = Q.rows();
  if (n < 1 || Q.cols() != n) throw std::invalid_argument("cost: Q must be square");
  const double qmax = Q.cwiseAbs().maxCoeff();
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, qmax)) {
    throw std::invalid_argument("cost: Q must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(Q);
  if (eigs.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, qmax)) {
    throw std::invalid_argument("cost: Q must be positive semidefinite");
  }
  if (r_diag.size() < 1) throw std::invalid_argument("cost: R must have at least one entry");
  for (Eigen::Index j = 0; j < r_diag.size(); ++j) {
    if (!(r_diag[j] > 0.0)) throw std::invalid_argument("cost: R entries must be positive");
  }
  if (gamma < 0.0) throw std::invalid_argument("cost: discount must be nonnegative");
  if (x_ref.size() != n) throw std::invalid_argument("cost: x_ref must match Q's dimension");
}

Eigen::MatrixXd make_qbar(const Eigen::MatrixXd& Q, int p) {
  const Eigen::Index n = Q.rows();
  if (Q.cols() != n) throw std::invalid_argument("make_qbar: Q must be square");
  if (p < n) throw std::invalid_argument("make_qbar: feature count must be >= state dimension");
  Eigen::MatrixXd qbar = Eigen::MatrixXd::Zero(p, p);
  qbar.topLeftCorner(n, n) = Q;
  return qbar;
}

ValueParams ValueParams::zero(int p, double gamma) {
  if (p < 1) throw std::invalid_argument("value params: dimension must be positive");
  if (gamma < 0.0) throw std::invalid_argument("value params: discount must be nonnegative");
  return {Eigen::MatrixXd::Zero(p, p), gamma};
}

Eigen::MatrixXd p_dot(const ValueParams& params, const Eigen::VectorXd& x,
                      const ModelCoefficients& model, const Eigen::MatrixXd& qbar,
                      const Eigen::VectorXd& r_diag) {
  if (!model.basis) throw std::invalid_argument("p_dot: model has no basis");
  const BasisSet& basis = *model.basis;
  const int p = basis.size();
  const int m = model.input_dim();
  if (params.P.rows() != p || params.P.cols() != p) {
    throw std::invalid_argument("p_dot: P must be p x p");
  }
  if (qbar.rows() != p || qbar.cols() != p) throw std::invalid_argument("p_dot: Qbar must be p x p");
  if (r_diag.size() != m) throw std::invalid_argument("p_dot: R size must match input maps");

  const Eigen::VectorXd phi = basis.eval(x);
  const Eigen::MatrixXd jac = basis.jacobian(x);  // p x n

  // G = sum_j (W_j phi) r_j^{-1} (W_j phi)', the input-weighted pushforward.
  const int n = basis.state_dim();
  Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd gj = model.input_maps[j] * phi;
    gain.selfadjointView<Eigen::Lower>().rankUpdate(gj, 1.0 / r_diag[j]);
  }
  gain.triangularView<Eigen::StrictlyUpper>() = gain.adjoint();

  const Eigen::MatrixXd pj = params.P * jac;              // p x n
  const Eigen::MatrixXd flow = pj * model.drift;          // P J W, p x p
  return qbar + flow + flow.transpose() - params.gamma * params.P -
         pj * gain * pj.transpose();
}

ValueParams step_P(const ValueParams& params, const Eigen::VectorXd& x,
                   const ModelCoefficients& model, const Eigen::MatrixXd& qbar,
                   const Eigen::VectorXd& r_diag, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_P: step size must be positive");
  ValueParams scratch = params;
  const Eigen::MatrixXd k1 = p_dot(params, x, model, qbar, r_diag);
  scratch.P = params.P + (0.5 * dt) * k1;
  const Eigen::MatrixXd k2 = p_dot(scratch, x, model, qbar, r_diag);
  scratch.P = params.P + (0.5 * dt) * k2;
  const Eigen::MatrixXd k3 = p_dot(scratch, x, model, qbar, r_diag);
  scratch.P = params.P + dt * k3;
  const Eigen::MatrixXd k4 = p_dot(scratch, x, model, qbar, r_diag);

  ValueParams next = params;
  next.P = params.P + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  next.P = 0.5 * (next.P + next.P.transpose()).eval();
  if (!next.P.allFinite()) {
    throw DivergenceError("step_P: value parameters stopped being finite");
  }
  return next;
}

Eigen::VectorXd control(const Eigen::VectorXd& x, const ValueParams& params,
                        const ModelCoefficients& model, const Eigen::VectorXd& r_diag) {
  if (!model.basis) throw std::invalid_argument("control: model has no basis");
  const BasisSet& basis = *model.basis;
  const int m = model.input_dim();
  if (r_diag.size() != m) throw std::invalid_argument("control: R size must match input maps");
  const Eigen::VectorXd phi = basis.eval(x);
  const Eigen::MatrixXd jac = basis.jacobian(x);
  const Eigen::VectorXd descent = jac.transpose() * (params.P * phi);  // (Phi' P J)'
  Eigen::VectorXd u(m);
  for (int j = 0; j < m; ++j) {
    u[j] = -descent.dot(model.input_maps[j] * phi) / r_diag[j];
  }
  return u;
}

double value(const Eigen::VectorXd& x, const ValueParams& params, const BasisSet& basis) {
  const Eigen::VectorXd phi = basis.eval(x);
  if (params.P.rows() != phi.size()) throw std::invalid_argument("value: P/basis size mismatch");
  return phi.dot(params.P * phi);
}

Eigen::VectorXd value_gradient(const Eigen::VectorXd& x, const ValueParams& params,
                               const BasisSet& basis) {
  const Eigen::VectorXd phi = basis.eval(x);
  if (params.P.rows() != phi.size()) {
    throw std::invalid_argument("value_gradient: P/basis size mismatch");
  }
  return 2.0 * basis.jacobian(x).transpose() * (params.P * phi);
}

double running_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const CostSpec& cost,
                    double t) {
  if (x.size() != cost.Q.rows()) throw std::invalid_argument("running_cost: state size mismatch");
  if (u.size() != cost.r_diag.size()) {
    throw std::invalid_argument("running_cost: input size mismatch");
  }
  const double state_cost = x.dot(cost.Q * x);
  const double input_cost = u.cwiseProduct(u).dot(cost.r_diag);
  return std::exp(-cost.gamma * t) * (state_cost + input_cost);
}

}  // namespace sol
