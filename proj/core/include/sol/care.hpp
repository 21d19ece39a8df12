#pragma once

#include <Eigen/Core>

namespace sol {

/// Solves the continuous Lyapunov equation  A' P + P A + S = 0  for P by
/// direct vectorization (n^2 x n^2 linear solve; intended for the small
/// benchmark dimensions). S must be symmetric; the result is symmetrized.
/// Throws NumericalError if the equation is singular (A and -A share an
/// eigenvalue).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& S);

struct CareOptions {
  int max_iters = 50;
  double tol = 1e-13;  // relative step-to-step stationarity on P
};

/// Stabilizing solution of  A' P + P A + Q - P B R^{-1} B' P = 0  by
/// Kleinman iteration from the stabilizing initial gain K0 (m x n):
/// repeatedly solve the closed-loop Lyapunov equation and refresh the gain
/// K <- R^{-1} B' P. Quadratically convergent; throws NumericalError if K0
/// (or an iterate) fails to stabilize A - B K or the iteration does not
/// settle within max_iters.
Eigen::MatrixXd solve_care_kleinman(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                    const Eigen::MatrixXd& K0, const CareOptions& options = {});

/// A' P + P A + Q - P B R^{-1} B' P, the defect of a CARE candidate.
Eigen::MatrixXd care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                              const Eigen::MatrixXd& P);

}  // namespace sol
