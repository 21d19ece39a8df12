#include "sol/care.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "sol/errors.hpp"

namespace sol {
namespace {

void require_square(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(name) + " must be square");
  }
}

// Largest real part over the spectrum of M.
double spectral_abscissa(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> eig(M, /*computeEigenvectors=*/false);
  return eig.eigenvalues().real().maxCoeff();
}

}  // namespace

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& S) {
  require_square(A, "A");
  require_square(S, "S");
  if (A.rows() != S.rows()) throw std::invalid_argument("A and S dimensions disagree");
  const long n = A.rows();

  // vec(A'P) = (I kron A') vec(P), vec(PA) = (A' kron I) vec(P).
  const Eigen::MatrixXd At = A.transpose();
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n * n, n * n);
  for (long bc = 0; bc < n; ++bc) {  // kron(I, A'): block-diagonal copies of A'
    system.block(bc * n, bc * n, n, n) = At;
  }
  for (long br = 0; br < n; ++br) {  // kron(A', I): At(br,bc) * I in block (br,bc)
    for (long bc = 0; bc < n; ++bc) {
      system.block(br * n, bc * n, n, n).diagonal().array() += At(br, bc);
    }
  }

  Eigen::VectorXd rhs(n * n);
  for (long c = 0; c < n; ++c) rhs.segment(c * n, n) = -S.col(c);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) {
    throw NumericalError("Lyapunov equation is singular (A and -A share an eigenvalue)");
  }
  const Eigen::VectorXd vec_p = lu.solve(rhs);

  Eigen::MatrixXd P(n, n);
  for (long c = 0; c < n; ++c) P.col(c) = vec_p.segment(c * n, n);
  P = 0.5 * (P + P.transpose()).eval();
  return P;
}

Eigen::MatrixXd solve_care_kleinman(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                    const Eigen::MatrixXd& K0, const CareOptions& options) {
  require_square(A, "A");
  require_square(Q, "Q");
  require_square(R, "R");
  const long n = A.rows();
  const long m = B.cols();
  if (B.rows() != n) throw std::invalid_argument("B row count must match A");
  if (Q.rows() != n) throw std::invalid_argument("Q must match A");
  if (R.rows() != m) throw std::invalid_argument("R must match B's column count");
  if (K0.rows() != m || K0.cols() != n) throw std::invalid_argument("K0 must be m x n");

  const Eigen::LDLT<Eigen::MatrixXd> r_fact(R);
  if (r_fact.info() != Eigen::Success || !r_fact.isPositive()) {
    throw NumericalError("R must be positive definite");
  }

  Eigen::MatrixXd K = K0;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    const Eigen::MatrixXd Acl = A - B * K;
    if (spectral_abscissa(Acl) >= 0.0) {
      throw NumericalError(iter == 0 ? "initial gain does not stabilize the plant"
                                     : "iteration lost stability");
    }
    const Eigen::MatrixXd S = Q + K.transpose() * (R * K);
    const Eigen::MatrixXd P_next = solve_lyapunov(Acl, S);
    const double step = (P_next - P).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, P_next.cwiseAbs().maxCoeff());
    P = P_next;
    K = r_fact.solve(B.transpose() * P);
    if (iter > 0 && step <= options.tol * scale) return P;
  }
  throw NumericalError("Riccati iteration did not converge");
}

Eigen::MatrixXd care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                              const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd bp = B.transpose() * P;
  return A.transpose() * P + P * A + Q - bp.transpose() * R.ldlt().solve(bp);
}

}  // namespace sol
