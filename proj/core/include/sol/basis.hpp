#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace sol {

/// The five feature shapes supported by the dictionary. They cover every
/// library used by the bundled benchmarks.
enum class TermKind {
  kConstant,      // 1
  kMonomial,      // x_i^k, k in {1, 2, 3}
  kCrossProduct,  // x_i * x_j, i < j
  kSine,          // sin(x_i)
  kCosine,        // cos(x_i)
};

/// One scalar feature of the state, with analytic partial derivatives.
struct BasisTerm {
  TermKind kind = TermKind::kConstant;
  int i = -1;        // first state index (0-based); unused for kConstant
  int j = -1;        // second state index; kCrossProduct only
  int exponent = 1;  // kMonomial only, 1..3

  static BasisTerm constant();
  static BasisTerm monomial(int i, int exponent);
  static BasisTerm cross_product(int i, int j);
  static BasisTerm sine(int i);
  static BasisTerm cosine(int i);

  [[nodiscard]] double eval(const Eigen::VectorXd& x) const;
  /// Partial derivative of the term with respect to x_axis, evaluated at x.
  [[nodiscard]] double partial(const Eigen::VectorXd& x, int axis) const;
  /// Display name with 1-based indices: "1", "x2", "x1^3", "x1*x2", "sin(x1)".
  [[nodiscard]] std::string name() const;

  bool operator==(const BasisTerm&) const = default;
};

/// Immutable feature dictionary Phi : R^n -> R^p.
///
/// Invariants (enforced at construction):
///  * p >= n and the first n terms are exactly x_1..x_n in state order —
///    the quadratic state cost embeds into the top-left n-by-n block of the
///    value parameter matrix through that linear block;
///  * immediately after the linear block comes the constant term, when the
///    dictionary has one;
///  * no duplicate terms;
///  * every state index is in range and monomial exponents are in 1..3.
class BasisSet {
 public:
  BasisSet(int state_dim, std::vector<BasisTerm> terms);

  /// Builds a dictionary from a comma-separated list of tokens.
  ///
  /// Group tokens expand component-wise over all n states:
  ///   "1"      constant
  ///   "x"      x_1, ..., x_n          (required: the linear block)
  ///   "x^2"    x_i^2 for every i      (likewise "x^3")
  ///   "xi*xj"  x_i * x_j for every pair i < j
  ///   "sin(x)" sin(x_i) for every i   (likewise "cos(x)")
  /// Individual terms may also be named directly: "x2", "x1^3", "x1*x3",
  /// "sin(x2)", "cos(x1)". Regardless of the order tokens appear in, the
  /// linear block is placed first, then the constant, then the remaining
  /// terms in the order they were written.
  static BasisSet parse(std::string_view spec, int state_dim);

  [[nodiscard]] int state_dim() const { return state_dim_; }
  [[nodiscard]] int size() const { return static_cast<int>(terms_.size()); }
  [[nodiscard]] const std::vector<BasisTerm>& terms() const { return terms_; }

  /// Phi(x), length p. Requires x.size() == state_dim().
  [[nodiscard]] Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
  /// dPhi/dx, p-by-n; row i is the gradient of term i. Analytic, never
  /// differenced numerically.
  [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

 private:
  int state_dim_;
  std::vector<BasisTerm> terms_;
};

}  // namespace sol
