#include "sol/basis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <utility>

#include "sol/errors.hpp"

namespace sol {
namespace {

void check_index(int i, int n, const std::string& what) {
  if (i < 0 || i >= n) {
    throw std::invalid_argument("basis term " + what + ": state index out of range for n = " +
                                std::to_string(n));
  }
}

std::string strip(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Parses "x<digits>" -> 0-based index, or nullopt.
std::optional<int> parse_state_index(std::string_view tok) {
  if (tok.size() < 2 || tok[0] != 'x') return std::nullopt;
  int value = 0;
  for (size_t k = 1; k < tok.size(); ++k) {
    if (!std::isdigit(static_cast<unsigned char>(tok[k]))) return std::nullopt;
    value = value * 10 + (tok[k] - '0');
  }
  if (value < 1) return std::nullopt;
  return value - 1;
}

}  // namespace

BasisTerm BasisTerm::constant() { return {TermKind::kConstant, -1, -1, 1}; }

BasisTerm BasisTerm::monomial(int i, int exponent) {
  return {TermKind::kMonomial, i, -1, exponent};
}

BasisTerm BasisTerm::cross_product(int i, int j) {
  if (i > j) std::swap(i, j);
  return {TermKind::kCrossProduct, i, j, 1};
}

BasisTerm BasisTerm::sine(int i) { return {TermKind::kSine, i, -1, 1}; }

BasisTerm BasisTerm::cosine(int i) { return {TermKind::kCosine, i, -1, 1}; }

double BasisTerm::eval(const Eigen::VectorXd& x) const {
  switch (kind) {
    case TermKind::kConstant:
      return 1.0;
    case TermKind::kMonomial: {
      const double v = x[i];
      if (exponent == 1) return v;
      if (exponent == 2) return v * v;
      return v * v * v;
    }
    case TermKind::kCrossProduct:
      return x[i] * x[j];
    case TermKind::kSine:
      return std::sin(x[i]);
    case TermKind::kCosine:
      return std::cos(x[i]);
  }
  return 0.0;  // unreachable
}

double BasisTerm::partial(const Eigen::VectorXd& x, int axis) const {
  switch (kind) {
    case TermKind::kConstant:
      return 0.0;
    case TermKind::kMonomial: {
      if (axis != i) return 0.0;
      if (exponent == 1) return 1.0;
      if (exponent == 2) return 2.0 * x[i];
      return 3.0 * x[i] * x[i];
    }
    case TermKind::kCrossProduct:
      if (axis == i) return x[j];
      if (axis == j) return x[i];
      return 0.0;
    case TermKind::kSine:
      return axis == i ? std::cos(x[i]) : 0.0;
    case TermKind::kCosine:
      return axis == i ? -std::sin(x[i]) : 0.0;
  }
  return 0.0;  // unreachable
}

std::string BasisTerm::name() const {
  const auto var = [](int idx) { return "x" + std::to_string(idx + 1); };
  switch (kind) {
    case TermKind::kConstant:
      return "1";
    case TermKind::kMonomial:
      return exponent == 1 ? var(i) : var(i) + "^" + std::to_string(exponent);
    case TermKind::kCrossProduct:
      return var(i) + "*" + var(j);
    case TermKind::kSine:
      return "sin(" + var(i) + ")";
    case TermKind::kCosine:
      return "cos(" + var(i) + ")";
  }
  return {};  // unreachable
}

BasisSet::BasisSet(int state_dim, std::vector<BasisTerm> terms)
    : state_dim_(state_dim), terms_(std::move(terms)) {
  if (state_dim_ < 1) throw std::invalid_argument("basis: state dimension must be positive");
  if (static_cast<int>(terms_.size()) < state_dim_) {
    throw std::invalid_argument("basis: needs at least the n linear terms (p >= n)");
  }
  for (const BasisTerm& t : terms_) {
    switch (t.kind) {
      case TermKind::kConstant:
        break;
      case TermKind::kMonomial:
        check_index(t.i, state_dim_, t.name());
        if (t.exponent < 1 || t.exponent > 3) {
          throw std::invalid_argument("basis term " + t.name() + ": exponent must be 1..3");
        }
        break;
      case TermKind::kCrossProduct:
        check_index(t.i, state_dim_, t.name());
        check_index(t.j, state_dim_, t.name());
        if (t.i >= t.j) {
          throw std::invalid_argument("basis term " + t.name() +
                                      ": cross product needs distinct indices i < j");
        }
        break;
      case TermKind::kSine:
      case TermKind::kCosine:
        check_index(t.i, state_dim_, t.name());
        break;
    }
  }
  for (int k = 0; k < state_dim_; ++k) {
    const BasisTerm& t = terms_[k];
    if (t.kind != TermKind::kMonomial || t.exponent != 1 || t.i != k) {
      throw std::invalid_argument("basis: terms must start with the linear block x1..x" +
                                  std::to_string(state_dim_) + " in order");
    }
  }
  for (size_t a = 0; a < terms_.size(); ++a) {
    for (size_t b = a + 1; b < terms_.size(); ++b) {
      if (terms_[a] == terms_[b]) {
        throw std::invalid_argument("basis: duplicate term " + terms_[a].name());
      }
    }
  }
  // Constant, when present, sits right after the linear block.
  for (size_t k = 0; k < terms_.size(); ++k) {
    if (terms_[k].kind == TermKind::kConstant && k != static_cast<size_t>(state_dim_)) {
      throw std::invalid_argument("basis: the constant term must follow the linear block");
    }
  }
}

BasisSet BasisSet::parse(std::string_view spec, int state_dim) {
  if (state_dim < 1) throw std::invalid_argument("basis: state dimension must be positive");
  const int n = state_dim;

  bool has_constant = false;
  bool has_linear_block = false;
  std::vector<BasisTerm> linear;       // explicit x<i> tokens
  std::vector<BasisTerm> rest;         // everything after linear block + constant

  const auto add_rest = [&rest](BasisTerm t, const std::string& token) {
    if (std::find(rest.begin(), rest.end(), t) != rest.end()) {
      throw ParseError("basis: duplicate term from token '" + token + "'");
    }
    rest.push_back(t);
  };

  std::vector<std::string> tokens;
  {
    const std::string text(spec);
    size_t start = 0;
    while (true) {
      const size_t comma = text.find(',', start);
      tokens.push_back(strip(std::string_view(text).substr(
          start, (comma == std::string::npos ? text.size() : comma) - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (tokens.size() == 1 && tokens[0].empty()) throw ParseError("basis: empty term list");

  for (const std::string& token : tokens) {
    if (token.empty()) throw ParseError("basis: empty token in term list");

    if (token == "1") {
      if (has_constant) throw ParseError("basis: duplicate term from token '1'");
      has_constant = true;
    } else if (token == "x") {
      if (has_linear_block || !linear.empty()) {
        throw ParseError("basis: duplicate term from token 'x'");
      }
      has_linear_block = true;
    } else if (token == "x^2" || token == "x^3") {
      const int e = token[2] - '0';
      for (int i = 0; i < n; ++i) add_rest(BasisTerm::monomial(i, e), token);
    } else if (token == "xi*xj") {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) add_rest(BasisTerm::cross_product(i, j), token);
      }
    } else if (token == "sin(x)") {
      for (int i = 0; i < n; ++i) add_rest(BasisTerm::sine(i), token);
    } else if (token == "cos(x)") {
      for (int i = 0; i < n; ++i) add_rest(BasisTerm::cosine(i), token);
    } else if (auto idx = parse_state_index(token)) {
      check_index(*idx, n, token);
      if (has_linear_block) throw ParseError("basis: duplicate term from token '" + token + "'");
      const BasisTerm t = BasisTerm::monomial(*idx, 1);
      if (std::find(linear.begin(), linear.end(), t) != linear.end()) {
        throw ParseError("basis: duplicate term from token '" + token + "'");
      }
      linear.push_back(t);
    } else {
      // Explicit single terms: x<i>^<e>, x<i>*x<j>, sin(x<i>), cos(x<i>).
      bool parsed = false;
      if (const size_t caret = token.find('^'); caret != std::string::npos) {
        const auto idx = parse_state_index(token.substr(0, caret));
        const std::string e = token.substr(caret + 1);
        if (idx && (e == "2" || e == "3")) {
          check_index(*idx, n, token);
          add_rest(BasisTerm::monomial(*idx, e[0] - '0'), token);
          parsed = true;
        }
      } else if (const size_t star = token.find('*'); star != std::string::npos) {
        const auto a = parse_state_index(token.substr(0, star));
        const auto b = parse_state_index(token.substr(star + 1));
        if (a && b && *a != *b) {
          check_index(*a, n, token);
          check_index(*b, n, token);
          add_rest(BasisTerm::cross_product(*a, *b), token);
          parsed = true;
        }
      } else if (token.size() > 5 && token.back() == ')') {
        const bool is_sin = token.rfind("sin(", 0) == 0;
        const bool is_cos = token.rfind("cos(", 0) == 0;
        if (is_sin || is_cos) {
          const auto idx = parse_state_index(token.substr(4, token.size() - 5));
          if (idx) {
            check_index(*idx, n, token);
            add_rest(is_sin ? BasisTerm::sine(*idx) : BasisTerm::cosine(*idx), token);
            parsed = true;
          }
        }
      }
      if (!parsed) throw ParseError("basis: unknown token '" + token + "'");
    }
  }

  std::vector<BasisTerm> terms;
  if (has_linear_block) {
    for (int i = 0; i < n; ++i) terms.push_back(BasisTerm::monomial(i, 1));
  } else {
    // Explicit linear terms must cover x1..xn; order them by index.
    std::sort(linear.begin(), linear.end(),
              [](const BasisTerm& a, const BasisTerm& b) { return a.i < b.i; });
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(linear.size()) <= i || linear[i].i != i) {
        throw ParseError("basis: missing linear term x" + std::to_string(i + 1) +
                         " (every state needs its linear term)");
      }
    }
    terms = linear;
  }
  if (has_constant) terms.push_back(BasisTerm::constant());
  terms.insert(terms.end(), rest.begin(), rest.end());
  return BasisSet(n, std::move(terms));
}

Eigen::VectorXd BasisSet::eval(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim_) throw std::invalid_argument("basis eval: state dimension mismatch");
  Eigen::VectorXd phi(size());
  for (int k = 0; k < size(); ++k) phi[k] = terms_[k].eval(x);
  return phi;
}

Eigen::MatrixXd BasisSet::jacobian(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim_) {
    throw std::invalid_argument("basis jacobian: state dimension mismatch");
  }
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(size(), state_dim_);
  for (int k = 0; k < size(); ++k) {
    const BasisTerm& t = terms_[k];
    switch (t.kind) {
      case TermKind::kConstant:
        break;
      case TermKind::kMonomial:
      case TermKind::kSine:
      case TermKind::kCosine:
        jac(k, t.i) = t.partial(x, t.i);
        break;
      case TermKind::kCrossProduct:
        jac(k, t.i) = x[t.j];
        jac(k, t.j) = x[t.i];
        break;
    }
  }
  return jac;
}

}  // namespace sol
