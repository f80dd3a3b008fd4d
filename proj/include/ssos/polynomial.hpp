#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace ssos {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;

// Exponent vector of length equal to the ambient dimension.
struct Monomial {
  std::vector<int> exponents;

  int degree() const;
  Complex eval(const CVector& z) const;
  bool operator==(const Monomial& other) const { return exponents == other.exponents; }
};

// Graded order: lower total degree first, ties broken lexicographically with
// x1 ahead of x2 (so degree-1 monomials come out as x1, x2, ..., xn).
bool graded_lex_less(const Monomial& a, const Monomial& b);

struct MonomialVector {
  int ambient_dim = 0;
  std::vector<Monomial> monomials;

  int size() const { return static_cast<int>(monomials.size()); }
  CVector eval(const CVector& z) const;
};

// All monomials in n variables of degree at most d, graded-lex ordered with
// the constant monomial first. Size is C(n+d, d).
MonomialVector monomials_up_to(int n, int d);

long long binomial(long long n, long long k);

// Real-coefficient multivariate polynomial in sparse exponent->coefficient
// form. Zero coefficients are never stored.
class SparsePoly {
 public:
  SparsePoly() = default;
  explicit SparsePoly(int ambient_dim) : n_(ambient_dim) {}
  static SparsePoly constant(int n, double c);
  static SparsePoly variable(int n, int index);  // x_{index+1}, 0-based index

  int ambient_dim() const { return n_; }
  const std::map<std::vector<int>, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  double coeff(const std::vector<int>& e) const;
  void add_term(const std::vector<int>& e, double c);

  Complex eval(const CVector& z) const;

  SparsePoly operator+(const SparsePoly& other) const;
  SparsePoly operator-(const SparsePoly& other) const;
  SparsePoly operator*(const SparsePoly& other) const;
  SparsePoly operator*(double c) const;

  double max_abs_coeff() const;

  // Sum of terms "c*x1^e1*...*xn^en"; names default to x1..xn.
  std::string to_string(const std::vector<std::string>& names = {}) const;

  // Accepts the same textual form, e.g. "4*x2 - 2*x1*x4 + 3".
  static SparsePoly parse(const std::string& text, int ambient_dim = -1);

 private:
  int n_ = 0;
  std::map<std::vector<int>, double> terms_;
};

// Opaque evaluation callable (straight-line program). Must be deterministic:
// equal inputs give bitwise-equal outputs.
struct EvalOracle {
  int ambient_dim = 0;
  std::function<Complex(const CVector&)> eval;
  std::string description;
};

Complex eval_poly(const SparsePoly& p, const CVector& z);
Complex eval_poly(const EvalOracle& p, const CVector& z);

EvalOracle to_oracle(const SparsePoly& p);

// JSON form {"n": n, "terms": [{"e": [...], "c": r}, ...]}.
SparsePoly load_poly(const std::string& path);
void save_poly(const SparsePoly& p, const std::string& path);

}  // namespace ssos
