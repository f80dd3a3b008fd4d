#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "ssos/polynomial.hpp"
#include "ssos/rng.hpp"

using namespace ssos;

namespace {

// Independent count of monomials of degree <= d in n variables.
long long count_by_enumeration(int n, int d) {
  if (n == 0) return 1;
  long long total = 0;
  for (int e = 0; e <= d; ++e) total += count_by_enumeration(n - 1, d - e);
  return total;
}

SparsePoly random_poly(Rng& rng, int n, int max_deg, int terms) {
  SparsePoly p(n);
  for (int t = 0; t < terms; ++t) {
    std::vector<int> e(n, 0);
    int budget = max_deg;
    for (int i = 0; i < n; ++i) {
      const int v = static_cast<int>(rng.uniform() * (budget + 1));
      e[i] = v;
      budget -= v;
    }
    p.add_term(e, rng.normal());
  }
  return p;
}

CVector random_point(Rng& rng, int n) {
  CVector z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.complex_normal();
  return z;
}

}  // namespace

TEST_CASE("monomials_up_to basic shapes") {
  auto m0 = monomials_up_to(1, 0);
  CHECK(m0.size() == 1);
  CHECK(m0.monomials[0].degree() == 0);

  // degree-1 block in 4 variables: constant first, then x1..x4
  auto m1 = monomials_up_to(4, 1);
  REQUIRE(m1.size() == 5);
  CHECK(m1.monomials[0].exponents == std::vector<int>{0, 0, 0, 0});
  CHECK(m1.monomials[1].exponents == std::vector<int>{1, 0, 0, 0});
  CHECK(m1.monomials[2].exponents == std::vector<int>{0, 1, 0, 0});
  CHECK(m1.monomials[3].exponents == std::vector<int>{0, 0, 1, 0});
  CHECK(m1.monomials[4].exponents == std::vector<int>{0, 0, 0, 1});

  CHECK(monomials_up_to(3, 2).size() == count_by_enumeration(3, 2));
  CHECK(count_by_enumeration(3, 2) == 10);
}

TEST_CASE("monomial count matches binomial for 1<=n<=8, 0<=d<=4") {
  for (int n = 1; n <= 8; ++n)
    for (int d = 0; d <= 4; ++d) {
      const auto ms = monomials_up_to(n, d);
      CHECK(ms.size() == binomial(n + d, d));
      CHECK(ms.size() == count_by_enumeration(n, d));
      // entries distinct
      for (int i = 1; i < ms.size(); ++i)
        CHECK(graded_lex_less(ms.monomials[i - 1], ms.monomials[i]));
    }
}

TEST_CASE("eval matches the worked example p(0,-1) = 2") {
  // p = x1^2 - x2 + 1
  SparsePoly p = SparsePoly::parse("x1^2 - x2 + 1", 2);
  CVector z(2);
  z << Complex(0, 0), Complex(-1, 0);
  CHECK(p.eval(z) == Complex(2, 0));
  // while F = x1^2 gives 0 there
  SparsePoly F = SparsePoly::parse("x1^2", 2);
  CHECK(F.eval(z) == Complex(0, 0));
}

TEST_CASE("conjugate symmetry of real-coefficient evaluation") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 4);
    SparsePoly p = random_poly(rng, n, 3, 6);
    const CVector z = random_point(rng, n);
    const Complex a = p.eval(z);
    const Complex b = p.eval(z.conjugate());
    CHECK(std::abs(b - std::conj(a)) <= 1e-12 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("evaluation at a sample matches extended-precision term sums") {
  // p = 4*X21 - 2*X11*X22 - 2*X12*X21 + 3 in column-major vars (X11,X21,X12,X22)
  SparsePoly p = SparsePoly::parse("4*x2 - 2*x1*x4 - 2*x3*x2 + 3", 4);
  CVector z1(4);
  z1 << Complex(-0.6, 0.8), Complex(-1.2, -0.4), Complex(1.2, 0.4), Complex(-0.6, 0.8);

  // independent oracle in long double arithmetic
  using CL = std::complex<long double>;
  auto cl = [](Complex c) { return CL(c.real(), c.imag()); };
  CL acc = CL(4.0L) * cl(z1[1]) - CL(2.0L) * cl(z1[0]) * cl(z1[3]) -
           CL(2.0L) * cl(z1[2]) * cl(z1[1]) + CL(3.0L);
  const Complex expected(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
  CHECK(std::abs(p.eval(z1) - expected) <= 1e-12 * (1.0 + std::abs(expected)));
  // the sample satisfies p(z1) = (2*X21+1)^2 at z1
  const Complex f = std::pow(2.0 * z1[1] + 1.0, 2);
  CHECK(std::abs(p.eval(z1) - f) < 1e-12);
}

TEST_CASE("arithmetic basics") {
  SparsePoly x = SparsePoly::variable(1, 0);
  CHECK((x * x).to_string() == "x1^2");
  SparsePoly one = SparsePoly::constant(1, 1.0);
  SparsePoly prod = (x + one) * (x - one);
  CHECK(prod.coeff({2}) == 1.0);
  CHECK(prod.coeff({0}) == -1.0);
  CHECK(prod.coeff({1}) == 0.0);
  CHECK(prod.terms().size() == 2);
}

TEST_CASE("expansion reproduces the SO(2) certificate polynomial") {
  // (X21 - X12 + 1)^2 + (X11 - X22)^2, column-major vars x=(X11,X21,X12,X22)
  SparsePoly a = SparsePoly::parse("x2 - x3 + 1", 4);
  SparsePoly b = SparsePoly::parse("x1 - x4", 4);
  SparsePoly F = a * a + b * b;
  CHECK(F.coeff({0, 0, 0, 0}) == 1.0);   // 1
  CHECK(F.coeff({0, 2, 0, 0}) == 1.0);   // X21^2
  CHECK(F.coeff({0, 0, 2, 0}) == 1.0);   // X12^2
  CHECK(F.coeff({2, 0, 0, 0}) == 1.0);   // X11^2
  CHECK(F.coeff({0, 0, 0, 2}) == 1.0);   // X22^2
  CHECK(F.coeff({0, 1, 1, 0}) == -2.0);  // X21*X12
  CHECK(F.coeff({1, 0, 0, 1}) == -2.0);  // X11*X22
  CHECK(F.coeff({0, 1, 0, 0}) == 2.0);   // X21
  CHECK(F.coeff({0, 0, 1, 0}) == -2.0);  // X12
  CHECK(F.terms().size() == 9);
}

TEST_CASE("add and mul are commutative and associative on random instances") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 3);
    SparsePoly a = random_poly(rng, n, 2, 4);
    SparsePoly b = random_poly(rng, n, 2, 4);
    SparsePoly c = random_poly(rng, n, 2, 4);
    const CVector z = random_point(rng, n);
    CHECK(std::abs((a + b).eval(z) - (b + a).eval(z)) < 1e-12);
    CHECK(std::abs((a * b).eval(z) - (b * a).eval(z)) < 1e-12);
    const Complex lhs = ((a * b) * c).eval(z);
    const Complex rhs = (a * (b * c)).eval(z);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    const Complex lhs2 = ((a + b) + c).eval(z);
    const Complex rhs2 = (a + (b + c)).eval(z);
    CHECK(std::abs(lhs2 - rhs2) <= 1e-12 * (1.0 + std::abs(lhs2)));
  }
}

TEST_CASE("oracle wrapper agrees with direct evaluation") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 4);
    SparsePoly p = random_poly(rng, n, 3, 5);
    EvalOracle o = to_oracle(p);
    const CVector z = random_point(rng, n);
    const Complex a = p.eval(z);
    const Complex b = eval_poly(o, z);
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("oracle determinism: equal inputs give bitwise-equal outputs") {
  SparsePoly p = SparsePoly::parse("x1^3 - 2*x2 + 0.5*x1*x2", 2);
  EvalOracle o = to_oracle(p);
  CVector z(2);
  z << Complex(0.3, -1.7), Complex(2.0, 0.25);
  const Complex a = o.eval(z);
  const Complex b = o.eval(z);
  CHECK(a.real() == b.real());
  CHECK(a.imag() == b.imag());
}

TEST_CASE("dimension mismatch raises") {
  SparsePoly p = SparsePoly::parse("x1 + x2", 2);
  CVector z(3);
  z.setZero();
  CHECK_THROWS_AS(p.eval(z), std::invalid_argument);
  SparsePoly q(3);
  CHECK_THROWS_AS(p + q, std::invalid_argument);
}

TEST_CASE("text parse round trip") {
  SparsePoly p = SparsePoly::parse("2.5*x1^2*x3 - x2 + 4", 3);
  CHECK(p.coeff({2, 0, 1}) == 2.5);
  CHECK(p.coeff({0, 1, 0}) == -1.0);
  CHECK(p.coeff({0, 0, 0}) == 4.0);
  SparsePoly q = SparsePoly::parse(p.to_string(), 3);
  CHECK((p - q).is_zero());
}
