#include "ssos/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ssos {

int Monomial::degree() const {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

static Complex ipow(Complex base, int e) {
  Complex r(1.0, 0.0);
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

Complex Monomial::eval(const CVector& z) const {
  Complex r(1.0, 0.0);
  for (size_t i = 0; i < exponents.size(); ++i)
    if (exponents[i] != 0) r *= ipow(z[static_cast<Eigen::Index>(i)], exponents[i]);
  return r;
}

bool graded_lex_less(const Monomial& a, const Monomial& b) {
  const int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  // Within a degree block, larger exponent vectors (lexicographically) first:
  // x1 precedes x2.
  return a.exponents > b.exponents;
}

CVector MonomialVector::eval(const CVector& z) const {
  CVector out(size());
  for (int i = 0; i < size(); ++i) out[i] = monomials[i].eval(z);
  return out;
}

static void enumerate_monomials(int n, int d, int pos, int remaining,
                                std::vector<int>& cur, std::vector<Monomial>& out) {
  if (pos == n) {
    out.push_back(Monomial{cur});
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[pos] = e;
    enumerate_monomials(n, d, pos + 1, remaining - e, cur, out);
  }
  cur[pos] = 0;
}

MonomialVector monomials_up_to(int n, int d) {
  if (n < 1 || d < 0) throw std::invalid_argument("monomials_up_to: need n >= 1, d >= 0");
  std::vector<Monomial> ms;
  std::vector<int> cur(n, 0);
  enumerate_monomials(n, d, 0, d, cur, ms);
  std::sort(ms.begin(), ms.end(), graded_lex_less);
  return MonomialVector{n, std::move(ms)};
}

long long binomial(long long n, long long k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (long long i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

SparsePoly SparsePoly::constant(int n, double c) {
  SparsePoly p(n);
  p.add_term(std::vector<int>(n, 0), c);
  return p;
}

SparsePoly SparsePoly::variable(int n, int index) {
  if (index < 0 || index >= n) throw std::invalid_argument("variable index out of range");
  SparsePoly p(n);
  std::vector<int> e(n, 0);
  e[index] = 1;
  p.add_term(e, 1.0);
  return p;
}

int SparsePoly::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_)
    d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
  return d;
}

double SparsePoly::coeff(const std::vector<int>& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

void SparsePoly::add_term(const std::vector<int>& e, double c) {
  if (static_cast<int>(e.size()) != n_)
    throw std::invalid_argument("add_term: exponent length != ambient_dim");
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    if (c != 0.0) terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Complex SparsePoly::eval(const CVector& z) const {
  if (z.size() != n_) throw std::invalid_argument("eval: dimension mismatch");
  Complex acc(0.0, 0.0);
  for (const auto& [e, c] : terms_) {
    Complex t(c, 0.0);
    for (int i = 0; i < n_; ++i)
      if (e[i] != 0) t *= ipow(z[i], e[i]);
    acc += t;
  }
  return acc;
}

SparsePoly SparsePoly::operator+(const SparsePoly& other) const {
  if (n_ != other.n_) throw std::invalid_argument("poly add: dimension mismatch");
  SparsePoly r = *this;
  for (const auto& [e, c] : other.terms_) r.add_term(e, c);
  return r;
}

SparsePoly SparsePoly::operator-(const SparsePoly& other) const {
  if (n_ != other.n_) throw std::invalid_argument("poly sub: dimension mismatch");
  SparsePoly r = *this;
  for (const auto& [e, c] : other.terms_) r.add_term(e, -c);
  return r;
}

SparsePoly SparsePoly::operator*(const SparsePoly& other) const {
  if (n_ != other.n_) throw std::invalid_argument("poly mul: dimension mismatch");
  SparsePoly r(n_);
  std::vector<int> e(n_);
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : other.terms_) {
      for (int i = 0; i < n_; ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  return r;
}

SparsePoly SparsePoly::operator*(double c) const {
  SparsePoly r(n_);
  if (c == 0.0) return r;
  for (const auto& [e, coef] : terms_) r.add_term(e, coef * c);
  return r;
}

double SparsePoly::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

std::string SparsePoly::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  // Print in graded-lex order, highest degree last.
  std::vector<std::pair<Monomial, double>> ts;
  for (const auto& [e, c] : terms_) ts.push_back({Monomial{e}, c});
  std::sort(ts.begin(), ts.end(),
            [](const auto& a, const auto& b) { return graded_lex_less(a.first, b.first); });
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : ts) {
    const double a = std::abs(c);
    if (first) {
      if (c < 0) os << "-";
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    std::string vars;
    for (size_t i = 0; i < m.exponents.size(); ++i) {
      if (m.exponents[i] == 0) continue;
      if (!vars.empty()) vars += "*";
      vars += names.empty() ? ("x" + std::to_string(i + 1)) : names[i];
      if (m.exponents[i] > 1) vars += "^" + std::to_string(m.exponents[i]);
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", a);
    if (vars.empty()) {
      os << buf;
    } else if (a == 1.0) {
      os << vars;
    } else {
      os << buf << "*" << vars;
    }
  }
  return os.str();
}

namespace {

struct Parser {
  const std::string& s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  bool peek_digit() {
    skip_ws();
    return pos < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.');
  }
  double number() {
    skip_ws();
    size_t end = 0;
    double v = std::stod(s.substr(pos), &end);
    pos += end;
    return v;
  }
  int var_index() {
    skip_ws();
    if (pos >= s.size() || (s[pos] != 'x' && s[pos] != 'X'))
      throw std::invalid_argument("polynomial parse: expected variable at '" + s.substr(pos) + "'");
    ++pos;
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) throw std::invalid_argument("polynomial parse: variable needs an index");
    return std::stoi(s.substr(start, pos - start)) - 1;
  }
};

}  // namespace

SparsePoly SparsePoly::parse(const std::string& text, int ambient_dim) {
  // First pass to discover the dimension when not given.
  struct Term {
    double c;
    std::map<int, int> exps;
  };
  std::vector<Term> parsed;
  Parser p{text};
  int max_var = -1;
  p.skip_ws();
  bool first = true;
  while (true) {
    p.skip_ws();
    if (p.pos >= text.size()) break;
    double sign = 1.0;
    if (p.eat('+')) {
      sign = 1.0;
    } else if (p.eat('-')) {
      sign = -1.0;
    } else if (!first) {
      throw std::invalid_argument("polynomial parse: expected '+' or '-'");
    }
    first = false;
    Term t{sign, {}};
    bool have_factor = false;
    while (true) {
      p.skip_ws();
      if (p.peek_digit()) {
        t.c *= p.number();
        have_factor = true;
      } else if (p.pos < text.size() && (text[p.pos] == 'x' || text[p.pos] == 'X')) {
        int idx = p.var_index();
        int e = 1;
        if (p.eat('^')) e = static_cast<int>(p.number());
        t.exps[idx] += e;
        max_var = std::max(max_var, idx);
        have_factor = true;
      } else {
        break;
      }
      if (!p.eat('*')) break;
    }
    if (!have_factor) throw std::invalid_argument("polynomial parse: empty term");
    parsed.push_back(std::move(t));
  }
  int n = ambient_dim >= 0 ? ambient_dim : max_var + 1;
  if (n <= 0) n = 1;
  if (max_var >= n) throw std::invalid_argument("polynomial parse: variable index exceeds dimension");
  SparsePoly out(n);
  for (const auto& t : parsed) {
    std::vector<int> e(n, 0);
    for (const auto& [i, v] : t.exps) e[i] = v;
    out.add_term(e, t.c);
  }
  return out;
}

SparsePoly load_poly(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed polynomial file " + path + ": " + e.what());
  }
  SparsePoly p(j.at("n").get<int>());
  for (const auto& t : j.at("terms"))
    p.add_term(t.at("e").get<std::vector<int>>(), t.at("c").get<double>());
  return p;
}

void save_poly(const SparsePoly& p, const std::string& path) {
  nlohmann::ordered_json j;
  j["n"] = p.ambient_dim();
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back({{"e", e}, {"c", c}});
  j["terms"] = terms;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << "\n";
}

Complex eval_poly(const SparsePoly& p, const CVector& z) { return p.eval(z); }

Complex eval_poly(const EvalOracle& p, const CVector& z) {
  if (z.size() != p.ambient_dim) throw std::invalid_argument("eval: dimension mismatch");
  return p.eval(z);
}

EvalOracle to_oracle(const SparsePoly& p) {
  return EvalOracle{p.ambient_dim(), [p](const CVector& z) { return p.eval(z); },
                    "sparse:" + p.to_string()};
}

}  // namespace ssos
