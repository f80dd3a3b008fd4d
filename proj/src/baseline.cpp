#include "ssos/baseline.hpp"

#include <map>
#include <set>

#include "ssos/certify.hpp"
#include "ssos/rng.hpp"

namespace ssos {

namespace {

struct MatchingSystem {
  MonomialVector u;
  std::vector<std::vector<SparsePoly>> g_products;  // [j][g] = h_j * u_g
  std::vector<int> g_sizes;
  std::vector<Monomial> matched;  // sorted monomial list
  long long num_free = 0;
};

MatchingSystem build_system(const SparsePoly& p, const std::vector<SparsePoly>& h, int d,
                            MultiplierPolicy policy) {
  const int n = p.ambient_dim();
  MatchingSystem sys;
  sys.u = monomials_up_to(n, d);
  std::set<std::vector<int>> monos;
  // u u^T covers every monomial of degree <= 2d
  for (const auto& m : monomials_up_to(n, 2 * d).monomials) monos.insert(m.exponents);
  for (const auto& [e, c] : p.terms()) monos.insert(e);
  for (const auto& hj : h) {
    const int cap = policy == MultiplierPolicy::degree_d ? d
                                                         : std::max(0, 2 * d - hj.degree());
    std::vector<SparsePoly> prods;
    for (const auto& m : monomials_up_to(n, cap).monomials) {
      SparsePoly um(n);
      um.add_term(m.exponents, 1.0);
      SparsePoly prod = hj * um;
      for (const auto& [e, c] : prod.terms()) monos.insert(e);
      prods.push_back(std::move(prod));
    }
    sys.g_sizes.push_back(static_cast<int>(prods.size()));
    sys.num_free += static_cast<long long>(prods.size());
    sys.g_products.push_back(std::move(prods));
  }
  for (const auto& e : monos) sys.matched.push_back(Monomial{e});
  std::sort(sys.matched.begin(), sys.matched.end(), graded_lex_less);
  return sys;
}

}  // namespace

EquationsSosResult equations_sos(const SparsePoly& p, const std::vector<SparsePoly>& h, int d,
                                 const EquationsSosOptions& opts) {
  for (const auto& hj : h)
    if (hj.ambient_dim() != p.ambient_dim())
      throw std::invalid_argument("equations_sos: ambient dimension mismatch");
  MatchingSystem sys = build_system(p, h, d, opts.policy);
  const int N = sys.u.size();
  const int m_eq = static_cast<int>(h.size());
  const int nfree = static_cast<int>(sys.num_free);

  SdpProblem prob;
  prob.psd_dim = N;
  prob.num_free = nfree;
  // feasibility: minimize the trace for a well-centered solve
  prob.obj_psd = -Eigen::MatrixXd::Identity(N, N);

  std::map<std::vector<int>, int> mono_index;
  for (size_t i = 0; i < sys.matched.size(); ++i) mono_index[sys.matched[i].exponents] = static_cast<int>(i);

  const int M = static_cast<int>(sys.matched.size());
  std::vector<SdpConstraint> rows(M);
  for (int i = 0; i < M; ++i) {
    rows[i].A = Eigen::MatrixXd::Zero(N, N);
    rows[i].a = Eigen::VectorXd::Zero(nfree);
    rows[i].b = p.coeff(sys.matched[i].exponents);
  }
  // coefficient of each monomial in u^T Q u
  std::vector<int> sum(p.ambient_dim());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      for (int t = 0; t < p.ambient_dim(); ++t)
        sum[t] = sys.u.monomials[i].exponents[t] + sys.u.monomials[j].exponents[t];
      rows[mono_index.at(sum)].A(i, j) += 1.0;
    }
  // coefficient of each monomial in h_j * u_g
  int col = 0;
  for (int j = 0; j < m_eq; ++j)
    for (const auto& prod : sys.g_products[j]) {
      for (const auto& [e, c] : prod.terms()) rows[mono_index.at(e)].a[col] = c;
      ++col;
    }
  prob.constraints = std::move(rows);

  EquationsSosResult res;
  res.u = sys.u;
  res.matched_monomials = M;
  SdpSolution sol = solve(prob, opts.solver);
  res.status = sol.status;
  if (sol.status == SdpStatus::primal_infeasible) {
    res.feasible = false;
    return res;
  }
  if (sol.status != SdpStatus::optimal) {
    res.feasible = false;
    return res;
  }
  res.feasible = true;
  res.Q = sol.Q;
  res.R = extract_factor(sol.Q, 1e-7 * (1.0 + sol.Q.norm()));
  col = 0;
  for (int j = 0; j < m_eq; ++j) {
    SparsePoly gj(p.ambient_dim());
    const int cap = opts.policy == MultiplierPolicy::degree_d
                        ? d
                        : std::max(0, 2 * d - h[j].degree());
    const MonomialVector gb = monomials_up_to(p.ambient_dim(), cap);
    for (int g = 0; g < gb.size(); ++g) {
      const double cval = sol.free_values[col++];
      if (cval != 0.0) gj.add_term(gb.monomials[g].exponents, cval);
    }
    res.multipliers.push_back(std::move(gj));
  }
  // exact identity residual, by expansion
  SparsePoly F(p.ambient_dim());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (res.Q(i, j) == 0.0) continue;
      for (int t = 0; t < p.ambient_dim(); ++t)
        sum[t] = sys.u.monomials[i].exponents[t] + sys.u.monomials[j].exponents[t];
      F.add_term(sum, res.Q(i, j));
    }
  SparsePoly resid = p - F;
  for (int j = 0; j < m_eq; ++j) resid = resid - res.multipliers[j] * h[j];
  res.identity_residual = resid.max_abs_coeff() / (1.0 + p.max_abs_coeff());
  return res;
}

DimCount count_dims(const SparsePoly& p, const std::vector<SparsePoly>& h, int d,
                    bool with_gamma, CountConvention conv, MultiplierPolicy policy) {
  MatchingSystem sys = build_system(p, h, d, policy);
  const long long N = sys.u.size();
  const long long svec = N * (N + 1) / 2;
  const long long decision = svec + sys.num_free + (with_gamma ? 1 : 0);
  const long long M = static_cast<long long>(sys.matched.size());
  if (conv == CountConvention::kernel) return {decision, M};
  return {M + svec, decision};
}

// ---------------------------------------------------------------------------
// Benchmark instances

TableInstance procrustes_table_instance(int n, int k, std::uint64_t seed) {
  Rng rng(seed);
  const int nv = n * k;
  Eigen::MatrixXd A(n, n), B(n, k), C(k, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) B(i, j) = rng.normal();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) C(i, j) = rng.normal();

  TableInstance inst{SparsePoly(nv), {}};
  // p = ||A X C - B||^2 expanded over vec(X)
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < k; ++c) {
      SparsePoly entry = SparsePoly::constant(nv, -B(r, c));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
          const double coef = A(r, i) * C(j, c);
          if (coef != 0.0) {
            std::vector<int> e(nv, 0);
            e[j * n + i] = 1;
            entry.add_term(e, coef);
          }
        }
      inst.p = inst.p + entry * entry;
    }
  // X^T X = id_k, upper triangle
  for (int l = 0; l < k; ++l)
    for (int m = l; m < k; ++m) {
      SparsePoly q(nv);
      for (int i = 0; i < n; ++i) {
        std::vector<int> e(nv, 0);
        e[l * n + i] += 1;
        e[m * n + i] += 1;
        q.add_term(e, 1.0);
      }
      if (l == m) q = q - SparsePoly::constant(nv, 1.0);
      inst.h.push_back(std::move(q));
    }
  return inst;
}

TableInstance trace_ratio_table_instance(int n, int k, std::uint64_t seed) {
  Rng rng(seed);
  const int nv = n * (n + 1) / 2;  // symmetric coordinates, upper triangle
  auto var = [n, nv](int i, int j) {
    if (i > j) std::swap(i, j);
    std::vector<int> e(nv, 0);
    e[j * (j + 1) / 2 + i] = 1;
    return e;
  };
  Eigen::MatrixXd A(n, n), B(n, n), C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      A(i, j) = A(j, i) = rng.normal();
      B(i, j) = B(j, i) = rng.normal();
      C(i, j) = C(j, i) = rng.normal();
    }
  B = B * B.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);

  auto trace_poly_sym = [&](const Eigen::MatrixXd& M) {
    SparsePoly t(nv);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (M(i, j) != 0.0) t.add_term(var(j, i), M(i, j));
    return t;
  };
  TableInstance inst{SparsePoly(nv), {}};
  SparsePoly ta = trace_poly_sym(A), tb = trace_poly_sym(B), tc = trace_poly_sym(C);
  inst.p = (tb * tc) * -1.0 - ta;
  // X^2 = X, upper triangle
  for (int l = 0; l < n; ++l)
    for (int m = l; m < n; ++m) {
      SparsePoly q(nv);
      for (int i = 0; i < n; ++i) {
        std::vector<int> e(nv, 0);
        const auto e1 = var(l, i), e2 = var(i, m);
        for (int t = 0; t < nv; ++t) e[t] = e1[t] + e2[t];
        q.add_term(e, 1.0);
      }
      q.add_term(var(l, m), -1.0);
      inst.h.push_back(std::move(q));
    }
  // tr X = k
  SparsePoly tr(nv);
  for (int i = 0; i < n; ++i) tr.add_term(var(i, i), 1.0);
  tr = tr - SparsePoly::constant(nv, static_cast<double>(k));
  inst.h.push_back(std::move(tr));
  return inst;
}

}  // namespace ssos
