#include "ssos/applications.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <json.hpp>

namespace ssos {

using json = nlohmann::ordered_json;

double& Tensor::at(const std::vector<int>& idx) {
  int flat = 0, stride = 1;
  for (size_t m = 0; m < dims.size(); ++m) {
    flat += (idx[m] - 1) * stride;
    stride *= dims[m];
  }
  return data[flat];
}

double Tensor::at(const std::vector<int>& idx) const {
  return const_cast<Tensor*>(this)->at(idx);
}

Tensor Tensor::zeros(const std::vector<int>& d) {
  Tensor t;
  t.dims = d;
  int total = 1;
  for (int v : d) total *= v;
  t.data = Eigen::VectorXd::Zero(total);
  return t;
}

// ---------------------------------------------------------------------------
// Procrustes

OptimizationTask build_procrustes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                  const Eigen::MatrixXd& C, int n, int k, int d,
                                  std::uint64_t seed) {
  if (A.cols() != n || B.rows() != A.rows() || C.rows() != k || C.cols() != B.cols())
    throw std::invalid_argument("build_procrustes: incompatible matrix dimensions");
  OptimizationTask task;
  task.name = "procrustes";
  task.oracle = make_stiefel_oracle(n, k, seed);
  task.degree = d;
  task.report_sqrt = true;
  const Eigen::MatrixXcd Ac = A.cast<Complex>(), Bc = B.cast<Complex>(), Cc = C.cast<Complex>();
  task.lhs = [Ac, Bc, Cc, n, k](const SamplePoint& p, int) {
    const Eigen::MatrixXcd X = unflatten(p.coords, n, k);
    const Eigen::MatrixXcd M = Ac * X * Cc - Bc;
    // polynomial evaluation: entries squared, not conjugated
    const Complex val = (M.array() * M.array()).sum();
    return SampleLhs{val, Complex(1, 0), Eigen::VectorXcd()};
  };
  task.objective = [A, B, C, n, k](const Eigen::VectorXd& x) {
    Eigen::MatrixXd X(n, k);
    int idx = 0;
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < n; ++r) X(r, c) = x[idx++];
    return (A * X * C - B).squaredNorm();
  };
  task.variety_residual = [n, k](const Eigen::VectorXd& x) {
    Eigen::MatrixXd X(n, k);
    int idx = 0;
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < n; ++r) X(r, c) = x[idx++];
    return (X.transpose() * X - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
  };
  return task;
}

SparsePoly procrustes_objective_poly(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                     const Eigen::MatrixXd& C, int n, int k) {
  const int nv = n * k;
  // entry (r, c) of A X C - B as a linear polynomial in vec(X)
  SparsePoly total(nv);
  for (int r = 0; r < A.rows(); ++r)
    for (int c = 0; c < C.cols(); ++c) {
      SparsePoly entry = SparsePoly::constant(nv, -B(r, c));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
          const double coef = A(r, i) * C(j, c);
          if (coef != 0.0) {
            std::vector<int> e(nv, 0);
            e[j * n + i] = 1;  // column-major vec(X)
            entry.add_term(e, coef);
          }
        }
      total = total + entry * entry;
    }
  return total;
}

// ---------------------------------------------------------------------------
// Trace ratio

OptimizationTask build_trace_ratio(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const Eigen::MatrixXd& C, int k, int d, std::uint64_t seed) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n || B.cols() != n || C.rows() != n || C.cols() != n)
    throw std::invalid_argument("build_trace_ratio: square matrices of equal size required");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument("build_trace_ratio: B must be positive definite");
  OptimizationTask task;
  task.name = "trace_ratio";
  task.oracle = make_grassmannian_oracle(n, k, seed);
  task.degree = d;
  task.minimize_gamma = true;
  const Eigen::MatrixXcd Ac = A.cast<Complex>(), Bc = B.cast<Complex>(), Cc = C.cast<Complex>();
  task.lhs = [Ac, Bc, Cc, n](const SamplePoint& p, int) {
    const Eigen::MatrixXcd X = unflatten(p.coords, n, n);
    const Complex ta = (Ac * X).trace();
    const Complex tb = (Bc * X).trace();
    const Complex tc = (Cc * X).trace();
    return SampleLhs{-tb * tc - ta, -tb, Eigen::VectorXcd()};
  };
  task.objective = [A, B, C, n](const Eigen::VectorXd& x) {
    Eigen::MatrixXd X(n, n);
    int idx = 0;
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) X(r, c) = x[idx++];
    return (A * X).trace() / (B * X).trace() + (C * X).trace();
  };
  task.variety_residual = [n, k](const Eigen::VectorXd& x) {
    Eigen::MatrixXd X(n, n);
    int idx = 0;
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) X(r, c) = x[idx++];
    double res = (X * X - X).cwiseAbs().maxCoeff();
    res = std::max(res, (X - X.transpose()).cwiseAbs().maxCoeff());
    return std::max(res, std::abs(X.trace() - k));
  };
  return task;
}

static SparsePoly trace_poly(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  SparsePoly p(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (M(i, j) != 0.0) {
        std::vector<int> e(n * n, 0);
        e[i * n + j] = 1;  // X(j, i) in column-major; tr(MX) = sum M_ij X_ji
        p.add_term(e, M(i, j));
      }
  return p;
}

std::pair<SparsePoly, SparsePoly> trace_ratio_polys(const Eigen::MatrixXd& A,
                                                    const Eigen::MatrixXd& B,
                                                    const Eigen::MatrixXd& C) {
  SparsePoly ta = trace_poly(A), tb = trace_poly(B), tc = trace_poly(C);
  SparsePoly rhs = (tb * tc) * -1.0 - ta;
  return {rhs, tb * -1.0};
}

// ---------------------------------------------------------------------------
// Tensor approximation

OptimizationTask build_tensor_approx(const Tensor& T, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("build_tensor_approx: need k >= 1");
  const int d = k / 2 + 1;
  OptimizationTask task;
  task.name = "tensor_approx";
  task.oracle = make_rank_tensor_oracle(T.dims, k, seed);
  task.degree = d;
  task.report_sqrt = true;
  const Eigen::VectorXcd Tc = T.data.cast<Complex>();
  task.lhs = [Tc, d](const SamplePoint& p, int) {
    const Eigen::VectorXcd diff = Tc - p.coords;
    const Complex dist2 = (diff.array() * diff.array()).sum();
    const Complex sigma = (p.coords.array() * p.coords.array()).sum();
    Complex damp(1, 0);
    for (int i = 0; i < d - 1; ++i) damp *= sigma;
    return SampleLhs{dist2 * damp, damp, Eigen::VectorXcd()};
  };
  const Eigen::VectorXd Td = T.data;
  task.objective = [Td](const Eigen::VectorXd& x) { return (Td - x).squaredNorm(); };
  if (k == 1) {
    const std::vector<int> dims = T.dims;
    task.variety_residual = [dims](const Eigen::VectorXd& x) {
      return rank_one_distance(dims, x);
    };
  }
  return task;
}

std::pair<SparsePoly, SparsePoly> tensor_polys(const Tensor& T) {
  const int nv = T.size();
  SparsePoly dist2(nv), sigma(nv);
  for (int i = 0; i < nv; ++i) {
    SparsePoly xi = SparsePoly::variable(nv, i);
    SparsePoly diff = xi - SparsePoly::constant(nv, T.data[i]);
    dist2 = dist2 + diff * diff;
    sigma = sigma + xi * xi;
  }
  return {dist2, sigma};
}

double rank_one_distance(const std::vector<int>& dims, const Eigen::VectorXd& x) {
  const int ell = static_cast<int>(dims.size());
  std::vector<Eigen::VectorXd> u(ell);
  for (int m = 0; m < ell; ++m) u[m] = Eigen::VectorXd::Ones(dims[m]).normalized();
  double sigma = 0.0;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double change = 0.0;
    for (int m = 0; m < ell; ++m) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(dims[m]);
      for (int flat = 0; flat < x.size(); ++flat) {
        double prod = x[flat];
        int rem = flat, im = 0;
        for (int t = 0; t < ell; ++t) {
          const int it = rem % dims[t];
          rem /= dims[t];
          if (t == m)
            im = it;
          else
            prod *= u[t][it];
        }
        v[im] += prod;
      }
      const double nv = v.norm();
      if (nv == 0) return x.norm();
      v /= nv;
      change = std::max(change, (v - u[m]).cwiseAbs().maxCoeff());
      u[m] = v;
      sigma = nv;
    }
    if (change < 1e-13) break;
  }
  const double r2 = x.squaredNorm() - sigma * sigma;
  return std::sqrt(std::max(r2, 0.0));
}

// ---------------------------------------------------------------------------
// Infeasibility / amoeba

FeasibilityTask build_infeasibility(const OraclePtr& oracle, int d) {
  FeasibilityTask task;
  task.name = "infeasibility";
  task.oracle = oracle;
  task.degree = d;
  task.lhs = [](const SamplePoint&, int) {
    return SampleLhs{Complex(-1, 0), Complex(0, 0), Eigen::VectorXcd()};
  };
  return task;
}

OraclePtr make_lifted_oracle(const OraclePtr& base) {
  const int n = base->ambient_dim();
  OraclePtr captured = base;
  auto fn = [captured, n](Rng&) {
    const SamplePoint z = captured->sample();
    CVector out(2 * n);
    out.head(n) = z.coords.real().cast<Complex>();
    out.tail(n) = z.coords.imag().cast<Complex>();
    return SamplePoint{out, z.component_id};
  };
  auto residual = [captured, n](const SamplePoint& p) {
    CVector z(n), w(n);
    const Complex i1(0, 1);
    for (int j = 0; j < n; ++j) {
      z[j] = p.coords[j] + i1 * p.coords[n + j];
      w[j] = p.coords[j] - i1 * p.coords[n + j];
    }
    return std::max(captured->defining_residual({z, -1}),
                    captured->defining_residual({w, -1}));
  };
  return make_callback_oracle(2 * n, "lift(" + base->id() + ")", fn, base->seed(), residual, fn);
}

std::vector<SparsePoly> amoeba_equations(const Eigen::VectorXd& lambda) {
  const int n = static_cast<int>(lambda.size());
  std::vector<SparsePoly> h;
  for (int i = 0; i < n; ++i) {
    SparsePoly xi = SparsePoly::variable(2 * n, i);
    SparsePoly yi = SparsePoly::variable(2 * n, n + i);
    h.push_back(xi * xi + yi * yi - SparsePoly::constant(2 * n, lambda[i] * lambda[i]));
  }
  return h;
}

FeasibilityTask build_amoeba(const AmoebaTask& t) {
  if (t.lambda.minCoeff() <= 0)
    throw std::invalid_argument("build_amoeba: lambda must be strictly positive");
  const int nb = t.base_oracle->ambient_dim();
  if (t.lambda.size() != nb)
    throw std::invalid_argument("build_amoeba: lambda length must match the base ambient dim");
  FeasibilityTask task;
  task.name = "amoeba";
  task.oracle = make_lifted_oracle(t.base_oracle);
  task.degree = t.d;
  task.basis_override = t.u_basis;

  std::vector<SparsePoly> h = amoeba_equations(t.lambda);
  std::vector<SparsePoly> v;
  if (t.v_basis) {
    v = *t.v_basis;
  } else {
    const MonomialVector mv = monomials_up_to(2 * nb, std::max(0, 2 * t.d - 2));
    for (const auto& m : mv.monomials) {
      SparsePoly p(2 * nb);
      p.add_term(m.exponents, 1.0);
      v.push_back(std::move(p));
    }
  }
  const int nfree = nb * static_cast<int>(v.size());
  task.num_extra_free = nfree;
  task.lhs = [h, v, nfree](const SamplePoint& p, int) {
    Eigen::VectorXcd coeffs(nfree);
    int idx = 0;
    for (const auto& hi : h) {
      const Complex hv = hi.eval(p.coords);
      for (const auto& vj : v) coeffs[idx++] = hv * vj.eval(p.coords);
    }
    return SampleLhs{Complex(-1, 0), Complex(0, 0), coeffs};
  };
  return task;
}

// ---------------------------------------------------------------------------
// Task files

static Eigen::MatrixXd json_matrix(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

AnyTask load_task(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  const std::string kind = j.at("kind").get<std::string>();
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  if (kind == "procrustes") {
    auto task = build_procrustes(json_matrix(j.at("A")), json_matrix(j.at("B")),
                                 json_matrix(j.at("C")), j.at("n").get<int>(),
                                 j.at("k").get<int>(), j.value("d", 1), seed);
    if (j.contains("samples")) task.fixed_samples = j["samples"].get<int>();
    return task;
  }
  if (kind == "trace_ratio") {
    auto task = build_trace_ratio(json_matrix(j.at("A")), json_matrix(j.at("B")),
                                  json_matrix(j.at("C")), j.at("k").get<int>(),
                                  j.value("d", 1), seed);
    if (j.contains("samples")) task.fixed_samples = j["samples"].get<int>();
    return task;
  }
  if (kind == "tensor_approx") {
    Tensor T = Tensor::zeros(j.at("dims").get<std::vector<int>>());
    if (j.contains("entries")) {
      for (const auto& e : j["entries"]) T.at(e[0].get<std::vector<int>>()) = e[1].get<double>();
    } else {
      const auto flat = j.at("data").get<std::vector<double>>();
      for (size_t i = 0; i < flat.size(); ++i) T.data[i] = flat[i];
    }
    auto task = build_tensor_approx(T, j.at("k").get<int>(), seed);
    if (j.contains("samples")) task.fixed_samples = j["samples"].get<int>();
    return task;
  }
  if (kind == "amoeba") {
    AmoebaTask at;
    at.base_oracle = make_oracle(j.at("variety").get<std::string>(), seed);
    if (j.contains("lambda")) {
      const auto l = j["lambda"].get<std::vector<double>>();
      at.lambda = Eigen::Map<const Eigen::VectorXd>(l.data(), l.size());
    } else {
      at.lambda = Eigen::VectorXd::Constant(at.base_oracle->ambient_dim(),
                                            j.at("lambda_value").get<double>());
    }
    at.d = j.value("d", 1);
    auto task = build_amoeba(at);
    if (j.contains("samples")) task.fixed_samples = j["samples"].get<int>();
    return task;
  }
  if (kind == "infeasibility") {
    auto task = build_infeasibility(make_oracle(j.at("variety").get<std::string>(), seed),
                                    j.value("d", 1));
    if (j.contains("samples")) task.fixed_samples = j["samples"].get<int>();
    return task;
  }
  throw std::runtime_error("unknown task kind: " + kind);
}

}  // namespace ssos
