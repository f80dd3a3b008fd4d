#include "ssos/certify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace ssos {

using json = nlohmann::ordered_json;

CVector Certificate::basis_at(const CVector& z) const {
  return basis_coeffs.cast<Complex>() * monomials.eval(z);
}

Complex Certificate::sos_at(const CVector& z) const {
  if (R.rows() == 0) return Complex(0, 0);
  const CVector u = basis_at(z);
  const CVector ru = R.cast<Complex>() * u;
  Complex acc(0, 0);
  for (Eigen::Index i = 0; i < ru.size(); ++i) acc += ru[i] * ru[i];
  return acc;
}

std::vector<SparsePoly> Certificate::factor_polynomials() const {
  std::vector<SparsePoly> out;
  const Eigen::MatrixXd rows = R * basis_coeffs;  // factor rows over monomials
  for (Eigen::Index k = 0; k < rows.rows(); ++k) {
    SparsePoly p(monomials.ambient_dim);
    for (int j = 0; j < monomials.size(); ++j)
      if (rows(k, j) != 0.0) p.add_term(monomials.monomials[j].exponents, rows(k, j));
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON round trip

static json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

static Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

void save_certificate(const Certificate& cert, const std::string& path) {
  json j;
  j["format"] = "ssos-certificate";
  j["version"] = 1;
  j["degree"] = cert.degree;
  j["ambient_dim"] = cert.monomials.ambient_dim;
  json monos = json::array();
  for (const auto& m : cert.monomials.monomials) monos.push_back(m.exponents);
  j["monomials"] = monos;
  j["basis_coeffs"] = matrix_to_json(cert.basis_coeffs);
  if (cert.T.size()) j["T"] = matrix_to_json(cert.T);
  j["Q"] = matrix_to_json(cert.Q);
  j["R"] = matrix_to_json(cert.R);
  if (cert.gamma) j["gamma"] = *cert.gamma;
  if (cert.free_values.size()) {
    json f = json::array();
    for (Eigen::Index i = 0; i < cert.free_values.size(); ++i) f.push_back(cert.free_values[i]);
    j["free_values"] = f;
  }
  j["provenance"] = {{"oracle_id", cert.oracle_id},
                     {"seed", cert.seed},
                     {"num_samples", cert.num_samples}};
  j["residual_report"] = {{"max_relative_residual", cert.residual},
                          {"samples_per_component", cert.verify_samples_per_component}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << "\n";
}

Certificate load_certificate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  if (j.value("format", std::string()) != "ssos-certificate")
    throw std::runtime_error(path + " is not a certificate file");
  Certificate cert;
  cert.degree = j["degree"].get<int>();
  cert.monomials.ambient_dim = j["ambient_dim"].get<int>();
  for (const auto& e : j["monomials"])
    cert.monomials.monomials.push_back(Monomial{e.get<std::vector<int>>()});
  cert.basis_coeffs = matrix_from_json(j["basis_coeffs"]);
  if (j.contains("T")) cert.T = matrix_from_json(j["T"]);
  cert.Q = matrix_from_json(j["Q"]);
  cert.R = matrix_from_json(j["R"]);
  if (cert.R.size() == 0) cert.R = Eigen::MatrixXd(0, cert.basis_coeffs.rows());
  if (j.contains("gamma")) cert.gamma = j["gamma"].get<double>();
  if (j.contains("free_values")) {
    const auto& f = j["free_values"];
    cert.free_values = Eigen::VectorXd(f.size());
    for (size_t i = 0; i < f.size(); ++i) cert.free_values[i] = f[i].get<double>();
  }
  cert.oracle_id = j["provenance"]["oracle_id"].get<std::string>();
  cert.seed = j["provenance"]["seed"].get<std::uint64_t>();
  cert.num_samples = j["provenance"]["num_samples"].get<int>();
  cert.residual = j["residual_report"]["max_relative_residual"].get<double>();
  cert.verify_samples_per_component = j["residual_report"]["samples_per_component"].get<int>();
  return cert;
}

// ---------------------------------------------------------------------------
// Identity testing and factor extraction

bool is_zero(const std::function<Complex(const CVector&)>& f, VarietyOracle& oracle, int k,
             double tol, const std::function<double(const CVector&)>& scale) {
  if (k < 1) throw std::invalid_argument("is_zero: need k >= 1");
  for (int c = 0; c < oracle.num_components(); ++c) {
    VarietyOracle& comp = oracle.component(c);
    for (int i = 0; i < k; ++i) {
      const SamplePoint z = comp.sample();
      const double v = std::abs(f(z.coords));
      const double s = 1.0 + (scale ? scale(z.coords) : 0.0);
      if (v / s > tol) return false;
    }
  }
  return true;
}

bool is_zero(const SparsePoly& f, VarietyOracle& oracle, int k, double tol) {
  return is_zero([&f](const CVector& z) { return f.eval(z); }, oracle, k, tol);
}

bool is_zero(const EvalOracle& f, VarietyOracle& oracle, int k, double tol) {
  return is_zero([&f](const CVector& z) { return f.eval(z); }, oracle, k, tol);
}

Eigen::MatrixXd extract_factor(const Eigen::MatrixXd& Q, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
  const auto& ev = eig.eigenvalues();
  const double lmin = ev.minCoeff();
  if (lmin < -tol) throw std::runtime_error("extract_factor: matrix is not PSD within tolerance");
  const double lmax = std::max(ev.maxCoeff(), 0.0);
  std::vector<int> kept;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > lmax * 1e-14 && ev[i] > 0) kept.push_back(static_cast<int>(i));
  Eigen::MatrixXd R(kept.size(), Q.rows());
  for (size_t k = 0; k < kept.size(); ++k)
    R.row(k) = std::sqrt(ev[kept[k]]) * eig.eigenvectors().col(kept[k]).transpose();
  return R;
}

// ---------------------------------------------------------------------------
// Sampling engine shared by certification, optimization and feasibility

namespace {

struct EngineSpec {
  std::string name;
  OraclePtr oracle;
  OraclePtr verify_oracle;
  int degree = 1;
  LhsFn lhs;
  bool with_gamma = false;
  bool minimize_gamma = false;
  int num_extra_free = 0;
  std::optional<std::vector<SparsePoly>> basis_override;
};

struct EngineOut {
  SosOutcome outcome = SosOutcome::failure;
  std::optional<Certificate> cert;
  SdpSolution sol;
  SdpProblem prob;
  SampleSet Z;
  int S_per_component = 0;
  int retries = 0;
  std::string diag;
};

OrthBasisResult build_basis(const EngineSpec& spec, const MonomialVector& u,
                            const SampleSet& Z) {
  if (spec.basis_override) return orth_basis(*spec.basis_override, Z);
  return orth_basis(u, Z);
}

// Expand the orthogonal basis over plain monomials for storage/evaluation.
void resolve_monomial_form(const OrthBasisResult& basis, Certificate& cert) {
  if (!basis.monomials.monomials.empty()) {
    cert.monomials = basis.monomials;
    cert.basis_coeffs = basis.coeffs;
    cert.T = basis.T;
    return;
  }
  std::set<std::vector<int>> seen;
  for (const auto& p : basis.input_polys)
    for (const auto& [e, c] : p.terms()) seen.insert(e);
  MonomialVector mv;
  mv.ambient_dim = basis.input_polys.empty() ? 0 : basis.input_polys[0].ambient_dim();
  for (const auto& e : seen) mv.monomials.push_back(Monomial{e});
  std::sort(mv.monomials.begin(), mv.monomials.end(), graded_lex_less);
  Eigen::MatrixXd expand(basis.input_polys.size(), mv.size());
  expand.setZero();
  for (size_t i = 0; i < basis.input_polys.size(); ++i)
    for (int j = 0; j < mv.size(); ++j)
      expand(static_cast<Eigen::Index>(i), j) =
          basis.input_polys[i].coeff(mv.monomials[j].exponents);
  cert.monomials = mv;
  cert.basis_coeffs = basis.coeffs * expand;
}

struct SampleSearch {
  SampleSet Z;
  OrthBasisResult basis;
  int S = 0;  // per component
  bool certified = false;
  bool by_bound = false;
  int D_e = 0;
};

void top_up(VarietyOracle& oracle, SampleSet& Z, int total) {
  while (Z.size() < total) Z.points.push_back(oracle.sample());
}

SampleSearch find_samples(const EngineSpec& spec, const MonomialVector& u,
                          const SosOptions& opts) {
  VarietyOracle& oracle = *spec.oracle;
  const int r = oracle.num_components();
  SampleSearch out;
  out.Z.ambient_dim = oracle.ambient_dim();
  out.Z.oracle_id = oracle.id();
  out.Z.seed = oracle.seed();

  const long long cap = min_samples_bound(oracle.ambient_dim(), spec.degree, opts.deg_V,
                                          opts.dim_V);
  if (opts.fixed_samples) {
    out.S = *opts.fixed_samples;
    top_up(oracle, out.Z, out.S * r);
    out.basis = build_basis(spec, u, out.Z);
    out.certified = true;  // pinned by the caller
    return out;
  }

  int S = opts.initial_samples
              ? *opts.initial_samples
              : static_cast<int>(std::min<long long>(8, std::max<long long>(2, cap)));
  while (true) {
    top_up(oracle, out.Z, S * r);
    out.basis = build_basis(spec, u, out.Z);
    PoisednessReport rep = good_samples(out.basis.evals);
    out.D_e = rep.D_e;
    const int cols_per_comp = rep.gram_columns / r;
    if (rep.D_e < cols_per_comp) {
      out.certified = true;
      // Shrink to the smallest sample count the test supports.
      const int S_ref = rep.real_regime ? rep.D_e : rep.D_e / 2 + 1;
      if (S_ref < S) {
        SampleSet zref = out.Z;
        zref.points.resize(static_cast<size_t>(S_ref) * r);
        OrthBasisResult bref = build_basis(spec, u, zref);
        PoisednessReport rref = good_samples(bref.evals);
        if (rref.D_e == rep.D_e) {
          out.Z = std::move(zref);
          out.basis = std::move(bref);
          S = S_ref;
        }
      }
      out.S = S;
      return out;
    }
    if (S >= cap) {
      // Theory guarantees poisedness at the Hilbert-function bound even when
      // the rank test cannot certify it (equality case).
      out.S = S;
      out.by_bound = true;
      return out;
    }
    S = std::max(S + 1, static_cast<int>(std::ceil(opts.growth * S)));
    S = static_cast<int>(std::min<long long>(S, cap));
  }
}

double verify_residual(const EngineSpec& spec, const Certificate& cert, VarietyOracle& oracle,
                       int per_component) {
  double worst = 0.0;
  const double gamma = cert.gamma.value_or(0.0);
  for (int c = 0; c < oracle.num_components(); ++c) {
    VarietyOracle& comp = oracle.component(c);
    for (int i = 0; i < per_component; ++i) {
      const SamplePoint z = comp.sample();
      const SampleLhs L = spec.lhs(z, -1);
      Complex lhs = L.rhs;
      double scale = std::abs(L.rhs);
      if (cert.gamma) {
        lhs -= gamma * L.gamma_coeff;
        scale += std::abs(gamma * L.gamma_coeff);
      }
      for (int jf = 0; jf < spec.num_extra_free; ++jf) {
        const Complex t = L.free_coeffs[jf] * cert.free_values[jf];
        lhs -= t;
        scale += std::abs(t);
      }
      const Complex F = cert.sos_at(z.coords);
      scale += std::abs(F);
      worst = std::max(worst, std::abs(lhs - F) / (1.0 + scale));
    }
  }
  return worst;
}

EngineOut run_engine(const EngineSpec& spec_in, const SosOptions& opts) {
  EngineSpec spec = spec_in;
  if (!spec.verify_oracle) spec.verify_oracle = opts.verify_oracle ? opts.verify_oracle : spec.oracle;
  if (spec.minimize_gamma) {
    // Internally always maximize gamma; flip its coefficient and negate on
    // extraction.
    LhsFn base = spec.lhs;
    spec.lhs = [base](const SamplePoint& p, int i) {
      SampleLhs L = base(p, i);
      L.gamma_coeff = -L.gamma_coeff;
      return L;
    };
  }

  EngineOut out;
  const int n = spec.oracle->ambient_dim();
  MonomialVector u;
  if (!spec.basis_override) u = monomials_up_to(n, spec.degree);

  SosOptions cur = opts;
  std::ostringstream diag;
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    out.retries = attempt;
    SampleSearch search;
    try {
      search = find_samples(spec, u, cur);
    } catch (const OracleExhausted& e) {
      out.outcome = SosOutcome::failure;
      diag << "sample oracle exhausted: " << e.what() << "; ";
      out.diag = diag.str();
      return out;
    }
    out.Z = search.Z;
    out.S_per_component = search.S;
    diag << "attempt " << attempt << ": S=" << search.S << " rank=" << search.basis.rank
         << " D_e=" << search.D_e << (search.by_bound ? " (bound)" : "") << "; ";

    SdpProblem prob = assemble_sampling_sdp(spec.lhs, search.basis, search.Z,
                                            spec.num_extra_free, spec.with_gamma);
    // Right-hand sides normalized for conditioning; undone on extraction.
    double rho = 1.0;
    for (const auto& c : prob.constraints) rho = std::max(rho, std::abs(c.b));
    for (auto& c : prob.constraints) c.b /= rho;

    // Kernel unless the image parametrization is decisively smaller.
    SdpSolution sol;
    bool solved = false;
    if (!opts.prefer_kernel &&
        prob.num_constraints() > prob.num_variables() / 2) {
      try {
        SdpProblem img = to_image_form(prob);
        if (img.image->num_parameters() < prob.num_constraints()) {
          sol = solve(img, opts.solver);
          solved = true;
        }
      } catch (const std::runtime_error&) {
        // inconsistent constraints; fall through to the kernel solve for the
        // Farkas certificate
      }
    }
    if (!solved) sol = solve(prob, opts.solver);
    if (sol.status == SdpStatus::primal_infeasible && sol.y.size() == 0)
      sol = solve(prob, opts.solver);  // kernel re-solve for the certificate
    out.sol = sol;
    out.prob = std::move(prob);

    if (sol.status == SdpStatus::primal_infeasible) {
      out.outcome = SosOutcome::no_certificate;
      diag << "SDP primal infeasible; ";
      out.diag = diag.str();
      return out;
    }
    if (sol.status == SdpStatus::dual_infeasible) {
      out.outcome = SosOutcome::failure;
      diag << "SDP unbounded (dual infeasible); ";
      out.diag = diag.str();
      return out;
    }
    if (sol.status == SdpStatus::numerical_trouble) {
      diag << "SDP numerical trouble (" << sol.message << "); ";
      cur.initial_samples = std::max(search.S + 1, static_cast<int>(std::ceil(opts.growth * search.S)));
      continue;
    }

    Certificate cert;
    cert.degree = spec.degree;
    resolve_monomial_form(search.basis, cert);
    cert.Q = rho * sol.Q;
    const double qscale = 1.0 + cert.Q.norm();
    cert.R = extract_factor(cert.Q, 1e-7 * qscale);
    int fidx = 0;
    if (spec.with_gamma) {
      double g = rho * sol.free_values[0];
      cert.gamma = spec.minimize_gamma ? -g : g;
      fidx = 1;
    }
    if (spec.num_extra_free > 0)
      cert.free_values = rho * sol.free_values.segment(fidx, spec.num_extra_free);
    cert.oracle_id = spec.oracle->id();
    cert.seed = spec.oracle->seed();
    cert.num_samples = search.Z.size();
    cert.verify_samples_per_component = cur.verify_samples;

    double resid;
    try {
      resid = verify_residual(spec, cert, *spec.verify_oracle, cur.verify_samples);
    } catch (const OracleExhausted& e) {
      out.outcome = SosOutcome::failure;
      diag << "verification oracle exhausted: " << e.what() << "; ";
      out.diag = diag.str();
      return out;
    }
    cert.residual = resid;
    if (resid <= cur.verify_tol) {
      out.outcome = SosOutcome::certificate;
      out.cert = std::move(cert);
      out.diag = diag.str();
      return out;
    }
    diag << "verification failed (residual " << resid << "); ";
    cur.initial_samples = std::max(search.S + 1, static_cast<int>(std::ceil(opts.growth * search.S)));
  }
  out.outcome = SosOutcome::failure;
  diag << "retries exhausted; ";
  out.diag = diag.str();
  return out;
}

SosResult to_sos_result(EngineOut&& out) {
  SosResult res;
  res.outcome = out.outcome;
  res.certificate = std::move(out.cert);
  res.final_samples = out.S_per_component;
  res.retries_used = out.retries;
  res.sdp_status = out.sol.status;
  res.diagnostics = std::move(out.diag);
  if (out.outcome == SosOutcome::no_certificate) {
    res.farkas_y = out.sol.y;
    res.farkas_violation = out.sol.farkas_violation;
  }
  return res;
}

}  // namespace

static SosResult sampling_sos_impl(const std::function<Complex(const CVector&)>& p,
                                   const std::string& name, const OraclePtr& oracle, int d,
                                   const SosOptions& opts) {
  if (d < 1) throw std::invalid_argument("sampling_sos: need d >= 1");
  EngineSpec spec;
  spec.name = name;
  spec.oracle = oracle;
  spec.degree = d;
  spec.lhs = [p](const SamplePoint& z, int) {
    return SampleLhs{p(z.coords), Complex(0, 0), Eigen::VectorXcd()};
  };
  return to_sos_result(run_engine(spec, opts));
}

SosResult sampling_sos(const SparsePoly& p, const OraclePtr& oracle, int d,
                       const SosOptions& opts) {
  return sampling_sos_impl([p](const CVector& z) { return p.eval(z); }, "poly", oracle, d, opts);
}

SosResult sampling_sos(const EvalOracle& p, const OraclePtr& oracle, int d,
                       const SosOptions& opts) {
  return sampling_sos_impl([p](const CVector& z) { return p.eval(z); }, p.description, oracle, d,
                           opts);
}

SosResult run_feasibility(const FeasibilityTask& task, const SosOptions& opts) {
  EngineSpec spec;
  spec.name = task.name;
  spec.oracle = task.oracle;
  spec.degree = task.degree;
  spec.lhs = task.lhs;
  spec.num_extra_free = task.num_extra_free;
  spec.basis_override = task.basis_override;
  SosOptions cur = opts;
  if (task.fixed_samples && !cur.fixed_samples) cur.fixed_samples = task.fixed_samples;
  return to_sos_result(run_engine(spec, cur));
}

std::optional<Eigen::VectorXd> recover_minimizer(const Eigen::VectorXd& y,
                                                 const SdpProblem& prob, const SampleSet& Z) {
  const int n = Z.ambient_dim;
  Eigen::VectorXd num = Eigen::VectorXd::Zero(n);
  double m0 = 0.0, total = 0.0;
  for (int i = 0; i < prob.num_constraints(); ++i) {
    const auto& c = prob.constraints[i];
    if (c.sample_index < 0 || c.sample_index >= Z.size()) continue;
    const double yi = y[i];
    total += std::abs(yi);
    const CVector& z = Z.points[c.sample_index].coords;
    if (!c.imag_row) {
      m0 += yi;
      num += yi * z.real();
    } else {
      num += yi * z.imag();
    }
  }
  if (std::abs(m0) <= 1e-12 * std::max(1.0, total)) return std::nullopt;
  return Eigen::VectorXd(num / m0);
}

OptimizeResult optimize(const OptimizationTask& task, const SosOptions& opts) {
  EngineSpec spec;
  spec.name = task.name;
  spec.oracle = task.oracle;
  spec.degree = task.degree;
  spec.lhs = task.lhs;
  spec.with_gamma = true;
  spec.minimize_gamma = task.minimize_gamma;
  spec.num_extra_free = task.num_extra_free;
  spec.basis_override = task.basis_override;

  SosOptions cur = opts;
  cur.prefer_kernel = true;  // duals drive minimizer recovery
  if (task.fixed_samples && !cur.fixed_samples) cur.fixed_samples = task.fixed_samples;

  EngineOut out = run_engine(spec, cur);
  OptimizeResult res;
  res.sdp_status = out.sol.status;
  res.samples = out.S_per_component;
  res.diagnostics = out.diag;
  if (out.outcome != SosOutcome::certificate) {
    res.diagnostics += "optimization did not produce a verified certificate";
    return res;
  }
  res.certificate = std::move(*out.cert);
  res.bound = res.certificate.gamma.value_or(0.0);
  res.bound_sqrt = std::sqrt(std::max(res.bound, 0.0));

  if (auto x = recover_minimizer(out.sol.y, out.prob, out.Z)) {
    bool ok = true;
    if (task.objective) {
      const double val = task.objective(*x);
      ok = std::abs(val - res.bound) <= 1e-4 * (1.0 + std::abs(res.bound));
    }
    if (ok && task.variety_residual) ok = task.variety_residual(*x) <= 1e-6;
    if (ok) res.minimizer = std::move(*x);
  }
  return res;
}

VerifyReport verify_certificate(const Certificate& cert,
                                const std::function<Complex(const CVector&)>& target_lhs,
                                VarietyOracle& oracle, int samples_per_component, double tol) {
  VerifyReport rep;
  const double qscale = 1.0 + cert.Q.norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cert.Q, Eigen::EigenvaluesOnly);
  rep.psd_violation = std::max(0.0, -eig.eigenvalues().minCoeff());
  rep.factor_residual = (cert.R.transpose() * cert.R - cert.Q).norm();
  if (rep.psd_violation > 1e-7 * qscale) {
    rep.message = "Gram matrix is not PSD";
    return rep;
  }
  if (rep.factor_residual > 1e-6 * qscale) {
    rep.message = "factor does not reproduce the Gram matrix";
    return rep;
  }
  for (int c = 0; c < oracle.num_components(); ++c) {
    VarietyOracle& comp = oracle.component(c);
    for (int i = 0; i < samples_per_component; ++i) {
      const SamplePoint z = comp.sample();
      const Complex lhs = target_lhs(z.coords);
      const Complex F = cert.sos_at(z.coords);
      const double resid = std::abs(lhs - F) / (1.0 + std::abs(lhs) + std::abs(F));
      rep.max_residual = std::max(rep.max_residual, resid);
    }
  }
  if (rep.max_residual > tol) {
    rep.message = "identity residual exceeds tolerance";
    return rep;
  }
  rep.ok = true;
  rep.message = "certificate verified";
  return rep;
}

}  // namespace ssos
