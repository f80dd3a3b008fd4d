#include "ssos/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ssos {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::primal_infeasible: return "primal_infeasible";
    case SdpStatus::dual_infeasible: return "dual_infeasible";
    case SdpStatus::numerical_trouble: return "numerical_trouble";
  }
  return "unknown";
}

Eigen::MatrixXd SdpConstraint::dense(int psd_dim) const {
  if (!tag) {
    if (A.size() == 0) return Eigen::MatrixXd::Zero(psd_dim, psd_dim);
    return A;
  }
  const Eigen::VectorXcd& v = tag->v;
  Eigen::MatrixXcd outer = v * v.transpose();
  if (tag->imag_part) return tag->scale * Eigen::MatrixXd(outer.imag());
  return tag->scale * Eigen::MatrixXd(outer.real());
}

double SdpConstraint::dot_psd(const Eigen::MatrixXd& X) const {
  if (!tag) {
    if (A.size() == 0) return 0.0;
    return (A.array() * X.array()).sum();
  }
  const Complex q = tag->v.transpose() * (X * tag->v).eval();
  return tag->scale * (tag->imag_part ? q.imag() : q.real());
}

double SdpConstraint::frob_norm() const {
  if (!tag) return A.size() == 0 ? 0.0 : A.norm();
  const Eigen::VectorXcd& v = tag->v;
  const Complex vtv = (v.transpose() * v).value();
  const double n4 = std::pow(v.squaredNorm(), 2);
  const double re2 = std::real(vtv * vtv);
  const double sq = tag->imag_part ? 0.5 * (n4 - re2) : 0.5 * (n4 + re2);
  return tag->scale * std::sqrt(std::max(sq, 0.0));
}

Eigen::MatrixXd SdpProblem::objective_psd() const {
  if (obj_psd.size() == 0) return Eigen::MatrixXd::Zero(psd_dim, psd_dim);
  return obj_psd;
}

Eigen::VectorXd SdpProblem::objective_free() const {
  if (obj_free.size() == 0) return Eigen::VectorXd::Zero(num_free);
  return obj_free;
}

// ---------------------------------------------------------------------------
// svec / unsvec with sqrt(2) off-diagonal scaling (inner-product preserving)

static Eigen::VectorXd svec(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  Eigen::VectorXd v(n * (n + 1) / 2);
  const double s = std::sqrt(2.0);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) v[k++] = (i == j) ? A(i, j) : s * A(i, j);
  return v;
}

static Eigen::MatrixXd unsvec(const Eigen::VectorXd& v, int n) {
  Eigen::MatrixXd A(n, n);
  const double s = 1.0 / std::sqrt(2.0);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double x = (i == j) ? v[k] : s * v[k];
      A(i, j) = x;
      A(j, i) = x;
      ++k;
    }
  return A;
}

// ---------------------------------------------------------------------------
// Assembly

SdpProblem assemble_sampling_sdp(const LhsFn& lhs, const OrthBasisResult& basis,
                                 const SampleSet& Z, int num_extra_free, bool with_gamma) {
  if (basis.evals.cols() != Z.size())
    throw std::invalid_argument("assemble: basis was not evaluated on this sample set");
  SdpProblem prob;
  prob.psd_dim = basis.rank;
  prob.num_free = (with_gamma ? 1 : 0) + num_extra_free;
  const int f = prob.num_free;
  for (int s = 0; s < Z.size(); ++s) {
    const SampleLhs L = lhs(Z.points[s], s);
    if (L.free_coeffs.size() != num_extra_free)
      throw std::invalid_argument("assemble: free coefficient count mismatch");
    const Eigen::VectorXcd v = basis.evals.col(s);

    SdpConstraint re;
    re.tag = LowRankTag{v, false, 1.0};
    re.b = L.rhs.real();
    re.sample_index = s;
    re.imag_row = false;
    re.a = Eigen::VectorXd::Zero(f);
    if (with_gamma) re.a[0] = L.gamma_coeff.real();
    for (int j = 0; j < num_extra_free; ++j)
      re.a[(with_gamma ? 1 : 0) + j] = L.free_coeffs[j].real();
    prob.constraints.push_back(std::move(re));

    SdpConstraint im;
    im.tag = LowRankTag{v, true, 1.0};
    im.b = L.rhs.imag();
    im.sample_index = s;
    im.imag_row = true;
    im.a = Eigen::VectorXd::Zero(f);
    if (with_gamma) im.a[0] = L.gamma_coeff.imag();
    for (int j = 0; j < num_extra_free; ++j)
      im.a[(with_gamma ? 1 : 0) + j] = L.free_coeffs[j].imag();
    // Imaginary rows of real samples carry no information.
    const double a_max = im.a.size() ? im.a.cwiseAbs().maxCoeff() : 0.0;
    const bool vanishing = im.frob_norm() <= 1e-12 && a_max <= 1e-12 && std::abs(im.b) <= 1e-12;
    if (!vanishing) prob.constraints.push_back(std::move(im));
  }
  if (with_gamma) {
    prob.obj_free = Eigen::VectorXd::Zero(f);
    prob.obj_free[0] = 1.0;  // maximize gamma
  } else {
    // Feasibility: minimize the trace so the dual has a strictly feasible
    // point; any feasible Q certifies.
    prob.obj_psd = -Eigen::MatrixXd::Identity(prob.psd_dim, prob.psd_dim);
  }
  return prob;
}

static SdpProblem assemble_plain(const std::function<Complex(const CVector&)>& eval,
                                 const OrthBasisResult& basis, const SampleSet& Z,
                                 AssembleMode mode) {
  if (mode == AssembleMode::custom_lhs)
    throw std::invalid_argument("custom_lhs mode requires an LhsFn");
  const bool gamma = mode == AssembleMode::lower_bound;
  LhsFn lhs = [&eval, gamma](const SamplePoint& p, int) {
    return SampleLhs{eval(p.coords), gamma ? Complex(1.0, 0.0) : Complex(0.0, 0.0),
                     Eigen::VectorXcd()};
  };
  return assemble_sampling_sdp(lhs, basis, Z, 0, gamma);
}

SdpProblem assemble_sampling_sdp(const SparsePoly& p, const OrthBasisResult& basis,
                                 const SampleSet& Z, AssembleMode mode) {
  return assemble_plain([&p](const CVector& z) { return p.eval(z); }, basis, Z, mode);
}

SdpProblem assemble_sampling_sdp(const EvalOracle& p, const OrthBasisResult& basis,
                                 const SampleSet& Z, AssembleMode mode) {
  return assemble_plain([&p](const CVector& z) { return p.eval(z); }, basis, Z, mode);
}

// ---------------------------------------------------------------------------
// Row inner products and rank-revealing selection

static double row_inner(const SdpConstraint& ci, const SdpConstraint& cj, int N) {
  double afree = 0.0;
  if (ci.a.size() && cj.a.size()) afree = ci.a.dot(cj.a);
  if (ci.tag && cj.tag) {
    const auto& ti = *ci.tag;
    const auto& tj = *cj.tag;
    const Complex cci = ti.imag_part ? Complex(0, -1) : Complex(1, 0);
    const Complex ccj = tj.imag_part ? Complex(0, -1) : Complex(1, 0);
    const Complex vw = (ti.v.transpose() * tj.v).value();
    const Complex vwc = (ti.v.transpose() * tj.v.conjugate()).value();
    const double val = 0.5 * std::real(cci * ccj * vw * vw + cci * std::conj(ccj) * vwc * vwc);
    return ti.scale * tj.scale * val + afree;
  }
  if (ci.tag && !cj.tag) return cj.dot_psd(ci.dense(N)) + afree;
  if (!ci.tag && cj.tag) return ci.dot_psd(cj.dense(N)) + afree;
  if (ci.A.size() == 0 || cj.A.size() == 0) return afree;
  return (ci.A.array() * cj.A.array()).sum() + afree;
}

namespace {

struct RowSelection {
  std::vector<int> selected;      // in pivot order
  Eigen::MatrixXd L;              // r x m factor rows: G approx= L^T L column-wise
  bool full_rank = false;
};

RowSelection pivoted_row_selection(const Eigen::MatrixXd& G, double rel_tol) {
  const int m = static_cast<int>(G.rows());
  RowSelection out;
  Eigen::VectorXd d = G.diagonal();
  const double tol = std::max(d.maxCoeff(), 0.0) * rel_tol;
  std::vector<bool> used(m, false);
  Eigen::MatrixXd L(m, m);
  int r = 0;
  while (r < m) {
    int p = -1;
    double best = tol;
    for (int j = 0; j < m; ++j)
      if (!used[j] && d[j] > best) {
        best = d[j];
        p = j;
      }
    if (p < 0) break;
    used[p] = true;
    const double piv = std::sqrt(d[p]);
    Eigen::VectorXd row = G.col(p);
    if (r > 0) row.noalias() -= L.topRows(r).transpose() * L.topRows(r).col(p);
    row /= piv;
    L.row(r) = row;
    for (int j = 0; j < m; ++j)
      if (!used[j]) d[j] = std::max(d[j] - row[j] * row[j], 0.0);
    d[p] = 0.0;
    out.selected.push_back(p);
    ++r;
  }
  out.L = L.topRows(r);
  out.full_rank = r == m;
  return out;
}

}  // namespace

namespace sdp_detail {

std::vector<int> select_independent_rows(const SdpProblem& prob, double tol) {
  const int m = prob.num_constraints();
  Eigen::MatrixXd G(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = row_inner(prob.constraints[i], prob.constraints[j], prob.psd_dim);
      G(i, j) = v;
      G(j, i) = v;
    }
  RowSelection sel = pivoted_row_selection(G, tol);
  std::sort(sel.selected.begin(), sel.selected.end());
  return sel.selected;
}

Eigen::MatrixXd schur_dense(const std::vector<SdpConstraint>& rows, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& Sinv) {
  const int m = static_cast<int>(rows.size());
  const int N = static_cast<int>(X.rows());
  Eigen::MatrixXd M(m, m);
  for (int j = 0; j < m; ++j) {
    Eigen::MatrixXd Bj = X * rows[j].dense(N) * Sinv;
    for (int i = 0; i <= j; ++i) {
      const double v = (rows[i].dense(N).array() * Bj.array()).sum();
      M(i, j) = v;
      M(j, i) = v;
    }
  }
  return M;
}

Eigen::MatrixXd schur_fast(const std::vector<SdpConstraint>& rows, const Eigen::MatrixXd& X,
                           const Eigen::LLT<Eigen::MatrixXd>& S_llt) {
  const int m = static_cast<int>(rows.size());
  const int N = static_cast<int>(X.rows());
  std::vector<Eigen::VectorXcd> P(m), Qs(m);
  std::vector<Eigen::MatrixXd> B(m);
  for (int j = 0; j < m; ++j) {
    if (rows[j].tag) {
      const Eigen::VectorXcd& v = rows[j].tag->v;
      P[j] = X * v;
      Eigen::VectorXd qr = S_llt.solve(v.real());
      Eigen::VectorXd qi = S_llt.solve(v.imag());
      Qs[j] = qr + Complex(0, 1) * qi;
    } else {
      Eigen::MatrixXd XA = X * rows[j].dense(N);
      B[j] = S_llt.solve(XA.transpose()).transpose();  // X A_j S^{-1}
    }
  }
  Eigen::MatrixXd M(m, m);
  for (int j = 0; j < m; ++j) {
    const bool tj = rows[j].tag.has_value();
    const Complex ccj = tj && rows[j].tag->imag_part ? Complex(0, -1) : Complex(1, 0);
    for (int i = 0; i <= j; ++i) {
      double v;
      if (tj && rows[i].tag) {
        const auto& ti = *rows[i].tag;
        const Complex cci = ti.imag_part ? Complex(0, -1) : Complex(1, 0);
        const Complex xp = (ti.v.transpose() * P[j]).value();
        const Complex sq = (ti.v.transpose() * Qs[j]).value();
        const Complex xpc = (ti.v.transpose() * P[j].conjugate()).value();
        const Complex sqc = (ti.v.transpose() * Qs[j].conjugate()).value();
        v = 0.5 * ti.scale * rows[j].tag->scale *
            std::real(cci * ccj * xp * sq + cci * std::conj(ccj) * xpc * sqc);
      } else if (tj) {
        // dense row i against tagged column j: Tr(A_i X A_j S^{-1})
        if (rows[i].A.size() == 0) {
          v = 0.0;
        } else {
          const Complex q = (Qs[j].transpose() * (rows[i].A * P[j])).value();
          v = rows[j].tag->scale * std::real(ccj * q);
        }
      } else if (rows[i].tag) {
        const auto& ti = *rows[i].tag;
        const Complex cci = ti.imag_part ? Complex(0, -1) : Complex(1, 0);
        const Complex q = (ti.v.transpose() * (B[j] * ti.v)).value();
        v = ti.scale * std::real(cci * q);
      } else {
        v = rows[i].A.size() == 0 ? 0.0 : (rows[i].A.array() * B[j].array()).sum();
      }
      M(i, j) = v;
      M(j, i) = v;
    }
  }
  return M;
}

}  // namespace sdp_detail

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior-point solver (HKM direction, Mehrotra
// predictor-corrector). Internal form: min <Cmin,X> + cmin.w subject to
// A(X) + F w = b, X psd, w free.

namespace {

struct Presolved {
  int N = 0, m = 0, f = 0;
  std::vector<SdpConstraint> rows;  // selected, scaled
  std::vector<int> row_index;       // original index per row
  std::vector<double> row_scale;
  Eigen::MatrixXd F;      // m x f (reduced free columns)
  Eigen::VectorXd b;
  Eigen::MatrixXd Cmin;
  Eigen::VectorXd cmin;   // reduced
  Eigen::MatrixXd Wmap;   // f_orig x f
  // early terminations
  bool decided = false;
  SdpSolution early;
};

Eigen::VectorXd apply_A(const std::vector<SdpConstraint>& rows, const Eigen::MatrixXd& F,
                        const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
  const int m = static_cast<int>(rows.size());
  Eigen::VectorXd out(m);
  for (int i = 0; i < m; ++i) out[i] = rows[i].dot_psd(X);
  if (F.cols() > 0) out += F * w;
  return out;
}

Eigen::MatrixXd apply_AT(const std::vector<SdpConstraint>& rows, const Eigen::VectorXd& y, int N) {
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(N, N);
  for (size_t i = 0; i < rows.size(); ++i) {
    const double yi = y[static_cast<Eigen::Index>(i)];
    if (yi == 0.0) continue;
    if (rows[i].tag) {
      const auto& t = *rows[i].tag;
      const Eigen::VectorXd vr = t.v.real();
      const Eigen::VectorXd vi = t.v.imag();
      const double c = yi * t.scale;
      if (!t.imag_part) {
        Z.noalias() += c * (vr * vr.transpose());
        Z.noalias() -= c * (vi * vi.transpose());
      } else {
        Z.noalias() += c * (vr * vi.transpose());
        Z.noalias() += c * (vi * vr.transpose());
      }
    } else if (rows[i].A.size() != 0) {
      Z.noalias() += yi * rows[i].A;
    }
  }
  return Z;
}

struct FarkasBuild {
  bool found = false;
  Eigen::VectorXd y;  // original indexing
};

Presolved presolve(const SdpProblem& prob, const SolveOptions& opts) {
  Presolved P;
  P.N = prob.psd_dim;
  if (P.N < 1) throw std::invalid_argument("solve: PSD block must be nonempty");
  if (prob.constraints.empty()) throw std::invalid_argument("solve: no constraints");
  const int m_all = prob.num_constraints();
  const int f_orig = prob.num_free;

  // Scale rows by max(1, ||A||_F, |b|).
  std::vector<SdpConstraint> scaled = prob.constraints;
  std::vector<double> scales(m_all);
  for (int i = 0; i < m_all; ++i) {
    double s = std::max({1.0, scaled[i].frob_norm(), std::abs(scaled[i].b)});
    scales[i] = s;
    if (scaled[i].tag) scaled[i].tag->scale /= s;
    if (scaled[i].A.size()) scaled[i].A /= s;
    if (scaled[i].a.size()) scaled[i].a /= s;
    scaled[i].b /= s;
  }

  // Rank-revealing subset selection on the constraint Gram.
  Eigen::MatrixXd G(m_all, m_all);
  for (int i = 0; i < m_all; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = row_inner(scaled[i], scaled[j], P.N);
      G(i, j) = v;
      G(j, i) = v;
    }
  RowSelection sel = pivoted_row_selection(G, 1e-10);
  const int r = static_cast<int>(sel.selected.size());

  if (!sel.full_rank) {
    // Consistency of the dropped rows: expand b over the selected rows and
    // compare. Inconsistency yields a Farkas certificate directly.
    Eigen::MatrixXd Lss(r, r);
    for (int t = 0; t < r; ++t)
      for (int s = 0; s < r; ++s) Lss(t, s) = sel.L(t, sel.selected[s]);
    Eigen::VectorXd bsel(r);
    for (int s = 0; s < r; ++s) bsel[s] = scaled[sel.selected[s]].b;
    // column sel_s only involves the first s+1 pivot directions, so Lss is
    // upper triangular
    Eigen::VectorXd beta = Lss.transpose().triangularView<Eigen::Lower>().solve(bsel);
    double bmax = 0.0;
    for (int i = 0; i < m_all; ++i) bmax = std::max(bmax, std::abs(scaled[i].b));
    std::vector<bool> is_sel(m_all, false);
    for (int s : sel.selected) is_sel[s] = true;
    for (int j = 0; j < m_all; ++j) {
      if (is_sel[j]) continue;
      const double predicted = sel.L.col(j).dot(beta);
      if (std::abs(scaled[j].b - predicted) > 1e-8 * (1.0 + bmax)) {
        // row_j = sum_s c_s row_sel_s with L_ss c = l_j
        Eigen::VectorXd c =
            Lss.triangularView<Eigen::Upper>().solve(Eigen::VectorXd(sel.L.col(j)));
        Eigen::VectorXd y = Eigen::VectorXd::Zero(m_all);
        y[j] = 1.0 / scales[j];
        for (int s = 0; s < r; ++s) y[sel.selected[s]] = -c[s] / scales[sel.selected[s]];
        double bty = 0.0;
        for (int i = 0; i < m_all; ++i) bty += y[i] * prob.constraints[i].b;
        if (std::abs(bty) > 0) y /= bty;
        P.decided = true;
        P.early.status = SdpStatus::primal_infeasible;
        P.early.y = y;
        P.early.farkas_violation = 1.0 / std::max(1.0, y.norm());
        P.early.message = "inconsistent linear constraints";
        return P;
      }
    }
  }

  std::vector<int> order = sel.selected;
  std::sort(order.begin(), order.end());
  P.m = static_cast<int>(order.size());
  P.rows.reserve(P.m);
  for (int idx : order) {
    P.rows.push_back(scaled[idx]);
    P.row_index.push_back(idx);
    P.row_scale.push_back(scales[idx]);
  }
  P.b = Eigen::VectorXd(P.m);
  for (int i = 0; i < P.m; ++i) P.b[i] = P.rows[i].b;

  P.Cmin = -prob.objective_psd();
  Eigen::VectorXd cfree = -prob.objective_free();

  // Free-variable reduction: keep the row space of F.
  if (f_orig > 0) {
    Eigen::MatrixXd F(P.m, f_orig);
    for (int i = 0; i < P.m; ++i) F.row(i) = P.rows[i].a.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(F, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = (sv.size() ? sv[0] : 0.0) * 1e-12;
    int fr = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > cut) ++fr;
    if (fr < f_orig) {
      Eigen::MatrixXd K = svd.matrixV().rightCols(f_orig - fr);
      Eigen::VectorXd proj = K.transpose() * cfree;
      if (proj.cwiseAbs().maxCoeff() > 1e-10 * (1.0 + cfree.cwiseAbs().maxCoeff())) {
        P.decided = true;
        P.early.status = SdpStatus::dual_infeasible;
        P.early.message = "objective unbounded along unconstrained free direction";
        P.early.Q = Eigen::MatrixXd::Zero(P.N, P.N);
        return P;
      }
      P.Wmap = svd.matrixV().leftCols(fr);
      P.F = F * P.Wmap;
      P.cmin = P.Wmap.transpose() * cfree;
      P.f = fr;
    } else {
      P.Wmap = Eigen::MatrixXd::Identity(f_orig, f_orig);
      P.F = F;
      P.cmin = cfree;
      P.f = f_orig;
    }
  } else {
    P.F = Eigen::MatrixXd(P.m, 0);
    P.cmin = Eigen::VectorXd(0);
    P.Wmap = Eigen::MatrixXd(0, 0);
    P.f = 0;
  }
  (void)opts;
  return P;
}

// Factor a nominally-PSD iterate, shifting the diagonal past roundoff-level
// negative eigenvalues when needed. Returns false only for genuinely
// indefinite matrices.
bool safe_llt(Eigen::MatrixXd& M, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(M);
  if (llt.info() == Eigen::Success) return true;
  const double base = 1e-14 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
  double shift = base;
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd Ms = M;
    Ms.diagonal().array() += shift;
    llt.compute(Ms);
    if (llt.info() == Eigen::Success) {
      M = Ms;
      return true;
    }
    shift *= 100.0;
  }
  return false;
}

double psd_step_length(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& dX) {
  // largest alpha with X + alpha dX >= 0, given X = L L^T
  Eigen::MatrixXd Li_dX = llt.matrixL().solve(dX);
  Eigen::MatrixXd W = llt.matrixL().solve(Li_dX.transpose()).transpose();
  W = 0.5 * (W + W.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct Direction {
  Eigen::MatrixXd dX, dS;
  Eigen::VectorXd dy, dw;
  double dtau = 0.0, dkappa = 0.0;
};

struct KktFactor {
  Eigen::LLT<Eigen::MatrixXd> M_llt;
  Eigen::LDLT<Eigen::MatrixXd> M_ldlt;
  bool use_ldlt = false;
  Eigen::MatrixXd Ft;         // L^{-1} F (LLT path) or unused
  Eigen::LLT<Eigen::MatrixXd> W_llt;
  bool ok = false;

  Eigen::VectorXd solve_M(const Eigen::VectorXd& rhs) const {
    if (use_ldlt) return M_ldlt.solve(rhs);
    return M_llt.solve(rhs);
  }
};

// Solve [M F; F^T 0] [dy; dw] = [r1; r2] with iterative refinement; the
// Schur matrix turns ill-conditioned near convergence.
void solve_kkt(const KktFactor& kf, const Eigen::MatrixXd& M, const Eigen::MatrixXd& F,
               const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dy,
               Eigen::VectorXd& dw) {
  const bool have_free = F.cols() > 0;
  Eigen::MatrixXd Mi_F;
  Eigen::LLT<Eigen::MatrixXd> wllt;
  if (have_free) {
    Mi_F.resize(F.rows(), F.cols());
    for (Eigen::Index j = 0; j < F.cols(); ++j) Mi_F.col(j) = kf.solve_M(F.col(j));
    Eigen::MatrixXd W = F.transpose() * Mi_F;
    wllt.compute(W);
    if (wllt.info() != Eigen::Success) {
      W.diagonal().array() += 1e-12 * (1.0 + W.diagonal().cwiseAbs().maxCoeff());
      wllt.compute(W);
    }
  }
  auto base_solve = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                        Eigen::VectorXd& oy, Eigen::VectorXd& ow) {
    Eigen::VectorXd Mi_a = kf.solve_M(a);
    if (!have_free) {
      oy = Mi_a;
      ow = Eigen::VectorXd(0);
      return;
    }
    ow = wllt.solve(F.transpose() * Mi_a - b);
    oy = Mi_a - Mi_F * ow;
  };
  base_solve(r1, r2, dy, dw);
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd res1 = r1 - M * dy;
    if (have_free) res1 -= F * dw;
    Eigen::VectorXd res2 = have_free ? Eigen::VectorXd(r2 - F.transpose() * dy)
                                     : Eigen::VectorXd(0);
    Eigen::VectorXd cy, cw;
    base_solve(res1, res2, cy, cw);
    dy += cy;
    if (have_free) dw += cw;
  }
}

}  // namespace

static SdpSolution solve_kernel(const SdpProblem& prob, const SolveOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  SdpSolution sol;
  Presolved P = presolve(prob, opts);
  if (P.decided) {
    if (P.early.y.size() == 0) P.early.y = Eigen::VectorXd::Zero(prob.num_constraints());
    if (P.early.Q.size() == 0) P.early.Q = Eigen::MatrixXd::Zero(prob.psd_dim, prob.psd_dim);
    if (P.early.free_values.size() == 0) P.early.free_values = Eigen::VectorXd::Zero(prob.num_free);
    return P.early;
  }
  const int N = P.N, m = P.m, f = P.f;

  const double bnorm = 1.0 + P.b.norm();
  const double Cnorm = 1.0 + P.Cmin.norm();
  const double cfnorm = 1.0 + (f ? P.cmin.norm() : 0.0);

  const double xi = std::max(1.0, std::sqrt(std::max(P.b.cwiseAbs().maxCoeff(), 1.0)));
  const double eta = std::max(1.0, P.Cmin.cwiseAbs().maxCoeff());
  Eigen::MatrixXd X = xi * Eigen::MatrixXd::Identity(N, N);
  Eigen::MatrixXd S = eta * Eigen::MatrixXd::Identity(N, N);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(f);
  double tau = 1.0, kappa = xi * eta;

  double best_err = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd bX = X, bS = S;
  Eigen::VectorXd by = y, bw = w;
  double btau = tau;

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  std::string stop_reason = "max iterations reached";

  auto finish_optimal = [&](int iter) {
    sol.status = SdpStatus::optimal;
    sol.Q = X / tau;
    sol.iterations = iter;
    Eigen::VectorXd w_full =
        prob.num_free ? Eigen::VectorXd(P.Wmap * (w / tau)) : Eigen::VectorXd(0);
    sol.free_values = prob.num_free ? w_full : Eigen::VectorXd::Zero(0);
    sol.y = Eigen::VectorXd::Zero(prob.num_constraints());
    for (int i = 0; i < m; ++i) sol.y[P.row_index[i]] = -(y[i] / tau) / P.row_scale[i];
    // internal duals solve the min form; external callers see the max form
    const double po = (P.Cmin.array() * (X / tau).array()).sum() +
                      (f ? P.cmin.dot(w / tau) : 0.0);
    const double dob = P.b.dot(y / tau);
    sol.primal_obj = -po;
    sol.dual_obj = -dob;
    sol.gap = std::abs(po - dob) / (1.0 + std::abs(po) + std::abs(dob));
    sol.message = "converged";
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (opts.time_budget_sec > 0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      if (elapsed > opts.time_budget_sec) {
        stop_reason = "time budget exceeded";
        break;
      }
    }
    // Residuals
    Eigen::VectorXd rp = P.b * tau - apply_A(P.rows, P.F, X, w);
    Eigen::MatrixXd AtY = apply_AT(P.rows, y, N);
    Eigen::MatrixXd Rd = P.Cmin * tau - AtY - S;
    Eigen::VectorXd rf = f ? Eigen::VectorXd(P.cmin * tau - P.F.transpose() * y)
                           : Eigen::VectorXd(0);
    const double cx = (P.Cmin.array() * X.array()).sum() + (f ? P.cmin.dot(w) : 0.0);
    const double rg = kappa - P.b.dot(y) + cx;

    const double mu = ((X.array() * S.array()).sum() + tau * kappa) / (N + 1);

    // Convergence metrics on the tau-normalized iterate
    const double pres = rp.norm() / (tau * bnorm);
    const double dres = Rd.norm() / (tau * Cnorm);
    const double fres = f ? rf.norm() / (tau * cfnorm) : 0.0;
    const double pobj = cx / tau;
    const double dobj = P.b.dot(y) / tau;
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double err = std::max({pres, dres, fres, relgap});
    if (opts.verbose)
      std::printf("it %3d  mu %.2e  pres %.2e  dres %.2e  gap %.2e  tau %.2e kap %.2e\n", iter,
                  mu, pres, dres, relgap, tau, kappa);
    if (err < best_err) {
      best_err = err;
      bX = X; bS = S; by = y; bw = w; btau = tau;
    }
    if (pres <= opts.feas_tol && dres <= opts.feas_tol && fres <= opts.feas_tol &&
        relgap <= opts.gap_tol) {
      finish_optimal(iter);
      return sol;
    }

    // Infeasibility certificates
    const double bty = P.b.dot(y);
    if (bty > 0) {
      Eigen::VectorXd yh = y / bty;
      Eigen::MatrixXd Z = apply_AT(P.rows, yh, N);
      Eigen::MatrixXd Sh = S / bty;
      const double res1 = (Z + Sh).norm();
      const double res2 = f ? (P.F.transpose() * yh).cwiseAbs().maxCoeff() : 0.0;
      const double ynorm = 1.0 + yh.norm();
      if (res1 <= 1e-9 * ynorm * std::sqrt(double(N)) && res2 <= 1e-9 * ynorm) {
        sol.status = SdpStatus::primal_infeasible;
        sol.Q = Eigen::MatrixXd::Zero(N, N);
        sol.free_values = Eigen::VectorXd::Zero(prob.num_free);
        sol.y = Eigen::VectorXd::Zero(prob.num_constraints());
        double bty_orig = 0.0;
        for (int i = 0; i < m; ++i) {
          sol.y[P.row_index[i]] = -yh[i] / P.row_scale[i];
          bty_orig += sol.y[P.row_index[i]] * prob.constraints[P.row_index[i]].b;
        }
        if (std::abs(bty_orig) > 0) sol.y /= bty_orig;
        sol.farkas_violation = 1.0 / std::max(1.0, sol.y.norm());
        sol.iterations = iter;
        sol.message = "primal infeasibility certificate found";
        return sol;
      }
    }
    const double neg_obj = -cx;
    if (neg_obj > 0) {
      Eigen::MatrixXd Xh = X / neg_obj;
      Eigen::VectorXd wh = f ? Eigen::VectorXd(w / neg_obj) : Eigen::VectorXd(0);
      const double res1 = apply_A(P.rows, P.F, Xh, wh).cwiseAbs().maxCoeff();
      if (res1 <= 1e-9 * (1.0 + Xh.norm())) {
        sol.status = SdpStatus::dual_infeasible;
        sol.Q = Xh;
        sol.free_values =
            prob.num_free ? Eigen::VectorXd(P.Wmap * wh) : Eigen::VectorXd::Zero(0);
        sol.y = Eigen::VectorXd::Zero(prob.num_constraints());
        sol.iterations = iter;
        sol.message = "dual infeasibility certificate found (objective improving ray)";
        return sol;
      }
    }

    // Factorizations
    Eigen::LLT<Eigen::MatrixXd> Sllt, Xllt;
    if (!safe_llt(S, Sllt) || !safe_llt(X, Xllt)) {
      stop_reason = "iterate left the cone";
      break;
    }
    Eigen::MatrixXd Sinv = Sllt.solve(I);

    Eigen::MatrixXd M = sdp_detail::schur_fast(P.rows, X, Sllt);
    KktFactor kf;
    kf.M_llt.compute(M);
    if (kf.M_llt.info() != Eigen::Success) {
      const double jitter = 1e-13 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
      M.diagonal().array() += jitter;
      kf.M_ldlt.compute(M);
      kf.use_ldlt = true;
    }

    auto Hs = [&](const Eigen::MatrixXd& Z) {
      Eigen::MatrixXd T = X * Z;
      Eigen::MatrixXd W2 = Sllt.solve(T.transpose()).transpose();
      return Eigen::MatrixXd(0.5 * (W2 + W2.transpose()));
    };

    const bool have_C = P.Cmin.cwiseAbs().maxCoeff() > 0;
    Eigen::MatrixXd HsC = have_C ? Hs(P.Cmin) : Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd hC = have_C ? apply_A(P.rows, Eigen::MatrixXd(P.m, 0), HsC,
                                          Eigen::VectorXd(0))
                                : Eigen::VectorXd::Zero(m);
    const double hCC = have_C ? (P.Cmin.array() * HsC.array()).sum() : 0.0;
    Eigen::VectorXd bhat = P.b + hC;

    auto compute_direction = [&](const Eigen::MatrixXd& Rc, double rck, Direction& d) {
      Eigen::MatrixXd HsRd = Hs(Rd);
      Eigen::VectorXd r1 = rp - apply_A(P.rows, Eigen::MatrixXd(P.m, 0),
                                        Eigen::MatrixXd(Rc - HsRd), Eigen::VectorXd(0));
      Eigen::VectorXd r2 = rf;  // F^T dy - cmin dtau = rf
      const double q0 = (P.Cmin.array() * (Rc - HsRd).array()).sum();
      const double r3 = rck / tau + rg + q0;

      Eigen::VectorXd u, v, pp, qq;
      solve_kkt(kf, M, P.F, r1, r2, u, v);
      solve_kkt(kf, M, P.F, bhat, P.cmin, pp, qq);

      const Eigen::VectorXd bmhC = P.b - hC;
      const double denom = bmhC.dot(pp) - (f ? P.cmin.dot(qq) : 0.0) + kappa / tau + hCC;
      const double numer = r3 - bmhC.dot(u) + (f ? P.cmin.dot(v) : 0.0);
      d.dtau = denom != 0.0 ? numer / denom : 0.0;
      d.dy = u + d.dtau * pp;
      d.dw = f ? Eigen::VectorXd(v + d.dtau * qq) : Eigen::VectorXd(0);
      d.dS = P.Cmin * d.dtau - apply_AT(P.rows, d.dy, N) + Rd;
      d.dX = Rc - Hs(d.dS);
      d.dX = 0.5 * (d.dX + d.dX.transpose()).eval();
      d.dkappa = (rck - kappa * d.dtau) / tau;
    };

    auto step_length = [&](const Direction& d) {
      double a = std::numeric_limits<double>::infinity();
      a = std::min(a, psd_step_length(Xllt, d.dX));
      a = std::min(a, psd_step_length(Sllt, d.dS));
      if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    // Predictor
    Direction aff;
    compute_direction(-X, -tau * kappa, aff);
    const double a_aff = std::min(1.0, 0.99 * step_length(aff));
    double mu_aff = ((X + a_aff * aff.dX).array() * (S + a_aff * aff.dS).array()).sum();
    mu_aff += (tau + a_aff * aff.dtau) * (kappa + a_aff * aff.dkappa);
    mu_aff /= (N + 1);
    double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
    sigma = std::min(std::max(sigma, 1e-8), 0.99999);

    // Corrector with Mehrotra second-order term
    Eigen::MatrixXd corr = aff.dX * aff.dS;
    Eigen::MatrixXd corrS = Sllt.solve(corr.transpose()).transpose();
    corrS = 0.5 * (corrS + corrS.transpose()).eval();
    Eigen::MatrixXd Rc = sigma * mu * Sinv - X - corrS;
    const double rck = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;

    auto mu_after = [&](const Direction& d, double a) {
      double v = ((X + a * d.dX).array() * (S + a * d.dS).array()).sum();
      v += (tau + a * d.dtau) * (kappa + a * d.dkappa);
      return v / (N + 1);
    };

    Direction dir;
    compute_direction(Rc, rck, dir);
    double alpha = std::min(1.0, 0.99 * step_length(dir));
    // The second-order term can stall near degenerate corners; fall back to
    // the plain centering direction when the step misses the sufficient
    // decrease a Newton step promises.
    const double target = (1.0 - 0.5 * alpha * (1.0 - sigma)) * mu;
    if (!std::isfinite(alpha) || mu_after(dir, alpha) > target) {
      Eigen::MatrixXd Rc_plain = sigma * mu * Sinv - X;
      Direction plain;
      compute_direction(Rc_plain, sigma * mu - tau * kappa, plain);
      const double a_plain = std::min(1.0, 0.99 * step_length(plain));
      if (!std::isfinite(alpha) ||
          (std::isfinite(a_plain) && mu_after(plain, a_plain) < mu_after(dir, alpha))) {
        dir = plain;
        alpha = a_plain;
      }
    }
    if (opts.verbose)
      std::printf("      alpha %.3e (aff %.3e sigma %.3e)\n", alpha, a_aff, sigma);
    if (!std::isfinite(alpha) || alpha <= 1e-14) {
      stop_reason = "step length collapsed";
      break;
    }

    X += alpha * dir.dX;
    S += alpha * dir.dS;
    y += alpha * dir.dy;
    if (f) w += alpha * dir.dw;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
    X = 0.5 * (X + X.transpose()).eval();
    S = 0.5 * (S + S.transpose()).eval();
    if (!(tau > 0) || !std::isfinite(mu)) {
      stop_reason = "tau collapsed";
      break;
    }
    sol.iterations = iter + 1;
  }

  // No convergence: report the best iterate.
  X = bX; S = bS; y = by; w = bw; tau = btau;
  sol.status = SdpStatus::numerical_trouble;
  sol.Q = X / tau;
  sol.free_values =
      prob.num_free ? Eigen::VectorXd(P.Wmap * (w / tau)) : Eigen::VectorXd::Zero(0);
  sol.y = Eigen::VectorXd::Zero(prob.num_constraints());
  for (int i = 0; i < m; ++i) sol.y[P.row_index[i]] = -(y[i] / tau) / P.row_scale[i];
  sol.gap = best_err;
  sol.message = stop_reason;
  return sol;
}

static SdpSolution solve_image(const SdpProblem& prob, const SolveOptions& opts) {
  const ImageData& im = *prob.image;
  const int J = im.num_parameters();
  const Eigen::MatrixXd Cobj = prob.objective_psd();
  const Eigen::VectorXd cfree = prob.objective_free();

  auto assemble_result = [&](const Eigen::VectorXd& lambda) {
    Eigen::MatrixXd Q = im.Q0;
    Eigen::VectorXd wv = im.w0;
    for (int j = 0; j < J; ++j) {
      Q += lambda[j] * im.Q_gen[j];
      if (wv.size()) wv += lambda[j] * im.w_gen[j];
    }
    return std::make_pair(Q, wv);
  };

  if (J == 0) {
    SdpSolution sol;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(im.Q0, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    if (lmin >= -1e-9 * (1.0 + im.Q0.norm())) {
      sol.status = SdpStatus::optimal;
      sol.Q = im.Q0;
      sol.free_values = im.w0;
      sol.primal_obj = (Cobj.array() * im.Q0.array()).sum() +
                       (im.w0.size() ? cfree.dot(im.w0) : 0.0);
      sol.dual_obj = sol.primal_obj;
      sol.message = "unique affine solution is PSD";
    } else {
      sol.status = SdpStatus::primal_infeasible;
      sol.message = "unique affine solution is not PSD";
    }
    sol.y = Eigen::VectorXd::Zero(prob.num_constraints());
    return sol;
  }

  SdpProblem cast;
  cast.psd_dim = prob.psd_dim;
  cast.num_free = 0;
  for (int j = 0; j < J; ++j) {
    SdpConstraint c;
    c.A = -im.Q_gen[j];
    c.b = (Cobj.array() * im.Q_gen[j].array()).sum() +
          (im.w_gen.empty() ? 0.0 : cfree.dot(im.w_gen[j]));
    cast.constraints.push_back(std::move(c));
  }
  // cast: min <Q0,X> = max <-Q0,X>
  cast.obj_psd = -im.Q0;
  SdpSolution cs = solve_kernel(cast, opts);

  SdpSolution sol;
  sol.iterations = cs.iterations;
  sol.y = Eigen::VectorXd::Zero(prob.num_constraints());
  switch (cs.status) {
    case SdpStatus::optimal: {
      // cast duals are the image parameters
      Eigen::VectorXd lambda(J);
      // duals were reported for the external max form; recover internal sign
      for (int j = 0; j < J; ++j) lambda[j] = -cs.y[j];
      auto [Q, wv] = assemble_result(lambda);
      sol.status = SdpStatus::optimal;
      sol.Q = Q;
      sol.free_values = wv;
      sol.primal_obj = (Cobj.array() * Q.array()).sum() + (wv.size() ? cfree.dot(wv) : 0.0);
      sol.dual_obj = sol.primal_obj + (cs.primal_obj - cs.dual_obj);
      sol.gap = cs.gap;
      sol.message = "image-form solve";
      break;
    }
    case SdpStatus::primal_infeasible:
      sol.status = SdpStatus::dual_infeasible;
      sol.message = "image form: parameter problem unbounded";
      break;
    case SdpStatus::dual_infeasible:
      sol.status = SdpStatus::primal_infeasible;
      sol.message = "image form: no PSD point in the constraint-affine space";
      break;
    default:
      sol.status = SdpStatus::numerical_trouble;
      sol.message = "image form: " + cs.message;
      break;
  }
  return sol;
}

SdpSolution solve(const SdpProblem& prob, const SolveOptions& opts) {
  if (prob.form == SdpForm::image) {
    if (!prob.image) throw std::invalid_argument("image form requires image data");
    return solve_image(prob, opts);
  }
  return solve_kernel(prob, opts);
}

// ---------------------------------------------------------------------------
// Image form construction

SdpProblem to_image_form(const SdpProblem& prob, double tol) {
  if (prob.form != SdpForm::kernel) throw std::invalid_argument("to_image_form: kernel input required");
  const int N = prob.psd_dim;
  const int f = prob.num_free;
  const int m = prob.num_constraints();
  const long long dim = prob.num_variables();
  Eigen::MatrixXd R(m, dim);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    R.row(i).head(N * (N + 1) / 2) = svec(prob.constraints[i].dense(N)).transpose();
    if (f) {
      Eigen::VectorXd a = prob.constraints[i].a.size() ? prob.constraints[i].a
                                                       : Eigen::VectorXd::Zero(f);
      R.row(i).tail(f) = a.transpose();
    }
    b[i] = prob.constraints[i].b;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = (sv.size() ? sv[0] : 0.0) * 1e-10;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rank;

  // Min-norm particular solution.
  Eigen::VectorXd z = svd.matrixU().leftCols(rank).transpose() * b;
  z.array() /= sv.head(rank).array();
  Eigen::VectorXd x0 = svd.matrixV().leftCols(rank) * z;
  const double resid = (R * x0 - b).norm();
  if (resid > tol * (1.0 + b.norm()))
    throw std::runtime_error("to_image_form: inconsistent constraints (primal infeasible)");

  SdpProblem out = prob;
  out.form = SdpForm::image;
  ImageData im;
  im.Q0 = unsvec(x0.head(N * (N + 1) / 2), N);
  im.w0 = f ? Eigen::VectorXd(x0.tail(f)) : Eigen::VectorXd(0);
  const long long J = dim - rank;
  for (long long j = 0; j < J; ++j) {
    Eigen::VectorXd g = svd.matrixV().col(rank + j);
    im.Q_gen.push_back(unsvec(g.head(N * (N + 1) / 2), N));
    im.w_gen.push_back(f ? Eigen::VectorXd(g.tail(f)) : Eigen::VectorXd(0));
  }
  out.image = std::move(im);
  return out;
}

// ---------------------------------------------------------------------------
// SDPA sparse export / parse

void export_sdpa(const SdpProblem& prob, const std::string& path) {
  if (prob.form != SdpForm::kernel) throw std::invalid_argument("export_sdpa: kernel form only");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int N = prob.psd_dim;
  const int f = prob.num_free;
  const int m = prob.num_constraints();
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << m << "\n";
  out << (f > 0 ? 2 : 1) << "\n";
  out << N;
  if (f > 0) out << " " << -2 * f;
  out << "\n";
  for (int i = 0; i < m; ++i) out << (i ? " " : "") << fmt(prob.constraints[i].b);
  out << "\n";
  auto emit_block1 = [&](int matno, const Eigen::MatrixXd& A) {
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j)
        if (A(i, j) != 0.0)
          out << matno << " 1 " << i + 1 << " " << j + 1 << " " << fmt(A(i, j)) << "\n";
  };
  auto emit_free = [&](int matno, const Eigen::VectorXd& a) {
    for (int k = 0; k < f; ++k)
      if (a[k] != 0.0) {
        out << matno << " 2 " << k + 1 << " " << k + 1 << " " << fmt(a[k]) << "\n";
        out << matno << " 2 " << f + k + 1 << " " << f + k + 1 << " " << fmt(-a[k]) << "\n";
      }
  };
  if (prob.obj_psd.size() != 0) emit_block1(0, prob.obj_psd);
  if (f > 0 && prob.obj_free.size() != 0) emit_free(0, prob.obj_free);
  for (int i = 0; i < m; ++i) {
    emit_block1(i + 1, prob.constraints[i].dense(N));
    if (f > 0)
      emit_free(i + 1, prob.constraints[i].a.size() ? prob.constraints[i].a
                                                    : Eigen::VectorXd::Zero(f));
  }
}

SdpProblem parse_sdpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  auto next_data_line = [&]() {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '"' || line[0] == '*') continue;
      return true;
    }
    return false;
  };
  if (!next_data_line()) throw std::runtime_error("sdpa: missing mDIM");
  const int m = std::stoi(line);
  if (!next_data_line()) throw std::runtime_error("sdpa: missing nBLOCK");
  const int nblock = std::stoi(line);
  if (!next_data_line()) throw std::runtime_error("sdpa: missing block sizes");
  std::vector<int> sizes;
  {
    std::stringstream ss(line);
    int v;
    while (ss >> v) sizes.push_back(v);
  }
  if (static_cast<int>(sizes.size()) != nblock) throw std::runtime_error("sdpa: block size count");
  const int N = sizes[0];
  const int f = nblock > 1 ? -sizes[1] / 2 : 0;
  if (!next_data_line()) throw std::runtime_error("sdpa: missing c vector");
  SdpProblem prob;
  prob.psd_dim = N;
  prob.num_free = f;
  prob.constraints.resize(m);
  {
    std::stringstream ss(line);
    for (int i = 0; i < m; ++i) {
      ss >> prob.constraints[i].b;
      prob.constraints[i].A = Eigen::MatrixXd::Zero(N, N);
      prob.constraints[i].a = Eigen::VectorXd::Zero(f);
    }
  }
  prob.obj_psd = Eigen::MatrixXd::Zero(N, N);
  prob.obj_free = Eigen::VectorXd::Zero(f);
  int matno, blkno, i, j;
  double val;
  while (next_data_line()) {
    std::stringstream ss(line);
    if (!(ss >> matno >> blkno >> i >> j >> val)) continue;
    if (blkno == 1) {
      Eigen::MatrixXd& A = matno == 0 ? prob.obj_psd : prob.constraints[matno - 1].A;
      A(i - 1, j - 1) = val;
      A(j - 1, i - 1) = val;
    } else {
      if (i != j) throw std::runtime_error("sdpa: off-diagonal entry in the free block");
      if (i <= f) {
        Eigen::VectorXd& a = matno == 0 ? prob.obj_free : prob.constraints[matno - 1].a;
        a[i - 1] = val;
      }
      // mirrored negative entries are implied
    }
  }
  return prob;
}

}  // namespace ssos
