#include "ssos/basis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <stdexcept>

namespace ssos {

Eigen::MatrixXcd evaluation_matrix(const MonomialVector& u, const SampleSet& Z) {
  Eigen::MatrixXcd U(u.size(), Z.size());
  for (int s = 0; s < Z.size(); ++s) U.col(s) = u.eval(Z.points[s].coords);
  return U;
}

Eigen::MatrixXcd evaluation_matrix(const std::vector<SparsePoly>& u, const SampleSet& Z) {
  Eigen::MatrixXcd U(static_cast<Eigen::Index>(u.size()), Z.size());
  for (int s = 0; s < Z.size(); ++s)
    for (size_t i = 0; i < u.size(); ++i)
      U(static_cast<Eigen::Index>(i), s) = u[i].eval(Z.points[s].coords);
  return U;
}

CVector OrthBasisResult::eval_at(const CVector& z) const {
  CVector in;
  if (!monomials.monomials.empty()) {
    in = monomials.eval(z);
  } else {
    in = CVector(static_cast<Eigen::Index>(input_polys.size()));
    for (size_t i = 0; i < input_polys.size(); ++i)
      in[static_cast<Eigen::Index>(i)] = input_polys[i].eval(z);
  }
  return coeffs.cast<Complex>() * in;
}

std::vector<SparsePoly> OrthBasisResult::to_polynomials() const {
  std::vector<SparsePoly> out;
  out.reserve(rank);
  for (int r = 0; r < rank; ++r) {
    SparsePoly p;
    if (!monomials.monomials.empty()) {
      p = SparsePoly(monomials.ambient_dim);
      for (int j = 0; j < monomials.size(); ++j)
        if (coeffs(r, j) != 0.0) p.add_term(monomials.monomials[j].exponents, coeffs(r, j));
    } else {
      p = SparsePoly(input_polys.empty() ? 0 : input_polys[0].ambient_dim());
      for (size_t j = 0; j < input_polys.size(); ++j)
        p = p + input_polys[j] * coeffs(r, static_cast<int>(j));
    }
    out.push_back(std::move(p));
  }
  return out;
}

OrthBasisResult orth_basis_from_evals(const Eigen::MatrixXcd& U, double tol) {
  const Eigen::Index N = U.rows(), S = U.cols();
  if (N == 0 || S == 0) throw std::invalid_argument("orth_basis: empty input");
  Eigen::MatrixXd W(N, 2 * S);
  W.leftCols(S) = U.real();
  W.rightCols(S) = U.imag();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() ? sv[0] * tol : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  if (rank == 0) rank = 1;  // keep at least the leading direction

  OrthBasisResult res;
  res.rank = rank;
  // W = T W° with W° = V_r^T having orthonormal rows.
  Eigen::MatrixXd Wo = svd.matrixV().leftCols(rank).transpose();  // rank x 2S
  res.T = svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal();
  res.coeffs = sv.head(rank).cwiseInverse().asDiagonal() *
               svd.matrixU().leftCols(rank).transpose();  // pseudo-inverse of T
  res.evals = Wo.leftCols(S).cast<Complex>() +
              Complex(0.0, 1.0) * Wo.rightCols(S).cast<Complex>();
  return res;
}

OrthBasisResult orth_basis(const MonomialVector& u, const SampleSet& Z) {
  if (u.size() == 0 || Z.size() == 0) throw std::invalid_argument("orth_basis: empty input");
  OrthBasisResult res = orth_basis_from_evals(evaluation_matrix(u, Z));
  res.monomials = u;
  return res;
}

OrthBasisResult orth_basis(const std::vector<SparsePoly>& u, const SampleSet& Z) {
  if (u.empty() || Z.size() == 0) throw std::invalid_argument("orth_basis: empty input");
  OrthBasisResult res = orth_basis_from_evals(evaluation_matrix(u, Z));
  res.input_polys = u;
  return res;
}

int empirical_dimension(const Eigen::MatrixXcd& u2_evals) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u2_evals);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = sv[0] * kRankTol;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  return rank;
}

int rank_of_gram(const Eigen::MatrixXcd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.size() == 0) return 0;
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  if (top == 0.0) return 0;
  const double cutoff = top * kGramRankTol;
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cutoff) ++rank;
  return rank;
}

PoisednessReport good_samples(const Eigen::MatrixXcd& U_evals) {
  const Eigen::Index S = U_evals.cols();
  // Conjugate columns of (numerically) real samples duplicate the originals
  // and are skipped; with real samples the poisedness requirement doubles.
  std::vector<Eigen::Index> complex_cols;
  for (Eigen::Index s = 0; s < S; ++s) {
    const double im = U_evals.col(s).imag().cwiseAbs().maxCoeff();
    const double sc = 1.0 + U_evals.col(s).real().cwiseAbs().maxCoeff();
    if (im > 1e-12 * sc) complex_cols.push_back(s);
  }
  const Eigen::Index C = S + static_cast<Eigen::Index>(complex_cols.size());
  Eigen::MatrixXcd Uhat(U_evals.rows(), C);
  Uhat.leftCols(S) = U_evals;
  for (size_t i = 0; i < complex_cols.size(); ++i)
    Uhat.col(S + static_cast<Eigen::Index>(i)) = U_evals.col(complex_cols[i]).conjugate();

  PoisednessReport rep;
  rep.num_samples = static_cast<int>(S);
  rep.real_regime = complex_cols.empty();
  rep.gram_columns = static_cast<int>(C);
  // Hadamard trick: Gram of vec(u u^T) columns equals the entrywise square of
  // the degree-d Gram; the big matrix is never materialized.
  Eigen::MatrixXcd G = Uhat.adjoint() * Uhat;
  rep.gram = G.cwiseProduct(G);
  rep.D_e = rank_of_gram(rep.gram);
  rep.poised_certified = rep.D_e < static_cast<int>(C);
  return rep;
}

PoisednessReport good_samples(const MonomialVector& u, const SampleSet& Z) {
  if (u.size() == 0) throw std::invalid_argument("good_samples: empty basis");
  return good_samples(evaluation_matrix(u, Z));
}

long long min_samples_bound(int n, int d, std::optional<long long> deg_V,
                            std::optional<long long> dim_V) {
  if (n < 1 || d < 1) throw std::invalid_argument("min_samples_bound: need n >= 1, d >= 1");
  if (deg_V.has_value() != dim_V.has_value())
    throw std::invalid_argument("min_samples_bound: deg and dim must both be given or both absent");
  long long bound = binomial(n + 2LL * d, 2LL * d);
  if (deg_V) bound = std::min(bound, *deg_V * binomial(*dim_V + 2LL * d, 2LL * d));
  return (bound + 1) / 2;
}

}  // namespace ssos
