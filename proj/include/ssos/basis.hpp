#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ssos/polynomial.hpp"
#include "ssos/variety.hpp"

namespace ssos {

// Relative singular-value cutoff used for all numerical rank decisions on
// evaluation matrices.
constexpr double kRankTol = 1e-8;
// Gram matrices square the singular values; eigenvalue cutoff sits above the
// double-precision noise floor.
constexpr double kGramRankTol = 1e-12;

// Output of the orthogonalization pass: rows of `coeffs` express each basis
// element over the input basis, `evals` holds its values on the sample set,
// and `T` maps back: input = T * basis.
struct OrthBasisResult {
  Eigen::MatrixXd coeffs;   // rank x N_in
  Eigen::MatrixXcd evals;   // rank x S
  Eigen::MatrixXd T;        // N_in x rank
  int rank = 0;
  MonomialVector monomials;              // set when the input basis was monomial
  std::vector<SparsePoly> input_polys;   // set for general polynomial inputs

  // Basis element values at a fresh point.
  CVector eval_at(const CVector& z) const;
  // Basis elements expanded over monomials (coefficient rows).
  std::vector<SparsePoly> to_polynomials() const;
};

OrthBasisResult orth_basis_from_evals(const Eigen::MatrixXcd& U, double tol = kRankTol);
OrthBasisResult orth_basis(const MonomialVector& u, const SampleSet& Z);
OrthBasisResult orth_basis(const std::vector<SparsePoly>& u, const SampleSet& Z);

// Rank of an evaluation matrix whose columns are indexed by Z then conj(Z).
int empirical_dimension(const Eigen::MatrixXcd& u2_evals);

// Rank of a Hermitian PSD Gram matrix.
int rank_of_gram(const Eigen::MatrixXcd& gram);

struct PoisednessReport {
  int D_e = 0;
  int num_samples = 0;
  bool poised_certified = false;
  Eigen::MatrixXcd gram;   // the Hermitian matrix used for the rank test
  bool real_regime = false;
  int gram_columns = 0;
};

// Algorithm: build the Gram of vec(u u^T) evaluations over Z u conj(Z) via
// the Hadamard square of the degree-d Gram; certified iff its rank is less
// than the number of distinct columns.
PoisednessReport good_samples(const Eigen::MatrixXcd& U_evals);
PoisednessReport good_samples(const MonomialVector& u, const SampleSet& Z);

// ceil(min{C(n+2d,2d), deg * C(dim+2d,2d)} / 2); the degree/dimension pair
// refers to the conjugate-closed variety.
long long min_samples_bound(int n, int d, std::optional<long long> deg_V = std::nullopt,
                            std::optional<long long> dim_V = std::nullopt);

// Evaluation matrix of a monomial basis on a sample set (N x S).
Eigen::MatrixXcd evaluation_matrix(const MonomialVector& u, const SampleSet& Z);
Eigen::MatrixXcd evaluation_matrix(const std::vector<SparsePoly>& u, const SampleSet& Z);

}  // namespace ssos
