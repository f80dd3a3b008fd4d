#pragma once

#include <Eigen/Dense>

#include "ssos/polynomial.hpp"
#include "ssos/sdp.hpp"

namespace ssos {

// Multiplier basis for each equation: `degree_d` uses all monomials of degree
// at most d (g = C u, one coefficient row per equation); `capped` truncates to
// degree 2d - deg(h_j) so that deg(g_j h_j) <= 2d.
enum class MultiplierPolicy { degree_d, capped };

struct EquationsSosOptions {
  MultiplierPolicy policy = MultiplierPolicy::degree_d;
  SolveOptions solver;
};

struct EquationsSosResult {
  bool feasible = false;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;  // F = ||R u||^2
  MonomialVector u;
  std::vector<SparsePoly> multipliers;  // g_j, one per equation
  double identity_residual = 0.0;       // max |coeff| of p - F - sum g_j h_j, relative
  SdpStatus status = SdpStatus::numerical_trouble;
  long long matched_monomials = 0;
};

// Certificate p = F + sum_j g_j h_j with F SOS, by explicit coefficient
// matching over every monomial appearing on either side.
EquationsSosResult equations_sos(const SparsePoly& p, const std::vector<SparsePoly>& h, int d,
                                 const EquationsSosOptions& opts = {});

struct DimCount {
  long long variables = 0;
  long long constraints = 0;
};

// `kernel` counts decision variables against matched-monomial constraints;
// `solver_report` mirrors the accounting used by the solver logs the
// comparison tables were taken from (variables = matched monomials plus the
// Gram svec dimension, constraints = decision variables).
enum class CountConvention { kernel, solver_report };

DimCount count_dims(const SparsePoly& p, const std::vector<SparsePoly>& h, int d,
                    bool with_gamma = false, CountConvention conv = CountConvention::kernel,
                    MultiplierPolicy policy = MultiplierPolicy::degree_d);

// Random instances matching the benchmark families: weighted Procrustes over
// St(k, R^n) in nk coordinates, and the trace-ratio variety Gr(k, R^n) in
// n(n+1)/2 symmetric coordinates.
struct TableInstance {
  SparsePoly p;
  std::vector<SparsePoly> h;
};
TableInstance procrustes_table_instance(int n, int k, std::uint64_t seed);
TableInstance trace_ratio_table_instance(int n, int k, std::uint64_t seed);

}  // namespace ssos
