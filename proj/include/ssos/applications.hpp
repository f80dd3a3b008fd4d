#pragma once

#include <Eigen/Dense>
#include <optional>
#include <variant>

#include "ssos/certify.hpp"

namespace ssos {

struct Tensor {
  std::vector<int> dims;
  Eigen::VectorXd data;  // column-major flat layout

  int size() const { return static_cast<int>(data.size()); }
  // 1-based multi-index access
  double& at(const std::vector<int>& idx);
  double at(const std::vector<int>& idx) const;
  static Tensor zeros(const std::vector<int>& dims);
};

// min ||A X C - B|| over X in St(k, R^n); the certified bound is on the
// squared norm, sqrt is reported alongside.
OptimizationTask build_procrustes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                  const Eigen::MatrixXd& C, int n, int k, int d,
                                  std::uint64_t seed);

// max tr(AX)/tr(BX) + tr(CX) over Gr(k, R^n); gamma is minimized and upper
// bounds the objective. B must be positive definite.
OptimizationTask build_trace_ratio(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const Eigen::MatrixXd& C, int k, int d, std::uint64_t seed);

// Nearest rank-k tensor; d = floor(k/2) + 1 and the constraint is damped by
// ||X||^(2(d-1)).
OptimizationTask build_tensor_approx(const Tensor& T, int k, std::uint64_t seed);

// Positivstellensatz certificate that the real locus is empty: -1 is SOS.
FeasibilityTask build_infeasibility(const OraclePtr& oracle, int d);

struct AmoebaTask {
  OraclePtr base_oracle;
  Eigen::VectorXd lambda;  // strictly positive, one entry per base coordinate
  int d = 1;
  std::optional<std::vector<SparsePoly>> u_basis;  // over the lifted 2n coords
  std::optional<std::vector<SparsePoly>> v_basis;  // multiplier basis
};

// Certifies lambda is not in the amoeba of the base variety: SDP for
// -1 = u^T Q u + h_lambda^T C v on the lifted variety.
FeasibilityTask build_amoeba(const AmoebaTask& task);

// Lifted-variety oracle: z -> (Re z, Im z), a real point of the lift.
OraclePtr make_lifted_oracle(const OraclePtr& base);

// h_i(x, y) = x_i^2 + y_i^2 - lambda_i^2 over the 2n lifted coordinates.
std::vector<SparsePoly> amoeba_equations(const Eigen::VectorXd& lambda);

// Symbolic expansions backing the numeric callables (test cross-checks and
// the equations-SOS baseline).
SparsePoly procrustes_objective_poly(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                     const Eigen::MatrixXd& C, int n, int k);
// returns (rhs polynomial, gamma-coefficient polynomial) in n*n variables
std::pair<SparsePoly, SparsePoly> trace_ratio_polys(const Eigen::MatrixXd& A,
                                                    const Eigen::MatrixXd& B,
                                                    const Eigen::MatrixXd& C);
std::pair<SparsePoly, SparsePoly> tensor_polys(const Tensor& T);  // (||T-X||^2, ||X||^2)

// Distance from the flat tensor x to the rank-one variety, via alternating
// power iteration.
double rank_one_distance(const std::vector<int>& dims, const Eigen::VectorXd& x);

// Task-file loading (JSON); kind field selects the builder.
using AnyTask = std::variant<OptimizationTask, FeasibilityTask>;
AnyTask load_task(const std::string& path);

}  // namespace ssos
