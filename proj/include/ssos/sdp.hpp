#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssos/basis.hpp"
#include "ssos/polynomial.hpp"
#include "ssos/variety.hpp"

namespace ssos {

enum class SdpStatus { optimal, primal_infeasible, dual_infeasible, numerical_trouble };
enum class SdpForm { kernel, image };

std::string to_string(SdpStatus s);

// Constraint matrix tagged as scale * Re(v v^T) or scale * Im(v v^T); such
// matrices have rank at most two and are never materialized inside the
// solver.
struct LowRankTag {
  Eigen::VectorXcd v;
  bool imag_part = false;
  double scale = 1.0;
};

struct SdpConstraint {
  Eigen::MatrixXd A;  // dense symmetric; empty when a tag is present
  std::optional<LowRankTag> tag;
  Eigen::VectorXd a;  // free-variable coefficients (size num_free or 0)
  double b = 0.0;
  int sample_index = -1;
  bool imag_row = false;

  Eigen::MatrixXd dense(int psd_dim) const;
  double dot_psd(const Eigen::MatrixXd& X) const;  // <A, X>
  double frob_norm() const;
};

struct ImageData {
  Eigen::MatrixXd Q0;
  Eigen::VectorXd w0;
  std::vector<Eigen::MatrixXd> Q_gen;
  std::vector<Eigen::VectorXd> w_gen;
  int num_parameters() const { return static_cast<int>(Q_gen.size()); }
};

// One PSD block of size psd_dim plus num_free free scalars. Constraints are
// <A_i, Q> + a_i . w = b_i; the objective obj_psd . Q + obj_free . w is
// maximized.
struct SdpProblem {
  int psd_dim = 0;
  int num_free = 0;
  std::vector<SdpConstraint> constraints;
  Eigen::MatrixXd obj_psd;   // zero size means zero objective
  Eigen::VectorXd obj_free;
  SdpForm form = SdpForm::kernel;
  std::optional<ImageData> image;

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  // N(N+1)/2 + num_free
  long long num_variables() const {
    return static_cast<long long>(psd_dim) * (psd_dim + 1) / 2 + num_free;
  }
  Eigen::MatrixXd objective_psd() const;
  Eigen::VectorXd objective_free() const;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_trouble;
  Eigen::MatrixXd Q;
  Eigen::VectorXd free_values;
  // Duals per original constraint; for primal_infeasible this is the Farkas
  // certificate normalized to b^T y = 1.
  Eigen::VectorXd y;
  double gap = 0.0;
  int iterations = 0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double farkas_violation = 0.0;
  std::string message;
};

struct SolveOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 100;
  bool verbose = false;
  double time_budget_sec = 0.0;  // 0 = unlimited
};

SdpSolution solve(const SdpProblem& prob, const SolveOptions& opts = {});

// Min-norm particular solution plus an orthonormal nullspace parametrization
// of the constraint set. Throws std::runtime_error when the constraints are
// inconsistent beyond tolerance.
SdpProblem to_image_form(const SdpProblem& prob, double tol = 1e-8);

// Sampling SDP assembly. Each sample contributes a real and an imaginary
// scalar constraint; imaginary rows of (numerically) real samples are
// dropped. Constraint matrices carry low-rank tags with v = basis values.
enum class AssembleMode { feasibility, lower_bound, custom_lhs };

struct SampleLhs {
  Complex rhs;                    // scalar left-hand side value at the sample
  Complex gamma_coeff;            // coefficient of gamma (0 when absent)
  Eigen::VectorXcd free_coeffs;   // coefficients of additional free scalars
};
using LhsFn = std::function<SampleLhs(const SamplePoint&, int)>;

SdpProblem assemble_sampling_sdp(const LhsFn& lhs, const OrthBasisResult& basis,
                                 const SampleSet& Z, int num_extra_free = 0,
                                 bool with_gamma = false);
SdpProblem assemble_sampling_sdp(const SparsePoly& p, const OrthBasisResult& basis,
                                 const SampleSet& Z, AssembleMode mode);
SdpProblem assemble_sampling_sdp(const EvalOracle& p, const OrthBasisResult& basis,
                                 const SampleSet& Z, AssembleMode mode);

// SDPA sparse (.dat-s) writer for kernel-form problems: free scalars are
// split into a +/- diagonal block. parse_sdpa() reads the emitted format
// back; the writer/parser pair round-trips constraint data exactly.
void export_sdpa(const SdpProblem& prob, const std::string& path);
SdpProblem parse_sdpa(const std::string& path);

namespace sdp_detail {

// Schur complement M_ij = Tr(A_i X A_j Sinv); the tagged path must agree
// with this dense reference.
Eigen::MatrixXd schur_dense(const std::vector<SdpConstraint>& rows, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& Sinv);
Eigen::MatrixXd schur_fast(const std::vector<SdpConstraint>& rows, const Eigen::MatrixXd& X,
                           const Eigen::LLT<Eigen::MatrixXd>& S_llt);

// Greedy rank-revealing row selection on the constraint Gram; returns kept
// row indices in original order.
std::vector<int> select_independent_rows(const SdpProblem& prob, double tol);

}  // namespace sdp_detail

}  // namespace ssos
