#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssos/basis.hpp"
#include "ssos/polynomial.hpp"
#include "ssos/sdp.hpp"
#include "ssos/variety.hpp"

namespace ssos {

// A verified (or pending) SOS certificate: F = ||R u||^2 with u expanded over
// `monomials` by the rows of `basis_coeffs`.
struct Certificate {
  int degree = 0;
  MonomialVector monomials;
  Eigen::MatrixXd basis_coeffs;  // r x |monomials|
  Eigen::MatrixXd T;             // |monomials| x r, monomial vector = T * u
  Eigen::MatrixXd Q;             // r x r PSD Gram matrix
  Eigen::MatrixXd R;             // factor, F = ||R u||^2
  std::optional<double> gamma;
  Eigen::VectorXd free_values;   // extra multiplier coefficients, when present
  std::string oracle_id;
  std::uint64_t seed = 0;
  int num_samples = 0;
  double residual = 0.0;         // max relative residual over verification samples
  int verify_samples_per_component = 0;

  CVector basis_at(const CVector& z) const;  // u(z)
  Complex sos_at(const CVector& z) const;    // F(z), complex for complex z
  std::vector<SparsePoly> factor_polynomials() const;  // rows of R*u expanded
};

void save_certificate(const Certificate& cert, const std::string& path);
Certificate load_certificate(const std::string& path);

// Identity test: true iff |f(z)| / (1 + scale(z)) <= tol at k fresh samples
// of every component.
bool is_zero(const std::function<Complex(const CVector&)>& f, VarietyOracle& oracle, int k,
             double tol, const std::function<double(const CVector&)>& scale = {});
bool is_zero(const SparsePoly& f, VarietyOracle& oracle, int k, double tol);
bool is_zero(const EvalOracle& f, VarietyOracle& oracle, int k, double tol);

// Eigenvalue-clipped square-root factor: R with ||R^T R - Q|| small. Throws
// when lambda_min(Q) < -tol.
Eigen::MatrixXd extract_factor(const Eigen::MatrixXd& Q, double tol);

enum class SosOutcome { certificate, no_certificate, failure };

struct SosOptions {
  std::optional<int> initial_samples;
  std::optional<int> fixed_samples;   // pin S and skip the sufficiency search
  double growth = 1.3;
  int max_retries = 3;
  double verify_tol = 1e-6;
  int verify_samples = 3;  // fresh samples per component
  std::optional<long long> deg_V;
  std::optional<long long> dim_V;
  SolveOptions solver;
  bool prefer_kernel = false;  // force kernel form (needed for dual recovery)
  OraclePtr verify_oracle;     // defaults to the sampling oracle
};

struct SosResult {
  SosOutcome outcome = SosOutcome::failure;
  std::optional<Certificate> certificate;
  Eigen::VectorXd farkas_y;
  double farkas_violation = 0.0;
  int final_samples = 0;  // per component
  int retries_used = 0;
  SdpStatus sdp_status = SdpStatus::numerical_trouble;
  std::string diagnostics;
};

SosResult sampling_sos(const SparsePoly& p, const OraclePtr& oracle, int d,
                       const SosOptions& opts = {});
SosResult sampling_sos(const EvalOracle& p, const OraclePtr& oracle, int d,
                       const SosOptions& opts = {});

// Optimization / feasibility task plumbing shared by the applications module.
struct OptimizationTask {
  std::string name;
  OraclePtr oracle;
  int degree = 1;
  LhsFn lhs;  // per-sample right-hand side and gamma coefficient
  int num_extra_free = 0;
  bool minimize_gamma = false;
  bool report_sqrt = false;  // distance-style objective: also report sqrt(gamma)
  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<double(const Eigen::VectorXd&)> variety_residual;
  std::optional<int> fixed_samples;
  std::optional<std::vector<SparsePoly>> basis_override;
};

struct FeasibilityTask {
  std::string name;
  OraclePtr oracle;
  int degree = 1;
  LhsFn lhs;
  int num_extra_free = 0;
  std::optional<int> fixed_samples;
  std::optional<std::vector<SparsePoly>> basis_override;
};

struct OptimizeResult {
  double bound = 0.0;       // optimal gamma
  double bound_sqrt = 0.0;  // sqrt(max(gamma, 0)) for distance-style tasks
  std::optional<Eigen::VectorXd> minimizer;
  Certificate certificate;
  SdpStatus sdp_status = SdpStatus::numerical_trouble;
  int samples = 0;
  std::string diagnostics;
};

OptimizeResult optimize(const OptimizationTask& task, const SosOptions& opts = {});
SosResult run_feasibility(const FeasibilityTask& task, const SosOptions& opts = {});

// x* = Re(sum_s w_s z_s) from the per-row equality duals, normalized so the
// constant-coordinate moment is one. Rows are matched to samples through the
// problem's sample/imag tags.
std::optional<Eigen::VectorXd> recover_minimizer(const Eigen::VectorXd& y,
                                                 const SdpProblem& prob, const SampleSet& Z);

struct VerifyReport {
  bool ok = false;
  double max_residual = 0.0;
  double psd_violation = 0.0;
  double factor_residual = 0.0;
  std::string message;
};

// Re-checks a stored certificate against a live oracle: Q PSD, Q = R^T R, and
// the defining identity at fresh samples. `p` must be provided unless the
// certificate carries gamma-less multiplier data only.
VerifyReport verify_certificate(const Certificate& cert,
                                const std::function<Complex(const CVector&)>& target_lhs,
                                VarietyOracle& oracle, int samples_per_component = 3,
                                double tol = 1e-6);

}  // namespace ssos
