#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssos/polynomial.hpp"
#include "ssos/rng.hpp"

namespace ssos {

struct SamplePoint {
  CVector coords;
  int component_id = -1;
};

struct SampleSet {
  int ambient_dim = 0;
  std::vector<SamplePoint> points;
  std::string oracle_id;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(points.size()); }
};

// Raised by a file oracle that has run out of stored points.
struct OracleExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by cayley() when id + A is singular; callers draw a new A.
struct CayleySingular : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Generic-sample oracle contract. sample() advances the oracle's own RNG and
// is deterministic given the construction seed.
class VarietyOracle {
 public:
  virtual ~VarietyOracle() = default;

  virtual int ambient_dim() const = 0;
  virtual std::string id() const = 0;
  virtual std::uint64_t seed() const = 0;
  virtual SamplePoint sample() = 0;

  virtual int num_components() const { return 1; }
  virtual VarietyOracle& component(int i) {
    if (i != 0) throw std::invalid_argument("component index out of range");
    return *this;
  }

  virtual bool has_real_sampler() const { return false; }
  virtual SamplePoint sample_real() {
    throw std::runtime_error("oracle has no real sampler: " + id());
  }

  // Max-norm residual of the defining relations at a point; 0 when the kind
  // realizes its relations by construction or they are unknown.
  virtual double defining_residual(const SamplePoint& p) const {
    (void)p;
    return 0.0;
  }

  virtual std::vector<std::string> var_names() const;
};

using OraclePtr = std::shared_ptr<VarietyOracle>;

// (id - A)(id + A)^{-1} for skew-symmetric complex A. Throws CayleySingular
// when id + A is not invertible.
Eigen::MatrixXcd cayley(const Eigen::MatrixXcd& skew);

OraclePtr make_so_oracle(int n, std::uint64_t seed);
OraclePtr make_stiefel_oracle(int n, int k, std::uint64_t seed);       // St(k, R^n)
OraclePtr make_grassmannian_oracle(int n, int k, std::uint64_t seed);  // Gr(k, R^n), n x n projections
OraclePtr make_rank_tensor_oracle(const std::vector<int>& dims, int k, std::uint64_t seed);
OraclePtr make_nilpotent_oracle(int n, std::uint64_t seed);
OraclePtr make_full_space_oracle(int n, std::uint64_t seed);
OraclePtr make_file_oracle(SampleSet set);
OraclePtr make_union_oracle(std::vector<OraclePtr> parts);
OraclePtr make_callback_oracle(int ambient_dim, const std::string& id,
                               std::function<SamplePoint(Rng&)> fn, std::uint64_t seed,
                               std::function<double(const SamplePoint&)> residual = {},
                               std::function<SamplePoint(Rng&)> real_fn = {});

// Parses CLI-style specs: so:2, stiefel:4,2, grassmannian:3,2, nilpotent:3,
// tensor:2x2x2x2,1, full:2, file:/path.json, union:(spec|spec|...).
OraclePtr make_oracle(const std::string& spec, std::uint64_t seed);

// Point of the lifted variety in C^{2n} determined by x + iy = z, x - iy = w.
// With w = conj(z) this is the real lift (Re z, Im z).
SamplePoint lift_to_re_im(const SamplePoint& z, const SamplePoint& w);

SampleSet draw_samples(VarietyOracle& oracle, int count);

SampleSet load_samples(const std::string& path);
void save_samples(const SampleSet& set, const std::string& path);

// Exposed for tests: similarity transform of a strictly triangular matrix,
// normalized to Frobenius norm sqrt(n).
Eigen::MatrixXcd nilpotent_similarity(const Eigen::MatrixXcd& strict_upper,
                                      const Eigen::MatrixXcd& g);

CVector flatten(const Eigen::MatrixXcd& m);  // column-major
Eigen::MatrixXcd unflatten(const CVector& v, int rows, int cols);

}  // namespace ssos
