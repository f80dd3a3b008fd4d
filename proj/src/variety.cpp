#include "ssos/variety.hpp"

#include <Eigen/LU>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace ssos {

using json = nlohmann::ordered_json;

std::vector<std::string> VarietyOracle::var_names() const {
  std::vector<std::string> names;
  names.reserve(ambient_dim());
  for (int i = 1; i <= ambient_dim(); ++i) names.push_back("x" + std::to_string(i));
  return names;
}

CVector flatten(const Eigen::MatrixXcd& m) {
  CVector v(m.size());
  Eigen::Index idx = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) v[idx++] = m(r, c);
  return v;
}

Eigen::MatrixXcd unflatten(const CVector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("unflatten: size mismatch");
  Eigen::MatrixXcd m(rows, cols);
  Eigen::Index idx = 0;
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = v[idx++];
  return m;
}

Eigen::MatrixXcd cayley(const Eigen::MatrixXcd& skew) {
  const Eigen::Index n = skew.rows();
  if (skew.cols() != n) throw std::invalid_argument("cayley: square matrix required");
  const double scale = std::max(1.0, skew.cwiseAbs().maxCoeff());
  if ((skew + skew.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("cayley: matrix is not skew-symmetric");
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(id + skew);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw CayleySingular("cayley: id + A singular");
  return (id - skew) * lu.inverse();
}

static std::vector<std::string> matrix_var_names(int rows, int cols) {
  std::vector<std::string> names;
  for (int c = 1; c <= cols; ++c)
    for (int r = 1; r <= rows; ++r)
      names.push_back("X" + std::to_string(r) + std::to_string(c));
  return names;
}

namespace {

constexpr int kMaxRedraws = 100;

class OracleBase : public VarietyOracle {
 public:
  OracleBase(std::string id, std::uint64_t seed)
      : id_(std::move(id)), seed_(seed), rng_(seed) {}
  std::string id() const override { return id_; }
  std::uint64_t seed() const override { return seed_; }

 protected:
  std::string id_;
  std::uint64_t seed_;
  Rng rng_;
};

Eigen::MatrixXcd random_skew(Rng& rng, int n, bool real) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Complex v = real ? Complex(rng.normal(), 0.0) : rng.complex_normal();
      a(i, j) = v;
      a(j, i) = -v;
    }
  return a;
}

Eigen::MatrixXcd so_sample_matrix(Rng& rng, int n, bool real) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    try {
      return cayley(random_skew(rng, n, real));
    } catch (const CayleySingular&) {
      continue;
    }
  }
  throw std::runtime_error("so oracle: repeated singular draws");
}

class SoOracle : public OracleBase {
 public:
  SoOracle(int n, std::uint64_t seed) : OracleBase("so:" + std::to_string(n), seed), n_(n) {}
  int ambient_dim() const override { return n_ * n_; }
  SamplePoint sample() override { return {flatten(so_sample_matrix(rng_, n_, false)), -1}; }
  bool has_real_sampler() const override { return true; }
  SamplePoint sample_real() override { return {flatten(so_sample_matrix(rng_, n_, true)), -1}; }
  double defining_residual(const SamplePoint& p) const override {
    Eigen::MatrixXcd x = unflatten(p.coords, n_, n_);
    double r = (x.transpose() * x - Eigen::MatrixXcd::Identity(n_, n_)).cwiseAbs().maxCoeff();
    return std::max(r, std::abs(x.determinant() - Complex(1.0, 0.0)));
  }
  std::vector<std::string> var_names() const override { return matrix_var_names(n_, n_); }

 private:
  int n_;
};

class StiefelOracle : public OracleBase {
 public:
  StiefelOracle(int n, int k, std::uint64_t seed)
      : OracleBase("stiefel:" + std::to_string(n) + "," + std::to_string(k), seed), n_(n), k_(k) {
    if (k < 1 || k > n) throw std::invalid_argument("stiefel: need 1 <= k <= n");
  }
  int ambient_dim() const override { return n_ * k_; }
  SamplePoint sample() override {
    return {flatten(so_sample_matrix(rng_, n_, false).leftCols(k_)), -1};
  }
  bool has_real_sampler() const override { return true; }
  SamplePoint sample_real() override {
    return {flatten(so_sample_matrix(rng_, n_, true).leftCols(k_)), -1};
  }
  double defining_residual(const SamplePoint& p) const override {
    Eigen::MatrixXcd x = unflatten(p.coords, n_, k_);
    return (x.transpose() * x - Eigen::MatrixXcd::Identity(k_, k_)).cwiseAbs().maxCoeff();
  }
  std::vector<std::string> var_names() const override { return matrix_var_names(n_, k_); }

 private:
  int n_, k_;
};

class GrassmannianOracle : public OracleBase {
 public:
  GrassmannianOracle(int n, int k, std::uint64_t seed)
      : OracleBase("grassmannian:" + std::to_string(n) + "," + std::to_string(k), seed),
        n_(n),
        k_(k) {
    if (k < 1 || k > n) throw std::invalid_argument("grassmannian: need 1 <= k <= n");
  }
  int ambient_dim() const override { return n_ * n_; }
  SamplePoint sample() override { return {flatten(projection(false)), -1}; }
  bool has_real_sampler() const override { return true; }
  SamplePoint sample_real() override { return {flatten(projection(true)), -1}; }
  double defining_residual(const SamplePoint& p) const override {
    Eigen::MatrixXcd x = unflatten(p.coords, n_, n_);
    double r = (x * x - x).cwiseAbs().maxCoeff();
    r = std::max(r, (x - x.transpose()).cwiseAbs().maxCoeff());
    return std::max(r, std::abs(x.trace() - Complex(k_, 0.0)));
  }
  std::vector<std::string> var_names() const override { return matrix_var_names(n_, n_); }

 private:
  Eigen::MatrixXcd projection(bool real) {
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      Eigen::MatrixXcd g(n_, k_);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < k_; ++j)
          g(i, j) = real ? Complex(rng_.normal(), 0.0) : rng_.complex_normal();
      Eigen::MatrixXcd gram = g.transpose() * g;  // plain transpose, not adjoint
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(gram);
      lu.setThreshold(1e-13);
      if (!lu.isInvertible()) continue;
      return g * lu.inverse() * g.transpose();
    }
    throw std::runtime_error("grassmannian oracle: repeated singular draws");
  }

  int n_, k_;
};

class RankTensorOracle : public OracleBase {
 public:
  RankTensorOracle(std::vector<int> dims, int k, std::uint64_t seed)
      : OracleBase(tensor_id(dims, k), seed), dims_(std::move(dims)), k_(k) {
    if (k_ < 1) throw std::invalid_argument("rank_k_tensor: need k >= 1");
    total_ = 1;
    for (int d : dims_) {
      if (d < 1) throw std::invalid_argument("rank_k_tensor: bad dimension");
      total_ *= d;
    }
  }
  int ambient_dim() const override { return total_; }
  SamplePoint sample() override { return draw(false); }
  bool has_real_sampler() const override { return true; }
  SamplePoint sample_real() override { return draw(true); }

 private:
  static std::string tensor_id(const std::vector<int>& dims, int k) {
    std::string s = "tensor:";
    for (size_t i = 0; i < dims.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(dims[i]);
    }
    return s + "," + std::to_string(k);
  }

  SamplePoint draw(bool real) {
    CVector t = CVector::Zero(total_);
    const int ell = static_cast<int>(dims_.size());
    for (int r = 0; r < k_; ++r) {
      std::vector<CVector> vs(ell);
      for (int m = 0; m < ell; ++m) {
        vs[m] = CVector(dims_[m]);
        for (int i = 0; i < dims_[m]; ++i)
          vs[m][i] = real ? Complex(rng_.normal(), 0.0) : rng_.complex_normal();
      }
      std::vector<int> idx(ell, 0);
      for (int flat = 0; flat < total_; ++flat) {
        Complex prod(1.0, 0.0);
        int rem = flat;
        for (int m = 0; m < ell; ++m) {
          prod *= vs[m][rem % dims_[m]];
          rem /= dims_[m];
        }
        t[flat] += prod;
      }
    }
    return {t, -1};
  }

  std::vector<int> dims_;
  int k_;
  int total_;
};

class NilpotentOracle : public OracleBase {
 public:
  NilpotentOracle(int n, std::uint64_t seed)
      : OracleBase("nilpotent:" + std::to_string(n), seed), n_(n) {}
  int ambient_dim() const override { return n_ * n_; }
  SamplePoint sample() override {
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n_, n_);
      for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) t(i, j) = rng_.complex_normal();
      Eigen::MatrixXcd g(n_, n_);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) g(i, j) = rng_.complex_normal();
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(g);
      lu.setThreshold(1e-13);
      if (!lu.isInvertible()) continue;
      return {flatten(nilpotent_similarity(t, g)), -1};
    }
    throw std::runtime_error("nilpotent oracle: repeated singular draws");
  }
  double defining_residual(const SamplePoint& p) const override {
    Eigen::MatrixXcd x = unflatten(p.coords, n_, n_);
    Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(n_, n_);
    for (int i = 0; i < n_; ++i) pw = pw * x;
    return pw.cwiseAbs().maxCoeff();
  }
  std::vector<std::string> var_names() const override { return matrix_var_names(n_, n_); }

 private:
  int n_;
};

class FullSpaceOracle : public OracleBase {
 public:
  FullSpaceOracle(int n, std::uint64_t seed)
      : OracleBase("full:" + std::to_string(n), seed), n_(n) {}
  int ambient_dim() const override { return n_; }
  SamplePoint sample() override {
    CVector z(n_);
    for (int i = 0; i < n_; ++i) z[i] = rng_.complex_normal();
    return {z, -1};
  }
  bool has_real_sampler() const override { return true; }
  SamplePoint sample_real() override {
    CVector z(n_);
    for (int i = 0; i < n_; ++i) z[i] = Complex(rng_.normal(), 0.0);
    return {z, -1};
  }

 private:
  int n_;
};

class FileOracle : public VarietyOracle {
 public:
  explicit FileOracle(SampleSet set) : set_(std::move(set)) {}
  int ambient_dim() const override { return set_.ambient_dim; }
  std::string id() const override { return "file:" + set_.oracle_id; }
  std::uint64_t seed() const override { return set_.seed; }
  SamplePoint sample() override {
    if (cursor_ >= set_.size()) throw OracleExhausted("file oracle exhausted");
    return set_.points[cursor_++];
  }

 private:
  SampleSet set_;
  int cursor_ = 0;
};

class UnionOracle : public VarietyOracle {
 public:
  explicit UnionOracle(std::vector<OraclePtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("union oracle: no components");
    for (const auto& p : parts_)
      if (p->ambient_dim() != parts_[0]->ambient_dim())
        throw std::invalid_argument("union oracle: ambient dimensions differ");
  }
  int ambient_dim() const override { return parts_[0]->ambient_dim(); }
  std::string id() const override {
    std::string s = "union:(";
    for (size_t i = 0; i < parts_.size(); ++i) {
      if (i) s += "|";
      s += parts_[i]->id();
    }
    return s + ")";
  }
  std::uint64_t seed() const override { return parts_[0]->seed(); }
  SamplePoint sample() override {
    const int c = cursor_;
    cursor_ = (cursor_ + 1) % static_cast<int>(parts_.size());
    SamplePoint p = parts_[c]->sample();
    p.component_id = c;
    return p;
  }
  int num_components() const override { return static_cast<int>(parts_.size()); }
  VarietyOracle& component(int i) override {
    if (i < 0 || i >= num_components()) throw std::invalid_argument("component out of range");
    return *parts_[i];
  }
  double defining_residual(const SamplePoint& p) const override {
    if (p.component_id >= 0 && p.component_id < num_components())
      return parts_[p.component_id]->defining_residual(p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& part : parts_) best = std::min(best, part->defining_residual(p));
    return best;
  }
  std::vector<std::string> var_names() const override { return parts_[0]->var_names(); }

 private:
  std::vector<OraclePtr> parts_;
  int cursor_ = 0;
};

class CallbackOracle : public OracleBase {
 public:
  CallbackOracle(int n, const std::string& id, std::function<SamplePoint(Rng&)> fn,
                 std::uint64_t seed, std::function<double(const SamplePoint&)> residual,
                 std::function<SamplePoint(Rng&)> real_fn)
      : OracleBase(id, seed),
        n_(n),
        fn_(std::move(fn)),
        residual_(std::move(residual)),
        real_fn_(std::move(real_fn)) {}
  int ambient_dim() const override { return n_; }
  SamplePoint sample() override { return fn_(rng_); }
  bool has_real_sampler() const override { return static_cast<bool>(real_fn_); }
  SamplePoint sample_real() override {
    if (!real_fn_) return VarietyOracle::sample_real();
    return real_fn_(rng_);
  }
  double defining_residual(const SamplePoint& p) const override {
    return residual_ ? residual_(p) : 0.0;
  }

 private:
  int n_;
  std::function<SamplePoint(Rng&)> fn_;
  std::function<double(const SamplePoint&)> residual_;
  std::function<SamplePoint(Rng&)> real_fn_;
};

}  // namespace

Eigen::MatrixXcd nilpotent_similarity(const Eigen::MatrixXcd& strict_upper,
                                      const Eigen::MatrixXcd& g) {
  const Eigen::Index n = strict_upper.rows();
  Eigen::MatrixXcd x = g * strict_upper * g.fullPivLu().inverse();
  const double norm = x.norm();
  if (norm > 0) x *= std::sqrt(static_cast<double>(n)) / norm;
  return x;
}

OraclePtr make_so_oracle(int n, std::uint64_t seed) {
  return std::make_shared<SoOracle>(n, seed);
}
OraclePtr make_stiefel_oracle(int n, int k, std::uint64_t seed) {
  return std::make_shared<StiefelOracle>(n, k, seed);
}
OraclePtr make_grassmannian_oracle(int n, int k, std::uint64_t seed) {
  return std::make_shared<GrassmannianOracle>(n, k, seed);
}
OraclePtr make_rank_tensor_oracle(const std::vector<int>& dims, int k, std::uint64_t seed) {
  return std::make_shared<RankTensorOracle>(dims, k, seed);
}
OraclePtr make_nilpotent_oracle(int n, std::uint64_t seed) {
  return std::make_shared<NilpotentOracle>(n, seed);
}
OraclePtr make_full_space_oracle(int n, std::uint64_t seed) {
  return std::make_shared<FullSpaceOracle>(n, seed);
}
OraclePtr make_file_oracle(SampleSet set) { return std::make_shared<FileOracle>(std::move(set)); }
OraclePtr make_union_oracle(std::vector<OraclePtr> parts) {
  return std::make_shared<UnionOracle>(std::move(parts));
}
OraclePtr make_callback_oracle(int ambient_dim, const std::string& id,
                               std::function<SamplePoint(Rng&)> fn, std::uint64_t seed,
                               std::function<double(const SamplePoint&)> residual,
                               std::function<SamplePoint(Rng&)> real_fn) {
  return std::make_shared<CallbackOracle>(ambient_dim, id, std::move(fn), seed,
                                          std::move(residual), std::move(real_fn));
}

static std::vector<int> parse_int_list(const std::string& s, char sep) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(std::stoi(item));
  return out;
}

OraclePtr make_oracle(const std::string& spec, std::uint64_t seed) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("variety spec must look like kind:params, got " + spec);
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "so") return make_so_oracle(std::stoi(rest), seed);
  if (kind == "stiefel" || kind == "st") {
    auto v = parse_int_list(rest, ',');
    if (v.size() != 2) throw std::invalid_argument("stiefel spec needs n,k");
    return make_stiefel_oracle(v[0], v[1], seed);
  }
  if (kind == "grassmannian" || kind == "gr" || kind == "grass") {
    auto v = parse_int_list(rest, ',');
    if (v.size() != 2) throw std::invalid_argument("grassmannian spec needs n,k");
    return make_grassmannian_oracle(v[0], v[1], seed);
  }
  if (kind == "nilpotent") return make_nilpotent_oracle(std::stoi(rest), seed);
  if (kind == "full" || kind == "cn") return make_full_space_oracle(std::stoi(rest), seed);
  if (kind == "tensor") {
    const auto comma = rest.rfind(',');
    if (comma == std::string::npos) throw std::invalid_argument("tensor spec needs dims,k");
    auto dims = parse_int_list(rest.substr(0, comma), 'x');
    return make_rank_tensor_oracle(dims, std::stoi(rest.substr(comma + 1)), seed);
  }
  if (kind == "file") return make_file_oracle(load_samples(rest));
  if (kind == "union") {
    std::string inner = rest;
    if (!inner.empty() && inner.front() == '(' && inner.back() == ')')
      inner = inner.substr(1, inner.size() - 2);
    std::vector<OraclePtr> parts;
    std::stringstream ss(inner);
    std::string item;
    int idx = 0;
    while (std::getline(ss, item, '|'))
      parts.push_back(make_oracle(item, derive_seed(seed, idx++)));
    return make_union_oracle(std::move(parts));
  }
  throw std::invalid_argument("unknown variety kind: " + kind);
}

SamplePoint lift_to_re_im(const SamplePoint& z, const SamplePoint& w) {
  if (z.coords.size() != w.coords.size())
    throw std::invalid_argument("lift_to_re_im: dimension mismatch");
  const Eigen::Index n = z.coords.size();
  CVector out(2 * n);
  const Complex half(0.5, 0.0);
  const Complex half_over_i(0.0, -0.5);  // 1/(2i)
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = (z.coords[i] + w.coords[i]) * half;
    out[n + i] = (z.coords[i] - w.coords[i]) * half_over_i;
  }
  return {out, z.component_id};
}

SampleSet draw_samples(VarietyOracle& oracle, int count) {
  SampleSet set;
  set.ambient_dim = oracle.ambient_dim();
  set.oracle_id = oracle.id();
  set.seed = oracle.seed();
  set.points.reserve(count);
  for (int i = 0; i < count; ++i) set.points.push_back(oracle.sample());
  return set;
}

void save_samples(const SampleSet& set, const std::string& path) {
  json j;
  j["ambient_dim"] = set.ambient_dim;
  j["oracle_id"] = set.oracle_id;
  j["seed"] = set.seed;
  json pts = json::array();
  bool have_components = false;
  for (const auto& p : set.points) {
    json coords = json::array();
    for (Eigen::Index i = 0; i < p.coords.size(); ++i)
      coords.push_back({{"re", p.coords[i].real()}, {"im", p.coords[i].imag()}});
    pts.push_back(coords);
    have_components = have_components || p.component_id >= 0;
  }
  j["points"] = pts;
  if (have_components) {
    json ids = json::array();
    for (const auto& p : set.points) ids.push_back(p.component_id);
    j["component_ids"] = ids;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << "\n";
}

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed sample file " + path + ": " + e.what());
  }
  SampleSet set;
  if (!j.contains("ambient_dim") || !j.contains("points"))
    throw std::runtime_error("malformed sample file " + path + ": missing fields");
  set.ambient_dim = j["ambient_dim"].get<int>();
  set.oracle_id = j.value("oracle_id", std::string("file"));
  set.seed = j.value("seed", std::uint64_t{0});
  for (const auto& coords : j["points"]) {
    SamplePoint p;
    p.coords = CVector(coords.size());
    Eigen::Index i = 0;
    for (const auto& c : coords) p.coords[i++] = Complex(c.at("re").get<double>(), c.at("im").get<double>());
    if (p.coords.size() != set.ambient_dim)
      throw std::runtime_error("sample file " + path + ": point dimension mismatch");
    for (Eigen::Index k = 0; k < p.coords.size(); ++k)
      if (!std::isfinite(p.coords[k].real()) || !std::isfinite(p.coords[k].imag()))
        throw std::runtime_error("sample file " + path + ": non-finite entry");
    set.points.push_back(std::move(p));
  }
  if (j.contains("component_ids")) {
    const auto& ids = j["component_ids"];
    if (ids.size() != set.points.size())
      throw std::runtime_error("sample file " + path + ": component_ids size mismatch");
    for (size_t i = 0; i < set.points.size(); ++i) set.points[i].component_id = ids[i].get<int>();
  }
  return set;
}

}  // namespace ssos
