#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "ssos/sdp.hpp"

using namespace ssos;

namespace {

std::string fixture_path(const std::string& name) {
  const char* dir = std::getenv("SSOS_FIXTURES");
  return (dir ? std::string(dir) : std::string("../fixtures")) + "/" + name;
}

SdpConstraint dense_row(const Eigen::MatrixXd& A, double b, const Eigen::VectorXd& a = {}) {
  SdpConstraint c;
  c.A = A;
  c.b = b;
  if (a.size()) c.a = a;
  return c;
}

// residual / gap / PSD invariants required of every optimal solution
void check_solution_invariants(const SdpProblem& prob, const SdpSolution& sol) {
  REQUIRE(sol.status == SdpStatus::optimal);
  double bnorm = 0.0;
  for (const auto& c : prob.constraints) bnorm += c.b * c.b;
  bnorm = std::sqrt(bnorm);
  for (const auto& c : prob.constraints) {
    double lhs = c.dot_psd(sol.Q);
    if (c.a.size() && prob.num_free) lhs += c.a.dot(sol.free_values);
    CHECK(std::abs(lhs - c.b) <= 1e-7 * (1.0 + bnorm));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sol.Q, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-7 * (1.0 + sol.Q.norm()));
  CHECK(sol.gap <= 1e-7);
}

// dual slack of the externally-maximized problem
Eigen::MatrixXd dual_slack(const SdpProblem& prob, const SdpSolution& sol) {
  Eigen::MatrixXd Z = -prob.objective_psd();
  for (int i = 0; i < prob.num_constraints(); ++i)
    Z += sol.y[i] * prob.constraints[i].dense(prob.psd_dim);
  return Z;
}

SdpProblem min_t_problem() {
  // min t such that [[t,1],[1,t]] >= 0; optimum t = 1
  SdpProblem prob;
  prob.psd_dim = 2;
  Eigen::MatrixXd off(2, 2);
  off << 0, 0.5, 0.5, 0;
  prob.constraints.push_back(dense_row(off, 1.0));
  Eigen::MatrixXd dd(2, 2);
  dd << 1, 0, 0, -1;
  prob.constraints.push_back(dense_row(dd, 0.0));
  Eigen::MatrixXd obj = Eigen::MatrixXd::Zero(2, 2);
  obj(0, 0) = -1;  // maximize -Q11 = -t
  prob.obj_psd = obj;
  return prob;
}

}  // namespace

TEST_CASE("min t with [[t,1],[1,t]] psd attains t = 1") {
  SdpProblem prob = min_t_problem();
  SdpSolution sol = solve(prob);
  check_solution_invariants(prob, sol);
  CHECK(sol.Q(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.primal_obj == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("constant infeasible problem returns a Farkas certificate") {
  // q = -1 with q >= 0
  SdpProblem prob;
  prob.psd_dim = 1;
  prob.constraints.push_back(dense_row(Eigen::MatrixXd::Identity(1, 1), -1.0));
  SdpSolution sol = solve(prob);
  REQUIRE(sol.status == SdpStatus::primal_infeasible);
  // certificate: sum y_i A_i <= 0 while b^T y = 1
  double bty = 0.0;
  for (int i = 0; i < prob.num_constraints(); ++i) bty += sol.y[i] * prob.constraints[i].b;
  CHECK(bty == doctest::Approx(1.0).epsilon(1e-6));
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(1, 1);
  for (int i = 0; i < prob.num_constraints(); ++i)
    Z += sol.y[i] * prob.constraints[i].dense(1);
  CHECK(Z(0, 0) <= 1e-8);
  CHECK(sol.farkas_violation >= 1e-6);
}

TEST_CASE("free variables: max gamma with q + gamma = 1") {
  SdpProblem prob;
  prob.psd_dim = 1;
  prob.num_free = 1;
  prob.constraints.push_back(
      dense_row(Eigen::MatrixXd::Identity(1, 1), 1.0, Eigen::VectorXd::Ones(1)));
  prob.obj_free = Eigen::VectorXd::Ones(1);
  SdpSolution sol = solve(prob);
  check_solution_invariants(prob, sol);
  CHECK(sol.free_values[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(sol.Q(0, 0)) < 1e-6);
}

TEST_CASE("unbounded objective is flagged dual infeasible") {
  // maximize Q11 subject to Q12 = 0: ray Q = diag(t, 0)
  SdpProblem prob;
  prob.psd_dim = 2;
  Eigen::MatrixXd off(2, 2);
  off << 0, 0.5, 0.5, 0;
  prob.constraints.push_back(dense_row(off, 0.0));
  Eigen::MatrixXd obj = Eigen::MatrixXd::Zero(2, 2);
  obj(0, 0) = 1;
  prob.obj_psd = obj;
  SdpSolution sol = solve(prob);
  CHECK(sol.status == SdpStatus::dual_infeasible);

  // free variable unconstrained in every row
  SdpProblem prob2;
  prob2.psd_dim = 1;
  prob2.num_free = 1;
  prob2.constraints.push_back(
      dense_row(Eigen::MatrixXd::Identity(1, 1), 1.0, Eigen::VectorXd::Zero(1)));
  prob2.obj_free = Eigen::VectorXd::Ones(1);
  CHECK(solve(prob2).status == SdpStatus::dual_infeasible);
}

TEST_CASE("complementarity of optimal pairs") {
  SdpProblem prob = min_t_problem();
  SdpSolution sol = solve(prob);
  REQUIRE(sol.status == SdpStatus::optimal);
  const Eigen::MatrixXd Z = dual_slack(prob, sol);
  const double comp = std::abs((sol.Q.array() * Z.array()).sum());
  CHECK(comp <= 1e-6 * (1.0 + std::abs(sol.primal_obj)));
}

TEST_CASE("SO(2) sampling SDP from the printed samples") {
  const SampleSet Z = load_samples(fixture_path("ex35_samples.json"));
  const MonomialVector u = monomials_up_to(4, 1);
  const OrthBasisResult basis = orth_basis(u, Z);
  REQUIRE(basis.rank == 3);
  const SparsePoly p = SparsePoly::parse("4*x2 - 2*x1*x4 - 2*x3*x2 + 3", 4);
  SdpProblem prob = assemble_sampling_sdp(p, basis, Z, AssembleMode::feasibility);
  CHECK(prob.psd_dim == 3);
  CHECK(prob.num_constraints() == 6);
  for (const auto& c : prob.constraints) CHECK(c.tag.has_value());

  SdpSolution sol = solve(prob);
  REQUIRE(sol.status == SdpStatus::optimal);
  // the recovered F agrees with p (and with (2 X21 + 1)^2) at the samples
  for (int s = 0; s < Z.size(); ++s) {
    const CVector uo = basis.evals.col(s);
    const Complex F = (uo.transpose() * (sol.Q.cast<Complex>() * uo)).value();
    const Complex expected = p.eval(Z.points[s].coords);
    CHECK(std::abs(F - expected) < 1e-6);
    const Complex square = std::pow(2.0 * Z.points[s].coords[1] + 1.0, 2);
    CHECK(std::abs(F - square) < 1e-6);
  }
}

TEST_CASE("zero polynomial gives the zero Gram matrix") {
  auto oracle = make_so_oracle(2, 3);
  const SampleSet Z = draw_samples(*oracle, 3);
  const OrthBasisResult basis = orth_basis(monomials_up_to(4, 1), Z);
  SdpProblem prob = assemble_sampling_sdp(SparsePoly(4), basis, Z, AssembleMode::feasibility);
  SdpSolution sol = solve(prob);
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK(sol.Q.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("imaginary rows of real samples are dropped") {
  auto oracle = make_stiefel_oracle(3, 1, 5);
  SampleSet Z;
  Z.ambient_dim = 3;
  for (int i = 0; i < 4; ++i) Z.points.push_back(oracle->sample_real());
  const OrthBasisResult basis = orth_basis(monomials_up_to(3, 1), Z);
  SparsePoly p = SparsePoly::parse("x1^2 + x2^2 + x3^2", 3);
  SdpProblem prob = assemble_sampling_sdp(p, basis, Z, AssembleMode::feasibility);
  CHECK(prob.num_constraints() == 4);  // only the real rows remain
}

TEST_CASE("Procrustes-sized lower-bound assembly matches the reported dimensions") {
  // n=4, k=2: 46 variables (45 Gram entries plus gamma), 42 scalar constraints
  auto oracle = make_stiefel_oracle(4, 2, 11);
  const SampleSet Z = draw_samples(*oracle, 21);
  const OrthBasisResult basis = orth_basis(monomials_up_to(8, 1), Z);
  REQUIRE(basis.rank == 9);
  SparsePoly p(8);  // any quadratic objective; dimensions only
  for (int i = 0; i < 8; ++i) {
    std::vector<int> e(8, 0);
    e[i] = 2;
    p.add_term(e, 1.0);
  }
  SdpProblem prob = assemble_sampling_sdp(p, basis, Z, AssembleMode::lower_bound);
  CHECK(prob.num_variables() == 46);
  CHECK(prob.num_constraints() == 42);
  const auto rows = sdp_detail::select_independent_rows(prob, 1e-10);
  CHECK(static_cast<int>(rows.size()) == 42);
}

TEST_CASE("image form of simple constraint sets") {
  // single constraint Q11 = 1 on a 1x1 block: unique solution, no generators
  SdpProblem p1;
  p1.psd_dim = 1;
  p1.constraints.push_back(dense_row(Eigen::MatrixXd::Identity(1, 1), 1.0));
  SdpProblem im1 = to_image_form(p1);
  REQUIRE(im1.image.has_value());
  CHECK(im1.image->num_parameters() == 0);
  CHECK(im1.image->Q0(0, 0) == doctest::Approx(1.0));

  // tr Q = 0 on a 2x2 block: two generators spanning traceless symmetric 2x2
  SdpProblem p2;
  p2.psd_dim = 2;
  p2.constraints.push_back(dense_row(Eigen::MatrixXd::Identity(2, 2), 0.0));
  SdpProblem im2 = to_image_form(p2);
  CHECK(im2.image->num_parameters() == 2);
  for (const auto& g : im2.image->Q_gen) {
    CHECK(std::abs(g.trace()) < 1e-12);
    CHECK((g - g.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("image form parameter count equals variables minus constraint rank") {
  SdpProblem prob = min_t_problem();
  SdpProblem im = to_image_form(prob);
  CHECK(im.image->num_parameters() == prob.num_variables() - 2);
  // invariants: Q0 satisfies the constraints, generators annihilate them
  for (const auto& c : prob.constraints) {
    CHECK(std::abs(c.dot_psd(im.image->Q0) - c.b) < 1e-8);
    for (const auto& g : im.image->Q_gen) CHECK(std::abs(c.dot_psd(g)) < 1e-8);
  }
}

TEST_CASE("kernel and image solves agree on the objective") {
  SdpProblem prob = min_t_problem();
  SdpSolution k = solve(prob);
  SdpSolution i = solve(to_image_form(prob));
  REQUIRE(k.status == SdpStatus::optimal);
  REQUIRE(i.status == SdpStatus::optimal);
  CHECK(std::abs(k.primal_obj - i.primal_obj) < 1e-6);

  // with a free variable
  SdpProblem probf;
  probf.psd_dim = 2;
  probf.num_free = 1;
  Eigen::MatrixXd A1 = Eigen::MatrixXd::Identity(2, 2);
  probf.constraints.push_back(dense_row(A1, 2.0, Eigen::VectorXd::Ones(1)));
  Eigen::MatrixXd A2 = Eigen::MatrixXd::Zero(2, 2);
  A2(0, 0) = 1;
  probf.constraints.push_back(dense_row(A2, 1.0, -Eigen::VectorXd::Ones(1)));
  probf.obj_free = Eigen::VectorXd::Ones(1);
  SdpSolution kf = solve(probf);
  SdpSolution imf = solve(to_image_form(probf));
  REQUIRE(kf.status == SdpStatus::optimal);
  REQUIRE(imf.status == SdpStatus::optimal);
  CHECK(std::abs(kf.primal_obj - imf.primal_obj) < 1e-6);
}

TEST_CASE("inconsistent constraints are rejected by the image transform") {
  SdpProblem prob;
  prob.psd_dim = 1;
  prob.constraints.push_back(dense_row(Eigen::MatrixXd::Identity(1, 1), 1.0));
  prob.constraints.push_back(dense_row(Eigen::MatrixXd::Identity(1, 1), 2.0));
  CHECK_THROWS(to_image_form(prob));
  // and the kernel solver reports primal infeasibility with a certificate
  SdpSolution sol = solve(prob);
  CHECK(sol.status == SdpStatus::primal_infeasible);
  double bty = 0.0;
  for (int i = 0; i < 2; ++i) bty += sol.y[i] * prob.constraints[i].b;
  CHECK(bty == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("low-rank tagged matrices have rank at most two") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 2 + static_cast<int>(rng.uniform() * 19);
    Eigen::VectorXcd v(N);
    for (int i = 0; i < N; ++i) v[i] = rng.complex_normal();
    for (bool imag : {false, true}) {
      SdpConstraint c;
      c.tag = LowRankTag{v, imag, 1.0};
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(c.dense(N));
      const auto& sv = svd.singularValues();
      int rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-10 * sv[0]) ++rank;
      CHECK(rank <= 2);
      // tagged norms agree with the dense ones
      CHECK(c.frob_norm() == doctest::Approx(c.dense(N).norm()).epsilon(1e-10));
    }
  }
}

TEST_CASE("tagged Schur assembly equals the dense reference") {
  Rng rng(13);
  const int N = 7;
  std::vector<SdpConstraint> rows;
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXcd v(N);
    for (int t = 0; t < N; ++t) v[t] = rng.complex_normal();
    SdpConstraint c;
    c.tag = LowRankTag{v, i % 2 == 1, 0.7 + rng.uniform()};
    rows.push_back(std::move(c));
  }
  for (int i = 0; i < 3; ++i) {
    Eigen::MatrixXd A(N, N);
    for (int r = 0; r < N; ++r)
      for (int s = 0; s <= r; ++s) A(r, s) = A(s, r) = rng.normal();
    rows.push_back(dense_row(A, 0.0));
  }
  Eigen::MatrixXd G(N, N);
  for (int r = 0; r < N; ++r)
    for (int s = 0; s <= r; ++s) G(r, s) = G(s, r) = rng.normal();
  Eigen::MatrixXd X = G * G.transpose() + Eigen::MatrixXd::Identity(N, N);
  Eigen::MatrixXd H(N, N);
  for (int r = 0; r < N; ++r)
    for (int s = 0; s <= r; ++s) H(r, s) = H(s, r) = rng.normal();
  Eigen::MatrixXd S = H * H.transpose() + Eigen::MatrixXd::Identity(N, N);
  Eigen::LLT<Eigen::MatrixXd> Sllt(S);
  Eigen::MatrixXd Sinv = Sllt.solve(Eigen::MatrixXd::Identity(N, N));
  const Eigen::MatrixXd fast = sdp_detail::schur_fast(rows, X, Sllt);
  const Eigen::MatrixXd dense = sdp_detail::schur_dense(rows, X, Sinv);
  CHECK((fast - dense).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + dense.cwiseAbs().maxCoeff()));
}

TEST_CASE("redundant rows are detected and dropped") {
  SdpProblem prob;
  prob.psd_dim = 2;
  Eigen::MatrixXd A1 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd A2(2, 2);
  A2 << 1, 0, 0, -1;
  prob.constraints.push_back(dense_row(A1, 1.0));
  prob.constraints.push_back(dense_row(A2, 0.0));
  prob.constraints.push_back(dense_row(Eigen::MatrixXd(2.0 * A1), 2.0));  // duplicate of row 1
  const auto kept = sdp_detail::select_independent_rows(prob, 1e-10);
  CHECK(kept.size() == 2);
  // consistent despite the redundancy
  SdpSolution sol = solve(prob);
  CHECK(sol.status == SdpStatus::optimal);
}

TEST_CASE("solver is deterministic") {
  SdpProblem prob = min_t_problem();
  SdpSolution a = solve(prob);
  SdpSolution b = solve(prob);
  REQUIRE(a.status == b.status);
  CHECK((a.Q - b.Q).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("SDPA export round trip") {
  SdpProblem prob;
  prob.psd_dim = 2;
  prob.num_free = 1;
  Eigen::MatrixXd A1(2, 2);
  A1 << 1, 0.25, 0.25, -2;
  prob.constraints.push_back(dense_row(A1, 1.5, Eigen::VectorXd::Constant(1, 0.5)));
  Eigen::MatrixXd A2(2, 2);
  A2 << 0, 1, 1, 0.125;
  prob.constraints.push_back(dense_row(A2, -0.75, Eigen::VectorXd::Constant(1, -1.0 / 3.0)));
  Eigen::MatrixXd obj(2, 2);
  obj << 0.1, 0, 0, 0.3;
  prob.obj_psd = obj;
  prob.obj_free = Eigen::VectorXd::Constant(1, -0.2);

  const std::string path = "/tmp/ssos_test_export.dat-s";
  export_sdpa(prob, path);
  SdpProblem back = parse_sdpa(path);
  REQUIRE(back.psd_dim == 2);
  REQUIRE(back.num_free == 1);
  REQUIRE(back.num_constraints() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK((back.constraints[i].dense(2) - prob.constraints[i].dense(2)).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(back.constraints[i].a[0] == prob.constraints[i].a[0]);
    CHECK(back.constraints[i].b == prob.constraints[i].b);
  }
  CHECK((back.obj_psd - prob.obj_psd).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.obj_free[0] == prob.obj_free[0]);
  std::remove(path.c_str());
}

TEST_CASE("SDPA writer structure for the one-constraint problem") {
  SdpProblem prob;
  prob.psd_dim = 1;
  prob.constraints.push_back(dense_row(Eigen::MatrixXd::Identity(1, 1), 1.0));
  const std::string path = "/tmp/ssos_test_export_small.dat-s";
  export_sdpa(prob, path);
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);  // mDIM, nBLOCK, sizes, c, one entry
  CHECK(lines[0] == "1");
  CHECK(lines[1] == "1");
  CHECK(lines[2] == "1");
  CHECK(lines[3] == "1");
  CHECK(lines[4] == "1 1 1 1 1");
  std::remove(path.c_str());
}

TEST_CASE("SO(2) export has one section per scalar constraint") {
  const SampleSet Z = load_samples(fixture_path("ex35_samples.json"));
  const OrthBasisResult basis = orth_basis(monomials_up_to(4, 1), Z);
  const SparsePoly p = SparsePoly::parse("4*x2 - 2*x1*x4 - 2*x3*x2 + 3", 4);
  SdpProblem prob = assemble_sampling_sdp(p, basis, Z, AssembleMode::feasibility);
  const std::string path = "/tmp/ssos_test_export_so2.dat-s";
  export_sdpa(prob, path);
  SdpProblem back = parse_sdpa(path);
  REQUIRE(back.num_constraints() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK((back.constraints[i].dense(3) - prob.constraints[i].dense(3)).cwiseAbs().maxCoeff() <=
          1e-15);
    CHECK(back.constraints[i].b == prob.constraints[i].b);
  }
  std::remove(path.c_str());
}

TEST_CASE("remaining analytic problems solve to their closed forms") {
  // max Q11 with Q11 + Q22 = 1 -> 1
  {
    SdpProblem prob;
    prob.psd_dim = 2;
    prob.constraints.push_back(dense_row(Eigen::MatrixXd::Identity(2, 2), 1.0));
    Eigen::MatrixXd obj = Eigen::MatrixXd::Zero(2, 2);
    obj(0, 0) = 1;
    prob.obj_psd = obj;
    SdpSolution sol = solve(prob);
    check_solution_invariants(prob, sol);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));
  }
  // max q with 2q = 3 -> 1.5
  {
    SdpProblem prob;
    prob.psd_dim = 1;
    prob.constraints.push_back(dense_row(2.0 * Eigen::MatrixXd::Identity(1, 1), 3.0));
    prob.obj_psd = Eigen::MatrixXd::Identity(1, 1);
    SdpSolution sol = solve(prob);
    check_solution_invariants(prob, sol);
    CHECK(sol.primal_obj == doctest::Approx(1.5).epsilon(1e-6));
  }
  // max Q12 on the tridiagonal correlation pattern -> 1/sqrt(2)
  {
    SdpProblem prob;
    prob.psd_dim = 3;
    for (int i = 0; i < 3; ++i) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 3);
      E(i, i) = 1;
      prob.constraints.push_back(dense_row(E, 1.0));
    }
    Eigen::MatrixXd E13 = Eigen::MatrixXd::Zero(3, 3);
    E13(0, 2) = E13(2, 0) = 0.5;
    prob.constraints.push_back(dense_row(E13, 0.0));
    Eigen::MatrixXd Esym = Eigen::MatrixXd::Zero(3, 3);
    Esym(0, 1) = Esym(1, 0) = 0.5;
    Esym(1, 2) = Esym(2, 1) = -0.5;
    prob.constraints.push_back(dense_row(Esym, 0.0));
    Eigen::MatrixXd obj = Eigen::MatrixXd::Zero(3, 3);
    obj(0, 1) = obj(1, 0) = 0.5;
    prob.obj_psd = obj;
    SdpSolution sol = solve(prob);
    check_solution_invariants(prob, sol);
    CHECK(sol.primal_obj == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  }
}
