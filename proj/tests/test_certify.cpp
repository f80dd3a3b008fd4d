#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/LU>
#include <cstdio>
#include <cstdlib>

#include "ssos/certify.hpp"

using namespace ssos;

namespace {

std::string fixture_path(const std::string& name) {
  const char* dir = std::getenv("SSOS_FIXTURES");
  return (dir ? std::string(dir) : std::string("../fixtures")) + "/" + name;
}

// the two lines x2 = 1 and x2 = -1 of the variety x2^2 = 1
OraclePtr line_oracle(double level, std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "line:x2=%g", level);
  return make_callback_oracle(
      2, buf,
      [level](Rng& rng) {
        CVector z(2);
        z << rng.complex_normal(), Complex(level, 0);
        return SamplePoint{z, -1};
      },
      seed);
}

EvalOracle det_plus_id_oracle(int n) {
  return EvalOracle{n * n,
                    [n](const CVector& z) {
                      Eigen::MatrixXcd x = unflatten(z, n, n);
                      x += Eigen::MatrixXcd::Identity(n, n);
                      return Eigen::PartialPivLU<Eigen::MatrixXcd>(x).determinant();
                    },
                    "det(X + id)"};
}

}  // namespace

TEST_CASE("is_zero accepts the zero polynomial on any oracle") {
  auto oracle = make_so_oracle(3, 2);
  CHECK(is_zero(SparsePoly(9), *oracle, 3, 1e-6));
}

TEST_CASE("is_zero distinguishes one component from the full variety") {
  // p - F with p = x1^2 - x2 + 1 and F = x1^2 vanishes on {x2 = 1} only
  SparsePoly f = SparsePoly::parse("1 - x2", 2);
  auto comp = line_oracle(1.0, 5);
  CHECK(is_zero(f, *comp, 5, 1e-9));
  auto full = make_union_oracle({line_oracle(1.0, 6), line_oracle(-1.0, 7)});
  CHECK_FALSE(is_zero(f, *full, 3, 1e-6));
}

TEST_CASE("det(X + id) - 1 vanishes on the nilpotent variety") {
  const int n = 4;
  auto oracle = make_nilpotent_oracle(n, 11);
  EvalOracle det = det_plus_id_oracle(n);
  auto f = [&det](const CVector& z) { return det.eval(z) - Complex(1, 0); };
  CHECK(is_zero(f, *oracle, 5, 1e-9));
}

TEST_CASE("factor extraction") {
  Eigen::MatrixXd id2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd R = extract_factor(id2, 1e-9);
  CHECK((R.transpose() * R - id2).norm() < 1e-12);

  Eigen::MatrixXd Q(2, 2);
  Q << 4, 2, 2, 1;
  R = extract_factor(Q, 1e-9);
  REQUIRE(R.rows() == 1);  // rank one
  CHECK(std::abs(std::abs(R(0, 0)) - 2.0) < 1e-12);
  CHECK(std::abs(std::abs(R(0, 1)) - 1.0) < 1e-12);
  CHECK(R(0, 0) * R(0, 1) > 0);  // same sign pattern as [2, 1]
  CHECK((R.transpose() * R - Q).norm() < 1e-12);

  Eigen::MatrixXd neg(1, 1);
  neg << -1.0;
  CHECK_THROWS(extract_factor(neg, 1e-7));
}

TEST_CASE("SO(2) certificate end to end") {
  SparsePoly p = load_poly(fixture_path("so2_p.json"));
  auto oracle = make_so_oracle(2, 7);
  SosResult res = sampling_sos(p, oracle, 1);
  REQUIRE(res.outcome == SosOutcome::certificate);
  CHECK(res.final_samples == 3);
  const Certificate& cert = *res.certificate;
  CHECK(cert.residual <= 1e-6);
  CHECK(cert.Q.rows() == 3);

  // F agrees with (2 X21 + 1)^2 at random real rotation matrices
  auto real_oracle = make_so_oracle(2, 99);
  for (int i = 0; i < 50; ++i) {
    const SamplePoint z = real_oracle->sample_real();
    const Complex F = cert.sos_at(z.coords);
    const double expected = std::pow(2.0 * z.coords[1].real() + 1.0, 2);
    CHECK(std::abs(F.real() - expected) < 1e-5);
    CHECK(std::abs(F.imag()) < 1e-9);
    CHECK(F.real() >= -1e-8);
  }
}

TEST_CASE("nilpotent determinant polynomial is identically one") {
  const int n = 3;
  auto oracle = make_nilpotent_oracle(n, 3);
  SosResult res = sampling_sos(det_plus_id_oracle(n), oracle, 1);
  REQUIRE(res.outcome == SosOutcome::certificate);
  const Certificate& cert = *res.certificate;
  for (int i = 0; i < 5; ++i) {
    const SamplePoint z = oracle->sample();
    CHECK(std::abs(cert.sos_at(z.coords) - Complex(1, 0)) < 1e-6);
  }
}

TEST_CASE("minus one admits no certificate on the real line") {
  SparsePoly p = SparsePoly::constant(1, -1.0);
  auto oracle = make_full_space_oracle(1, 5);
  SosResult res = sampling_sos(p, oracle, 1);
  CHECK(res.outcome == SosOutcome::no_certificate);
  CHECK(res.sdp_status == SdpStatus::primal_infeasible);
  CHECK(res.farkas_y.size() > 0);
  CHECK(res.farkas_violation >= 1e-6);
}

TEST_CASE("incorrect pre-certificate is rejected by the full-variety test") {
  SparsePoly p = SparsePoly::parse("x1^2 - x2 + 1", 2);
  auto comp = line_oracle(1.0, 13);
  SosResult res = sampling_sos(p, comp, 1);
  REQUIRE(res.outcome == SosOutcome::certificate);
  const Certificate cert = *res.certificate;
  // verified on the sampled component...
  auto comp_fresh = line_oracle(1.0, 14);
  auto diff = [&](const CVector& z) { return p.eval(z) - cert.sos_at(z); };
  CHECK(is_zero(diff, *comp_fresh, 5, 1e-6));
  // ...but p(0,-1) != F(0,-1): the union-variety identity test refuses it
  auto full = make_union_oracle({line_oracle(1.0, 15), line_oracle(-1.0, 16)});
  CHECK_FALSE(is_zero(diff, *full, 3, 1e-6));

  // running against the union itself gives a correct certificate
  auto full2 = make_union_oracle({line_oracle(1.0, 17), line_oracle(-1.0, 18)});
  SosResult res2 = sampling_sos(p, full2, 1);
  REQUIRE(res2.outcome == SosOutcome::certificate);
  auto full3 = make_union_oracle({line_oracle(1.0, 19), line_oracle(-1.0, 20)});
  auto diff2 = [&](const CVector& z) { return p.eval(z) - res2.certificate->sos_at(z); };
  CHECK(is_zero(diff2, *full3, 5, 1e-6));
}

TEST_CASE("optimize recovers the minimum of (x-1)^2") {
  OptimizationTask task;
  task.name = "square";
  task.oracle = make_full_space_oracle(1, 3);
  task.degree = 1;
  task.lhs = [](const SamplePoint& z, int) {
    const Complex v = z.coords[0] - Complex(1, 0);
    return SampleLhs{v * v, Complex(1, 0), Eigen::VectorXcd()};
  };
  task.objective = [](const Eigen::VectorXd& x) { return (x[0] - 1.0) * (x[0] - 1.0); };
  OptimizeResult res = optimize(task);
  REQUIRE(res.sdp_status == SdpStatus::optimal);
  CHECK(std::abs(res.bound) < 1e-6);
  REQUIRE(res.minimizer.has_value());
  CHECK(std::abs((*res.minimizer)[0] - 1.0) < 1e-4);
  CHECK(res.samples == 2);
}

TEST_CASE("recover_minimizer with a single real sample and unit dual") {
  SampleSet Z;
  Z.ambient_dim = 2;
  CVector z(2);
  z << Complex(0.3, 0), Complex(-1.5, 0);
  Z.points.push_back({z, -1});
  SdpProblem prob;
  prob.psd_dim = 1;
  SdpConstraint re;
  re.A = Eigen::MatrixXd::Identity(1, 1);
  re.sample_index = 0;
  re.imag_row = false;
  prob.constraints.push_back(re);
  Eigen::VectorXd y(1);
  y << 1.0;
  auto x = recover_minimizer(y, prob, Z);
  REQUIRE(x.has_value());
  CHECK((*x)[0] == doctest::Approx(0.3));
  CHECK((*x)[1] == doctest::Approx(-1.5));
}

TEST_CASE("certificate files round trip and tampering is caught") {
  SparsePoly p = load_poly(fixture_path("so2_p.json"));
  auto oracle = make_so_oracle(2, 21);
  SosResult res = sampling_sos(p, oracle, 1);
  REQUIRE(res.outcome == SosOutcome::certificate);
  const std::string path = "/tmp/ssos_test_cert.json";
  save_certificate(*res.certificate, path);
  Certificate loaded = load_certificate(path);
  CHECK(loaded.degree == res.certificate->degree);
  CHECK((loaded.Q - res.certificate->Q).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.R - res.certificate->R).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.num_samples == res.certificate->num_samples);

  auto verifier = make_so_oracle(2, 22);
  auto target = [&p](const CVector& z) { return p.eval(z); };
  VerifyReport rep = verify_certificate(loaded, target, *verifier, 5, 1e-6);
  CHECK(rep.ok);

  loaded.Q(0, 0) += 0.05;  // corrupt the Gram matrix
  auto verifier2 = make_so_oracle(2, 23);
  VerifyReport bad = verify_certificate(loaded, target, *verifier2, 5, 1e-6);
  CHECK_FALSE(bad.ok);
  std::remove(path.c_str());
}

TEST_CASE("factor polynomials print the certificate in squared form") {
  SparsePoly p = load_poly(fixture_path("so2_p.json"));
  auto oracle = make_so_oracle(2, 29);
  SosResult res = sampling_sos(p, oracle, 1);
  REQUIRE(res.outcome == SosOutcome::certificate);
  const auto rows = res.certificate->factor_polynomials();
  REQUIRE(!rows.empty());
  // the squares sum to F: check at a fresh complex point
  const SamplePoint z = oracle->sample();
  Complex sum(0, 0);
  for (const auto& r : rows) {
    const Complex v = r.eval(z.coords);
    sum += v * v;
  }
  CHECK(std::abs(sum - res.certificate->sos_at(z.coords)) < 1e-9);
}

TEST_CASE("fixed sample counts skip the search") {
  SparsePoly p = load_poly(fixture_path("so2_p.json"));
  auto oracle = make_so_oracle(2, 31);
  SosOptions opts;
  opts.fixed_samples = 5;
  SosResult res = sampling_sos(p, oracle, 1, opts);
  REQUIRE(res.outcome == SosOutcome::certificate);
  CHECK(res.final_samples == 5);
  CHECK(res.certificate->num_samples == 5);
}

TEST_CASE("file-backed samples with a live verification oracle") {
  SparsePoly p = load_poly(fixture_path("so2_p.json"));
  auto files = make_file_oracle(load_samples(fixture_path("ex35_samples.json")));
  SosOptions opts;
  opts.fixed_samples = 3;
  opts.verify_oracle = make_so_oracle(2, 41);
  SosResult res = sampling_sos(p, files, 1, opts);
  REQUIRE(res.outcome == SosOutcome::certificate);
  CHECK(res.certificate->residual <= 1e-6);
}
