#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "haantjes/harness.hpp"
#include "haantjes/spectral.hpp"

using namespace haan;

namespace {

OperatorField shift_3x3() {
  const Expr z = Expr::constant(0.0, 3);
  const Expr one = Expr::constant(1.0, 3);
  return OperatorField(3, {z, one, z, z, z, one, z, z, z});
}

}  // namespace

TEST_CASE("spectrum of the identity") {
  const OperatorField id = OperatorField::identity(3);
  const SpectrumReport r = spectrum(id, Point{0.1, -0.4, 0.9});
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.clusters[0].lambda == doctest::Approx(1.0));
  CHECK(r.clusters[0].multiplicity == 3);
  CHECK(r.clusters[0].riesz_index == 1);
  CHECK(r.clusters[0].basis.cols() == 3);
}

TEST_CASE("spectrum of the bundled example") {
  const OperatorField l = golden_operator();
  const Point p{0.1, 0.2, -0.1};
  const SpectrumReport r = spectrum(l, p);
  REQUIRE(r.clusters.size() == 2);
  const double s = 0.2;
  CHECK(r.clusters[0].lambda == doctest::Approx(std::exp(s) - 1.0).epsilon(1e-9));
  CHECK(r.clusters[1].lambda == doctest::Approx(std::exp(s * s)).epsilon(1e-9));
  CHECK(r.clusters[0].multiplicity == 2);
  CHECK(r.clusters[0].riesz_index == 2);
  CHECK(r.clusters[1].multiplicity == 1);
  CHECK(r.clusters[1].riesz_index == 1);
  CHECK_FALSE(r.near_degenerate);

  // direct-sum completeness and invariance of the reported bases
  Eigen::MatrixXd all(3, 3);
  all << r.clusters[0].basis, r.clusters[1].basis;
  CHECK(numeric_rank(all, 1e-8) == 3);
  const Eigen::MatrixXd m = to_matrix(3, l.value_at(p));
  for (const auto& c : r.clusters) {
    Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(3, 3);
    for (int j = 0; j < c.riesz_index; ++j)
      shifted = shifted * (m - c.lambda * Eigen::MatrixXd::Identity(3, 3));
    CHECK((shifted * c.basis).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("spectrum of the maximal shift block") {
  const SpectrumReport r = spectrum(shift_3x3(), Point{0.0, 0.0, 0.0});
  REQUIRE(r.clusters.size() == 1);
  CHECK(std::abs(r.clusters[0].lambda) < 1e-7);
  CHECK(r.clusters[0].multiplicity == 3);
  CHECK(r.clusters[0].riesz_index == 3);
}

TEST_CASE("eigenvalues inside the clustering gap merge into one healthy cluster") {
  // the intra-cluster spread must not starve the rank cutoff: the merged
  // cluster keeps its full basis
  const OperatorField a = OperatorField::diagonal(
      {parse("1", 3), parse("1.0000001", 3), parse("5", 3)});
  const SpectrumReport r = spectrum(a, Point{0.0, 0.0, 0.0});
  REQUIRE(r.clusters.size() == 2);
  CHECK(r.clusters[0].multiplicity == 2);
  CHECK(r.clusters[0].riesz_index == 1);
  CHECK(r.clusters[0].basis.cols() == 2);
  CHECK_FALSE(r.near_degenerate);
}

TEST_CASE("clusters separate but close raise the near-degenerate flag") {
  const OperatorField a = OperatorField::diagonal(
      {parse("1", 3), parse("1.00003", 3), parse("5", 3)});
  const SpectrumReport r = spectrum(a, Point{0.0, 0.0, 0.0});
  CHECK(r.clusters.size() == 3);
  CHECK(r.near_degenerate);
}

TEST_CASE("complex spectrum is rejected") {
  const Expr z = Expr::constant(0.0, 2);
  const OperatorField rot(2, {z, Expr::constant(-1.0, 2), Expr::constant(1.0, 2), z});
  CHECK_THROWS_AS(spectrum(rot, Point{0.0, 0.0}), SpectrumError);
}

TEST_CASE("riesz_index") {
  const OperatorField id = OperatorField::identity(2);
  CHECK(riesz_index(id, 1.0, Point{0.0, 0.0}) == 1);
  CHECK(riesz_index(golden_operator(), std::exp(0.2) - 1.0, Point{0.1, 0.2, -0.1}) == 2);
  CHECK(riesz_index(shift_3x3(), 0.0, Point{0.0, 0.0, 0.0}) == 3);
  CHECK_THROWS_AS(riesz_index(id, 5.0, Point{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("null_flag") {
  const FlagReport inv = null_flag(OperatorField::identity(3), Point{0.0, 0.0, 0.0});
  CHECK_FALSE(inv.has_zero_eigenvalue);
  CHECK(inv.riesz_index == 0);
  for (int r : inv.kernel_ranks) CHECK(r == 0);

  // nilcyclic strictly upper: the kernel flag is complete
  Rng rng(3);
  const GeneratedOperators gen =
      random_operator({OperatorKind::StrictlyUpper, 3, 1, 0.5, 17});
  const FlagReport flag = null_flag(gen.op, random_point(rng, 3));
  REQUIRE(flag.kernel_ranks.size() == 3);
  CHECK(flag.kernel_ranks[0] == 1);
  CHECK(flag.kernel_ranks[1] == 2);
  CHECK(flag.kernel_ranks[2] == 3);
  CHECK(flag.riesz_index == 3);

  const FlagReport zero = null_flag(OperatorField::zero(3), Point{0.0, 0.0, 0.0});
  CHECK(zero.kernel_ranks[0] == 3);
  CHECK(zero.riesz_index == 1);

  // flag monotone and stationary past saturation
  int prev = 0;
  for (int r : flag.kernel_ranks) {
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("is_nilcyclic") {
  Rng rng(5);
  const std::vector<Point> pts = random_points(rng, 3, 5);
  const GeneratedOperators gen =
      random_operator({OperatorKind::StrictlyUpper, 3, 1, 0.5, 23});
  CHECK(is_nilcyclic(gen.op, pts));
  CHECK_FALSE(is_nilcyclic(OperatorField::identity(3), pts));

  // two 2-blocks square to zero: nilpotent but not of maximal index
  const Expr z = Expr::constant(0.0, 4);
  const Expr one = Expr::constant(1.0, 4);
  std::vector<Expr> e(16, z);
  e[1] = one;   // (1,2)
  e[11] = one;  // (3,4)
  const OperatorField blocks(4, std::move(e));
  Rng rng4(6);
  CHECK_FALSE(is_nilcyclic(blocks, random_points(rng4, 4, 5)));
}

TEST_CASE("verify_jordan_chain") {
  Rng rng(7);
  // proper eigenvector field of a diagonal operator
  const OperatorField diag = OperatorField::diagonal({parse("x1 + 2", 2), parse("x2 - 1", 2)});
  const JordanChainData proper{parse("x1 + 2", 2), {VectorField::coordinate_axis(1, 2)}};
  CHECK(verify_jordan_chain(diag, proper, random_points(rng, 2, 4)) < 1e-12);

  // hand-built two-chain for a constant block
  const Expr z = Expr::constant(0.0, 2);
  const OperatorField block(2, {Expr::constant(2.0, 2), Expr::constant(1.0, 2),
                                z, Expr::constant(2.0, 2)});
  const JordanChainData two{Expr::constant(2.0, 2),
                            {VectorField::coordinate_axis(1, 2),
                             VectorField::coordinate_axis(2, 2)}};
  CHECK(verify_jordan_chain(block, two, random_points(rng, 2, 4)) < 1e-12);

  // chain assembled from the bundled example's structure
  const OperatorField l = golden_operator();
  const Expr s = parse("x1 + x2 + x3", 3);
  const Expr lambda1 = exp(s) - 1.0;
  const Expr z3 = Expr::constant(0.0, 3);
  const JordanChainData extracted{
      lambda1,
      {VectorField(3, {sin(s), z3, z3}), VectorField::coordinate_axis(2, 3)}};
  std::vector<Point> pts;
  Rng grng(8);
  while (pts.size() < 5) {
    const Point p = random_point(grng, 3);
    if (std::abs(std::sin(p[0] + p[1] + p[2])) > 0.05) pts.push_back(p);
  }
  CHECK(verify_jordan_chain(l, extracted, pts) < 1e-12);

  // numeric self-consistency of the reported generalized eigenbasis
  for (const Point& p : pts) {
    const SpectrumReport r = spectrum(l, p);
    REQUIRE(r.clusters.size() == 2);
    const Eigen::MatrixXd m = to_matrix(3, l.value_at(p));
    const Eigen::MatrixXd shifted =
        m - r.clusters[0].lambda * Eigen::MatrixXd::Identity(3, 3);
    // one application lands in the proper eigenspace, a second kills it
    CHECK((shifted * shifted * r.clusters[0].basis).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("riesz indices are consistent across sample points") {
  const OperatorField l = golden_operator();
  Rng rng(9);
  std::vector<int> r1s, r2s;
  int count = 0;
  while (count < 5) {
    const Point p = random_point(rng, 3);
    if (std::abs(std::sin(p[0] + p[1] + p[2])) < 0.05) continue;
    ++count;
    const SpectrumReport r = spectrum(l, p);
    REQUIRE(r.clusters.size() == 2);
    r1s.push_back(r.clusters[0].riesz_index);
    r2s.push_back(r.clusters[1].riesz_index);
  }
  for (int r : r1s) CHECK(r == r1s.front());
  for (int r : r2s) CHECK(r == r2s.front());
}
