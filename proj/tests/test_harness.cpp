#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "haantjes/harness.hpp"
#include "haantjes/report.hpp"

using namespace haan;

TEST_CASE("rng determinism") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(43);
  CHECK(Rng(42).next_u64() != c.next_u64());
}

TEST_CASE("random polynomials stay within their bound on the box") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = rng.uniform_int(1, 4);
    const Expr e = random_polynomial(rng, dim, 2, 0.5);
    for (int q = 0; q < 10; ++q) {
      const double v = e.eval(random_point(rng, dim));
      CHECK(std::abs(v) <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("generated operators satisfy their structural kinds") {
  Rng rng(2);
  const std::vector<Point> pts3 = random_points(rng, 3, 5);

  const GeneratedOperators diag = random_operator({OperatorKind::Diagonal, 3, 2, 0.5, 7});
  CHECK(diag.op.is_diagonal());
  for (const Point& p : pts3) {
    const Tensor12 h = haantjes(diag.op, p);
    CHECK(h.max_abs() <= 1e-8 * (1.0 + h.scale()));
  }

  const GeneratedOperators upper = random_operator({OperatorKind::StrictlyUpper, 3, 2, 0.5, 8});
  CHECK(upper.op.is_strictly_upper());
  CHECK(is_nilcyclic(upper.op, pts3));

  const GeneratedOperators pair =
      random_operator({OperatorKind::CommutingNilpotentPair, 3, 1, 0.5, 9});
  REQUIRE(pair.second.has_value());
  CHECK(pair.op.is_strictly_upper());
  CHECK(pair.second->is_strictly_upper());
  for (const Point& p : pts3) {
    const std::vector<double> av = pair.op.value_at(p);
    const std::vector<double> bv = pair.second->value_at(p);
    const std::vector<double> comm = mat_sub(mat_mul(3, av, bv), mat_mul(3, bv, av));
    CHECK(mat_max_abs(comm) < 1e-12);
  }

  const GeneratedOperators jordan = random_operator({OperatorKind::JordanBlock, 3, 1, 0.5, 10});
  REQUIRE_FALSE(jordan.chains.empty());
  CHECK(verify_jordan_chain(jordan.op, jordan.chains.front(), pts3) < 1e-10);

  const GeneratedOperators one = random_operator({OperatorKind::OneEigenvalue, 3, 1, 0.5, 11});
  REQUIRE(one.shift.has_value());
  REQUIRE(one.nilpotent_part.has_value());
  CHECK(one.nilpotent_part->is_strictly_upper());

  // determinism: the same spec reproduces identical entry trees
  const GeneratedOperators again = random_operator({OperatorKind::Diagonal, 3, 2, 0.5, 7});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(again.op.entry(i, j).same_tree(diag.op.entry(i, j)));
}

TEST_CASE("identity suite passes on a small run and serializes deterministically") {
  const SuiteReport r = identity_suite(2, 4, 77, {2, 3});
  for (const auto& rec : r.identities) {
    INFO(rec.name, " residual ", rec.max_residual, " scale ", rec.scale, " seed ",
         rec.worst_seed);
    CHECK(rec.pass);
  }
  CHECK(r.all_pass);

  const SuiteReport again = identity_suite(2, 4, 77, {2, 3});
  CHECK(to_json(r).dump() == to_json(again).dump());
}

TEST_CASE("conjecture probe 1 on semisimple and nilpotent families") {
  const ProbeReport diag = conjecture1_probe({OperatorKind::Diagonal, 3, 2, 0.5, 5}, 8, 5, 1e-8);
  CHECK(diag.trials == 8);
  CHECK(diag.qualifying == 8);  // diagonal pairs always qualify
  CHECK(diag.candidates.empty());
  for (const auto& t : diag.per_trial) {
    CHECK(t.lhs_residual <= 1e-8 * (1.0 + t.lhs_scale));
    CHECK(t.rhs_residual <= 1e-8 * (1.0 + t.rhs_scale));
  }

  const ProbeReport nil =
      conjecture1_probe({OperatorKind::CommutingNilpotentPair, 3, 1, 0.5, 6}, 8, 5, 1e-8);
  CHECK(nil.qualifying > 0);
  CHECK(nil.candidates.empty());

  // the degenerate instance A = B: the pair tensor is four times a vanishing
  // torsion and the doubled operator scales it by sixteen, so both sides stay
  // zero for any torsion-free operator
  Rng rng(77);
  const GeneratedOperators diag_op = random_operator({OperatorKind::Diagonal, 3, 2, 0.5, 14});
  const Point p = random_point(rng, 3);
  const Tensor12 pair_self = binary_haantjes(diag_op.op, diag_op.op, p);
  const Tensor12 doubled = haantjes(diag_op.op + diag_op.op, p);
  CHECK(pair_self.max_abs() <= 1e-8 * (1.0 + pair_self.scale()));
  CHECK(doubled.max_abs() <= 1e-8 * (1.0 + doubled.scale()));
}

TEST_CASE("conjecture probe 2 at the smallest and next dimensions") {
  const ProbeReport two =
      conjecture2_probe({OperatorKind::CommutingNilpotentPair, 2, 1, 0.5, 12}, 6, 5, 1e-8);
  CHECK(two.candidates.empty());
  CHECK(two.note.find("smallest instance") != std::string::npos);

  const ProbeReport three =
      conjecture2_probe({OperatorKind::CommutingNilpotentPair, 3, 1, 0.5, 13}, 6, 5, 1e-8);
  CHECK(three.candidates.empty());
}

TEST_CASE("probe reports are reproducible from their seeds") {
  const GeneratorSpec spec{OperatorKind::CommutingNilpotentPair, 3, 1, 0.5, 21};
  const ProbeReport a = conjecture2_probe(spec, 5, 4, 1e-8);
  const ProbeReport b = conjecture2_probe(spec, 5, 4, 1e-8);
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("golden example check") {
  const GoldenReport r = golden_example_check();
  CHECK(r.points.size() == 10);
  CHECK(r.tau3_vanishes);
  CHECK(r.low_levels_nonzero);
  CHECK(r.tau1_max > 1e-3);
  CHECK(r.tau2_max > 1e-3);
  CHECK(r.spectrum_ok);
  CHECK(r.riesz_1 == 2);
  CHECK(r.riesz_2 == 1);
  CHECK(r.d1_is_coordinate_plane);
  CHECK(r.d1_involutive);
  CHECK(r.pass);

  // the explicit well-separated point behaves the same way
  const GoldenReport fixed = golden_example_check({Point{0.1, 0.2, -0.1}});
  CHECK(fixed.tau3_vanishes);
  CHECK(fixed.riesz_1 == 2);
  CHECK(fixed.riesz_2 == 1);
}
