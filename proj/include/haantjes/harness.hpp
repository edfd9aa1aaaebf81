#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "haantjes/integrability.hpp"

namespace haan {

/// Deterministic generator (splitmix64). The same seed reproduces the same
/// stream on every platform, which keeps reports byte-stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double next_unit();                    // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int lo, int hi);       // inclusive bounds
  std::uint64_t fork();                  // child seed, advances the stream

 private:
  std::uint64_t state_;
};

/// Random bounded polynomial in the chart coordinates: sum of absolute
/// coefficient magnitudes stays below `bound`, so values on [-1,1]^n do too.
Expr random_polynomial(Rng& rng, int dim, int degree, double bound);

Point random_point(Rng& rng, int dim, double lo = -1.0, double hi = 1.0);
std::vector<Point> random_points(Rng& rng, int dim, int count, double lo = -1.0, double hi = 1.0);

enum class OperatorKind {
  Diagonal,
  StrictlyUpper,
  OneEigenvalue,           // f*I + nilcyclic strictly upper
  JordanBlock,             // conjugated Jordan pencil with eigenvalue fields
  CommutingNilpotentPair,  // simultaneous strictly upper, [A,B] = 0
  Generic,
};

OperatorKind operator_kind_from_name(const std::string& name);
std::string operator_kind_name(OperatorKind kind);

struct GeneratorSpec {
  OperatorKind kind = OperatorKind::Generic;
  int dim = 3;
  int degree = 1;
  double coeff_bound = 0.5;
  std::uint64_t seed = 1;
};

/// One generated instance. `second` is set for pair kinds, `shift` for the
/// single-eigenvalue kind (the scalar part), `nilpotent_part` whenever the
/// operator decomposes as shift*I + nilpotent, and `chains` for the Jordan
/// kind (exact chains by construction).
struct GeneratedOperators {
  OperatorField op;
  std::optional<OperatorField> second;
  std::optional<Expr> shift;
  std::optional<OperatorField> nilpotent_part;
  std::vector<JordanChainData> chains;
};

GeneratedOperators random_operator(const GeneratorSpec& spec);

struct IdentityRecord {
  std::string name;
  double max_residual = 0.0;
  double scale = 0.0;  // scale at the worst trial
  double tol = 0.0;
  bool pass = true;
  std::uint64_t worst_seed = 0;
  int worst_dim = 0;
  std::vector<double> worst_point;
};

struct SuiteReport {
  std::vector<IdentityRecord> identities;
  bool all_pass = true;
  int trials = 0;
  int points = 0;
  std::uint64_t seed = 0;
  std::vector<int> dims;
  double tol = 0.0;
};

/// The full identity regression suite: every scaling/decomposition identity
/// of the torsion tower, run over random operator instances and points per
/// chart dimension. A failure pinpoints (identity, seed, point).
SuiteReport identity_suite(int trials, int points, std::uint64_t seed,
                           std::vector<int> dims = {2, 3, 4}, double tol = 1e-8);

struct ProbeTrial {
  std::uint64_t seed = 0;
  bool qualifying = false;
  double lhs_residual = 0.0, lhs_scale = 0.0;  // pair tensor
  double rhs_residual = 0.0, rhs_scale = 0.0;  // sum tensor (probe 1 only)
  bool candidate = false;
  std::vector<Point> points;  // embedded for candidates, for reproduction
};

struct ProbeReport {
  int conjecture = 0;
  std::string kind;
  int dim = 0;
  int trials = 0;
  int qualifying = 0;
  int discarded = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  double band = 0.0;
  std::vector<ProbeTrial> per_trial;
  std::vector<ProbeTrial> candidates;
  std::string note;
};

/// Probe of the additivity conjecture for commuting pairs with vanishing
/// torsion: a candidate counterexample is a qualifying pair where exactly
/// one of the pair tensor / sum tensor vanishes and the other exceeds
/// band * tol.
ProbeReport conjecture1_probe(const GeneratorSpec& spec, int trials, int points, double tol,
                              double band = 100.0);

/// Probe of the level-(n-1) vanishing for commuting nilpotent pairs in
/// simultaneous triangular form.
ProbeReport conjecture2_probe(const GeneratorSpec& spec, int trials, int points, double tol,
                              double band = 100.0);

struct GoldenReport {
  std::vector<Point> points;
  double tau1_max = 0.0, tau2_max = 0.0;
  double tau3_residual = 0.0, tau3_scale = 0.0;
  bool tau3_vanishes = false;
  bool low_levels_nonzero = false;
  int riesz_1 = 0, riesz_2 = 0;
  int mult_1 = 0, mult_2 = 0;
  bool spectrum_ok = false;
  double d1_span_residual = 0.0;  // distance of the reported basis to span(e1, e2)
  bool d1_is_coordinate_plane = false;
  bool d1_involutive = false;
  double d1_involutivity_residual = 0.0;
  bool pass = false;
};

/// The bundled 3x3 operator with one defective eigenvalue pair, in the
/// expression DSL.
OperatorField golden_operator();

/// Runs the golden regression at the supplied points, or at 10 seeded points
/// (resampled away from the degeneracy locus) when none are given.
GoldenReport golden_example_check(std::vector<Point> points = {}, std::uint64_t seed = 2024);

}  // namespace haan
