#pragma once

#include <functional>
#include <optional>
#include <string>

#include "haantjes/spectral.hpp"
#include "haantjes/torsion.hpp"

namespace haan {

struct InvolutivityReport {
  bool involutive = false;
  double max_residual = 0.0;  // norm of the out-of-span bracket component
  int points_used = 0;        // near-degenerate sample points are excluded
};

/// Frobenius test for a distribution spanned by expression-level frame
/// fields: every pairwise Lie bracket must stay in the span of the frame at
/// each sample point.
InvolutivityReport involutive_check(const std::vector<VectorField>& frame,
                                    const std::vector<Point>& points, double tol);

struct VanishingReport {
  bool vanishes = false;
  double max_residual = 0.0;
  double scale = 0.0;
};

/// Max over points and basis pairs of |T(u, v)|, compared against
/// tol * (1 + scale). The tensor producer and the bases are sampled per
/// point.
VanishingReport vanishing_on_args(const std::function<Tensor12(const Point&)>& tensor_at,
                                  const std::function<Eigen::MatrixXd(const Point&)>& u_basis,
                                  const std::function<Eigen::MatrixXd(const Point&)>& v_basis,
                                  const std::vector<Point>& points, double tol);

struct ScanRow {
  int level = 0;
  double max_residual = 0.0;
  double scale = 0.0;
  bool vanishes = false;
};

struct ScanResult {
  std::optional<int> first_vanishing_level;
  std::vector<ScanRow> rows;  // one per level 1..m_max, stops after a hit
};

/// Scan levels 1..m_max for the first whose full torsion tensor vanishes at
/// every sample point. Absence up to m_max is a valid (inconclusive) result.
ScanResult main_theorem_scan(const OperatorField& a, const std::vector<Point>& points, int m_max,
                             double tol);

struct LevelRow {
  int k = 0;
  double max_residual = 0.0;
  double scale = 0.0;
  bool vanishes = false;
  bool vacuous = false;
  std::string note;
};

struct TriangularReport {
  bool structurally_upper = false;
  bool nilcyclic = false;
  std::vector<LevelRow> rows;
  bool all_pass = false;
};

/// Per-k vanishing of the level-(k-1) torsion on the natural flag
/// distributions span(e_1..e_k), k = 2..n, with full-tensor vanishing at
/// k = n. Failed structural preconditions downgrade the run to a probe.
TriangularReport triangular_vanishing_check(const OperatorField& a,
                                            const std::vector<Point>& points, double tol);

/// The single-eigenvalue variant for L = f*I + A with A strictly upper
/// nilcyclic: level-(k-1) vanishing on span(e_1..e_k) for 3 <= k <= n-1 and
/// full-tensor vanishing at level n-1. The k = 2 row is reported separately
/// as an extra observation.
TriangularReport one_eigenvalue_triangular_check(const Expr& f, const OperatorField& a,
                                                 const std::vector<Point>& points, double tol);

struct SemidirectReport {
  double lambda_mu = 0.0, lambda_nu = 0.0;
  double tau_residual = 0.0, tau_scale = 0.0;
  bool tau_vanishes = false;
  double membership_residual = 0.0;
  bool membership_ok = false;
  bool withheld = false;  // near-degenerate clusters at some sample point
  std::string note;
};

/// Checks tau^(m)(D_mu, D_nu) vanishing on the two clusters' bases and the
/// bracket membership [D_mu, D_nu] in D_mu + D_nu via projector frames
/// differentiated by central finite differences (a weaker, derivative-
/// approximate check, flagged in the note).
SemidirectReport semidirect_sum_check(const OperatorField& a, double lambda_mu, double lambda_nu,
                                      const std::vector<Point>& points, int m, double tol,
                                      double fd_step = 1e-5);

/// Same finite-difference machinery for a single eigen-distribution:
/// residual of [D, D] membership in D.
InvolutivityReport projector_involutivity_check(const OperatorField& a, double lambda_ref,
                                                const std::vector<Point>& points, double tol,
                                                double fd_step = 1e-5);

/// Residual of the Jordan-chain expansion of the level-m torsion: the tensor
/// applied to chain fields against the double binomial sum of shifted
/// operator powers applied to chain brackets, maximized over chain
/// positions. m >= 2.
ResidualReport jordan_expansion_residual(const OperatorField& a, const JordanChainData& chain_x,
                                         const JordanChainData& chain_y, int m, const Point& p);

/// (A - lambda*I)^rho as an operator field, for eigenvalue fields known in
/// the expression DSL.
OperatorField shifted_power_field(const OperatorField& a, const Expr& lambda, int rho);

}  // namespace haan
