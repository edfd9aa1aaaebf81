#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "haantjes/fields.hpp"

namespace haan {

/// Raised when the spectrum violates the real-eigenvalue assumption.
class SpectrumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EigenvalueCluster {
  double lambda = 0.0;
  int multiplicity = 0;
  int riesz_index = 0;
  Eigen::MatrixXd basis;  // n x multiplicity, orthonormal columns spanning ker(A - lambda I)^rho
};

struct SpectrumReport {
  std::vector<EigenvalueCluster> clusters;  // sorted by eigenvalue
  double tol_eig = 0.0;   // clustering gap actually used
  double tol_rank = 0.0;  // relative rank threshold actually used
  bool near_degenerate = false;  // two clusters closer than 10x the gap
  std::vector<std::string> warnings;
};

/// Default tolerances: pass a negative value to get
/// tol_eig = 1e-6 * (1 + spectral radius), tol_rank = 1e-8 (relative to the
/// largest singular value in each rank decision).
SpectrumReport spectrum(const OperatorField& a, const Point& p, double tol_eig = -1.0,
                        double tol_rank = -1.0);

/// Smallest j with nullity (A - lambda I)^j == nullity (A - lambda I)^{j+1}.
/// lambda must be an eigenvalue of the value matrix at p.
int riesz_index(const OperatorField& a, double lambda, const Point& p, double tol_rank = -1.0);

struct FlagReport {
  std::vector<int> kernel_ranks;  // rank ker A^j for j = 1..n
  int riesz_index = 0;            // saturation index; 0 when A is invertible at p
  bool has_zero_eigenvalue = false;
};

FlagReport null_flag(const OperatorField& a, const Point& p, double tol_rank = -1.0);

/// True iff at every sample point A^n vanishes while A^{n-1} does not
/// (nilpotent of maximal index).
bool is_nilcyclic(const OperatorField& a, const std::vector<Point>& points, double tol = 1e-8);

/// A chain X_1..X_r with A X_t = mu X_t + X_{t-1} (X_0 = 0) at every sample
/// point; mu is the eigenvalue field.
struct JordanChainData {
  Expr eigenvalue;
  std::vector<VectorField> chain;
};

/// Max over points and chain positions of |A X_t - mu X_t - X_{t-1}|_inf.
double verify_jordan_chain(const OperatorField& a, const JordanChainData& data,
                           const std::vector<Point>& points);

// shared numeric primitives

Eigen::MatrixXd to_matrix(int n, const std::vector<double>& rowmajor);
/// Rank with a threshold relative to the largest singular value; abs_floor
/// additionally forces singular values at or below it to count as zero.
int numeric_rank(const Eigen::MatrixXd& m, double tol_rank, double abs_floor = 0.0);
/// Orthonormal basis of the right null space (columns), same thresholds.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double tol_rank, double abs_floor = 0.0);

/// Orthonormal basis of the cluster nearest lambda_ref at point p, using the
/// cluster's own Riesz index. Used to track an eigen-distribution across
/// nearby points.
Eigen::MatrixXd cluster_basis_near(const OperatorField& a, const Point& p, double lambda_ref,
                                   double tol_eig = -1.0, double tol_rank = -1.0);

}  // namespace haan
