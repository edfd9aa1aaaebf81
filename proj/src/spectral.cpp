#include "haantjes/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace haan {

Eigen::MatrixXd to_matrix(int n, const std::vector<double>& rowmajor) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rowmajor[static_cast<std::size_t>(i) * n + j];
  return m;
}

int numeric_rank(const Eigen::MatrixXd& m, double tol_rank, double abs_floor) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = std::max(tol_rank * sv(0), abs_floor);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  return rank;
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double tol_rank, double abs_floor) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double cutoff = std::max(tol_rank * smax, abs_floor);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

namespace {

constexpr double kDefaultEigFactor = 1e-6;
constexpr double kDefaultRankTol = 1e-8;

double resolve_rank_tol(double tol_rank) {
  return tol_rank > 0.0 ? tol_rank : kDefaultRankTol;
}

struct RawSpectrum {
  std::vector<double> reals;  // sorted ascending
  double spectral_radius = 0.0;
};

RawSpectrum real_eigenvalues(const Eigen::MatrixXd& m, double tol_eig_in) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw SpectrumError("eigenvalue iteration failed");
  RawSpectrum out;
  for (int i = 0; i < m.rows(); ++i)
    out.spectral_radius = std::max(out.spectral_radius, std::abs(es.eigenvalues()(i)));
  const double imag_tol = (tol_eig_in > 0.0 ? tol_eig_in : kDefaultEigFactor) *
                          (1.0 + out.spectral_radius);
  for (int i = 0; i < m.rows(); ++i) {
    const auto ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) > imag_tol)
      throw SpectrumError("unsupported spectrum: eigenvalue " + std::to_string(ev.real()) +
                          " + " + std::to_string(ev.imag()) +
                          "i has an imaginary part beyond tolerance");
    out.reals.push_back(ev.real());
  }
  std::sort(out.reals.begin(), out.reals.end());
  return out;
}

// Riesz index and nullities of (M - lambda I)^j until saturation.
// `zero_floor` is an absolute singular-value floor for the first power
// (raised to j for the j-th); it absorbs the spread of a merged eigenvalue
// cluster, which the relative cutoff alone cannot see.
struct Saturation {
  int riesz = 0;
  int final_nullity = 0;
};

Saturation saturate(const Eigen::MatrixXd& m, double lambda, double tol_rank,
                    double zero_floor) {
  const int n = static_cast<int>(m.rows());
  const Eigen::MatrixXd shifted = m - lambda * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  int prev_nullity = 0;
  for (int j = 1; j <= n + 1; ++j) {
    power = power * shifted;
    const int nullity = n - numeric_rank(power, tol_rank, std::pow(zero_floor, j));
    if (nullity == prev_nullity) return {j - 1, nullity};
    prev_nullity = nullity;
  }
  return {static_cast<int>(m.rows()), prev_nullity};  // saturation at full depth
}

}  // namespace

SpectrumReport spectrum(const OperatorField& a, const Point& p, double tol_eig,
                        double tol_rank) {
  const int n = a.dim();
  const Eigen::MatrixXd m = to_matrix(n, a.value_at(p));
  const RawSpectrum raw = real_eigenvalues(m, tol_eig);

  SpectrumReport report;
  report.tol_rank = resolve_rank_tol(tol_rank);
  report.tol_eig = (tol_eig > 0.0 ? tol_eig : kDefaultEigFactor) * (1.0 + raw.spectral_radius);

  // cluster sorted eigenvalues by gap; keep the spread for the rank floor
  struct Group {
    double mean;
    int count;
    double spread;
  };
  std::vector<Group> groups;
  for (double ev : raw.reals) {
    if (!groups.empty() && ev - groups.back().mean <= report.tol_eig) {
      Group& g = groups.back();
      g.mean = (g.mean * g.count + ev) / (g.count + 1);
      ++g.count;
      g.spread = std::max(g.spread, std::abs(ev - g.mean));
    } else {
      groups.push_back({ev, 1, 0.0});
    }
  }
  for (std::size_t g = 1; g < groups.size(); ++g)
    if (groups[g].mean - groups[g - 1].mean < 10.0 * report.tol_eig)
      report.near_degenerate = true;

  for (const Group& group : groups) {
    EigenvalueCluster cluster;
    cluster.lambda = group.mean;
    const double zero_floor = 2.0 * group.spread + report.tol_eig;
    const Saturation sat = saturate(m, group.mean, report.tol_rank, zero_floor);
    cluster.riesz_index = sat.riesz;
    cluster.multiplicity = sat.final_nullity;
    if (sat.final_nullity != group.count)
      report.warnings.push_back("rank saturation of eigenvalue " + std::to_string(group.mean) +
                                " disagrees with the clustered multiplicity");
    Eigen::MatrixXd shifted_power = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd shifted = m - group.mean * Eigen::MatrixXd::Identity(n, n);
    for (int j = 0; j < cluster.riesz_index; ++j) shifted_power = shifted_power * shifted;
    cluster.basis = null_space(shifted_power, report.tol_rank,
                               std::pow(zero_floor, cluster.riesz_index));
    report.clusters.push_back(std::move(cluster));
  }
  return report;
}

int riesz_index(const OperatorField& a, double lambda, const Point& p, double tol_rank) {
  const int n = a.dim();
  const Eigen::MatrixXd m = to_matrix(n, a.value_at(p));
  const RawSpectrum raw = real_eigenvalues(m, -1.0);
  const double gap = kDefaultEigFactor * (1.0 + raw.spectral_radius);
  bool found = false;
  for (double ev : raw.reals)
    if (std::abs(ev - lambda) <= std::max(gap, 1e-9 * (1.0 + std::abs(lambda)))) found = true;
  if (!found)
    throw std::invalid_argument("value " + std::to_string(lambda) +
                                " is not an eigenvalue at the given point");
  return saturate(m, lambda, resolve_rank_tol(tol_rank), gap).riesz;
}

FlagReport null_flag(const OperatorField& a, const Point& p, double tol_rank) {
  const int n = a.dim();
  const double tol = resolve_rank_tol(tol_rank);
  const Eigen::MatrixXd m = to_matrix(n, a.value_at(p));
  FlagReport report;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  int prev_nullity = 0;
  for (int j = 1; j <= n; ++j) {
    power = power * m;
    const int nullity = n - numeric_rank(power, tol);
    report.kernel_ranks.push_back(nullity);
    if (j == 1) report.has_zero_eigenvalue = nullity > 0;
    if (nullity != prev_nullity) report.riesz_index = j;
    prev_nullity = nullity;
  }
  if (!report.has_zero_eigenvalue) report.riesz_index = 0;
  return report;
}

bool is_nilcyclic(const OperatorField& a, const std::vector<Point>& points, double tol) {
  if (points.empty()) throw std::invalid_argument("empty sample set");
  const int n = a.dim();
  for (const Point& p : points) {
    const std::vector<double> v = a.value_at(p);
    const double scale = 1.0 + std::pow(mat_max_abs(v), n);
    std::vector<double> power = mat_identity(n);
    for (int j = 0; j < n - 1; ++j) power = mat_mul(n, power, v);
    if (mat_max_abs(power) <= tol * scale) return false;           // A^{n-1} vanished
    if (mat_max_abs(mat_mul(n, power, v)) > tol * scale) return false;  // A^n did not
  }
  return true;
}

double verify_jordan_chain(const OperatorField& a, const JordanChainData& data,
                           const std::vector<Point>& points) {
  if (data.chain.empty()) throw std::invalid_argument("empty Jordan chain");
  const int n = a.dim();
  double worst = 0.0;
  for (const Point& p : points) {
    const std::vector<double> m = a.value_at(p);
    const double mu = data.eigenvalue.eval(p);
    std::vector<double> prev(static_cast<std::size_t>(n), 0.0);  // X_0 = 0
    for (const VectorField& x : data.chain) {
      const std::vector<double> xv = x.value_at(p);
      const std::vector<double> ax = mat_apply(n, m, xv);
      for (int i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(ax[i] - mu * xv[i] - prev[i]));
      prev = xv;
    }
  }
  return worst;
}

Eigen::MatrixXd cluster_basis_near(const OperatorField& a, const Point& p, double lambda_ref,
                                   double tol_eig, double tol_rank) {
  const SpectrumReport report = spectrum(a, p, tol_eig, tol_rank);
  if (report.clusters.empty()) throw SpectrumError("empty spectrum");
  const EigenvalueCluster* best = &report.clusters.front();
  for (const auto& c : report.clusters)
    if (std::abs(c.lambda - lambda_ref) < std::abs(best->lambda - lambda_ref)) best = &c;
  return best->basis;
}

}  // namespace haan
