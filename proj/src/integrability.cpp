#include "haantjes/integrability.hpp"

#include <cmath>

namespace haan {

namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& cols, double tol_rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol_rank * smax && sv(i) > 0.0) ++rank;
  return svd.matrixU().leftCols(rank);
}

double out_of_span_norm(const Eigen::MatrixXd& ortho_basis, const Eigen::VectorXd& w) {
  const Eigen::VectorXd residual = w - ortho_basis * (ortho_basis.transpose() * w);
  return residual.lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) r(static_cast<Eigen::Index>(i)) = v[i];
  return r;
}

constexpr double kRankTol = 1e-8;

}  // namespace

InvolutivityReport involutive_check(const std::vector<VectorField>& frame,
                                    const std::vector<Point>& points, double tol) {
  if (frame.empty()) throw std::invalid_argument("empty frame");
  const int n = frame.front().dim;
  InvolutivityReport report;
  report.involutive = true;
  for (const Point& p : points) {
    ++report.points_used;
    Eigen::MatrixXd cols(n, static_cast<Eigen::Index>(frame.size()));
    for (std::size_t c = 0; c < frame.size(); ++c)
      cols.col(static_cast<Eigen::Index>(c)) = to_eigen(frame[c].value_at(p));
    const Eigen::MatrixXd basis = orthonormalize(cols, kRankTol);
    if (basis.cols() != cols.cols())
      throw std::invalid_argument("frame fields are linearly dependent at a sample point");
    for (std::size_t i = 0; i < frame.size(); ++i)
      for (std::size_t j = i + 1; j < frame.size(); ++j) {
        const std::vector<double> w = lie_bracket(frame[i], frame[j], p);
        const double r = out_of_span_norm(basis, to_eigen(w));
        report.max_residual = std::max(report.max_residual, r);
        if (r > tol * (1.0 + to_eigen(w).lpNorm<Eigen::Infinity>())) report.involutive = false;
      }
  }
  return report;
}

VanishingReport vanishing_on_args(const std::function<Tensor12(const Point&)>& tensor_at,
                                  const std::function<Eigen::MatrixXd(const Point&)>& u_basis,
                                  const std::function<Eigen::MatrixXd(const Point&)>& v_basis,
                                  const std::vector<Point>& points, double tol) {
  VanishingReport report;
  for (const Point& p : points) {
    const Tensor12 t = tensor_at(p);
    report.scale = std::max(report.scale, t.scale());
    const Eigen::MatrixXd u = u_basis(p);
    const Eigen::MatrixXd v = v_basis(p);
    const int n = t.dim();
    for (int cu = 0; cu < u.cols(); ++cu)
      for (int cv = 0; cv < v.cols(); ++cv) {
        std::vector<double> uv(static_cast<std::size_t>(n)), vv(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          uv[i] = u(i, cu);
          vv[i] = v(i, cv);
        }
        const std::vector<double> out = t.apply(uv, vv);
        for (double c : out) report.max_residual = std::max(report.max_residual, std::abs(c));
      }
  }
  report.vanishes = report.max_residual <= tol * (1.0 + report.scale);
  return report;
}

ScanResult main_theorem_scan(const OperatorField& a, const std::vector<Point>& points, int m_max,
                             double tol) {
  if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
  ScanResult result;
  std::vector<OpEval> evals;
  evals.reserve(points.size());
  for (const Point& p : points) evals.push_back(a.eval(p));
  // walk the tower incrementally per point
  std::vector<Tensor12> current;
  for (const OpEval& e : evals) current.push_back(nijenhuis(e));
  for (int m = 1; m <= m_max; ++m) {
    if (m > 1)
      for (std::size_t i = 0; i < current.size(); ++i)
        current[i] = haantjes_step(current[i], evals[i]);
    ScanRow row;
    row.level = m;
    row.vanishes = true;
    for (const Tensor12& t : current) {
      row.max_residual = std::max(row.max_residual, t.max_abs());
      row.scale = std::max(row.scale, t.scale());
      if (t.max_abs() > tol * (1.0 + t.scale())) row.vanishes = false;
    }
    result.rows.push_back(row);
    if (row.vanishes) {
      result.first_vanishing_level = m;
      break;
    }
  }
  return result;
}

namespace {

// residual of the level-(k-1) torsion restricted to span(e_1..e_k)
LevelRow flag_row(const std::vector<Tensor12>& tensors, int k, double tol) {
  LevelRow row;
  row.k = k;
  row.vanishes = true;
  for (const Tensor12& t : tensors) {
    row.scale = std::max(row.scale, t.scale());
    for (int i = 0; i < t.dim(); ++i)
      for (int j = 0; j < k; ++j)
        for (int l = j + 1; l < k; ++l)
          row.max_residual = std::max(row.max_residual, std::abs(t(i, j, l)));
  }
  row.vanishes = row.max_residual <= tol * (1.0 + row.scale);
  return row;
}

LevelRow full_row(const std::vector<Tensor12>& tensors, int k, double tol) {
  LevelRow row;
  row.k = k;
  for (const Tensor12& t : tensors) {
    row.max_residual = std::max(row.max_residual, t.max_abs());
    row.scale = std::max(row.scale, t.scale());
  }
  row.vanishes = row.max_residual <= tol * (1.0 + row.scale);
  return row;
}

std::vector<Tensor12> tau_at_points(const OperatorField& a, int m,
                                    const std::vector<Point>& points) {
  std::vector<Tensor12> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(tau_level(a, m, p));
  return out;
}

}  // namespace

TriangularReport triangular_vanishing_check(const OperatorField& a,
                                            const std::vector<Point>& points, double tol) {
  const int n = a.dim();
  TriangularReport report;
  report.structurally_upper = a.is_strictly_upper();
  report.nilcyclic = is_nilcyclic(a, points);
  report.all_pass = true;
  for (int k = 2; k <= n; ++k) {
    const std::vector<Tensor12> tensors = tau_at_points(a, k - 1, points);
    LevelRow row = (k == n) ? full_row(tensors, k, tol) : flag_row(tensors, k, tol);
    if (k == n) row.note = "full tensor";
    report.all_pass = report.all_pass && row.vanishes;
    report.rows.push_back(std::move(row));
  }
  return report;
}

TriangularReport one_eigenvalue_triangular_check(const Expr& f, const OperatorField& a,
                                                 const std::vector<Point>& points, double tol) {
  const int n = a.dim();
  if (n < 3) throw std::invalid_argument("the single-eigenvalue statement needs dimension >= 3");
  const OperatorField l = OperatorField::shifted(f, a);
  TriangularReport report;
  report.structurally_upper = a.is_strictly_upper();
  report.nilcyclic = is_nilcyclic(a, points);
  report.all_pass = true;

  {
    LevelRow extra = flag_row(tau_at_points(l, 1, points), 2, tol);
    extra.note = "k=2 (extra observation, outside the stated range)";
    report.rows.push_back(std::move(extra));  // not folded into all_pass
  }
  if (n < 4) {
    LevelRow row;
    row.k = 3;
    row.vacuous = true;
    row.note = "range 3..n-1 is empty at this dimension";
    report.rows.push_back(std::move(row));
  } else {
    for (int k = 3; k <= n - 1; ++k) {
      LevelRow row = flag_row(tau_at_points(l, k - 1, points), k, tol);
      report.all_pass = report.all_pass && row.vanishes;
      report.rows.push_back(std::move(row));
    }
  }
  LevelRow top = full_row(tau_at_points(l, n - 1, points), n, tol);
  top.note = "full tensor";
  report.all_pass = report.all_pass && top.vanishes;
  report.rows.push_back(std::move(top));
  return report;
}

// ---------------------------------------------------------------------------
// Projector-based numeric frames

namespace {

// Columns of P(x) * anchor, where P is the orthogonal projector onto the
// cluster's eigen-distribution at x.
Eigen::MatrixXd projected_frame(const OperatorField& a, const Point& x, double lambda_ref,
                                const Eigen::MatrixXd& anchor) {
  const Eigen::MatrixXd u = cluster_basis_near(a, x, lambda_ref);
  return u * (u.transpose() * anchor);
}

// [F_i, G_j](p) for all column pairs, with the coordinate derivatives of the
// frames taken by central differences of step h.
struct FrameBrackets {
  std::vector<Eigen::VectorXd> brackets;  // one per (i, j) pair requested
  double frame_scale = 1.0;
};

FrameBrackets frame_brackets(const OperatorField& a, const Point& p, double lambda_f,
                             const Eigen::MatrixXd& anchor_f, double lambda_g,
                             const Eigen::MatrixXd& anchor_g, bool same_frame, double h) {
  const int n = a.dim();
  const Eigen::MatrixXd f0 = projected_frame(a, p, lambda_f, anchor_f);
  const Eigen::MatrixXd g0 = same_frame ? f0 : projected_frame(a, p, lambda_g, anchor_g);

  std::vector<Eigen::MatrixXd> df(n), dg(n);  // per-coordinate derivatives
  for (int c = 0; c < n; ++c) {
    Point plus = p, minus = p;
    plus.coords[c] += h;
    minus.coords[c] -= h;
    const Eigen::MatrixXd fp = projected_frame(a, plus, lambda_f, anchor_f);
    const Eigen::MatrixXd fm = projected_frame(a, minus, lambda_f, anchor_f);
    df[c] = (fp - fm) / (2.0 * h);
    if (same_frame) {
      dg[c] = df[c];
    } else {
      const Eigen::MatrixXd gp = projected_frame(a, plus, lambda_g, anchor_g);
      const Eigen::MatrixXd gm = projected_frame(a, minus, lambda_g, anchor_g);
      dg[c] = (gp - gm) / (2.0 * h);
    }
  }

  FrameBrackets out;
  if (f0.cols() == 0 || g0.cols() == 0) return out;
  out.frame_scale = std::max(1.0, std::max(f0.cwiseAbs().maxCoeff(), g0.cwiseAbs().maxCoeff()));
  for (int i = 0; i < f0.cols(); ++i) {
    const int j0 = same_frame ? i + 1 : 0;
    for (int j = j0; j < g0.cols(); ++j) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
      for (int c = 0; c < n; ++c)
        w += f0(c, i) * dg[c].col(j) - g0(c, j) * df[c].col(i);
      out.brackets.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace

InvolutivityReport projector_involutivity_check(const OperatorField& a, double lambda_ref,
                                                const std::vector<Point>& points, double tol,
                                                double fd_step) {
  InvolutivityReport report;
  report.involutive = true;
  for (const Point& p : points) {
    try {
      if (spectrum(a, p).near_degenerate) continue;  // excluded from verdicts
    } catch (const SpectrumError&) {
      continue;  // outside the real-eigenvalue assumption at this point
    }
    ++report.points_used;
    const Eigen::MatrixXd anchor = cluster_basis_near(a, p, lambda_ref);
    if (anchor.cols() < 2) continue;  // rank-one distributions are involutive
    const FrameBrackets fb =
        frame_brackets(a, p, lambda_ref, anchor, lambda_ref, anchor, true, fd_step);
    for (const Eigen::VectorXd& w : fb.brackets) {
      const double r = out_of_span_norm(anchor, w) / fb.frame_scale;
      report.max_residual = std::max(report.max_residual, r);
      if (r > tol) report.involutive = false;
    }
  }
  return report;
}

SemidirectReport semidirect_sum_check(const OperatorField& a, double lambda_mu, double lambda_nu,
                                      const std::vector<Point>& points, int m, double tol,
                                      double fd_step) {
  SemidirectReport report;
  report.lambda_mu = lambda_mu;
  report.lambda_nu = lambda_nu;
  report.note = "membership via projector frames differentiated by central differences";

  // tau^(m)(D_mu, D_nu) on the sampled bases
  const VanishingReport tau = vanishing_on_args(
      [&](const Point& p) { return tau_level(a, m, p); },
      [&](const Point& p) { return cluster_basis_near(a, p, lambda_mu); },
      [&](const Point& p) { return cluster_basis_near(a, p, lambda_nu); }, points, tol);
  report.tau_residual = tau.max_residual;
  report.tau_scale = tau.scale;
  report.tau_vanishes = tau.vanishes;

  report.membership_ok = true;
  for (const Point& p : points) {
    const SpectrumReport sp = spectrum(a, p);
    if (sp.near_degenerate) {
      report.withheld = true;
      report.note = "near-degenerate clusters at a sample point; verdict withheld";
      report.membership_ok = false;
      return report;
    }
    const Eigen::MatrixXd bmu = cluster_basis_near(a, p, lambda_mu);
    const Eigen::MatrixXd bnu = cluster_basis_near(a, p, lambda_nu);
    Eigen::MatrixXd sum(a.dim(), bmu.cols() + bnu.cols());
    sum << bmu, bnu;
    const Eigen::MatrixXd span = orthonormalize(sum, kRankTol);
    const FrameBrackets fb = frame_brackets(a, p, lambda_mu, bmu, lambda_nu, bnu, false, fd_step);
    for (const Eigen::VectorXd& w : fb.brackets) {
      const double r = out_of_span_norm(span, w) / fb.frame_scale;
      report.membership_residual = std::max(report.membership_residual, r);
      if (r > tol) report.membership_ok = false;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

OperatorField shifted_power_field(const OperatorField& a, const Expr& lambda, int rho) {
  if (rho < 1) throw std::invalid_argument("power must be >= 1");
  const OperatorField shifted = OperatorField::shifted(-lambda, a);
  OperatorField acc = shifted;
  for (int t = 1; t < rho; ++t) acc = acc * shifted;
  return acc;
}

ResidualReport jordan_expansion_residual(const OperatorField& a, const JordanChainData& chain_x,
                                         const JordanChainData& chain_y, int m, const Point& p) {
  if (m < 2) throw std::invalid_argument("the chain expansion needs level m >= 2");
  const int n = a.dim();
  const Tensor12 tau = tau_level(a, m, p);

  const std::vector<double> mval = a.value_at(p);
  const double mu = chain_x.eigenvalue.eval(p);
  const double nu = chain_y.eigenvalue.eval(p);
  std::vector<double> shift_mu = mval, shift_nu = mval;
  for (int i = 0; i < n; ++i) {
    shift_mu[static_cast<std::size_t>(i) * n + i] -= mu;
    shift_nu[static_cast<std::size_t>(i) * n + i] -= nu;
  }
  std::vector<std::vector<double>> pow_mu{mat_identity(n)}, pow_nu{mat_identity(n)};
  for (int t = 1; t <= m; ++t) {
    pow_mu.push_back(mat_mul(n, pow_mu.back(), shift_mu));
    pow_nu.push_back(mat_mul(n, pow_nu.back(), shift_nu));
  }

  auto binom = [](int mm, int kk) {
    long long acc = 1;
    for (int i = 1; i <= kk; ++i) acc = acc * (mm - kk + i) / i;
    return static_cast<double>(acc);
  };

  const int rx = static_cast<int>(chain_x.chain.size());
  const int ry = static_cast<int>(chain_y.chain.size());
  std::vector<std::vector<double>> xs, ys;  // values at p, 1-based
  xs.emplace_back();
  for (const VectorField& x : chain_x.chain) xs.push_back(x.value_at(p));
  ys.emplace_back();
  for (const VectorField& y : chain_y.chain) ys.push_back(y.value_at(p));

  // brackets of all chain element pairs; anything involving X_0 = 0 vanishes
  std::vector<std::vector<std::vector<double>>> br(
      static_cast<std::size_t>(rx) + 1,
      std::vector<std::vector<double>>(static_cast<std::size_t>(ry) + 1));
  for (int ai = 1; ai <= rx; ++ai)
    for (int bj = 1; bj <= ry; ++bj)
      br[ai][bj] = lie_bracket(chain_x.chain[static_cast<std::size_t>(ai - 1)],
                               chain_y.chain[static_cast<std::size_t>(bj - 1)], p);

  double residual = 0.0;
  double scale = tau.scale();
  for (int al = 1; al <= rx; ++al)
    for (int be = 1; be <= ry; ++be) {
      const std::vector<double> lhs = tau.apply(xs[static_cast<std::size_t>(al)],
                                                ys[static_cast<std::size_t>(be)]);
      std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
          const int ai = al - i;
          const int bj = be - j;
          if (ai < 1 || bj < 1) continue;
          const std::vector<double> op =
              mat_mul(n, pow_mu[static_cast<std::size_t>(m - i)],
                      pow_nu[static_cast<std::size_t>(m - j)]);
          const double coef = (((i + j) % 2) ? -1.0 : 1.0) * binom(m, i) * binom(m, j);
          const std::vector<double> term = mat_apply(n, op, br[ai][bj]);
          for (int c = 0; c < n; ++c) rhs[c] += coef * term[c];
          scale = std::max(scale,
                           std::abs(coef) * mat_max_abs(op) * (1.0 + mat_max_abs(br[ai][bj])));
        }
      for (int c = 0; c < n; ++c) residual = std::max(residual, std::abs(lhs[c] - rhs[c]));
    }
  return {residual, scale};
}

}  // namespace haan
