#include "lidskii/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lidskii/errors.hpp"

namespace lidskii {

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat toeplitz_lower(const std::vector<double>& column, int n) {
  Mat m = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) m(i, j) = column[static_cast<std::size_t>(i - j)];
  return m;
}

}  // namespace

GridSpec make_grid(double a, double b, int n_points) {
  if (!(a < b) || n_points < 1 || !std::isfinite(a) || !std::isfinite(b))
    fail_input("invalid-interval", "need a < b and n_points >= 1");
  GridSpec g;
  g.a = a;
  g.b = b;
  g.n_points = n_points;
  g.spacing = (b - a) / n_points;
  g.nodes.resize(static_cast<std::size_t>(n_points));
  for (int j = 1; j <= n_points; ++j) g.nodes[static_cast<std::size_t>(j - 1)] = a + j * g.spacing;
  return g;
}

std::vector<double> gl_weights(double order, int length) {
  std::vector<double> w(static_cast<std::size_t>(std::max(length, 0)));
  if (length <= 0) return w;
  w[0] = 1.0;
  for (int k = 0; k + 1 < length; ++k)
    w[static_cast<std::size_t>(k + 1)] = w[static_cast<std::size_t>(k)] * (k - order) / (k + 1);
  return w;
}

DiscretizedOperator gl_fractional_derivative(const GridSpec& grid, double order) {
  if (!(order > 0.0)) fail_input("non-positive-order", "derivative order must be positive");
  const int n = grid.n_points;
  std::vector<double> col = gl_weights(order, n);
  const double scale = std::pow(grid.spacing, -order);
  for (double& v : col) v *= scale;
  DiscretizedOperator op;
  op.matrix = toeplitz_lower(col, n);
  op.grid = grid;
  op.kind = "gl_derivative";
  op.params["order"] = order;
  return op;
}

DiscretizedOperator dirichlet_laplacian(const GridSpec& grid) {
  const int n = grid.n_points;
  const double ih2 = 1.0 / (grid.spacing * grid.spacing);
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = -2.0 * ih2;
    if (i + 1 < n) {
      m(i, i + 1) = ih2;
      m(i + 1, i) = ih2;
    }
  }
  DiscretizedOperator op;
  op.matrix = std::move(m);
  op.grid = grid;
  op.kind = "dirichlet_laplacian";
  return op;
}

DiscretizedOperator composite_operator(double eta, double xi, double beta, const GridSpec& grid,
                                       const std::string& laplacian_kind) {
  // xi = 0 is tolerated as the degenerate pure second-derivative limit.
  if (eta >= 0.0 || xi < 0.0) fail_input("sign-violation", "need eta < 0 and xi > 0");
  if (!(beta > 0.0 && beta < 1.0)) fail_input("invalid-interval", "need beta in (0,1)");
  if (laplacian_kind != "dirichlet" && laplacian_kind != "gl_toeplitz")
    fail_input("invalid-interval", "unknown laplacian_kind: " + laplacian_kind);
  Mat second;
  if (laplacian_kind == "dirichlet") {
    second = dirichlet_laplacian(grid).matrix;
  } else {
    second = gl_fractional_derivative(grid, 2.0).matrix;
  }
  DiscretizedOperator op;
  op.matrix = eta * second;
  if (xi != 0.0) op.matrix += xi * gl_fractional_derivative(grid, beta).matrix;
  op.grid = grid;
  op.kind = "composite";
  op.params["eta"] = eta;
  op.params["xi"] = xi;
  op.params["beta"] = beta;
  op.params["gl_toeplitz"] = laplacian_kind == "gl_toeplitz" ? 1.0 : 0.0;
  return op;
}

DiscretizedOperator quasi_polynomial(const std::vector<cplx>& coefficients, double theta,
                                     const GridSpec& grid) {
  bool any = false;
  for (const cplx& cc : coefficients)
    if (cc != cplx(0.0, 0.0)) any = true;
  if (!any) fail_input("empty-coefficients", "need at least one nonzero coefficient");
  const int n = grid.n_points;
  Mat m = Mat::Zero(n, n);
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (coefficients[k] == cplx(0.0, 0.0)) continue;
    if (k == 0) {
      m += coefficients[0] * Mat::Identity(n, n);
    } else {
      m += coefficients[k] *
           gl_fractional_derivative(grid, static_cast<double>(k) * theta).matrix.cast<cplx>();
    }
  }
  DiscretizedOperator op;
  op.matrix = std::move(m);
  op.grid = grid;
  op.kind = "quasi_polynomial";
  op.params["theta"] = theta;
  return op;
}

DiscretizedOperator binomial_expansion_operator(int n, double beta, const GridSpec& grid) {
  if (n < 1) fail_input("invalid-interval", "power must be >= 1");
  if (!(beta > 0.0 && beta < 1.0 / n)) fail_input("beta-too-large", "need beta in (0, 1/n)");
  const int dim = grid.n_points;
  Mat m = Mat::Zero(dim, dim);
  double binom = 1.0;  // C(n, k), updated multiplicatively
  for (int k = 0; k <= n; ++k) {
    const double sign = ((n - k) % 2 == 0) ? 1.0 : -1.0;
    const double ord = beta * k + 2.0 * (n - k);
    m += sign * binom * gl_fractional_derivative(grid, ord).matrix;
    binom = binom * (n - k) / (k + 1);
  }
  DiscretizedOperator op;
  op.matrix = std::move(m);
  op.grid = grid;
  op.kind = "binomial_expansion";
  op.params["n"] = n;
  op.params["beta"] = beta;
  return op;
}

std::pair<DiscretizedOperator, CoefficientSequence> difference_fractional_power(
    double c, int d_shift, double beta, int dimension, int truncation) {
  if (!(c > 0.0)) fail_input("invalid-interval", "need c > 0");
  if (d_shift < 1) fail_input("invalid-interval", "need d_shift >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) fail_input("invalid-interval", "need beta in (0,1]");
  if (dimension < d_shift) fail_input("invalid-interval", "need dimension >= d_shift");
  if (truncation < 1) fail_input("invalid-interval", "need truncation >= 1");

  CoefficientSequence seq;
  seq.order = beta;
  seq.truncation_length = truncation;
  seq.values.resize(static_cast<std::size_t>(truncation));
  const double cb = std::pow(c, beta);
  std::vector<double> w = gl_weights(beta, truncation + 1);
  for (int k = 0; k < truncation; ++k) seq.values[static_cast<std::size_t>(k)] = cb * w[static_cast<std::size_t>(k)];
  // |C_k| ~ const k^{-beta-1}: bound the tail by the integral of the power law from the
  // last kept magnitude onward.
  const double last = std::abs(cb * w[static_cast<std::size_t>(truncation)]);
  seq.tail_bound = last * static_cast<double>(truncation) / beta;

  Mat m = Mat::Zero(dimension, dimension);
  for (int k = 0; k < truncation; ++k) {
    const long off = static_cast<long>(k) * d_shift;
    if (off >= dimension) break;
    for (int i = static_cast<int>(off); i < dimension; ++i)
      m(i, i - static_cast<int>(off)) = seq.values[static_cast<std::size_t>(k)];
  }
  DiscretizedOperator op;
  op.matrix = std::move(m);
  op.kind = "difference_power";
  op.params["c"] = c;
  op.params["d_shift"] = d_shift;
  op.params["beta"] = beta;
  return {std::move(op), std::move(seq)};
}

std::pair<DiscretizedOperator, double> difference_perturbation(
    const std::function<double(int)>& a_fn, const std::function<double(int)>& b_fn, double c,
    int d_shift, double beta, const Mat& Q, const Mat& N_op, int dimension) {
  if (!(c > 0.0) || d_shift < 1 || !(beta > 0.0 && beta < 1.0) || dimension < d_shift)
    fail_input("invalid-interval", "bad difference parameters");
  if (Q.rows() != dimension || Q.cols() != dimension || N_op.rows() != dimension ||
      N_op.cols() != dimension)
    fail_input("invalid-interval", "Q and N must be dimension x dimension");

  Eigen::PartialPivLU<Mat> lu(Q);
  const double maxU = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
  const double minU = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(maxU > 0.0) || minU <= 1e-13 * maxU) fail_input("singular-Q", "Q is numerically singular");

  Mat n_sym = 0.5 * (N_op + N_op.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> nes(n_sym);
  if (nes.info() != Eigen::Success) fail_numerical("eigensolve-failure", "symmetric part of N");
  if (!(nes.eigenvalues().minCoeff() > 0.0))
    fail_input("non-accretive-N", "N must be strictly accretive");

  Mat J = Mat::Zero(dimension, dimension);
  for (int i = 0; i < dimension; ++i) {
    J(i, i) = c;
    if (i - d_shift >= 0) J(i, i - d_shift) = -c;
  }
  Vec a_diag(dimension), b_diag(dimension);
  double a_inf = 0.0, b_inf = 0.0;
  for (int i = 0; i < dimension; ++i) {
    const double av = a_fn(i + 1), bv = b_fn(i + 1);
    a_diag(i) = av;
    b_diag(i) = bv;
    a_inf = std::max(a_inf, std::abs(av));
    b_inf = std::max(b_inf, std::abs(bv));
  }
  Mat jbeta = difference_fractional_power(c, d_shift, beta, dimension, dimension).first.matrix;
  Mat L = J.adjoint() * a_diag.asDiagonal() * J + b_diag.asDiagonal() * jbeta +
          Q.adjoint() * N_op * Q;
  const double sigma = 4.0 * c * a_inf + 2.0 * std::pow(c, beta) * b_inf;

  DiscretizedOperator op;
  op.matrix = std::move(L);
  op.kind = "difference_perturbation";
  op.params["c"] = c;
  op.params["d_shift"] = d_shift;
  op.params["beta"] = beta;
  op.params["sigma"] = sigma;
  return {std::move(op), sigma};
}

bool perturbation_threshold_ok(double gamma_N, double sigma, double q_inv_norm) {
  return gamma_N > sigma * q_inv_norm * q_inv_norm;
}

DiscretizedOperator riesz_potential(const GridSpec& grid, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) fail_input("invalid-interval", "need beta in (0,1)");
  const int n = grid.n_points;
  const double h = grid.spacing;
  const double scale = 1.0 / (2.0 * std::tgamma(beta) * std::cos(beta * kPi / 2.0));
  // Cell-exact kernel: int_{cell_j} |x_i - s|^{beta-1} ds via the elementary
  // antiderivative F(u) = sign(u)|u|^beta / beta.
  auto F = [beta](double u) {
    if (u == 0.0) return 0.0;
    const double s = u > 0.0 ? 1.0 : -1.0;
    return s * std::pow(std::abs(u), beta) / beta;
  };
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    const double xi_ = grid.nodes[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double xj = grid.nodes[static_cast<std::size_t>(j)];
      m(i, j) = scale * (F(xj + h / 2.0 - xi_) - F(xj - h / 2.0 - xi_));
    }
  }
  DiscretizedOperator op;
  op.matrix = std::move(m);
  op.grid = grid;
  op.kind = "riesz_potential";
  op.params["beta"] = beta;
  return op;
}

DiscretizedOperator riesz_composite(const GridSpec& grid, const std::function<cplx(double)>& a_fn,
                                    double delta, double beta) {
  if (!(beta > 0.75 && beta < 1.0)) fail_input("invalid-interval", "need beta in (3/4,1)");
  const int n = grid.n_points;
  Vec a_diag(n);
  for (int i = 0; i < n; ++i) {
    const cplx av = a_fn(grid.nodes[static_cast<std::size_t>(i)]);
    if (!(av.real() > 0.0)) fail_input("coefficient-positivity", "need Re a(x) > 0 on the grid");
    a_diag(i) = av;
  }
  Mat d2 = dirichlet_laplacian(grid).matrix;
  Mat riesz = riesz_potential(grid, 2.0 * (1.0 - beta)).matrix;
  DiscretizedOperator op;
  op.matrix = d2 * a_diag.asDiagonal() * d2 + riesz.cast<cplx>() * d2 +
              delta * Mat::Identity(n, n);
  op.grid = grid;
  op.kind = "riesz_composite";
  op.params["delta"] = delta;
  op.params["beta"] = beta;
  return op;
}

double diagonal_modulus(int n, double kappa) {
  const double m = static_cast<double>(std::max(n, 3));
  return std::pow(m * std::log(m) * std::log(std::log(m)), kappa);
}

DiscretizedOperator diagonal_normal_operator(double kappa, double M, int dimension,
                                             const std::string& arg_pattern, std::uint64_t seed) {
  if (!(kappa > 0.0 && kappa < 1.0)) fail_input("invalid-interval", "need kappa in (0,1)");
  if (M < 0.0) fail_input("invalid-interval", "need M >= 0");
  if (dimension < 1) fail_input("invalid-interval", "need dimension >= 1");
  if (arg_pattern != "constant" && arg_pattern != "alternating" && arg_pattern != "random")
    fail_input("invalid-interval", "unknown arg_pattern: " + arg_pattern);

  const double m_eff = M * (1.0 - 1e-9);
  Vec d(dimension);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < dimension; ++i) {
    const double mu = diagonal_modulus(i + 1, kappa);
    double ratio;
    if (arg_pattern == "constant") {
      ratio = m_eff;
    } else if (arg_pattern == "alternating") {
      ratio = (i % 2 == 0) ? m_eff : -m_eff;
    } else {
      ratio = m_eff * unif(rng);
    }
    d(i) = cplx(mu, ratio * mu);
  }
  DiscretizedOperator op;
  op.kind = "diagonal_normal";
  op.params["kappa"] = kappa;
  op.params["M"] = M;
  op.diag = d;
  if (dimension <= 4096) {
    op.matrix = d.asDiagonal();
  } else {
    op.diagonal_only = true;
  }
  return op;
}

}  // namespace lidskii
