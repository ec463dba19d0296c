#include "lidskii/kernel.hpp"

#include <Eigen/LU>

#include <atomic>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "lidskii/errors.hpp"

namespace lidskii::detail {

// node^kappa; exact repeated multiplication for small integer exponents so that
// integer-power evolution does not pick up principal-branch rounding.
cplx node_power(const cplx& z, double kappa) {
  const double r = std::round(kappa);
  if (r == kappa && r >= 1.0 && r <= 64.0) {
    cplx p = 1.0;
    for (int i = 0; i < static_cast<int>(r); ++i) p *= z;
    return p;
  }
  return std::pow(z, kappa);
}

std::vector<std::vector<Mat>> contour_accumulate(const DiscretizedOperator& op,
                                                 const QuadratureRule& rule,
                                                 const std::vector<double>& times, double kappa,
                                                 const Mat& H,
                                                 const std::vector<std::vector<cplx>>& factors,
                                                 KernelMode mode) {
  const int dim = op.dim();
  const int nn = static_cast<int>(rule.nodes.size());
  const int nt = static_cast<int>(times.size());
  const int nf = factors.empty() ? 1 : static_cast<int>(factors.size());
  const auto nrhs = H.cols();

  if (H.rows() != dim) fail_input("dimension-mismatch", "right-hand block does not match operator");
  if (rule.weights.size() != rule.nodes.size())
    fail_input("dimension-mismatch", "quadrature weights do not match nodes");
  for (const auto& f : factors)
    if (static_cast<int>(f.size()) != nn)
      fail_input("dimension-mismatch", "factor array does not match node count");

  std::vector<std::vector<Mat>> sums(nt);
  for (auto& row : sums) row.assign(nf, Mat::Zero(dim, nrhs));
  if (nn == 0) return sums;

  std::vector<cplx> z(nn);
  for (int j = 0; j < nn; ++j) z[j] = node_power(rule.nodes[j], kappa);

  const bool elementwise = op.is_diagonal();
  constexpr int kBlock = 64;
  std::vector<Mat> X(kBlock);

  const bool par = (mode == KernelMode::parallel);
#ifndef _OPENMP
  (void)par;
#endif

  for (int j0 = 0; j0 < nn; j0 += kBlock) {
    const int jb = std::min(kBlock, nn - j0);
    std::atomic<int> bad{-1};

    if (elementwise) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
      for (int k = 0; k < jb; ++k) {
        const cplx lam = rule.nodes[j0 + k];
        const Vec denom = op.diag.array() - lam;
        if (denom.cwiseAbs().minCoeff() <= 1e-12 * std::abs(lam)) {
          bad.store(j0 + k);
          continue;
        }
        X[k] = denom.cwiseInverse().asDiagonal() * H;
      }
    } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (par)
#endif
      for (int k = 0; k < jb; ++k) {
        Mat A = op.matrix;
        A.diagonal().array() -= rule.nodes[j0 + k];
        Eigen::PartialPivLU<Mat> lu(A);
        const auto udiag = lu.matrixLU().diagonal().cwiseAbs();
        if (udiag.minCoeff() <= 1e-13 * udiag.maxCoeff()) {
          bad.store(j0 + k);
          continue;
        }
        X[k] = lu.solve(H);
      }
    }

    if (bad.load() >= 0)
      fail_numerical("singular-resolvent",
                     "quadrature node " + std::to_string(bad.load()) +
                         " is numerically on the spectrum; adjust the contour");

    // Serial accumulation in node order keeps results bit-identical across thread counts.
    for (int k = 0; k < jb; ++k) {
      const int j = j0 + k;
      for (int it = 0; it < nt; ++it) {
        const double ex = -z[j].real() * times[it];
        if (ex < -745.0) continue;  // e^{-z t} underflows; the node contributes nothing
        const cplx e = std::exp(cplx(ex, -z[j].imag() * times[it]));
        const cplx we = rule.weights[j] * e;
        for (int f = 0; f < nf; ++f) {
          const cplx c = factors.empty() ? we : we * factors[f][j];
          sums[it][f].noalias() += c * X[k];
        }
      }
    }
  }
  return sums;
}

}  // namespace lidskii::detail
