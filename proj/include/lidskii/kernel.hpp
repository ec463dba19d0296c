#pragma once

#include <vector>

#include "lidskii/solver.hpp"
#include "lidskii/types.hpp"

namespace lidskii::detail {

// z^kappa on the principal branch; exact repeated multiplication for small integer kappa.
cplx node_power(const cplx& z, double kappa);

// Core quadrature kernel. For every time t and factor array f_k computes
//   S[t][k] = sum_j w_j exp(-z_j t) f_k[j] X_j,   X_j = (W - node_j)^{-1} H,
// z_j = node_j^kappa (principal branch). `factors` may be empty, meaning the single
// constant factor 1. Node solves run in parallel in `parallel` mode; accumulation is
// always serial in node order, so results are bit-identical across thread counts.
// Errors: singular-resolvent when a node is numerically on the spectrum.
std::vector<std::vector<Mat>> contour_accumulate(
    const DiscretizedOperator& op, const QuadratureRule& rule, const std::vector<double>& times,
    double kappa, const Mat& H, const std::vector<std::vector<cplx>>& factors, KernelMode mode);

}  // namespace lidskii::detail
