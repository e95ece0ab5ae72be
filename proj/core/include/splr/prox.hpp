#pragma once

#include "splr/matcore.hpp"

namespace splr {

/// Scalar shrinkage problem: minimize lambda_eff * |w|^p + (w - v)^2 / 2.
struct ScalarProxProblem {
    double v = 0.0;
    double lambda_eff = 1.0;  // effective weight, lambda / rho
    double p = 1.0;           // in (0, 1]
};

/// Hard-threshold point of the generalized shrinkage: inputs with
/// |v| <= threshold map to 0.
double gst_threshold(double lambda_eff, double p);

/// Global minimizer of the scalar problem. p = 1 is soft thresholding;
/// p < 1 uses the threshold test plus fixed-point iteration, with a
/// bracketed search fallback. Ties between 0 and the interior stationary
/// point resolve to 0.
double scalar_prox(const ScalarProxProblem& prob);
double scalar_prox(double v, double lambda_eff, double p);

/// Schatten quasi-norm proximal map: SVD of v, scalar shrinkage of each
/// singular value, reassembly with the same singular subspaces.
Matrix matrix_prox(const Matrix& v, double lambda_eff, double p);

}  // namespace splr
