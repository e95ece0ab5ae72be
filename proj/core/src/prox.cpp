#include "splr/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace splr {

namespace {

void check_params(double lambda_eff, double p) {
    if (!(lambda_eff > 0.0)) {
        throw std::invalid_argument("prox: lambda_eff must be positive");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("prox: p must lie in (0, 1]");
    }
}

double objective(double w, double av, double lambda_eff, double p) {
    return lambda_eff * std::pow(w, p) + 0.5 * (w - av) * (w - av);
}

// Golden-section search over the convex piece [lo, hi] of the objective.
double bracketed_search(double lo, double hi, double av, double lambda_eff,
                        double p) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c, av, lambda_eff, p);
    double fd = objective(d, av, lambda_eff, p);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + hi); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c, av, lambda_eff, p);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d, av, lambda_eff, p);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double gst_threshold(double lambda_eff, double p) {
    check_params(lambda_eff, p);
    if (p == 1.0) return lambda_eff;
    const double w0 = std::pow(2.0 * lambda_eff * (1.0 - p), 1.0 / (2.0 - p));
    return w0 + lambda_eff * p * std::pow(w0, p - 1.0);
}

double scalar_prox(const ScalarProxProblem& prob) {
    check_params(prob.lambda_eff, prob.p);
    const double v = prob.v;
    if (v == 0.0) return 0.0;
    const double sign = v > 0.0 ? 1.0 : -1.0;
    const double av = std::abs(v);

    if (prob.p == 1.0) {
        const double w = av - prob.lambda_eff;
        return w > 0.0 ? sign * w : 0.0;
    }

    const double tau = gst_threshold(prob.lambda_eff, prob.p);
    if (av <= tau) return 0.0;

    // Fixed-point iteration w <- |v| - lambda_eff * p * w^(p-1), started at
    // |v|; the sequence decreases monotonically to the larger stationary
    // point.
    double w = av;
    bool converged = false;
    for (int it = 0; it < 500; ++it) {
        const double wn = av - prob.lambda_eff * prob.p * std::pow(w, prob.p - 1.0);
        if (!(wn > 0.0)) break;  // fell through the stationary region
        if (std::abs(wn - w) < 1e-12) {
            w = wn;
            converged = true;
            break;
        }
        w = wn;
    }
    if (!converged) {
        // The objective is convex beyond its inflection point, which
        // brackets every interior minimizer.
        const double inflection = std::min(
            std::pow(prob.lambda_eff * prob.p * (1.0 - prob.p),
                     1.0 / (2.0 - prob.p)),
            av);
        w = bracketed_search(inflection, av, av, prob.lambda_eff, prob.p);
    }
    const double f_interior = objective(w, av, prob.lambda_eff, prob.p);
    const double f_zero = 0.5 * av * av;
    return f_interior < f_zero ? sign * w : 0.0;
}

double scalar_prox(double v, double lambda_eff, double p) {
    return scalar_prox(ScalarProxProblem{v, lambda_eff, p});
}

Matrix matrix_prox(const Matrix& v, double lambda_eff, double p) {
    check_params(lambda_eff, p);
    const SvdFactors f = svd(v);
    const Index k = f.singular_values.size();
    Vector shrunk(k);
    for (Index i = 0; i < k; ++i) {
        shrunk[i] = scalar_prox(f.singular_values[i], lambda_eff, p);
    }
    return f.u.leftCols(k) * shrunk.asDiagonal() * f.v.leftCols(k).transpose();
}

}  // namespace splr
