#include "splr/matcore.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace splr {

Matrix SvdFactors::reconstruct() const {
    const Index k = singular_values.size();
    return u.leftCols(k) * singular_values.asDiagonal() *
           v.leftCols(k).transpose();
}

RngSeed derive_stream(RngSeed seed, std::uint64_t tag) {
    // splitmix64 over the tagged seed; decorrelates substreams drawn from
    // one master seed.
    std::uint64_t z = seed.value + tag * 0x9E3779B97F4A7C15ULL;
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z = z ^ (z >> 31);
    return RngSeed{z};
}

double GaussianStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on uniforms in (0,1]; 53-bit mantissa draws.
    const double u1 =
        1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double u2 =
        1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) +
                                    ": non-finite entries");
    }
}

SvdFactors svd(const Matrix& m) {
    require_finite(m, "svd");
    SvdFactors f;
    // Jacobi is accurate for small blocks; BDC scales to the operator-sized
    // matrices used in tests.
    if (std::min(m.rows(), m.cols()) <= 16) {
        Eigen::JacobiSVD<Matrix> dec(m,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
        f.u = dec.matrixU();
        f.singular_values = dec.singularValues();
        f.v = dec.matrixV();
    } else {
        Eigen::BDCSVD<Matrix> dec(m,
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
        f.u = dec.matrixU();
        f.singular_values = dec.singularValues();
        f.v = dec.matrixV();
    }
    // Sign canonicalization: first nonzero entry of each left singular
    // vector nonnegative; paired right vector flips with it.
    const Index k = f.singular_values.size();
    for (Index j = 0; j < f.u.cols(); ++j) {
        Index i = 0;
        while (i < f.u.rows() && f.u(i, j) == 0.0) ++i;
        if (i < f.u.rows() && f.u(i, j) < 0.0) {
            f.u.col(j) = -f.u.col(j);
            if (j < k && j < f.v.cols()) f.v.col(j) = -f.v.col(j);
        }
    }
    // Right singular vectors beyond the paired range get their own sign rule.
    for (Index j = k; j < f.v.cols(); ++j) {
        Index i = 0;
        while (i < f.v.rows() && f.v(i, j) == 0.0) ++i;
        if (i < f.v.rows() && f.v(i, j) < 0.0) f.v.col(j) = -f.v.col(j);
    }
    return f;
}

double schatten_p(const Matrix& m, double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("schatten_p: p must lie in (0, 1]");
    }
    const SvdFactors f = svd(m);
    double sum = 0.0;
    for (Index i = 0; i < f.singular_values.size(); ++i) {
        const double s = f.singular_values[i];
        if (s > 0.0) sum += std::pow(s, p);
    }
    return sum;
}

double frobenius(const Matrix& m) {
    require_finite(m, "frobenius");
    return m.norm();
}

Matrix best_rank_r(const Matrix& m, Index r) {
    if (r < 1) throw std::invalid_argument("best_rank_r: r must be >= 1");
    if (r >= std::min(m.rows(), m.cols())) return m;
    const SvdFactors f = svd(m);
    return f.u.leftCols(r) * f.singular_values.head(r).asDiagonal() *
           f.v.leftCols(r).transpose();
}

double max_abs(const Matrix& m) {
    require_finite(m, "max_abs");
    return m.cwiseAbs().maxCoeff();
}

Matrix gaussian_matrix(Index rows, Index cols, double mean, double stddev,
                       RngSeed seed) {
    if (stddev < 0.0) {
        throw std::invalid_argument("gaussian_matrix: stddev must be >= 0");
    }
    GaussianStream g(seed);
    Matrix m(rows, cols);
    // Row-major fill order, matching the documented logical entry order.
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            m(i, j) = mean + stddev * g.next();
        }
    }
    return m;
}

Matrix low_rank_product(Index m, Index n, Index r, RngSeed seed) {
    if (r < 1 || r > std::min(m, n)) {
        throw std::invalid_argument(
            "low_rank_product: need 1 <= r <= min(m, n)");
    }
    GaussianStream g(seed);
    Matrix p(m, r);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < r; ++j) p(i, j) = g.next();
    }
    Matrix q(r, n);
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < n; ++j) q(i, j) = g.next();
    }
    return p * q;
}

Vector vec(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
    if (v.size() != rows * cols) {
        throw std::invalid_argument("unvec: size mismatch");
    }
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace splr
