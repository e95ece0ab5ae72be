#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace splr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Full SVD of a real dense matrix, canonicalized so tests are
/// deterministic: singular values nonincreasing, first nonzero entry of
/// each left singular vector nonnegative (right vectors flipped in pairs).
struct SvdFactors {
    Matrix u;                 // m x m orthogonal
    Vector singular_values;   // length min(m, n), nonincreasing, >= 0
    Matrix v;                 // n x n orthogonal

    Matrix reconstruct() const;
};

/// 64-bit seed for all randomized operations. Identical seed and draw
/// sequence give bit-identical results; there is no global RNG state.
struct RngSeed {
    std::uint64_t value = 0;
};

/// Derives an independent substream seed from (seed, tag).
RngSeed derive_stream(RngSeed seed, std::uint64_t tag);

/// Deterministic N(0,1) stream: mt19937_64 + Box-Muller. Self-contained so
/// sequences do not depend on the standard library's normal_distribution
/// implementation.
class GaussianStream {
  public:
    explicit GaussianStream(RngSeed seed) : engine_(seed.value) {}
    double next();

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Throws std::invalid_argument when any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

SvdFactors svd(const Matrix& m);

/// Schatten quasi-norm sum: sum_i sigma_i(m)^p for p in (0, 1].
/// For p = 1 this is the nuclear norm.
double schatten_p(const Matrix& m, double p);

double frobenius(const Matrix& m);

/// Best rank-r approximation by SVD truncation. r >= min(m, n) returns the
/// input unchanged.
Matrix best_rank_r(const Matrix& m, Index r);

/// Entrywise max absolute value.
double max_abs(const Matrix& m);

Matrix gaussian_matrix(Index rows, Index cols, double mean, double stddev,
                       RngSeed seed);

/// Rank-r product P(m x r) * Q(r x n) with standard Gaussian factors.
Matrix low_rank_product(Index m, Index n, Index r, RngSeed seed);

/// Column-major vectorization, fixed globally for all operator algebra and
/// file formats.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

}  // namespace splr
