#pragma once

#include "splr/matcore.hpp"

#include <iosfwd>
#include <string>

namespace splr {

/// Linear measurement map R^{m x n} -> R^M, held as an M x (m*n) matrix
/// acting on column-major vectorizations.
struct SensingOperator {
    Index measurements = 0;  // M
    Index rows = 0;          // m
    Index cols = 0;          // n
    Matrix matrix_form;      // M x (m*n)

    Vector apply(const Matrix& x) const;
};

/// Operator pair A and A_hat = A + E with E scaled so that
/// ||E||_op = epsilon_A * ||A||_op.
struct PerturbedOperator {
    SensingOperator base;
    Matrix perturbation;      // E, same shape as base.matrix_form
    double epsilon_A = 0.0;   // achieved spectral-norm ratio
    SensingOperator hat;      // A + E
};

/// One synthetic recovery problem. The solver sees observed_y together with
/// op.hat; clean_y is produced from the unperturbed operator plus noise.
struct ProblemInstance {
    Matrix truth;             // X, m x n, rank <= rank_r
    PerturbedOperator op;
    Vector noise;             // z, length M
    Vector clean_y;           // A vec(X) + z
    Vector observed_y;        // what the solver consumes (equals clean_y)
    Index rank_r = 0;
    double epsilon_y = 0.0;   // achieved ||z|| / ||clean_y||
    RngSeed seed;             // master seed the instance was built from
    double eps_A_target = 0.0;
    double eps_y_target = 0.0;
};

/// Monte Carlo lower bound on the restricted isometry constant.
struct RicEstimate {
    Index r = 0;
    double delta_lower = 0.0;
    int samples = 0;
    RngSeed seed;
};

SensingOperator make_gaussian_operator(Index measurements, Index rows,
                                       Index cols, RngSeed seed);

/// Gaussian perturbation rescaled to hit the spectral-norm ratio exactly;
/// epsilon_A = 0 yields E = 0. The precomputed-norms overload lets sweeps
/// reuse the expensive spectral norms across grid points.
PerturbedOperator make_perturbation(const SensingOperator& base,
                                    double epsilon_A, RngSeed seed);
PerturbedOperator make_perturbation(const SensingOperator& base,
                                    double epsilon_A, const Matrix& raw_draw,
                                    double base_norm, double raw_norm);

ProblemInstance make_instance(Index m, Index n, Index r, Index measurements,
                              double eps_A_target, double eps_y_target,
                              RngSeed seed);

/// Largest singular value of matrix_form via power iteration on the Gram
/// matrix, relative tolerance 1e-10.
double operator_norm(const SensingOperator& op);

/// Lower estimate of sup ||A(X)||_2 over unit-Frobenius rank-r X: sampled
/// starts refined by alternating ascent over the SVD factor pair (relative
/// improvement < 1e-8, at most 200 steps per sample).
double restricted_operator_norm(const SensingOperator& op, Index r,
                                int samples, RngSeed seed);

/// Lower bound on the RIC delta_r: max over refined samples of
/// | ||A(X)||_2^2 - 1 | at unit Frobenius norm, climbing the deviation in
/// both directions.
RicEstimate estimate_ric(const SensingOperator& op, Index r, int samples,
                         RngSeed seed);

/// Caches the operator draw and its spectral norms so a sweep can build
/// many instances over (r, eps_A, eps_y) without recomputing them.
class InstanceBuilder {
  public:
    InstanceBuilder(Index m, Index n, Index measurements, RngSeed seed);

    ProblemInstance build(Index r, double eps_A_target,
                          double eps_y_target) const;
    const SensingOperator& base() const { return base_; }

  private:
    Index m_, n_, measurements_;
    RngSeed seed_;
    SensingOperator base_;
    mutable bool norms_ready_ = false;
    mutable Matrix raw_perturbation_;
    mutable double base_norm_ = 0.0;
    mutable double raw_norm_ = 0.0;
};

/// Text serialization: decimal floats at 17 significant digits, exact
/// round trip for 64-bit values. The operator A is stored as its substream
/// seed and regenerated on load.
void save_instance(const ProblemInstance& instance, std::ostream& out);
void save_instance(const ProblemInstance& instance, const std::string& path);
ProblemInstance load_instance(std::istream& in);
ProblemInstance load_instance(const std::string& path);

/// Substream tags used when expanding a master instance seed.
namespace streams {
inline constexpr std::uint64_t kOperator = 1;
inline constexpr std::uint64_t kSignal = 2;
inline constexpr std::uint64_t kPerturbation = 3;
inline constexpr std::uint64_t kNoise = 4;
}  // namespace streams

}  // namespace splr
