#include "splr/sensing.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace splr {

namespace {

constexpr double kPowerIterTol = 1e-13;
constexpr int kPowerIterCap = 200000;

void check_dims(Index measurements, Index rows, Index cols) {
    if (measurements < 1 || rows < 1 || cols < 1) {
        throw std::invalid_argument("sensing: dimensions must be >= 1");
    }
}

// Largest eigenvalue of a symmetric PSD matrix by power iteration with a
// deterministic start.
double top_eigenvalue(const Matrix& gram) {
    const Index n = gram.rows();
    GaussianStream g(RngSeed{0x5EED5EED5EED5EEDULL});
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * g.next();
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < kPowerIterCap; ++it) {
        Vector w = gram * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        const double next = v.dot(gram * v);
        if (std::abs(next - lambda) <= kPowerIterTol * std::max(next, 1e-300)) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

double spectral_norm(const Matrix& a) {
    // Power iteration runs on the smaller Gram matrix.
    Matrix gram;
    if (a.rows() <= a.cols()) {
        gram.noalias() = a * a.transpose();
    } else {
        gram.noalias() = a.transpose() * a;
    }
    const double top = top_eigenvalue(gram);
    return top > 0.0 ? std::sqrt(top) : 0.0;
}

// One ascent pass for max ||A(X)||^2 over unit-Frobenius rank-r matrices:
// apply the Gram operator, truncate back to rank r, renormalize. Each step
// is monotone nondecreasing in the objective.
double refine_restricted_max(const SensingOperator& op, Matrix& x, Index r) {
    double value = op.apply(x).squaredNorm();
    for (int it = 0; it < 200; ++it) {
        const Vector image = op.matrix_form * vec(x);
        const Matrix gradient =
            unvec(op.matrix_form.transpose() * image, op.rows, op.cols);
        Matrix candidate = best_rank_r(gradient, r);
        const double norm = frobenius(candidate);
        if (norm == 0.0) break;
        candidate /= norm;
        const double next = op.apply(candidate).squaredNorm();
        if (next <= value * (1.0 + 1e-8)) {
            if (next > value) {
                x = candidate;
                value = next;
            }
            break;
        }
        x = candidate;
        value = next;
    }
    return value;
}

// Descent on ||A(X)||^2 via the shifted operator sigma I - A^T A.
double refine_restricted_min(const SensingOperator& op, Matrix& x, Index r,
                             double shift) {
    double value = op.apply(x).squaredNorm();
    for (int it = 0; it < 200; ++it) {
        const Vector image = op.matrix_form * vec(x);
        const Matrix gradient =
            unvec(shift * vec(x) - op.matrix_form.transpose() * image,
                  op.rows, op.cols);
        Matrix candidate = best_rank_r(gradient, r);
        const double norm = frobenius(candidate);
        if (norm == 0.0) break;
        candidate /= norm;
        const double next = op.apply(candidate).squaredNorm();
        if (next >= value * (1.0 - 1e-8)) {
            if (next < value) {
                x = candidate;
                value = next;
            }
            break;
        }
        x = candidate;
        value = next;
    }
    return value;
}

Matrix random_unit_rank_r(Index m, Index n, Index r, RngSeed seed) {
    Matrix x = low_rank_product(m, n, r, seed);
    const double norm = frobenius(x);
    if (norm == 0.0) {
        x.setZero();
        x(0, 0) = 1.0;
        return x;
    }
    return x / norm;
}

void write_value(std::ostream& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            write_value(out, m(i, j));
        }
        out << '\n';
    }
}

void write_vector(std::ostream& out, const Vector& v) {
    for (Index i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        write_value(out, v[i]);
    }
    out << '\n';
}

Matrix read_matrix(std::istream& in, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            if (!(in >> m(i, j))) {
                throw std::runtime_error("instance file: truncated matrix");
            }
        }
    }
    return m;
}

Vector read_vector(std::istream& in, Index size) {
    Vector v(size);
    for (Index i = 0; i < size; ++i) {
        if (!(in >> v[i])) {
            throw std::runtime_error("instance file: truncated vector");
        }
    }
    return v;
}

void expect_tag(std::istream& in, const char* tag) {
    std::string token;
    if (!(in >> token) || token != tag) {
        throw std::runtime_error(std::string("instance file: expected tag ") +
                                 tag);
    }
}

}  // namespace

Vector SensingOperator::apply(const Matrix& x) const {
    if (x.rows() != rows || x.cols() != cols) {
        throw std::invalid_argument("SensingOperator::apply: shape mismatch");
    }
    return matrix_form * vec(x);
}

SensingOperator make_gaussian_operator(Index measurements, Index rows,
                                       Index cols, RngSeed seed) {
    check_dims(measurements, rows, cols);
    SensingOperator op;
    op.measurements = measurements;
    op.rows = rows;
    op.cols = cols;
    op.matrix_form =
        gaussian_matrix(measurements, rows * cols, 0.0,
                        1.0 / std::sqrt(static_cast<double>(measurements)),
                        seed);
    return op;
}

PerturbedOperator make_perturbation(const SensingOperator& base,
                                    double epsilon_A, RngSeed seed) {
    if (epsilon_A < 0.0) {
        throw std::invalid_argument("make_perturbation: epsilon_A must be >= 0");
    }
    if (epsilon_A == 0.0) {
        PerturbedOperator out;
        out.base = base;
        out.perturbation = Matrix::Zero(base.matrix_form.rows(),
                                        base.matrix_form.cols());
        out.epsilon_A = 0.0;
        out.hat = base;
        return out;
    }
    const Matrix raw = gaussian_matrix(base.matrix_form.rows(),
                                       base.matrix_form.cols(), 0.0, 1.0, seed);
    return make_perturbation(base, epsilon_A, raw, operator_norm(base),
                             spectral_norm(raw));
}

PerturbedOperator make_perturbation(const SensingOperator& base,
                                    double epsilon_A, const Matrix& raw_draw,
                                    double base_norm, double raw_norm) {
    PerturbedOperator out;
    out.base = base;
    if (epsilon_A == 0.0 || raw_norm == 0.0) {
        out.perturbation = Matrix::Zero(base.matrix_form.rows(),
                                        base.matrix_form.cols());
        out.epsilon_A = 0.0;
        out.hat = base;
        return out;
    }
    out.perturbation = raw_draw * (epsilon_A * base_norm / raw_norm);
    out.epsilon_A = epsilon_A;
    out.hat = base;
    out.hat.matrix_form = base.matrix_form + out.perturbation;
    return out;
}

InstanceBuilder::InstanceBuilder(Index m, Index n, Index measurements,
                                 RngSeed seed)
    : m_(m), n_(n), measurements_(measurements), seed_(seed) {
    check_dims(measurements, m, n);
    base_ = make_gaussian_operator(measurements, m, n,
                                   derive_stream(seed, streams::kOperator));
}

ProblemInstance InstanceBuilder::build(Index r, double eps_A_target,
                                       double eps_y_target) const {
    if (r < 1 || r > std::min(m_, n_)) {
        throw std::invalid_argument("make_instance: need 1 <= r <= min(m, n)");
    }
    if (eps_A_target < 0.0 || eps_y_target < 0.0 || eps_y_target >= 1.0) {
        throw std::invalid_argument(
            "make_instance: need eps_A >= 0 and 0 <= eps_y < 1");
    }
    ProblemInstance inst;
    inst.seed = seed_;
    inst.rank_r = r;
    inst.eps_A_target = eps_A_target;
    inst.eps_y_target = eps_y_target;
    inst.truth =
        low_rank_product(m_, n_, r, derive_stream(seed_, streams::kSignal));

    if (eps_A_target > 0.0 && !norms_ready_) {
        raw_perturbation_ =
            gaussian_matrix(measurements_, m_ * n_, 0.0, 1.0,
                            derive_stream(seed_, streams::kPerturbation));
        base_norm_ = operator_norm(base_);
        raw_norm_ = spectral_norm(raw_perturbation_);
        norms_ready_ = true;
    }
    if (eps_A_target > 0.0) {
        inst.op = make_perturbation(base_, eps_A_target, raw_perturbation_,
                                    base_norm_, raw_norm_);
    } else {
        inst.op = make_perturbation(base_, 0.0, RngSeed{0});
    }

    const Vector y0 = inst.op.base.apply(inst.truth);
    if (eps_y_target > 0.0) {
        GaussianStream g(derive_stream(seed_, streams::kNoise));
        Vector direction(measurements_);
        for (Index i = 0; i < measurements_; ++i) direction[i] = g.next();
        // Scale c so that ||c g|| / ||y0 + c g|| equals the target exactly:
        // quadratic in c from squaring both sides.
        const double t2 = eps_y_target * eps_y_target;
        const double qa = direction.squaredNorm() * (1.0 - t2);
        const double qb = -2.0 * t2 * y0.dot(direction);
        const double qc = -t2 * y0.squaredNorm();
        const double disc = qb * qb - 4.0 * qa * qc;
        const double scale = (-qb + std::sqrt(std::max(disc, 0.0))) / (2.0 * qa);
        inst.noise = scale * direction;
    } else {
        inst.noise = Vector::Zero(measurements_);
    }
    inst.clean_y = y0 + inst.noise;
    inst.observed_y = inst.clean_y;
    const double denom = inst.clean_y.norm();
    inst.epsilon_y = denom > 0.0 ? inst.noise.norm() / denom : 0.0;
    return inst;
}

ProblemInstance make_instance(Index m, Index n, Index r, Index measurements,
                              double eps_A_target, double eps_y_target,
                              RngSeed seed) {
    return InstanceBuilder(m, n, measurements, seed)
        .build(r, eps_A_target, eps_y_target);
}

double operator_norm(const SensingOperator& op) {
    return spectral_norm(op.matrix_form);
}

double restricted_operator_norm(const SensingOperator& op, Index r,
                                int samples, RngSeed seed) {
    if (r < 1) throw std::invalid_argument("restricted_operator_norm: r >= 1");
    if (samples < 1) {
        throw std::invalid_argument("restricted_operator_norm: samples >= 1");
    }
    const Index rr = std::min(r, std::min(op.rows, op.cols));
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        Matrix x = random_unit_rank_r(op.rows, op.cols, rr,
                                      derive_stream(seed, 1000 + s));
        best = std::max(best, refine_restricted_max(op, x, rr));
    }
    return std::sqrt(best);
}

RicEstimate estimate_ric(const SensingOperator& op, Index r, int samples,
                         RngSeed seed) {
    if (r < 1) throw std::invalid_argument("estimate_ric: r >= 1");
    if (samples < 1) throw std::invalid_argument("estimate_ric: samples >= 1");
    const Index rr = std::min(r, std::min(op.rows, op.cols));
    // Shift above the top of the unrestricted spectrum keeps the descent
    // operator PSD.
    const double shift = operator_norm(op);
    const double shift2 = shift * shift * 1.01 + 1e-12;
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const RngSeed sample_seed = derive_stream(seed, 2000 + s);
        Matrix x_up = random_unit_rank_r(op.rows, op.cols, rr, sample_seed);
        Matrix x_down = x_up;
        const double q_max = refine_restricted_max(op, x_up, rr);
        const double q_min = refine_restricted_min(op, x_down, rr, shift2);
        worst = std::max(worst, std::abs(q_max - 1.0));
        worst = std::max(worst, std::abs(q_min - 1.0));
    }
    RicEstimate est;
    est.r = r;
    est.delta_lower = worst;
    est.samples = samples;
    est.seed = seed;
    return est;
}

void save_instance(const ProblemInstance& inst, std::ostream& out) {
    out << "splr-instance 1\n";
    out << inst.truth.rows() << ' ' << inst.truth.cols() << ' '
        << inst.op.base.measurements << ' ' << inst.rank_r << ' '
        << inst.seed.value << ' ';
    write_value(out, inst.eps_A_target);
    out << ' ';
    write_value(out, inst.eps_y_target);
    out << ' ';
    write_value(out, inst.op.epsilon_A);
    out << ' ';
    write_value(out, inst.epsilon_y);
    out << '\n';
    out << "X\n";
    write_matrix(out, inst.truth);
    out << "ASEED\n"
        << derive_stream(inst.seed, streams::kOperator).value << '\n';
    out << "E\n";
    write_matrix(out, inst.op.perturbation);
    out << "Z\n";
    write_vector(out, inst.noise);
    out << "Y\n";
    write_vector(out, inst.clean_y);
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    save_instance(inst, out);
}

ProblemInstance load_instance(std::istream& in) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "splr-instance" ||
        version != "1") {
        throw std::runtime_error("instance file: bad header");
    }
    Index m, n, measurements, r;
    std::uint64_t seed_value;
    ProblemInstance inst;
    if (!(in >> m >> n >> measurements >> r >> seed_value >>
          inst.eps_A_target >> inst.eps_y_target)) {
        throw std::runtime_error("instance file: bad dimension line");
    }
    double eps_A_achieved, eps_y_achieved;
    if (!(in >> eps_A_achieved >> eps_y_achieved)) {
        throw std::runtime_error("instance file: bad dimension line");
    }
    inst.seed = RngSeed{seed_value};
    inst.rank_r = r;
    expect_tag(in, "X");
    inst.truth = read_matrix(in, m, n);
    expect_tag(in, "ASEED");
    std::uint64_t a_seed;
    if (!(in >> a_seed)) {
        throw std::runtime_error("instance file: missing operator seed");
    }
    SensingOperator base;
    base.measurements = measurements;
    base.rows = m;
    base.cols = n;
    base.matrix_form = gaussian_matrix(
        measurements, m * n, 0.0,
        1.0 / std::sqrt(static_cast<double>(measurements)), RngSeed{a_seed});
    expect_tag(in, "E");
    const Matrix perturbation = read_matrix(in, measurements, m * n);
    inst.op.base = base;
    inst.op.perturbation = perturbation;
    inst.op.epsilon_A = eps_A_achieved;
    inst.op.hat = base;
    inst.op.hat.matrix_form = base.matrix_form + perturbation;
    expect_tag(in, "Z");
    inst.noise = read_vector(in, measurements);
    expect_tag(in, "Y");
    inst.clean_y = read_vector(in, measurements);
    inst.observed_y = inst.clean_y;
    inst.epsilon_y = eps_y_achieved;
    return inst;
}

ProblemInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    return load_instance(in);
}

}  // namespace splr
