#pragma once

// Dense matrix measures (logarithmic norms), induced operator norms and the
// weighted block-partition bound used by the contraction certificates.

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsync {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Vector norm / matrix measure family.
enum class MeasureKind { L1, L2, Linf };

inline const char* to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::L1: return "mu1";
        case MeasureKind::L2: return "mu2";
        case MeasureKind::Linf: return "muinf";
    }
    return "?";
}

/// Thrown when an induced norm between two different vector norms is requested.
class UnsupportedNormError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double last_valid_time)
        : std::runtime_error(what), last_valid_time(last_valid_time) {}
    double last_valid_time;
};

namespace detail {

inline void require_finite(const Mat& a, const char* who) {
    if (!a.allFinite())
        throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

inline void require_square(const Mat& a, const char* who) {
    if (a.rows() == 0 || a.rows() != a.cols())
        throw std::invalid_argument(std::string(who) + ": matrix must be square and non-empty");
}

inline double spectral_norm(const Mat& b) {
    if (b.size() == 1) return std::abs(b(0, 0));
    Eigen::JacobiSVD<Mat> svd(b);
    return svd.singularValues()(0);
}

}  // namespace detail

/// Vector norm |x| for the given kind.
inline double vector_norm(const Vec& x, MeasureKind kind) {
    switch (kind) {
        case MeasureKind::L1: return x.lpNorm<1>();
        case MeasureKind::L2: return x.norm();
        case MeasureKind::Linf: return x.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
}

/// Induced matrix norm ‖B‖ for the vector norm of the given kind.
/// B may be rectangular; L1 is the max column abs sum, Linf the max row abs
/// sum, L2 the largest singular value.
inline double induced_norm(const Mat& b, MeasureKind kind) {
    detail::require_finite(b, "induced_norm");
    if (b.size() == 0) throw std::invalid_argument("induced_norm: empty matrix");
    switch (kind) {
        case MeasureKind::L1: return b.cwiseAbs().colwise().sum().maxCoeff();
        case MeasureKind::Linf: return b.cwiseAbs().rowwise().sum().maxCoeff();
        case MeasureKind::L2: return detail::spectral_norm(b);
    }
    return 0.0;
}

/// Matrix measure mu(A).
///   mu1   = max_j ( a_jj + sum_{i != j} |a_ij| )        (column based)
///   mu2   = max eigenvalue of (A + A^T)/2
///   muinf = max_i ( a_ii + sum_{j != i} |a_ij| )        (row based)
inline double measure(const Mat& a, MeasureKind kind) {
    detail::require_square(a, "measure");
    detail::require_finite(a, "measure");
    const Eigen::Index n = a.rows();
    switch (kind) {
        case MeasureKind::L1: {
            double worst = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j) {
                double s = a(j, j);
                for (Eigen::Index i = 0; i < n; ++i)
                    if (i != j) s += std::abs(a(i, j));
                worst = std::max(worst, s);
            }
            return worst;
        }
        case MeasureKind::Linf: {
            double worst = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) {
                double s = a(i, i);
                for (Eigen::Index j = 0; j < n; ++j)
                    if (j != i) s += std::abs(a(i, j));
                worst = std::max(worst, s);
            }
            return worst;
        }
        case MeasureKind::L2: {
            Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()),
                                                  Eigen::EigenvaluesOnly);
            return es.eigenvalues().maxCoeff();
        }
    }
    return 0.0;
}

/// Difference-quotient oracle (‖I + hA‖ - 1)/h for the definitional one-sided
/// limit of the measure. Converges to measure(a, kind) from above as h -> 0+.
inline double measure_limit_oracle(const Mat& a, MeasureKind kind, double h) {
    detail::require_square(a, "measure_limit_oracle");
    detail::require_finite(a, "measure_limit_oracle");
    if (!(h > 0.0) || h > 1e-3)
        throw std::invalid_argument("measure_limit_oracle: h must lie in (0, 1e-3]");
    const Mat m = Mat::Identity(a.rows(), a.cols()) + h * a;
    return (induced_norm(m, kind) - 1.0) / h;
}

/// Constant change of metric: the measure is evaluated on theta * A * theta^-1.
struct WeightSpec {
    Mat theta;
    MeasureKind kind = MeasureKind::L2;
};

/// Condition-number cutoff above which a weight matrix is rejected as singular.
inline constexpr double kWeightConditionLimit = 1e12;

inline double weighted_measure(const Mat& a, const WeightSpec& w) {
    detail::require_square(a, "weighted_measure");
    detail::require_square(w.theta, "weighted_measure(theta)");
    if (w.theta.rows() != a.rows())
        throw std::invalid_argument("weighted_measure: theta and A dimensions differ");
    Eigen::JacobiSVD<Mat> svd(w.theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0 || sv(0) / smin > kWeightConditionLimit)
        throw std::invalid_argument("weighted_measure: theta is numerically singular");
    const Mat transformed = w.theta * a * svd.solve(Mat::Identity(a.rows(), a.cols()));
    return measure(transformed, w.kind);
}

/// Induced operator norm between two vector-norm families. Only matching
/// families are computable in closed form; mixed requests are rejected.
inline double operator_norm(const Mat& b, MeasureKind from_kind, MeasureKind to_kind) {
    detail::require_finite(b, "operator_norm");
    if (from_kind != to_kind)
        throw UnsupportedNormError("operator_norm: mixed-kind induced norms are not supported");
    return induced_norm(b, from_kind);
}

/// Block partition of a square matrix: contiguous diagonal blocks with a
/// positive weight and a norm family per block. The associated combined norm
/// is |z| = sum_p theta_p |x_p|_p.
struct BlockPartition {
    std::vector<int> block_sizes;
    std::vector<double> weights;
    std::vector<MeasureKind> kinds;

    int total_dim() const { return std::accumulate(block_sizes.begin(), block_sizes.end(), 0); }
    std::size_t block_count() const { return block_sizes.size(); }

    int offset(std::size_t p) const {
        int off = 0;
        for (std::size_t q = 0; q < p; ++q) off += block_sizes[q];
        return off;
    }

    void validate(Eigen::Index dim, const char* who) const {
        if (block_sizes.empty() || block_sizes.size() != weights.size() ||
            block_sizes.size() != kinds.size())
            throw std::invalid_argument(std::string(who) + ": inconsistent partition arrays");
        for (int s : block_sizes)
            if (s <= 0) throw std::invalid_argument(std::string(who) + ": block sizes must be positive");
        for (double w : weights)
            if (!(w > 0.0)) throw std::invalid_argument(std::string(who) + ": weights must be positive");
        if (total_dim() != dim)
            throw std::invalid_argument(std::string(who) + ": partition does not cover the matrix");
    }
};

/// Upper bound on the measure of J in the weighted combined norm
/// |z| = sum_p theta_p |x_p|_p:
///
///   max_p [ mu_p(J_pp) + sum_{q != p} (theta_q / theta_p) ‖J_qp‖ ]
///
/// where ‖J_qp‖ is the operator norm of the block in rows q, columns p,
/// mapping the p-block norm into the q-block norm. A negative return
/// certifies contraction of J in that combined norm. Exact zero blocks are
/// skipped, so partitions mixing norm families are accepted whenever every
/// nonzero off-diagonal block joins blocks of the same family.
inline double block_measure_bound(const Mat& j, const BlockPartition& p) {
    detail::require_square(j, "block_measure_bound");
    detail::require_finite(j, "block_measure_bound");
    p.validate(j.rows(), "block_measure_bound");

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t bp = 0; bp < p.block_count(); ++bp) {
        const int op = p.offset(bp), np = p.block_sizes[bp];
        double bound = measure(j.block(op, op, np, np), p.kinds[bp]);
        for (std::size_t bq = 0; bq < p.block_count(); ++bq) {
            if (bq == bp) continue;
            const int oq = p.offset(bq), nq = p.block_sizes[bq];
            const Mat cross = j.block(oq, op, nq, np);
            if (cross.isZero(0.0)) continue;
            bound += (p.weights[bq] / p.weights[bp]) *
                     operator_norm(cross, p.kinds[bp], p.kinds[bq]);
        }
        worst = std::max(worst, bound);
    }
    return worst;
}

}  // namespace qsync
