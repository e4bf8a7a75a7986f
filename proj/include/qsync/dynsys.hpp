#pragma once

// Vector fields, Jacobian providers (analytic and finite-difference),
// periodic forcing signals and sampling boxes.

#include "qsync/matrix_measure.hpp"
#include "qsync/sampling.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace qsync {

/// Time-varying vector field dx/dt = f(x, t) with an optional analytic Jacobian.
struct VectorField {
    int dim = 0;
    std::function<Vec(const Vec&, double)> eval;
    std::function<Mat(const Vec&, double)> jacobian;  // may be empty

    bool has_jacobian() const { return static_cast<bool>(jacobian); }
};

/// T-periodic input signal r(t).
struct PeriodicSignal {
    int dim = 1;
    double period = 0.0;
    std::function<Vec(double)> eval;
    std::string id;  // participates in structural comparisons
};

/// r(t) = offset + amplitude * sin(omega * t), componentwise identical.
inline PeriodicSignal sinusoid_forcing(double offset, double amplitude, double omega,
                                       int dim = 1) {
    if (!(omega > 0.0)) throw std::invalid_argument("sinusoid_forcing: omega must be positive");
    PeriodicSignal s;
    s.dim = dim;
    s.period = 2.0 * std::acos(-1.0) / omega;
    s.id = "sin(" + std::to_string(offset) + "," + std::to_string(amplitude) + "," +
           std::to_string(omega) + ")";
    s.eval = [offset, amplitude, omega, dim](double t) {
        return Vec::Constant(dim, offset + amplitude * std::sin(omega * t));
    };
    return s;
}

/// Checks ‖r(t+T) - r(t)‖ over sampled t; returns the worst deviation.
inline double periodicity_defect(const PeriodicSignal& s, int samples = 64) {
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = 0.37 + 2.1 * k;
        worst = std::max(worst, (s.eval(t + s.period) - s.eval(t)).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

/// Axis-aligned state box with a time range; the domain over which sampled
/// "for all x, for all t" conditions are evaluated.
struct StateBox {
    Vec lower;
    Vec upper;
    double t_begin = 0.0;
    double t_end = 0.0;

    int dim() const { return static_cast<int>(lower.size()); }

    void validate(const char* who) const {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw std::invalid_argument(std::string(who) + ": box bounds inconsistent");
        if (((upper - lower).array() < 0.0).any())
            throw std::invalid_argument(std::string(who) + ": box has lower > upper");
        if (t_end < t_begin)
            throw std::invalid_argument(std::string(who) + ": box time range reversed");
    }
};

inline StateBox make_box(std::initializer_list<double> lower, std::initializer_list<double> upper,
                         double t_begin = 0.0, double t_end = 0.0) {
    StateBox b;
    b.lower = Eigen::Map<const Vec>(lower.begin(), static_cast<Eigen::Index>(lower.size()));
    b.upper = Eigen::Map<const Vec>(upper.begin(), static_cast<Eigen::Index>(upper.size()));
    b.t_begin = t_begin;
    b.t_end = t_end;
    b.validate("make_box");
    return b;
}

/// Default central-difference step for states of magnitude ~‖x‖.
inline double fd_step_for(const Vec& x) {
    return 1e-6 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
}

/// Central-difference Jacobian, entry (i,j) = (f_i(x+s e_j) - f_i(x-s e_j)) / (2s).
inline Mat jacobian_fd(const VectorField& f, const Vec& x, double t, double step = 0.0) {
    if (step == 0.0) step = fd_step_for(x);
    if (!(step >= 1e-9 && step <= 1e-3))
        throw std::invalid_argument("jacobian_fd: step outside [1e-9, 1e-3]");
    Mat j(f.dim, x.size());
    Vec xp = x, xm = x;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        xp(c) = x(c) + step;
        xm(c) = x(c) - step;
        const Vec fp = f.eval(xp, t);
        const Vec fm = f.eval(xm, t);
        if (!fp.allFinite() || !fm.allFinite())
            throw std::domain_error("jacobian_fd: field evaluation is non-finite");
        j.col(c) = (fp - fm) / (2.0 * step);
        xp(c) = x(c);
        xm(c) = x(c);
    }
    return j;
}

struct JacobianConsistencyReport {
    double max_abs_deviation = 0.0;
    Vec worst_state;
    double worst_time = 0.0;
    int worst_row = -1;
    int worst_col = -1;
};

/// Max entrywise |analytic - finite difference| over low-discrepancy samples
/// of the box. Gate this before trusting analytic Jacobians in certificates.
inline JacobianConsistencyReport check_jacobian_consistency(const VectorField& f,
                                                            const StateBox& box,
                                                            int samples = 256) {
    if (!f.has_jacobian())
        throw std::invalid_argument("check_jacobian_consistency: field has no analytic Jacobian");
    box.validate("check_jacobian_consistency");

    Vec lo(box.dim() + 1), hi(box.dim() + 1);
    lo.head(box.dim()) = box.lower;
    hi.head(box.dim()) = box.upper;
    lo(box.dim()) = box.t_begin;
    hi(box.dim()) = box.t_end;

    JacobianConsistencyReport rep;
    for (const Vec& pt : halton_box_points(lo, hi, samples)) {
        const Vec x = pt.head(box.dim());
        const double t = pt(box.dim());
        const Mat diff = (f.jacobian(x, t) - jacobian_fd(f, x, t)).cwiseAbs();
        Eigen::Index r, c;
        const double dev = diff.maxCoeff(&r, &c);
        if (dev > rep.max_abs_deviation) {
            rep.max_abs_deviation = dev;
            rep.worst_state = x;
            rep.worst_time = t;
            rep.worst_row = static_cast<int>(r);
            rep.worst_col = static_cast<int>(c);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Building blocks for quorum networks: node dynamics parameterized by the
// state of an attached medium, medium dynamics parameterized by an aggregated
// input, and the coupling maps between the two layers.
// ---------------------------------------------------------------------------

/// Node dynamics f(x, z, t) with z the state of the attached medium.
struct NodeField {
    int state_dim = 0;
    int medium_dim = 0;
    std::string dynamics_id;
    std::function<Vec(const Vec&, const Vec&, double)> eval;
    std::function<Mat(const Vec&, const Vec&, double)> jac_state;   // df/dx, optional
    std::function<Mat(const Vec&, const Vec&, double)> jac_medium;  // df/dz, optional
};

/// Medium dynamics g(z, psi, t) with psi the aggregated node input.
struct MediumField {
    int state_dim = 0;
    int input_dim = 0;
    std::string dynamics_id;
    std::function<Vec(const Vec&, const Vec&, double)> eval;
    std::function<Mat(const Vec&, const Vec&, double)> jac_state;  // dg/dz, optional
    std::function<Mat(const Vec&, const Vec&, double)> jac_input;  // dg/dpsi, optional
};

/// Per-node contribution u(x) to the aggregated medium input.
struct MediumInput {
    int node_dim = 0;
    int medium_dim = 0;
    std::string id;
    std::function<Vec(const Vec&)> eval;
    std::function<Mat(const Vec&)> jac;  // du/dx, optional
};

/// Diffusive map applied between media or between directly coupled nodes.
struct DiffusiveCoupling {
    int dim = 0;
    std::string id;
    std::function<Vec(const Vec&)> eval;
};

namespace detail {

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, int out_dim) {
    const double step = fd_step_for(x);
    Mat j(out_dim, x.size());
    Vec xp = x, xm = x;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        xp(c) = x(c) + step;
        xm(c) = x(c) - step;
        j.col(c) = (f(xp) - f(xm)) / (2.0 * step);
        xp(c) = x(c);
        xm(c) = x(c);
    }
    return j;
}

}  // namespace detail

inline Mat node_jac_state(const NodeField& f, const Vec& x, const Vec& z, double t) {
    if (f.jac_state) return f.jac_state(x, z, t);
    return detail::fd_jacobian([&](const Vec& p) { return f.eval(p, z, t); }, x, f.state_dim);
}

inline Mat node_jac_medium(const NodeField& f, const Vec& x, const Vec& z, double t) {
    if (f.jac_medium) return f.jac_medium(x, z, t);
    return detail::fd_jacobian([&](const Vec& p) { return f.eval(x, p, t); }, z, f.state_dim);
}

inline Mat medium_jac_state(const MediumField& g, const Vec& z, const Vec& psi, double t) {
    if (g.jac_state) return g.jac_state(z, psi, t);
    return detail::fd_jacobian([&](const Vec& p) { return g.eval(p, psi, t); }, z, g.state_dim);
}

inline Mat medium_jac_input(const MediumField& g, const Vec& z, const Vec& psi, double t) {
    if (g.jac_input) return g.jac_input(z, psi, t);
    return detail::fd_jacobian([&](const Vec& p) { return g.eval(z, p, t); }, psi, g.state_dim);
}

inline Mat medium_input_jac(const MediumInput& u, const Vec& x) {
    if (u.jac) return u.jac(x);
    return detail::fd_jacobian(u.eval, x, u.medium_dim);
}

}  // namespace qsync
