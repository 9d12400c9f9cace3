#pragma once

#include "sdquant/numkit.hpp"
#include "sdquant/types.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>

// Reconstruction decoders: Sobolev dual frame (closed form), consistency
// (feasibility) decoding, and constrained l1 minimization. The consistency
// and l1 decoders share one primal-dual solver; the feasibility tube
// ||D^-r (A z - q)||_inf <= delta/2 uses the component-wise (real/imag) sup
// norm, see box_inf_norm.
namespace sdquant::decode {

struct DecoderConfig {
    int order = 1;
    double delta = 0.1;
    double feasibility_tol = 1e-7;
    Index max_iterations = 50000;
    double convergence_tol = 1e-7;

    static DecoderConfig defaults(int order, double delta) {
        DecoderConfig cfg;
        cfg.order = order;
        cfg.delta = delta;
        cfg.feasibility_tol = 1e-6 * delta;
        return cfg;
    }
};

struct DecodeOutcome {
    ComplexVector x_hat;
    double residual_inf = 0.0; // ||D^-r (A x_hat - q)||_inf, component-wise
    Index iterations = 0;
    bool converged = false;
};

namespace detail {

/// (D^H)^-r v: r suffix (reverse cumulative) sums.
inline ComplexVector apply_dinv_adjoint_power(ComplexVector v, int r) {
    for (int pass = 0; pass < r; ++pass) {
        Complex acc = 0.0;
        for (Index i = v.size(); i-- > 0;) {
            acc += v[i];
            v[i] = acc;
        }
    }
    return v;
}

/// Spectral norm estimate of z -> D^-r (A z) by power iteration on K^H K.
inline double operator_norm_estimate(const ComplexMatrix& a, int r) {
    const Index n = a.cols();
    ComplexVector v = ComplexVector::Zero(n);
    // fixed deterministic start with energy in every coordinate
    for (Index i = 0; i < n; ++i)
        v[i] = Complex(1.0 + 0.1 * std::cos(1.7 * static_cast<double>(i)),
                       0.1 * std::sin(2.3 * static_cast<double>(i)));
    v /= v.norm();
    double lambda = 0.0;
    for (int it = 0; it < 60; ++it) {
        ComplexVector w = numkit::apply_dinv_power(a * v, r);
        ComplexVector z = a.adjoint() * apply_dinv_adjoint_power(std::move(w), r);
        lambda = z.norm();
        if (lambda == 0.0) return 1.0;
        v = z / lambda;
    }
    return std::sqrt(lambda) * 1.01;
}

inline Complex clip_box(Complex w, double c) {
    return {std::clamp(w.real(), -c, c), std::clamp(w.imag(), -c, c)};
}

// Chambolle-Pock on  min l1_weight * ||z||_1  s.t.  ||K z - b||_inf <= eps,
// K = D^-r A, b = D^-r q. Dual prox via the Moreau identity
// p <- v - sigma proj_C(v / sigma) with C the eps-box around b (this is a
// component-wise soft threshold of v - sigma b at level sigma eps); primal
// prox is the complex magnitude soft threshold (identity when l1_weight = 0).
inline DecodeOutcome primal_dual_solve(const ComplexMatrix& a, const ComplexVector& q,
                                       const DecoderConfig& cfg, double l1_weight) {
    const Index m = a.rows();
    const Index n = a.cols();
    const int r = cfg.order;
    const double eps = cfg.delta / 2.0;
    const ComplexVector b = numkit::apply_dinv_power(q, r);

    auto apply_k = [&](const ComplexVector& z) { return numkit::apply_dinv_power(a * z, r); };
    auto apply_kh = [&](const ComplexVector& p) {
        return (a.adjoint() * apply_dinv_adjoint_power(p, r)).eval();
    };
    auto feasibility = [&](const ComplexVector& z) { return box_inf_norm(apply_k(z) - b); };

    DecodeOutcome out;
    out.x_hat = ComplexVector::Zero(n);
    out.residual_inf = box_inf_norm(b);
    if (out.residual_inf <= eps + cfg.feasibility_tol) {
        out.converged = true; // zero is already feasible (and l1-optimal)
        return out;
    }

    const double opnorm = operator_norm_estimate(a, r);
    const double tau = 0.95 / opnorm;
    const double sigma = 0.95 / opnorm;

    ComplexVector z = ComplexVector::Zero(n);
    ComplexVector zbar = z;
    ComplexVector p = ComplexVector::Zero(m);
    const Index check_every = 25;
    double prev_objective = std::numeric_limits<double>::infinity();

    for (Index it = 1; it <= cfg.max_iterations; ++it) {
        ComplexVector v = p + sigma * apply_k(zbar);
        for (Index i = 0; i < m; ++i) {
            const Complex d = v[i] - sigma * b[i];
            p[i] = d - clip_box(d, sigma * eps);
        }
        ComplexVector z_new = z - tau * apply_kh(p);
        if (l1_weight > 0.0) {
            const double level = tau * l1_weight;
            for (Index i = 0; i < n; ++i) {
                const double mag = std::abs(z_new[i]);
                z_new[i] = (mag <= level) ? Complex{0.0, 0.0} : z_new[i] * ((mag - level) / mag);
            }
        }
        zbar = 2.0 * z_new - z;
        z = std::move(z_new);

        if (it % check_every == 0 || it == cfg.max_iterations) {
            const double f = feasibility(z);
            if (f <= eps + cfg.feasibility_tol) {
                if (l1_weight == 0.0) {
                    out.x_hat = z;
                    out.residual_inf = f;
                    out.iterations = it;
                    out.converged = true;
                    return out;
                }
                const double objective = z.cwiseAbs().sum();
                if (std::abs(objective - prev_objective) <= cfg.convergence_tol * std::max(1.0, objective)) {
                    out.x_hat = z;
                    out.residual_inf = f;
                    out.iterations = it;
                    out.converged = true;
                    return out;
                }
                prev_objective = objective;
            } else {
                prev_objective = std::numeric_limits<double>::infinity();
            }
        }
    }
    out.x_hat = z;
    out.residual_inf = feasibility(z);
    out.iterations = cfg.max_iterations;
    out.converged = out.residual_inf <= eps + cfg.feasibility_tol;
    return out;
}

} // namespace detail

// r-th order Sobolev dual of A: (A^H (D^H)^-r D^-r A)^-1 A^H (D^H)^-r D^-r,
// the left inverse of A adapted to Sigma-Delta noise shaping. r = 0 is the
// plain Moore-Penrose pseudoinverse (test hook).
inline ComplexMatrix sobolev_dual(const ComplexMatrix& a, int r) {
    if (r < 0) throw std::invalid_argument("sobolev_dual: r must be >= 0");
    if (a.rows() < a.cols()) throw std::invalid_argument("sobolev_dual: A must be m x k with m >= k");
    const ComplexMatrix b = numkit::apply_dinv_power_cols(a, r); // D^-r A
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(b);
    if (qr.rank() < a.cols())
        throw singular_operator_error("sobolev_dual: D^-r A is rank deficient");
    // A_sob = (B^H B)^-1 B^H D^-r, computed as ((D^H)^-r (B (B^H B)^-1))^H
    const ComplexMatrix normal = b.adjoint() * b;
    const ComplexMatrix pseudo = normal.ldlt().solve(b.adjoint()).adjoint(); // B (B^H B)^-1
    ComplexMatrix dual_t(a.rows(), a.cols());
    for (Index c = 0; c < pseudo.cols(); ++c)
        dual_t.col(c) = detail::apply_dinv_adjoint_power(pseudo.col(c), r);
    return dual_t.adjoint();
}

inline DecodeOutcome sobolev_decode(const ComplexMatrix& a, int r, const ComplexVector& q) {
    if (a.rows() != q.size()) throw std::invalid_argument("sobolev_decode: size mismatch");
    const ComplexMatrix b = numkit::apply_dinv_power_cols(a, r);
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(b);
    if (qr.rank() < a.cols())
        throw singular_operator_error("sobolev_decode: D^-r A is rank deficient");
    DecodeOutcome out;
    out.x_hat = qr.solve(numkit::apply_dinv_power(q, r));
    out.residual_inf = box_inf_norm(numkit::apply_dinv_power(a * out.x_hat - q, r));
    out.iterations = 1;
    out.converged = true;
    return out;
}

/// Any point of the feasibility tube ||D^-r (A z - q)||_inf <= delta/2.
inline DecodeOutcome consistent_decode(const ComplexMatrix& a, int r, const ComplexVector& q,
                                       DecoderConfig cfg) {
    if (a.rows() != q.size()) throw std::invalid_argument("consistent_decode: size mismatch");
    cfg.order = r;
    return detail::primal_dual_solve(a, q, cfg, 0.0);
}

/// min ||z||_1 s.t. ||D^-r (A z - q)||_inf <= delta/2 over complex z.
inline DecodeOutcome l1_decode(const ComplexMatrix& a, int r, const ComplexVector& q,
                               DecoderConfig cfg) {
    if (a.rows() != q.size()) throw std::invalid_argument("l1_decode: size mismatch");
    cfg.order = r;
    return detail::primal_dual_solve(a, q, cfg, 1.0);
}

/// Per-draw reconstruction error ||x - x_hat||_2.
inline double sparse_error(const ComplexVector& x, const ComplexVector& x_hat) {
    if (x.size() != x_hat.size()) throw std::invalid_argument("sparse_error: length mismatch");
    return (x - x_hat).norm();
}

} // namespace sdquant::decode
