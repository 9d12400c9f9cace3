#pragma once

#include "sdquant/types.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

// Dense complex linear algebra around the first-difference operator D:
// lower bidiagonal, D(i,i) = 1, D(i+1,i) = -1. D^-1 is the prefix-sum
// (cumulative sum) operator; all D^{+-r} applications below run in O(m r)
// without materializing a matrix.
namespace sdquant::numkit {

inline RealMatrix materialize_difference(Index m) {
    if (m < 1) throw std::invalid_argument("materialize_difference: m must be >= 1");
    RealMatrix d = RealMatrix::Identity(m, m);
    for (Index i = 1; i < m; ++i) d(i, i - 1) = -1.0;
    return d;
}

/// D^-r v: r successive prefix sums. Exactly the forward substitution for
/// the triangular system D^r x = v.
inline ComplexVector apply_dinv_power(ComplexVector v, int r) {
    if (r < 0) throw std::invalid_argument("apply_dinv_power: r must be >= 0");
    for (int pass = 0; pass < r; ++pass) {
        Complex acc = 0.0;
        for (Index i = 0; i < v.size(); ++i) {
            acc += v[i];
            v[i] = acc;
        }
    }
    return v;
}

/// D^r v: r successive first differences with implicit zero boundary (v_0 := 0).
inline ComplexVector apply_dpower(ComplexVector v, int r) {
    if (r < 0) throw std::invalid_argument("apply_dpower: r must be >= 0");
    for (int pass = 0; pass < r; ++pass) {
        Complex prev = 0.0;
        for (Index i = 0; i < v.size(); ++i) {
            const Complex cur = v[i];
            v[i] = cur - prev;
            prev = cur;
        }
    }
    return v;
}

/// Column-wise D^-r M.
inline ComplexMatrix apply_dinv_power_cols(const ComplexMatrix& m, int r) {
    ComplexMatrix out(m.rows(), m.cols());
    for (Index c = 0; c < m.cols(); ++c) out.col(c) = apply_dinv_power(m.col(c), r);
    return out;
}

/// Dense D^-r (all-ones lower triangle for r=1), used where an explicit
/// matrix is required (numeric SVD of D^-r).
inline RealMatrix materialize_dinv_power(Index m, int r) {
    if (m < 1) throw std::invalid_argument("materialize_dinv_power: m must be >= 1");
    if (r < 1) throw std::invalid_argument("materialize_dinv_power: r must be >= 1");
    RealMatrix out = RealMatrix::Identity(m, m);
    for (int pass = 0; pass < r; ++pass) {
        for (Index c = 0; c < m; ++c) {
            double acc = 0.0;
            for (Index i = 0; i < m; ++i) {
                acc += out(i, c);
                out(i, c) = acc;
            }
        }
    }
    return out;
}

// Closed-form SVD data for D (and through it, D^-1). The stored cosine
// basis V has column l (1-based) equal to the left singular vector of D^-1
// for its l-th LARGEST singular value; those are the low-frequency vectors
// (column 1 is a quarter-period cosine). The companion singular values
// 2 cos(l pi/(2m+1)) are the singular values of D in descending order, so
// sigma_l(D^-1) = 1 / sigma_{m+1-l}(D).
struct AnalyticSvd {
    Index m = 0;
    RealVector singular_values_of_D; // descending, in (0, 2)
    RealMatrix V;                    // m x m, orthonormal columns

    /// l-th largest singular value of D^-1 (1-based l).
    double sigma_dinv(Index l) const {
        return 1.0 / singular_values_of_D[m - l];
    }

    /// First l columns: the low-frequency subspace V_l of D^-1.
    RealMatrix low_frequency_basis(Index l) const { return V.leftCols(l); }
};

inline AnalyticSvd analytic_svd_dinv(Index m) {
    if (m < 1) throw std::invalid_argument("analytic_svd_dinv: m must be >= 1");
    AnalyticSvd out;
    out.m = m;
    out.singular_values_of_D.resize(m);
    out.V.resize(m, m);
    const double twom1 = 2.0 * static_cast<double>(m) + 1.0;
    const double scale = std::sqrt(2.0 / (static_cast<double>(m) + 0.5));
    for (Index l = 1; l <= m; ++l) {
        out.singular_values_of_D[l - 1] = 2.0 * std::cos(static_cast<double>(l) * M_PI / twom1);
        for (Index k = 1; k <= m; ++k) {
            const double arg = 2.0 * (static_cast<double>(l) - 0.5) *
                               (static_cast<double>(m - k) + 0.5) * M_PI / twom1;
            out.V(k - 1, l - 1) = scale * std::cos(arg);
        }
    }
    return out;
}

struct Svd {
    ComplexMatrix U;
    RealVector S; // non-negative, descending
    ComplexMatrix V;
};

struct RealSvd {
    RealMatrix U;
    RealVector S;
    RealMatrix V;
};

namespace detail {
template <typename SolverT>
void check_svd_info(const SolverT& svd) {
    if (svd.info() != Eigen::Success)
        throw numeric_failure("numeric_svd: decomposition did not converge");
}
} // namespace detail

/// Thin SVD, M = U diag(S) V^H. Jacobi for small problems, divide and
/// conquer above 256 on a side.
inline Svd numeric_svd(const ComplexMatrix& m) {
    if (!all_finite(m)) throw std::invalid_argument("numeric_svd: non-finite input");
    if (std::max(m.rows(), m.cols()) <= 256) {
        Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        detail::check_svd_info(svd);
        return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
    }
    Eigen::BDCSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    detail::check_svd_info(svd);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

inline RealSvd numeric_svd(const RealMatrix& m) {
    if (!m.array().isFinite().all()) throw std::invalid_argument("numeric_svd: non-finite input");
    if (std::max(m.rows(), m.cols()) <= 256) {
        Eigen::JacobiSVD<RealMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        detail::check_svd_info(svd);
        return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
    }
    Eigen::BDCSVD<RealMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    detail::check_svd_info(svd);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Singular values only (descending).
inline RealVector singular_values(const ComplexMatrix& m) {
    if (std::max(m.rows(), m.cols()) <= 256)
        return Eigen::JacobiSVD<ComplexMatrix>(m).singularValues();
    return Eigen::BDCSVD<ComplexMatrix>(m).singularValues();
}

inline RealVector singular_values(const RealMatrix& m) {
    if (std::max(m.rows(), m.cols()) <= 256)
        return Eigen::JacobiSVD<RealMatrix>(m).singularValues();
    return Eigen::BDCSVD<RealMatrix>(m).singularValues();
}

// sin of the largest principal angle between the column spans of P and Q
// (orthonormal columns, equal counts), computed from the orthogonal
// residual (I - P P^H) Q. Stable near zero angle, where the cosine route
// bottoms out at sqrt(eps).
inline double subspace_sin_theta(const ComplexMatrix& p, const ComplexMatrix& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols())
        throw std::invalid_argument("subspace_sin_theta: shape mismatch");
    const ComplexMatrix resid = q - p * (p.adjoint() * q);
    const RealVector s = singular_values(resid);
    return s.size() == 0 ? 0.0 : s[0];
}

} // namespace sdquant::numkit
