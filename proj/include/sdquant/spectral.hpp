#pragma once

#include "sdquant/frames.hpp"
#include "sdquant/numkit.hpp"
#include "sdquant/rng.hpp"
#include "sdquant/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

// Empirical verification of the concentration behaviour of sigma(V_l^H F),
// randomized RIC estimation, and the bounded-singular-vector checker.
namespace sdquant::spectral {

struct SpectrumExtremes {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

/// Extreme singular values of V_l^H F (conjugate transpose applied to Vl).
inline SpectrumExtremes projected_spectrum(const ComplexMatrix& vl, const ComplexMatrix& f) {
    if (vl.rows() != f.rows())
        throw std::invalid_argument("projected_spectrum: row counts differ");
    const RealVector s = numkit::singular_values((vl.adjoint() * f).eval());
    if (s.size() == 0) throw std::invalid_argument("projected_spectrum: empty product");
    return {s[s.size() - 1], s[0]};
}

enum class OmegaPolicy { ExcludeOnesColumn, IncludeOnesColumn, Explicit };

struct Quantiles {
    double p05 = 0.0, p50 = 0.0, p95 = 0.0;
};

struct ConcentrationReport {
    Index l = 0, k = 0, N = 0, m = 0;
    Index trials = 0;
    std::vector<double> sigma_min_over_sqrt_l;
    std::vector<double> sigma_max_over_sqrt_l;
    Quantiles min_quantiles;
    Quantiles max_quantiles;
};

namespace detail {
inline Quantiles quantiles_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    auto at = [&](double p) {
        const double idx = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        const double frac = idx - static_cast<double>(lo);
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };
    return {at(0.05), at(0.50), at(0.95)};
}
} // namespace detail

// Per trial: draw a selection of m rows (with replacement) from the N x k
// harmonic frame and record the extreme singular values of V_l^H F against
// the analytic low-frequency basis of the m x m D^-1, normalized by sqrt(l).
// Trials use streams derived from (master_seed, trial).
inline ConcentrationReport concentration_experiment(Index n, Index k, Index l, Index m,
                                                    Index trials, OmegaPolicy policy,
                                                    std::uint64_t master_seed,
                                                    const std::vector<Index>& explicit_omega = {}) {
    if (!(m >= l && l >= k)) throw std::invalid_argument("concentration_experiment: need m >= l >= k");
    std::vector<Index> omega;
    switch (policy) {
        case OmegaPolicy::ExcludeOnesColumn: // {N-k, ..., N-1}: last k short of the all-ones column
            omega.resize(static_cast<std::size_t>(k));
            std::iota(omega.begin(), omega.end(), n - k);
            break;
        case OmegaPolicy::IncludeOnesColumn:
            omega = frames::last_k_omega(n, k);
            break;
        case OmegaPolicy::Explicit:
            omega = explicit_omega;
            break;
    }
    const frames::HarmonicFrame frame = frames::build_harmonic_frame(n, omega);
    const ComplexMatrix vl = numkit::analytic_svd_dinv(m).low_frequency_basis(l).cast<Complex>();
    const double sqrt_l = std::sqrt(static_cast<double>(l));

    ConcentrationReport rep;
    rep.l = l;
    rep.k = k;
    rep.N = n;
    rep.m = m;
    rep.trials = trials;
    rep.sigma_min_over_sqrt_l.resize(static_cast<std::size_t>(trials));
    rep.sigma_max_over_sqrt_l.resize(static_cast<std::size_t>(trials));
    for (Index t = 0; t < trials; ++t) {
        RngStream rng(master_seed, {0x5Cu, static_cast<std::uint64_t>(t)});
        const frames::SelectionMap sel = frames::draw_selection(n, m, rng);
        const ComplexMatrix f = frames::apply_selection(frame.matrix, sel);
        const SpectrumExtremes ext = projected_spectrum(vl, f);
        rep.sigma_min_over_sqrt_l[static_cast<std::size_t>(t)] = ext.sigma_min / sqrt_l;
        rep.sigma_max_over_sqrt_l[static_cast<std::size_t>(t)] = ext.sigma_max / sqrt_l;
    }
    if (trials > 0) {
        rep.min_quantiles = detail::quantiles_of(rep.sigma_min_over_sqrt_l);
        rep.max_quantiles = detail::quantiles_of(rep.sigma_max_over_sqrt_l);
    }
    return rep;
}

struct RicEstimate {
    Index k = 0;
    Index trials = 0;
    double lower_bound_on_RIC = 0.0;
    std::vector<Index> support_of_worst_case; // 0-based column indices
};

// Randomized lower bound on the restricted isometry constant delta_k of M:
// max over sampled k-column supports K of the eigenvalue deviation of
// M_K^H M_K from the identity.
inline RicEstimate estimate_ric(const ComplexMatrix& m, Index k, Index trials, RngStream& rng) {
    if (k < 1 || k > m.cols()) throw std::invalid_argument("estimate_ric: k out of range");
    RicEstimate est;
    est.k = k;
    est.trials = trials;

    std::vector<Index> cols(static_cast<std::size_t>(m.cols()));
    std::iota(cols.begin(), cols.end(), Index{0});
    for (Index t = 0; t < trials; ++t) {
        // partial Fisher-Yates: first k entries become the support
        for (Index i = 0; i < k; ++i) {
            const auto j = i + static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(m.cols() - i)));
            std::swap(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
        }
        ComplexMatrix sub(m.rows(), k);
        for (Index c = 0; c < k; ++c) sub.col(c) = m.col(cols[static_cast<std::size_t>(c)]);
        const ComplexMatrix gram = sub.adjoint() * sub;
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram, Eigen::EigenvaluesOnly);
        const RealVector ev = eig.eigenvalues();
        const double dev = std::max(std::abs(ev[0] - 1.0), std::abs(ev[ev.size() - 1] - 1.0));
        if (dev > est.lower_bound_on_RIC) {
            est.lower_bound_on_RIC = dev;
            est.support_of_worst_case.assign(cols.begin(), cols.begin() + k);
        }
    }
    return est;
}

struct ConjectureReport {
    int r = 1;
    std::vector<Index> m_values;
    std::vector<double> max_entry_times_sqrt_m; // ||V||_max * sqrt(m) per m
    std::vector<double> bound_ratio;            // same, divided by r^r
};

// For each m: numeric SVD of the dense D^-r, record the entry-wise max of
// the singular vector matrix V scaled by sqrt(m), and its ratio to r^r.
// Bounded ratios across m support the conjectured ||V||_max <= c r^r / sqrt(m).
inline ConjectureReport conjecture_check(int r, const std::vector<Index>& m_values) {
    if (r < 1) throw std::invalid_argument("conjecture_check: r must be >= 1");
    ConjectureReport rep;
    rep.r = r;
    rep.m_values = m_values;
    const double r_pow = std::pow(static_cast<double>(r), r);
    for (Index m : m_values) {
        if (m < 2) throw std::invalid_argument("conjecture_check: each m must be >= 2");
        const RealMatrix dinv_r = numkit::materialize_dinv_power(m, r);
        RealMatrix v;
        if (m <= 256) {
            Eigen::JacobiSVD<RealMatrix> svd(dinv_r, Eigen::ComputeThinV);
            if (svd.info() != Eigen::Success) throw numeric_failure("conjecture_check: SVD failed");
            v = svd.matrixV();
        } else {
            Eigen::BDCSVD<RealMatrix> svd(dinv_r, Eigen::ComputeThinV);
            if (svd.info() != Eigen::Success) throw numeric_failure("conjecture_check: SVD failed");
            v = svd.matrixV();
        }
        const double value = v.cwiseAbs().maxCoeff() * std::sqrt(static_cast<double>(m));
        rep.max_entry_times_sqrt_m.push_back(value);
        rep.bound_ratio.push_back(value / r_pow);
    }
    return rep;
}

} // namespace sdquant::spectral
