#pragma once

#include "sdquant/types.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

// Uniform complex alphabet and the quantizers: plain scalar rounding, MSQ,
// and the order-r Sigma-Delta recursion with full state trace.
namespace sdquant::quant {

// Alphabet (delta Z + i delta Z) intersected with the closed ball |a| <= R.
struct QuantAlphabet {
    double delta = 0.0;
    double radius = 0.0;

    // Non-empty for any positive radius: the origin is always a member.
    QuantAlphabet(double delta_, double radius_) : delta(delta_), radius(radius_) {
        if (!(delta > 0.0)) throw std::invalid_argument("QuantAlphabet: delta must be > 0");
        if (!(radius > 0.0)) throw std::invalid_argument("QuantAlphabet: radius must be > 0");
    }

    bool contains(Complex a) const {
        return std::hypot(a.real(), a.imag()) <= radius * (1.0 + 1e-12);
    }
};

/// Smallest alphabet radius fulfilling the order-r stability requirement:
/// 2 ceil(||y||_inf) + delta (2^r + 1).
inline double stable_radius(double y_inf_norm, double delta, int r) {
    if (!(y_inf_norm > 0.0) || !(delta > 0.0) || r < 1)
        throw std::invalid_argument("stable_radius: arguments must be positive");
    return 2.0 * std::ceil(y_inf_norm) + delta * (std::exp2(r) + 1.0);
}

namespace detail {
// Round to the nearest multiple of delta, halves away from zero.
inline double round_to_grid(double x, double delta) {
    return std::round(x / delta) * delta;
}
} // namespace detail

struct ScalarQuantResult {
    Complex value{0.0, 0.0};
    bool clipped = false; // grid rounding left the ball; nearest in-ball point returned
};

// Nearest alphabet point. The hot path rounds both components to the grid;
// only when that point leaves the ball does the exhaustive in-ball search
// run (the call is then flagged as clipped).
inline ScalarQuantResult scalar_quantize(Complex c, const QuantAlphabet& a) {
    const Complex rounded{detail::round_to_grid(c.real(), a.delta),
                          detail::round_to_grid(c.imag(), a.delta)};
    if (a.contains(rounded)) return {rounded, false};

    const auto n = static_cast<long>(std::floor(a.radius / a.delta));
    Complex best{0.0, 0.0};
    double best_dist = std::numeric_limits<double>::infinity();
    for (long p = -n; p <= n; ++p) {
        for (long q = -n; q <= n; ++q) {
            const Complex cand{static_cast<double>(p) * a.delta, static_cast<double>(q) * a.delta};
            if (!a.contains(cand)) continue;
            const double dist = std::abs(cand - c);
            if (dist < best_dist) {
                best_dist = dist;
                best = cand;
            }
        }
    }
    return {best, true};
}

/// Memoryless scalar quantization: each sample rounded independently.
inline ComplexVector msq_quantize(const ComplexVector& y, const QuantAlphabet& a) {
    ComplexVector q(y.size());
    for (Index i = 0; i < y.size(); ++i) q[i] = scalar_quantize(y[i], a).value;
    return q;
}

struct SigmaDeltaResult {
    ComplexVector q;     // alphabet members
    ComplexVector u;     // state variables, same length
    int order = 1;
    bool overloaded = false;
    Complex c0{0.0, 0.0};
};

// Order-r Sigma-Delta. Each step quantizes
//   w_i = y_i + sum_{j=1..r} (-1)^{j-1} C(r,j) u_{i-j}
// and records u_i = w_i - q_i; states at indices <= 0 equal c0. With c0 = 0
// this makes y - q = D^r u exact (implicit-zero boundary), and stability of
// the alphabet radius keeps |Re u_i|, |Im u_i| <= delta/2.
inline SigmaDeltaResult sigma_delta_quantize(const ComplexVector& y, int r,
                                             const QuantAlphabet& a, Complex c0 = {0.0, 0.0}) {
    if (r < 1) throw std::invalid_argument("sigma_delta_quantize: r must be >= 1");
    if (!all_finite(y)) throw std::invalid_argument("sigma_delta_quantize: non-finite input");

    std::vector<double> coef(static_cast<std::size_t>(r));
    double binom = 1.0; // C(r, j), j = 1..r
    for (int j = 1; j <= r; ++j) {
        binom = binom * static_cast<double>(r - j + 1) / static_cast<double>(j);
        coef[static_cast<std::size_t>(j - 1)] = (j % 2 == 1 ? binom : -binom);
    }

    SigmaDeltaResult out;
    out.order = r;
    out.c0 = c0;
    out.q.resize(y.size());
    out.u.resize(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        Complex w = y[i];
        for (int j = 1; j <= r; ++j) {
            const Index prev = i - j;
            w += coef[static_cast<std::size_t>(j - 1)] * (prev >= 0 ? out.u[prev] : c0);
        }
        const ScalarQuantResult sq = scalar_quantize(w, a);
        out.overloaded = out.overloaded || sq.clipped;
        out.q[i] = sq.value;
        out.u[i] = w - sq.value;
    }
    return out;
}

} // namespace sdquant::quant
