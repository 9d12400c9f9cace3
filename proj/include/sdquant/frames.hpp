#pragma once

#include "sdquant/rng.hpp"
#include "sdquant/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

// DFT matrices, harmonic frames and random row-selection maps.
//
// Index convention, once: the math uses 1-based row index j = 1..m and
// 1-based frequencies omega subset of {1..m} (so omega = m gives the
// all-ones column exactly). Storage is 0-based; SelectionMap::draws holds
// 0-based row indices.
namespace sdquant::frames {

struct HarmonicFrame {
    Index m = 0;                // row count
    std::vector<Index> omega;   // frequencies, 1-based values in [1, m]
    ComplexMatrix matrix;       // m x |omega|, entries exp(2 pi i omega(l) j / m)
};

inline HarmonicFrame build_harmonic_frame(Index m, const std::vector<Index>& omega) {
    if (m < 1) throw std::invalid_argument("build_harmonic_frame: m must be >= 1");
    if (omega.empty()) throw std::invalid_argument("build_harmonic_frame: omega must be non-empty");
    for (Index w : omega)
        if (w < 1 || w > m) throw std::invalid_argument("build_harmonic_frame: omega index out of [1, m]");
    std::vector<Index> sorted = omega;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("build_harmonic_frame: duplicate omega index");

    HarmonicFrame f;
    f.m = m;
    f.omega = omega;
    f.matrix.resize(m, static_cast<Index>(omega.size()));
    const double base = 2.0 * M_PI / static_cast<double>(m);
    for (Index l = 0; l < f.matrix.cols(); ++l) {
        const double freq = base * static_cast<double>(omega[static_cast<std::size_t>(l)]);
        for (Index j = 1; j <= m; ++j)
            f.matrix(j - 1, l) = std::polar(1.0, freq * static_cast<double>(j));
    }
    return f;
}

/// Frequencies {m-k+1, ..., m}: the last k columns of the m x m DFT
/// (includes the all-ones column omega = m).
inline std::vector<Index> last_k_omega(Index m, Index k) {
    std::vector<Index> w(static_cast<std::size_t>(k));
    std::iota(w.begin(), w.end(), m - k + 1);
    return w;
}

/// N x N unnormalized DFT, entry (j,l) = exp(2 pi i l j / N); A^H A = N I.
inline ComplexMatrix build_dft(Index n) {
    if (n < 1) throw std::invalid_argument("build_dft: N must be >= 1");
    ComplexMatrix a(n, n);
    const double base = 2.0 * M_PI / static_cast<double>(n);
    for (Index l = 1; l <= n; ++l)
        for (Index j = 1; j <= n; ++j)
            a(j - 1, l - 1) = std::polar(1.0, base * static_cast<double>(l) * static_cast<double>(j));
    return a;
}

inline ComplexMatrix normalize_columns(const ComplexMatrix& m) {
    ComplexMatrix out = m;
    for (Index c = 0; c < m.cols(); ++c) {
        const double nrm = m.col(c).norm();
        if (nrm == 0.0) throw std::invalid_argument("normalize_columns: zero column");
        out.col(c) /= nrm;
    }
    return out;
}

// m row indices drawn i.i.d. uniformly from [1..N] (with replacement);
// draws are stored 0-based.
struct SelectionMap {
    Index source_size = 0;
    std::vector<Index> draws;
};

inline SelectionMap draw_selection(Index n, Index m, RngStream& rng) {
    if (n < 1 || m < 1) throw std::invalid_argument("draw_selection: N and m must be >= 1");
    SelectionMap sel;
    sel.source_size = n;
    sel.draws.resize(static_cast<std::size_t>(m));
    for (auto& d : sel.draws) d = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    return sel;
}

/// Natural order 1..m (the un-permuted arm of the experiments).
inline SelectionMap identity_selection(Index m) {
    SelectionMap sel;
    sel.source_size = m;
    sel.draws.resize(static_cast<std::size_t>(m));
    std::iota(sel.draws.begin(), sel.draws.end(), Index{0});
    return sel;
}

inline ComplexMatrix apply_selection(const ComplexMatrix& m, const SelectionMap& sel) {
    if (sel.source_size != m.rows())
        throw std::invalid_argument("apply_selection: selection source size does not match rows");
    ComplexMatrix out(static_cast<Index>(sel.draws.size()), m.cols());
    for (std::size_t i = 0; i < sel.draws.size(); ++i) {
        const Index d = sel.draws[i];
        if (d < 0 || d >= m.rows()) throw std::invalid_argument("apply_selection: draw index out of range");
        out.row(static_cast<Index>(i)) = m.row(d);
    }
    return out;
}

} // namespace sdquant::frames
