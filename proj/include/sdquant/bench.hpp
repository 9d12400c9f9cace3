#pragma once

#include "sdquant/decode.hpp"
#include "sdquant/frames.hpp"
#include "sdquant/quant.hpp"
#include "sdquant/rng.hpp"
#include "sdquant/types.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

// Seeded Monte-Carlo experiment harness: frame and compressed-sensing
// error-decay sweeps, log-log slope fitting, CSV persistence. Every trial
// draws from an RngStream derived from (master_seed, sweep index, trial
// ids), so results are byte-identical at any parallelism level.
namespace sdquant::bench {

enum class ExperimentKind { FrameDirectVsPermuted, FrameDecay, FrameVsK, CsDecay, Spectral, Conjecture };
enum class DecoderKind { Sobolev, Consistent, L1 };
enum class OmegaMode { LastK, NearNyquist, Explicit };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::FrameDirectVsPermuted: return "frame-direct-vs-permuted";
        case ExperimentKind::FrameDecay: return "frame-decay";
        case ExperimentKind::FrameVsK: return "frame-vs-k";
        case ExperimentKind::CsDecay: return "cs-decay";
        case ExperimentKind::Spectral: return "spectral";
        case ExperimentKind::Conjecture: return "conjecture";
    }
    return "?";
}

inline const char* to_string(DecoderKind d) {
    switch (d) {
        case DecoderKind::Sobolev: return "sobolev";
        case DecoderKind::Consistent: return "consistent";
        case DecoderKind::L1: return "l1";
    }
    return "?";
}

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::FrameDecay;
    Index N = 0; // fixed frame/DFT size (cs-decay, frame-vs-k); frame kinds rebuild at N = m
    Index k = 10;
    double delta = 0.1;
    int order = 1;
    std::vector<Index> m_values;
    std::vector<Index> k_values; // frame-vs-k sweep
    Index trials_signals = 100;
    Index trials_permutations = 1;
    std::uint64_t master_seed = 0;
    DecoderKind decoder = DecoderKind::Sobolev;
    bool permute = true;
    OmegaMode omega_mode = OmegaMode::LastK;
    std::vector<Index> omega_explicit;
    std::string output_path;
};

struct TrialResult {
    Index perm_trial = 0;
    Index signal_trial = 0;
    double error = 0.0;
    bool overloaded = false;
    bool converged = true;
};

struct ExperimentRecord {
    std::uint64_t spec_hash = 0;
    Index m = 0;
    Index k = 0;
    Index N = 0;
    bool permute = true;
    std::vector<TrialResult> trials;
    double worst_case_error = 0.0; // max over non-overloaded trials (NaN if none)
    Index overload_count = 0;
    double wall_time_s = 0.0;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    Index points_used = 0;
};

// ---------------------------------------------------------------- sampling

/// Uniform draw from the unit l2 ball of C^k: normalized complex Gaussian
/// direction, radius U^{1/(2k)}.
inline ComplexVector sample_unit_ball(Index k, RngStream& rng) {
    if (k < 1) throw std::invalid_argument("sample_unit_ball: k must be >= 1");
    ComplexVector x(k);
    double norm_sq = 0.0;
    do {
        for (Index i = 0; i < k; ++i) x[i] = rng.complex_normal();
        norm_sq = x.squaredNorm();
    } while (norm_sq == 0.0);
    const double radius = std::pow(rng.uniform01(), 1.0 / (2.0 * static_cast<double>(k)));
    return x * (radius / std::sqrt(norm_sq));
}

/// k-sparse vector in C^N: support uniform without replacement, values a
/// unit-ball draw.
inline ComplexVector sample_sparse_signal(Index n, Index k, RngStream& rng) {
    if (k > n) throw std::invalid_argument("sample_sparse_signal: k must be <= N");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
        const auto j = i + static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    const ComplexVector values = sample_unit_ball(k, rng);
    ComplexVector x = ComplexVector::Zero(n);
    for (Index i = 0; i < k; ++i) x[idx[static_cast<std::size_t>(i)]] = values[i];
    return x;
}

// ------------------------------------------------------------------ fitting

inline SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw std::invalid_argument("fit_loglog_slope: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [m, err] : points) {
        if (!(m > 0.0) || !(err > 0.0))
            throw std::invalid_argument("fit_loglog_slope: points must be positive");
        const double x = std::log(m), y = std::log(err);
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    }
    const auto n = static_cast<double>(points.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_loglog_slope: degenerate abscissae");
    SlopeFit fit;
    fit.points_used = static_cast<Index>(points.size());
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    const double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (const auto& [m, err] : points) {
        const double pred = fit.intercept + fit.slope * std::log(m);
        ss_res += (std::log(err) - pred) * (std::log(err) - pred);
    }
    fit.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    return fit;
}

/// (m, worst_case_error) pairs of a record list, ready for fit_loglog_slope.
inline std::vector<std::pair<double, double>> worst_case_points(
    const std::vector<ExperimentRecord>& records, std::optional<bool> permute_arm = std::nullopt) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& rec : records) {
        if (permute_arm && rec.permute != *permute_arm) continue;
        if (std::isfinite(rec.worst_case_error))
            pts.emplace_back(static_cast<double>(rec.m), rec.worst_case_error);
    }
    return pts;
}

// ------------------------------------------------------------- parallel for

namespace detail {

inline unsigned thread_count(Index tasks) {
    unsigned n = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("SDQUANT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) n = static_cast<unsigned>(v);
    }
    if (n == 0) n = 1;
    return static_cast<unsigned>(std::min<Index>(static_cast<Index>(n), std::max<Index>(tasks, 1)));
}

// Each task writes only its own slot, so the schedule never affects results.
template <typename Fn>
void parallel_for(Index n, Fn&& fn) {
    const unsigned threads = thread_count(n);
    if (threads <= 1) {
        for (Index i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const Index i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string double_to_string(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline std::uint64_t spec_hash(const ExperimentSpec& s) {
    std::ostringstream os;
    os << to_string(s.kind) << '|' << s.N << '|' << s.k << '|' << detail::double_to_string(s.delta)
       << '|' << s.order << '|';
    for (Index m : s.m_values) os << m << ',';
    os << '|';
    for (Index k : s.k_values) os << k << ',';
    os << '|' << s.trials_signals << '|' << s.trials_permutations << '|' << s.master_seed << '|'
       << to_string(s.decoder) << '|' << s.permute << '|' << static_cast<int>(s.omega_mode) << '|';
    for (Index w : s.omega_explicit) os << w << ',';
    return detail::fnv1a(os.str());
}

// ----------------------------------------------------------------- running

namespace detail {

constexpr std::uint64_t kFrameTag = 0xF7A;
constexpr std::uint64_t kFixedSigmaTag = 0xF16;
constexpr std::uint64_t kCsTag = 0xC5;

inline std::vector<Index> omega_for(const ExperimentSpec& spec, Index frame_size, Index k) {
    switch (spec.omega_mode) {
        case OmegaMode::LastK:
            return frames::last_k_omega(frame_size, k);
        case OmegaMode::NearNyquist: {
            // k frequencies ending at floor(m/2): the band Sigma-Delta noise
            // shaping cannot suppress, used by the direct-vs-permuted contrast
            std::vector<Index> w(static_cast<std::size_t>(k));
            std::iota(w.begin(), w.end(), frame_size / 2 - k + 1);
            return w;
        }
        case OmegaMode::Explicit:
            return spec.omega_explicit;
    }
    return {};
}

inline decode::DecodeOutcome run_decoder(const ExperimentSpec& spec, const ComplexMatrix& a,
                                         const ComplexVector& q) {
    switch (spec.decoder) {
        case DecoderKind::Sobolev:
            return decode::sobolev_decode(a, spec.order, q);
        case DecoderKind::Consistent:
            return decode::consistent_decode(a, spec.order, q,
                                             decode::DecoderConfig::defaults(spec.order, spec.delta));
        case DecoderKind::L1:
            return decode::l1_decode(a, spec.order, q,
                                     decode::DecoderConfig::defaults(spec.order, spec.delta));
    }
    throw std::invalid_argument("unknown decoder");
}

inline TrialResult run_quantize_decode(const ExperimentSpec& spec, const ComplexMatrix& a,
                                       const ComplexVector& x, Index perm_trial, Index signal_trial) {
    TrialResult tr;
    tr.perm_trial = perm_trial;
    tr.signal_trial = signal_trial;
    const ComplexVector y = a * x;
    const double y_inf = max_abs(y);
    if (y_inf == 0.0) {
        // zero measurements quantize to zero; decode of q = 0 yields 0
        tr.error = x.norm();
        return tr;
    }
    const quant::QuantAlphabet alphabet(spec.delta, quant::stable_radius(y_inf, spec.delta, spec.order));
    const quant::SigmaDeltaResult sd = quant::sigma_delta_quantize(y, spec.order, alphabet);
    if (sd.overloaded) {
        tr.overloaded = true;
        tr.error = std::numeric_limits<double>::quiet_NaN();
        tr.converged = false;
        return tr;
    }
    const decode::DecodeOutcome outcome = run_decoder(spec, a, sd.q);
    tr.error = decode::sparse_error(x, outcome.x_hat);
    tr.converged = outcome.converged;
    return tr;
}

inline void finalize_record(ExperimentRecord& rec) {
    rec.worst_case_error = std::numeric_limits<double>::quiet_NaN();
    rec.overload_count = 0;
    for (const auto& tr : rec.trials) {
        if (tr.overloaded) {
            ++rec.overload_count;
            continue;
        }
        if (!std::isfinite(rec.worst_case_error) || tr.error > rec.worst_case_error)
            rec.worst_case_error = tr.error;
    }
}

} // namespace detail

// Frame sweeps (Figures 1-3 shapes). Per sweep point the harmonic frame is
// rebuilt at frame size m (frame-vs-k holds m = spec.N fixed and sweeps k).
// permute=true draws a fresh selection per signal; permute=false uses
// natural row order. The direct-vs-permuted kind runs both arms on the same
// signals and selection streams, so the arms differ only in the selection
// step.
inline std::vector<ExperimentRecord> run_frame_experiment(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::FrameDecay && spec.kind != ExperimentKind::FrameDirectVsPermuted &&
        spec.kind != ExperimentKind::FrameVsK)
        throw std::invalid_argument("run_frame_experiment: not a frame kind");
    if (spec.order < 1 || !(spec.delta > 0.0))
        throw std::invalid_argument("run_frame_experiment: invalid order/delta");
    const std::uint64_t hash = spec_hash(spec);

    const bool vs_k = spec.kind == ExperimentKind::FrameVsK;
    if (vs_k && (spec.N < 1 || spec.k_values.empty()))
        throw std::invalid_argument("run_frame_experiment: frame-vs-k needs N and k_values");
    if (!vs_k && spec.m_values.empty())
        throw std::invalid_argument("run_frame_experiment: empty m_values");
    for (std::size_t i = 1; i < spec.m_values.size(); ++i)
        if (spec.m_values[i] <= spec.m_values[i - 1])
            throw std::invalid_argument("run_frame_experiment: m_values must be strictly increasing");

    const Index points = vs_k ? static_cast<Index>(spec.k_values.size())
                              : static_cast<Index>(spec.m_values.size());

    // frame-vs-k reuses one selection map across the whole sweep
    frames::SelectionMap fixed_sigma;
    if (vs_k && spec.permute) {
        RngStream rng(spec.master_seed, {detail::kFixedSigmaTag});
        fixed_sigma = frames::draw_selection(spec.N, spec.N, rng);
    }

    std::vector<ExperimentRecord> records;
    for (Index pi = 0; pi < points; ++pi) {
        const Index frame_size = vs_k ? spec.N : spec.m_values[static_cast<std::size_t>(pi)];
        const Index k = vs_k ? spec.k_values[static_cast<std::size_t>(pi)] : spec.k;
        const frames::HarmonicFrame frame =
            frames::build_harmonic_frame(frame_size, detail::omega_for(spec, frame_size, k));

        std::vector<bool> arms;
        if (spec.kind == ExperimentKind::FrameDirectVsPermuted)
            arms = {false, true};
        else
            arms = {spec.permute};

        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::vector<TrialResult>> arm_trials(arms.size());
        for (std::size_t ai = 0; ai < arms.size(); ++ai) {
            const bool permuted = arms[ai];
            auto& trials = arm_trials[ai];
            trials.resize(static_cast<std::size_t>(spec.trials_signals));
            detail::parallel_for(spec.trials_signals, [&](Index t) {
                RngStream x_rng(spec.master_seed,
                                {detail::kFrameTag, static_cast<std::uint64_t>(pi), static_cast<std::uint64_t>(t), 0});
                const ComplexVector x = sample_unit_ball(k, x_rng);
                ComplexMatrix a;
                if (!permuted) {
                    a = frame.matrix;
                } else if (vs_k) {
                    a = frames::apply_selection(frame.matrix, fixed_sigma);
                } else {
                    RngStream s_rng(spec.master_seed, {detail::kFrameTag, static_cast<std::uint64_t>(pi),
                                                       static_cast<std::uint64_t>(t), 1});
                    a = frames::apply_selection(frame.matrix,
                                                frames::draw_selection(frame_size, frame_size, s_rng));
                }
                trials[static_cast<std::size_t>(t)] = detail::run_quantize_decode(spec, a, x, 0, t);
            });
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        for (std::size_t ai = 0; ai < arms.size(); ++ai) {
            ExperimentRecord rec;
            rec.spec_hash = hash;
            rec.m = vs_k ? spec.N : frame_size;
            rec.k = k;
            rec.N = frame_size;
            rec.permute = arms[ai];
            rec.trials = std::move(arm_trials[ai]);
            rec.wall_time_s = elapsed / static_cast<double>(arms.size());
            detail::finalize_record(rec);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

// Compressed-sensing sweep (Figure 4 shape): rows of the N x N DFT drawn
// with replacement, k-sparse signals, Sigma-Delta quantization, l1 (or
// configured) decoding; worst case per m over permutations x signals.
inline std::vector<ExperimentRecord> run_cs_experiment(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::CsDecay)
        throw std::invalid_argument("run_cs_experiment: kind must be cs-decay");
    if (spec.N < 1 || spec.k < 1 || spec.k > spec.N || spec.m_values.empty())
        throw std::invalid_argument("run_cs_experiment: invalid N/k/m_values");
    const std::uint64_t hash = spec_hash(spec);
    const ComplexMatrix dft = frames::build_dft(spec.N);

    std::vector<ExperimentRecord> records;
    for (std::size_t mi = 0; mi < spec.m_values.size(); ++mi) {
        const Index m = spec.m_values[mi];
        const Index total = spec.trials_permutations * spec.trials_signals;
        std::vector<TrialResult> trials(static_cast<std::size_t>(total));

        const auto t0 = std::chrono::steady_clock::now();
        detail::parallel_for(total, [&](Index idx) {
            const Index p = idx / spec.trials_signals;
            const Index s = idx % spec.trials_signals;
            RngStream sel_rng(spec.master_seed,
                              {detail::kCsTag, static_cast<std::uint64_t>(mi), static_cast<std::uint64_t>(p)});
            const ComplexMatrix a =
                frames::apply_selection(dft, frames::draw_selection(spec.N, m, sel_rng));
            RngStream x_rng(spec.master_seed, {detail::kCsTag, static_cast<std::uint64_t>(mi),
                                               static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(s)});
            const ComplexVector x = sample_sparse_signal(spec.N, spec.k, x_rng);
            trials[static_cast<std::size_t>(idx)] = detail::run_quantize_decode(spec, a, x, p, s);
        });
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        ExperimentRecord rec;
        rec.spec_hash = hash;
        rec.m = m;
        rec.k = spec.k;
        rec.N = spec.N;
        rec.permute = true;
        rec.trials = std::move(trials);
        rec.wall_time_s = elapsed;
        detail::finalize_record(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

// -------------------------------------------------------------------- CSV

struct CsvRow {
    std::string kind;
    Index N = 0, k = 0;
    int r = 1;
    double delta = 0.0;
    bool permute = true;
    std::string decoder;
    Index m = 0;
    Index perm_trial = 0, signal_trial = 0;
    double error = 0.0;
    bool overloaded = false;
    bool converged = true;
    std::uint64_t seed = 0;
};

inline constexpr const char* kCsvHeader =
    "kind,N,k,r,delta,permute,decoder,m,perm_trial,signal_trial,error,overloaded,converged,seed";

inline std::vector<CsvRow> records_to_rows(const ExperimentSpec& spec,
                                           const std::vector<ExperimentRecord>& records) {
    std::vector<CsvRow> rows;
    for (const auto& rec : records) {
        for (const auto& tr : rec.trials) {
            CsvRow row;
            row.kind = to_string(spec.kind);
            row.N = rec.N;
            row.k = rec.k;
            row.r = spec.order;
            row.delta = spec.delta;
            row.permute = rec.permute;
            row.decoder = to_string(spec.decoder);
            row.m = rec.m;
            row.perm_trial = tr.perm_trial;
            row.signal_trial = tr.signal_trial;
            row.error = tr.error;
            row.overloaded = tr.overloaded;
            row.converged = tr.converged;
            row.seed = spec.master_seed;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// UTF-8, '.' decimal, shortest round-trip doubles; no locale dependence.
inline void write_csv(const std::vector<CsvRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("write_csv: cannot open " + path);
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.kind << ',' << r.N << ',' << r.k << ',' << r.r << ','
            << detail::double_to_string(r.delta) << ',' << (r.permute ? 1 : 0) << ',' << r.decoder
            << ',' << r.m << ',' << r.perm_trial << ',' << r.signal_trial << ','
            << detail::double_to_string(r.error) << ',' << (r.overloaded ? 1 : 0) << ','
            << (r.converged ? 1 : 0) << ',' << r.seed << '\n';
    }
    if (!out.flush()) throw io_error("write_csv: write failed for " + path);
}

namespace detail {
inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) {
        if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
        throw io_error("read_csv: bad numeric field '" + s + "'");
    }
    return v;
}
} // namespace detail

inline std::vector<CsvRow> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw io_error("read_csv: empty file " + path);
    if (line != kCsvHeader) throw io_error("read_csv: unexpected header in " + path);
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = line.find(',', start);
            fields.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (fields.size() != 14) throw io_error("read_csv: malformed row in " + path);
        CsvRow r;
        r.kind = fields[0];
        r.N = static_cast<Index>(std::stoll(fields[1]));
        r.k = static_cast<Index>(std::stoll(fields[2]));
        r.r = std::stoi(fields[3]);
        r.delta = detail::parse_double(fields[4]);
        r.permute = fields[5] == "1";
        r.decoder = fields[6];
        r.m = static_cast<Index>(std::stoll(fields[7]));
        r.perm_trial = static_cast<Index>(std::stoll(fields[8]));
        r.signal_trial = static_cast<Index>(std::stoll(fields[9]));
        r.error = detail::parse_double(fields[10]);
        r.overloaded = fields[11] == "1";
        r.converged = fields[12] == "1";
        r.seed = static_cast<std::uint64_t>(std::stoull(fields[13]));
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Two-column (log10 m, log10 worst_error) pairs for external plotters.
inline void write_plot_data(const std::vector<ExperimentRecord>& records, const std::string& path,
                            std::optional<bool> permute_arm = std::nullopt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("write_plot_data: cannot open " + path);
    for (const auto& rec : records) {
        if (permute_arm && rec.permute != *permute_arm) continue;
        if (!std::isfinite(rec.worst_case_error) || rec.worst_case_error <= 0.0) continue;
        out << detail::double_to_string(std::log10(static_cast<double>(rec.m))) << ' '
            << detail::double_to_string(std::log10(rec.worst_case_error)) << '\n';
    }
    if (!out.flush()) throw io_error("write_plot_data: write failed for " + path);
}

} // namespace sdquant::bench
