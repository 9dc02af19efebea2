#pragma once

// Simulation from spectral models, train/test benchmarking (PE, ISE, PE-hat)
// and Monte Carlo checks of the n^-1/2 convergence of the Krylov terms and
// of Hhat.
//
// Random streams. Every draw comes from a std::mt19937_64 seeded with
// derive_seed(master, {purpose, i, j}), where derive_seed folds the path
// through the SplitMix64 finalizer. Purposes:
//   1  benchmark curves of replicate r           {1, r}
//   2  benchmark noise of replicate r            {2, r}
//   3  benchmark train/test split of replicate r {3, r}
//   4  benchmark responses of an external pool  {4}
//   5  rate experiment curves                    {5, n_index, r}
//   6  rate experiment noise                     {6, n_index, r}
//   7  CLT experiment curves                     {7, r}
//   8  CLT experiment noise                      {8, r}
// Streams depend only on (master, path), so results do not depend on the
// order in which replicates are executed.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "funpls/models.hpp"
#include "funpls/oracle.hpp"

namespace funpls {

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p));
    return s;
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }

    /// Uniform in [0, n) by rejection on the raw 64-bit output.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<Index> permutation(Index n) {
        std::vector<Index> idx(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (Index i = n - 1; i > 0; --i) {
            const auto j = static_cast<Index>(below(static_cast<std::uint64_t>(i + 1)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        return idx;
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rng

// ---------------------------------------------------------------------------
// Simulation

/// X_i = mean + sum_k sqrt(theta_k) xi_ik phi_k, xi_ik iid N(0,1) drawn row by row.
inline CurveSet simulate_curves(const SpectralModel& model, Index n, std::uint64_t seed) {
    if (n < 1) throw InputError("simulate_curves needs n >= 1");
    rng::Stream s(seed);
    const auto r = static_cast<Index>(model.rank());
    Matrix xi(n, r);
    for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < r; ++k) xi(i, k) = s.normal();
    const Matrix loadings = model.basis_matrix() * model.eigenvalues.cwiseSqrt().asDiagonal();
    Matrix x = xi * loadings.transpose();
    x.rowwise() += model.mean_curve.values.transpose();
    return CurveSet(model.grid, std::move(x));
}

/// Y_i = integral X_i b + sigma eps_i.
inline Dataset generate_responses(const CurveSet& curves, const Curve& b, double sigma, std::uint64_t seed) {
    require_same_grid(curves.grid, b.grid, "generate_responses");
    if (!(sigma >= 0.0)) throw InputError("noise sd must be >= 0");
    Vector y = scores(curves.values, b);
    rng::Stream s(seed);
    for (Index i = 0; i < y.size(); ++i) y(i) += sigma * s.normal();
    return Dataset(curves.grid, curves.values, std::move(y));
}

inline Dataset generate_responses(const CurveSet& curves, const SpectralModel& model, std::uint64_t seed) {
    return generate_responses(curves, model.slope(), model.noise_sd, seed);
}

/// sigma such that 5 sigma^2 equals the sample variance (divisor N - 1) of
/// the integrals of b X_i.
inline double sigma_from_signal(const CurveSet& curves, const Curve& b) {
    if (curves.n() < 2) throw InputError("sigma_from_signal needs at least two curves");
    const Vector s = scores(curves.values, b);
    const double var = (s.array() - s.mean()).square().sum() / static_cast<double>(s.size() - 1);
    return std::sqrt(var / 5.0);
}

// ---------------------------------------------------------------------------
// Error measures

inline double compute_pe(const Vector& predictions, const Vector& signal) {
    if (predictions.size() == 0) throw InputError("empty test set");
    if (predictions.size() != signal.size()) throw InputError("prediction / signal length mismatch");
    return (predictions - signal).squaredNorm() / static_cast<double>(predictions.size());
}

inline double compute_ise(const Curve& estimate, const Curve& truth) {
    const Curve d = estimate - truth;
    return inner_product(d, d);
}

inline double compute_pe_hat(const Vector& predictions, const Vector& responses) {
    return compute_pe(predictions, responses);
}

// ---------------------------------------------------------------------------
// Coefficient patterns

enum class CasePattern { i, ii, iii, iv, custom };

inline const char* case_name(CasePattern c) {
    switch (c) {
        case CasePattern::i: return "i";
        case CasePattern::ii: return "ii";
        case CasePattern::iii: return "iii";
        case CasePattern::iv: return "iv";
        case CasePattern::custom: return "custom";
    }
    return "?";
}

inline CasePattern parse_case(std::string_view s) {
    for (CasePattern c : {CasePattern::i, CasePattern::ii, CasePattern::iii, CasePattern::iv, CasePattern::custom})
        if (s == case_name(c)) return c;
    throw InputError("unknown case '" + std::string(s) + "'");
}

/// a_j = (-1)^j on the block of five indices selected by the case
/// (1-5, 6-10, 11-15, 16-20), zero elsewhere; length `count`.
inline Vector case_coefficients(CasePattern c, std::size_t count) {
    if (c == CasePattern::custom) throw InputError("custom case has no fixed coefficients");
    const std::size_t first = 1 + 5 * static_cast<std::size_t>(c);
    const std::size_t last = first + 4;
    if (count < last)
        throw InputError(std::string("case ") + case_name(c) + " needs at least " + std::to_string(last) +
                         " components, have " + std::to_string(count));
    Vector a = Vector::Zero(static_cast<Index>(count));
    for (std::size_t j = first; j <= last; ++j) a(static_cast<Index>(j - 1)) = (j % 2 == 0) ? 1.0 : -1.0;
    return a;
}

// ---------------------------------------------------------------------------
// Benchmark

struct SimulationSpec {
    /// Exactly one source: a spectral model, or an external pool of curves.
    std::optional<SpectralModel> model;
    std::optional<CurveSet> curves;
    /// Observed responses for an external pool (custom case only).
    std::optional<Vector> responses;

    CasePattern pattern = CasePattern::custom;
    /// Number of empirical eigenfunctions a case pattern is built on (external pool).
    std::size_t components = 20;
    std::size_t n_train = 30;
    /// Test-set size per replicate for a model source.
    std::size_t n_test = 500;
    std::size_t replicates = 1;
    std::uint64_t seed = 1;
    std::size_t p_min = 1;
    std::size_t p_max = 1;
    std::vector<Method> methods{Method::apls_ortho};
    /// sigma from the 5 sigma^2 = var(signal) rule; otherwise model.noise_sd
    /// (or `noise_sd` for an external pool).
    bool sigma_rule = true;
    double noise_sd = 0.0;

    void validate() const {
        if (model.has_value() == curves.has_value()) throw InputError("spec needs exactly one of model / curves");
        if (replicates < 1) throw InputError("replicates must be >= 1");
        if (p_min < 1 || p_max < p_min) throw InputError("invalid p range");
        if (methods.empty()) throw InputError("no methods selected");
        if (n_train < 2) throw InputError("n_train must be >= 2");
        if (curves) {
            if (static_cast<Index>(n_train) >= curves->n())
                throw InputError("n_train must be smaller than the number of available curves");
            if (pattern == CasePattern::custom && !responses)
                throw InputError("custom case on an external pool needs observed responses");
            if (responses && responses->size() != curves->n())
                throw InputError("responses do not match the curve pool");
        } else {
            if (n_test < 1) throw InputError("n_test must be >= 1");
        }
    }
};

struct BenchRecord {
    Method method;
    std::size_t p;
    std::size_t replicate;
    std::optional<double> pe;
    std::optional<double> ise;
    std::optional<double> pe_hat;
    std::string error;
};

namespace detail {

struct Replicate {
    Dataset train;
    CurveSet test;
    Vector test_responses;
    /// Present when the true slope is known.
    std::optional<Curve> truth;
};

struct PreparedSpec {
    const SimulationSpec* spec;
    std::optional<Curve> truth;  // b, when known up front
    std::optional<Dataset> pool; // external pool with responses
};

inline std::string error_tag(const std::exception& e) {
    if (const auto* r = dynamic_cast<const RankError*>(&e)) return "rank_deficient@" + std::to_string(r->index());
    if (dynamic_cast<const IllConditionedError*>(&e)) return "ill_conditioned";
    if (dynamic_cast<const SingularityError*>(&e)) return "singular";
    if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
    return "error";
}

inline PreparedSpec prepare(const SimulationSpec& spec) {
    spec.validate();
    PreparedSpec prep{&spec, std::nullopt, std::nullopt};
    if (spec.model) {
        const SpectralModel& m = *spec.model;
        if (spec.pattern == CasePattern::custom) {
            prep.truth = m.slope();
        } else {
            prep.truth = assemble_slope(m.grid, m.eigenfunctions, case_coefficients(spec.pattern, m.rank()));
        }
        return prep;
    }
    const CurveSet& pool = *spec.curves;
    if (spec.pattern == CasePattern::custom) {
        prep.pool = Dataset(pool.grid, pool.values, *spec.responses);
        return prep;
    }
    // b = sum_j a_j phihat_j over the empirical eigenfunctions of the whole pool.
    const Kernel k = detail::covariance_of_centered(pool.grid, pool.values.rowwise() - pool.values.colwise().mean());
    const EigenSystem eig = eigendecompose(k, spec.components);
    Curve b = assemble_slope(pool.grid, eig.eigenfunctions, case_coefficients(spec.pattern, spec.components));
    const double sigma = spec.sigma_rule ? sigma_from_signal(pool, b) : spec.noise_sd;
    prep.pool = generate_responses(pool, b, sigma, rng::derive_seed(spec.seed, {4}));
    prep.truth = std::move(b);
    return prep;
}

inline Replicate make_replicate(const PreparedSpec& prep, std::size_t r) {
    const SimulationSpec& spec = *prep.spec;
    if (spec.model) {
        const SpectralModel& m = *spec.model;
        const auto total = static_cast<Index>(spec.n_train + spec.n_test);
        const CurveSet all = simulate_curves(m, total, rng::derive_seed(spec.seed, {1, r}));
        const double sigma = spec.sigma_rule ? sigma_from_signal(all, *prep.truth) : m.noise_sd;
        Dataset data = generate_responses(all, *prep.truth, sigma, rng::derive_seed(spec.seed, {2, r}));
        const auto nt = static_cast<Index>(spec.n_train);
        Dataset train(m.grid, data.curves.topRows(nt), data.responses.head(nt));
        CurveSet test(m.grid, data.curves.bottomRows(total - nt));
        Vector ty = data.responses.tail(total - nt);
        return {std::move(train), std::move(test), std::move(ty), prep.truth};
    }
    const Dataset& pool = *prep.pool;
    rng::Stream s(rng::derive_seed(spec.seed, {3, r}));
    const std::vector<Index> perm = s.permutation(pool.n());
    const auto nt = static_cast<Index>(spec.n_train);
    const Index ntest = pool.n() - nt;
    Matrix xtr(nt, pool.grid->size());
    Vector ytr(nt);
    Matrix xte(ntest, pool.grid->size());
    Vector yte(ntest);
    for (Index i = 0; i < pool.n(); ++i) {
        const Index src = perm[static_cast<std::size_t>(i)];
        if (i < nt) {
            xtr.row(i) = pool.curves.row(src);
            ytr(i) = pool.responses(src);
        } else {
            xte.row(i - nt) = pool.curves.row(src);
            yte(i - nt) = pool.responses(src);
        }
    }
    return {Dataset(pool.grid, std::move(xtr), std::move(ytr)), CurveSet(pool.grid, std::move(xte)), std::move(yte),
            prep.truth};
}

inline std::vector<BenchRecord> run_replicate(const PreparedSpec& prep, std::size_t r) {
    const SimulationSpec& spec = *prep.spec;
    const Replicate rep = make_replicate(prep, r);
    std::optional<Vector> signal;
    if (rep.truth) signal = scores(rep.test.values, *rep.truth);
    FitSession session(rep.train);
    std::vector<BenchRecord> out;
    for (Method method : spec.methods) {
        for (std::size_t p = spec.p_min; p <= spec.p_max; ++p) {
            BenchRecord rec{method, p, r, std::nullopt, std::nullopt, std::nullopt, {}};
            try {
                const LinearModel fit = session.fit(method, p);
                const Vector pred = predict_all(fit, rep.test);
                if (signal) {
                    rec.pe = compute_pe(pred, *signal);
                    rec.ise = compute_ise(fit.slope, *rep.truth);
                } else {
                    rec.pe_hat = compute_pe_hat(pred, rep.test_responses);
                }
            } catch (const NumericalError& e) {
                rec.error = error_tag(e);
            }
            out.push_back(std::move(rec));
        }
    }
    return out;
}

/// Runs job(i) for i in [0, count) on up to `threads` workers (0 = inline).
template <class Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    job(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// One record per (replicate, method, p), ordered that way. Fit failures are
/// recorded in `error` and never abort the sweep.
inline std::vector<BenchRecord> run_benchmark(const SimulationSpec& spec, unsigned threads = 0) {
    const detail::PreparedSpec prep = detail::prepare(spec);
    std::vector<std::vector<BenchRecord>> per(spec.replicates);
    detail::parallel_for(spec.replicates, threads, [&](std::size_t r) { per[r] = detail::run_replicate(prep, r); });
    std::vector<BenchRecord> out;
    for (auto& v : per)
        for (auto& rec : v) out.push_back(std::move(rec));
    return out;
}

// ---------------------------------------------------------------------------
// Summary statistics

/// Linear-interpolation quantile (the usual "type 7") of unsorted data.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw InputError("quantile of empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct SampleMoments {
    double mean;
    double sd;
    double skewness;
    double excess_kurtosis;
};

inline SampleMoments sample_moments(std::span<const double> x) {
    if (x.size() < 2) throw InputError("sample_moments needs two values");
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {mean, std::sqrt(m2 * n / (n - 1.0)), m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

struct SummaryRow {
    Method method;
    std::size_t p;
    std::string metric;
    std::size_t count;
    double min, q1, median, q3, max;
};

/// Five-number summaries of pe / ise / pe_hat per (method, p), in the order
/// the pairs first appear in `records`.
inline std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records) {
    struct Key {
        Method method;
        std::size_t p;
    };
    std::vector<Key> keys;
    for (const auto& r : records) {
        const bool seen = std::any_of(keys.begin(), keys.end(),
                                      [&](const Key& k) { return k.method == r.method && k.p == r.p; });
        if (!seen) keys.push_back({r.method, r.p});
    }
    std::vector<SummaryRow> out;
    for (const Key& k : keys) {
        for (const char* metric : {"pe", "ise", "pe_hat"}) {
            std::vector<double> v;
            for (const auto& r : records) {
                if (r.method != k.method || r.p != k.p) continue;
                const std::optional<double>& x =
                    metric[0] == 'i' ? r.ise : (std::string_view(metric) == "pe" ? r.pe : r.pe_hat);
                if (x) v.push_back(*x);
            }
            if (v.empty()) continue;
            out.push_back({k.method, k.p, metric, v.size(), quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5),
                           quantile(v, 0.75), quantile(v, 1.0)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convergence-rate experiments

struct RateRow {
    std::size_t n;
    std::size_t j;
    /// Median over replicates of ||Khat^j(b) - K^j(b)||_L2.
    double median_err;
    /// Median over replicates of max_{j',k <= j} |hhat_j'k - h_j'k|.
    double h_err;
    /// Least-squares slope of log median_err against log n (same for every n of this j).
    double slope;
    /// Same slope for h_err.
    double h_slope;
};

inline double loglog_slope(const std::vector<double>& n, const std::vector<double>& err) {
    const auto k = static_cast<double>(n.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double x = std::log(n[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

/// For each n and replicate, simulates n curves and responses from `model`,
/// builds the empirical Krylov terms and Hhat, and measures their distance to
/// the closed forms. Requires the Hilbert-Schmidt norm of K below 1.
inline std::vector<RateRow> rate_experiment(const SpectralModel& model, const std::vector<std::size_t>& n_values,
                                            const std::vector<std::size_t>& j_values, std::size_t replicates,
                                            std::uint64_t seed, unsigned threads = 0) {
    if (!(model.kernel_hs_norm() < 1.0))
        throw InputError("rate_experiment: rescale the model so that the kernel norm is below 1");
    if (n_values.size() < 2 || j_values.empty() || replicates < 1) throw InputError("rate_experiment: empty design");
    for (std::size_t a = 1; a < n_values.size(); ++a)
        if (n_values[a] <= n_values[a - 1]) throw InputError("rate_experiment: n_values must increase");
    const std::size_t jmax = *std::max_element(j_values.begin(), j_values.end());
    if (*std::min_element(j_values.begin(), j_values.end()) < 1) throw InputError("rate_experiment: j starts at 1");

    const std::vector<Curve> truth = population_krylov(model, jmax + 1);
    Matrix h_true(static_cast<Index>(jmax), static_cast<Index>(jmax));
    for (std::size_t j = 1; j <= jmax; ++j)
        for (std::size_t k = 1; k <= jmax; ++k)
            h_true(static_cast<Index>(j - 1), static_cast<Index>(k - 1)) = inner_product(truth[j], truth[k - 1]);
    const Curve b = model.slope();

    // err[a][r][ji], herr[a][r][ji]
    const std::size_t nj = j_values.size();
    std::vector<std::vector<double>> err(n_values.size() * replicates, std::vector<double>(nj));
    std::vector<std::vector<double>> herr(n_values.size() * replicates, std::vector<double>(nj));
    detail::parallel_for(n_values.size() * replicates, threads, [&](std::size_t task) {
        const std::size_t a = task / replicates;
        const std::size_t r = task % replicates;
        const CurveSet x = simulate_curves(model, static_cast<Index>(n_values[a]), rng::derive_seed(seed, {5, a, r}));
        const Dataset d = generate_responses(x, b, model.noise_sd, rng::derive_seed(seed, {6, a, r}));
        const KrylovSequence seq = krylov_sequence(d, jmax + 1);
        const Matrix h_hat = build_h_hat(seq, jmax).h_matrix;
        const Matrix diff = (h_hat - h_true).cwiseAbs();
        for (std::size_t ji = 0; ji < nj; ++ji) {
            const std::size_t j = j_values[ji];
            err[task][ji] = l2_norm(seq.term(j) - truth[j - 1]);
            herr[task][ji] = diff.topLeftCorner(static_cast<Index>(j), static_cast<Index>(j)).maxCoeff();
        }
    });

    std::vector<RateRow> rows;
    std::vector<double> ns;
    for (std::size_t n : n_values) ns.push_back(static_cast<double>(n));
    for (std::size_t ji = 0; ji < nj; ++ji) {
        std::vector<double> med, hmed;
        for (std::size_t a = 0; a < n_values.size(); ++a) {
            std::vector<double> e, h;
            for (std::size_t r = 0; r < replicates; ++r) {
                e.push_back(err[a * replicates + r][ji]);
                h.push_back(herr[a * replicates + r][ji]);
            }
            med.push_back(median(e));
            hmed.push_back(median(h));
        }
        const double s = loglog_slope(ns, med);
        const double hs = loglog_slope(ns, hmed);
        for (std::size_t a = 0; a < n_values.size(); ++a)
            rows.push_back({n_values[a], j_values[ji], med[a], hmed[a], s, hs});
    }
    // Order by (n, j).
    std::stable_sort(rows.begin(), rows.end(), [](const RateRow& x, const RateRow& y) { return x.n < y.n; });
    return rows;
}

/// sqrt(n) (hhat_11 - h_11) over independent replicates at sample size n.
inline std::vector<double> h11_clt_sample(const SpectralModel& model, std::size_t n, std::size_t replicates,
                                          std::uint64_t seed, unsigned threads = 0) {
    const std::vector<Curve> truth = population_krylov(model, 2);
    const double h11 = inner_product(truth[1], truth[0]);
    const Curve b = model.slope();
    std::vector<double> out(replicates);
    detail::parallel_for(replicates, threads, [&](std::size_t r) {
        const CurveSet x = simulate_curves(model, static_cast<Index>(n), rng::derive_seed(seed, {7, r}));
        const Dataset d = generate_responses(x, b, model.noise_sd, rng::derive_seed(seed, {8, r}));
        const KrylovSequence seq = krylov_sequence(d, 2);
        out[r] = std::sqrt(static_cast<double>(n)) * (build_h_hat(seq, 1).h_matrix(0, 0) - h11);
    });
    return out;
}

}  // namespace funpls
