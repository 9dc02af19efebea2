// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "cli_support.hpp"
#include "test_support.hpp"

using namespace funpls;
using namespace funpls::testing;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // <= 0: none
    std::function<Outcome()> run;
};

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Dataset first_rows(const Dataset& d, Index n) {
    return Dataset(d.grid, d.curves.topRows(n), d.responses.head(n));
}

CurveSet last_rows(const Dataset& d, Index n) { return CurveSet(d.grid, d.curves.bottomRows(n)); }

Outcome equivalence() {
    const SpectralModel model = equivalence_model(64);
    const Curve b = model.slope();
    double worst = 0.0;
    for (std::uint64_t r = 0; r < 40; ++r) {
        const CurveSet all = simulate_curves(model, 560, rng::derive_seed(7, {1, r}));
        const Dataset d = generate_responses(all, b, sigma_from_signal(all, b), rng::derive_seed(7, {2, r}));
        const Dataset train = first_rows(d, 60);
        const CurveSet test = last_rows(d, 500);
        const Vector signal = scores(test.values, b);
        const double scale = std::sqrt((signal.array() - signal.mean()).square().mean());
        FitSession session(train);
        for (std::size_t p = 1; p <= 6; ++p) {
            std::vector<Vector> preds;
            for (Method m : {Method::apls_raw, Method::apls_qr, Method::apls_ortho, Method::classic})
                preds.push_back(predict_all(session.fit(m, p), test));
            for (const Vector& u : preds)
                for (const Vector& v : preds) worst = std::max(worst, (u - v).cwiseAbs().maxCoeff() / scale);
        }
    }
    return {worst <= tol::equivalence, "max relative prediction difference " + fmt("%.3g", worst)};
}

// The spec asks for optimality among unit-K-norm directions. That fails for p < r:
// f_p(w) = <b - b_{p-1}, w>_K is maximized over unit K-norm by the K-projection of
// b - b_{p-1}, which is not in span{K b, ..., K^p b}. The explicit basis is the
// maximizer under unit L2 norm, which is reported alongside.
Outcome basis_optimality() {
    const SpectralModel model = small_model(6);
    const Kernel k = population_kernel(model);
    const auto psi = explicit_pls_basis(model, 6);
    double constraint = 0.0;
    double k_shortfall = -std::numeric_limits<double>::infinity();
    double l2_shortfall = -std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(2);
    for (std::size_t p = 1; p <= 6; ++p) {
        constraint = std::max(constraint, std::abs(k_norm(psi[p - 1], k) - 1.0));
        for (std::size_t j = 1; j < p; ++j) constraint = std::max(constraint, std::abs(k_bilinear(psi[j - 1], psi[p - 1], k)));
        const std::span<const Curve> prior(psi.data(), p - 1);
        const double best = pls_objective(model, k, prior, psi[p - 1]);
        const double best_l2 = best / l2_norm(psi[p - 1]);
        for (int t = 0; t < 500; ++t) {
            Curve w = random_curve(model.grid, rng);
            for (const Curve& u : prior) w = w - k_bilinear(w, u, k) * u;
            const double f = pls_objective(model, k, prior, w);
            k_shortfall = std::max(k_shortfall, f / k_norm(w, k) - best);
            l2_shortfall = std::max(l2_shortfall, f / l2_norm(w) - best_l2);
        }
    }
    const bool ok = constraint <= tol::tight && k_shortfall <= tol::exact;
    return {ok, "constraint defect " + fmt("%.3g", constraint) + ", max f(w) - f(psi) over unit K-norm w " +
                    fmt("%.3g", k_shortfall) + ", over unit L2-norm w " + fmt("%.3g", l2_shortfall)};
}

Outcome hankel_structure() {
    const SpectralModel model = small_model(6);
    bool exact = true;
    for (std::size_t p = 1; p <= 6; ++p) {
        const Matrix h = population_h_gamma(model, p).h_matrix;
        const auto n = static_cast<Index>(p);
        for (Index j = 0; j < n; ++j)
            for (Index l = 0; l < n; ++l) {
                exact = exact && h(j, l) == h(l, j);
                if (j + 1 < n && l > 0) exact = exact && h(j + 1, l - 1) == h(j, l);
            }
    }
    auto k = std::make_shared<const Kernel>(population_kernel(model));
    const AplsDiagnostics diag = build_h_hat(krylov_from(k, apply_kernel(*k, model.slope()), 6), 5);
    const OracleReport oracle = population_h_gamma(model, 5);
    const double scale = oracle.h_matrix.cwiseAbs().maxCoeff();
    const double closed = std::max((diag.h_matrix - oracle.h_matrix).cwiseAbs().maxCoeff(),
                                   (diag.alpha - oracle.alpha).cwiseAbs().maxCoeff()) / scale;
    bool tilde = true;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Dataset d = random_dataset(unit_grid(40), 50, 300 + s);
        const Matrix ht = build_h_tilde(krylov_sequence(d, 10), 5);
        tilde = tilde && ht == ht.transpose();
    }
    return {exact && closed <= tol::tight && tilde,
            std::string("oracle Hankel ") + (exact ? "exact" : "broken") + ", Hhat vs closed form " +
                fmt("%.3g", closed) + ", Htilde " + (tilde ? "symmetric" : "asymmetric")};
}

Outcome tp_ledger() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    double worst_rise = 0.0;
    double worst_t5 = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Vector theta(5);
        Vector beta(5);
        double level = 1.0;
        for (Index k = 0; k < 5; ++k) {
            level *= u(rng);
            theta(k) = level;
            beta(k) = (k % 2 == 0 ? 1.0 : -1.0) * (0.1 + u(rng));
        }
        const SpectralModel model = make_sine_model(unit_grid(64), theta, beta, 0.0);
        const double t0 = model.signal_variance();
        double prev = t0;
        for (std::size_t p = 1; p <= 5; ++p) {
            const double t = population_h_gamma(model, p).tp_value;
            worst_rise = std::max(worst_rise, (t - prev) / t0);
            prev = t;
        }
        worst_t5 = std::max(worst_t5, prev / t0);
    }
    return {worst_rise <= tol::exact && worst_t5 <= tol::exact,
            "largest relative increase " + fmt("%.3g", worst_rise) + ", max t5/t0 " + fmt("%.3g", worst_t5)};
}

SpectralModel rate_model() {
    const io::json j = io::json::parse(io::read_file(std::string(FUNPLS_SAMPLES) + "/rates.json"));
    return io::rate_spec_from_json(j).model;
}

Outcome rates() {
    const SpectralModel model = rate_model();
    const auto rows = rate_experiment(model, {200, 800, 3200}, {1, 2, 3}, 200, 11, threads());
    bool ok = model.kernel_hs_norm() < 1.0;
    std::ostringstream d;
    d << "slopes (err, h_err) by j:";
    for (const RateRow& r : rows) {
        if (r.n != 3200) continue;
        const bool in = r.slope >= tol::rate_slope_low && r.slope <= tol::rate_slope_high &&
                        r.h_slope >= tol::rate_slope_low && r.h_slope <= tol::rate_slope_high;
        ok = ok && in;
        d << " j=" << r.j << " (" << fmt("%.3f", r.slope) << ", " << fmt("%.3f", r.h_slope) << ")";
    }
    return {ok, d.str()};
}

Outcome consistency() {
    const SpectralModel model = make_sine_model(unit_grid(64), (Vector(4) << 1.0, 0.5, 0.25, 0.125).finished(),
                                                (Vector(4) << 1.0, -1.0, 1.0, -1.0).finished(), 0.5);
    const double floor = model.noise_sd * model.noise_sd;
    const std::vector<Index> ns{50, 200, 800};
    std::vector<double> med_pe;
    double med_pe_hat_last = 0.0;
    for (std::size_t a = 0; a < ns.size(); ++a) {
        std::vector<double> pe(100), pe_hat(100);
        detail::parallel_for(100, threads(), [&](std::size_t r) {
            const CurveSet all = simulate_curves(model, ns[a] + 500, rng::derive_seed(21, {1, a, r}));
            const Dataset d = generate_responses(all, model, rng::derive_seed(21, {2, a, r}));
            const CurveSet test = last_rows(d, 500);
            const Vector pred = predict_all(fit_method(first_rows(d, ns[a]), Method::apls_ortho, 4), test);
            pe[r] = compute_pe(pred, scores(test.values, model.slope()));
            pe_hat[r] = compute_pe_hat(pred, d.responses.tail(500));
        });
        med_pe.push_back(median(pe));
        if (a + 1 == ns.size()) med_pe_hat_last = median(pe_hat);
    }
    const bool ok = med_pe[0] > med_pe[1] && med_pe[1] > med_pe[2] && med_pe_hat_last < tol::consistency_floor_factor * floor;
    return {ok, "median PE " + fmt("%.4g", med_pe[0]) + " > " + fmt("%.4g", med_pe[1]) + " > " + fmt("%.4g", med_pe[2]) +
                    ", median PE-hat at n=800 / sigma^2 = " + fmt("%.4f", med_pe_hat_last / floor)};
}

Outcome pca_vs_pls() {
    Vector theta(24);
    for (Index k = 0; k < 24; ++k) theta(k) = 1.0 / std::sqrt(static_cast<double>(k + 1));
    SimulationSpec s;
    s.model = make_sine_model(unit_grid(64), theta, Vector::Zero(24), 0.0);
    s.pattern = CasePattern::iv;
    s.n_train = 100;
    s.n_test = 500;
    s.replicates = 100;
    s.seed = 1;
    s.p_min = 5;
    s.p_max = 10;
    s.methods = {Method::apls_ortho, Method::pca};
    const auto records = run_benchmark(s, threads());
    const auto med = [&](Method m, std::size_t p) {
        std::vector<double> v;
        for (const auto& r : records)
            if (r.method == m && r.p == p && r.pe) v.push_back(*r.pe);
        return v.empty() ? std::numeric_limits<double>::quiet_NaN() : median(v);
    };
    const double pls5 = med(Method::apls_ortho, 5);
    const double pca5 = med(Method::pca, 5);
    const double pca10 = med(Method::pca, 10);
    const bool ok = pls5 < pca10 && pca5 >= tol::pca_pls_ratio * pls5;
    return {ok, "median PE pls p=5 " + fmt("%.4g", pls5) + ", pca p=5 " + fmt("%.4g", pca5) + ", pca p=10 " +
                    fmt("%.4g", pca10) + ", ratio " + fmt("%.3g", pca5 / pls5)};
}

Outcome exact_recovery() {
    const SpectralModel model = small_model(5, 64, 0.0);
    std::vector<double> rel(20);
    for (std::uint64_t r = 0; r < 20; ++r) {
        const CurveSet all = simulate_curves(model, 560, rng::derive_seed(31, {1, r}));
        const Dataset d = generate_responses(all, model, rng::derive_seed(31, {2, r}));
        const CurveSet test = last_rows(d, 500);
        const Vector y = d.responses.tail(500);
        const Vector pred = predict_all(fit_method(first_rows(d, 60), Method::apls_ortho, 5), test);
        const double var = (y.array() - y.mean()).square().mean();
        rel[r] = compute_pe(pred, scores(test.values, model.slope())) / var;
    }
    const double m = median(rel);
    return {m <= tol::tight, "median PE / response variance " + fmt("%.3g", m)};
}

Outcome clt() {
    const SpectralModel model = rate_model();
    const std::vector<double> z = h11_clt_sample(model, 800, 500, 41, threads());
    const SampleMoments mo = sample_moments(z);
    const bool ok = std::abs(mo.skewness) < tol::clt_skewness && std::abs(mo.excess_kurtosis) < tol::clt_excess_kurtosis;
    return {ok, "skewness " + fmt("%.3f", mo.skewness) + ", excess kurtosis " + fmt("%.3f", mo.excess_kurtosis)};
}

Outcome determinism() {
    TempDir dir;
    const std::string samples = FUNPLS_SAMPLES;
    io::write_file(dir.file("rates.json"), R"({"model_file": ")" + samples + R"(/spectral_model.json",
        "kernel_norm": 0.8, "n_values": [100, 200, 400], "j_values": [1, 2, 3], "replicates": 20, "seed": 5})");
    bool ok = true;
    std::string failed;
    for (const auto& [cmd, spec] : {std::pair{"bench", samples + "/bench_small.json"},
                                    std::pair{"rates", dir.file("rates.json")}}) {
        std::vector<std::string> outputs;
        int k = 0;
        for (const char* env : {"FUNPLS_THREADS=1", "FUNPLS_THREADS=1", "FUNPLS_THREADS=4", "FUNPLS_THREADS=0"}) {
            const std::string out = dir.file(std::string(cmd) + std::to_string(k++) + ".csv");
            if (run_cli(std::string(cmd) + " " + quoted(spec) + " --summary --out " + quoted(out), env) != 0) {
                ok = false;
                failed += std::string(" ") + cmd + " exit";
                continue;
            }
            outputs.push_back(io::read_file(out) + io::read_file(out + ".summary.csv"));
        }
        for (const auto& o : outputs)
            if (o != outputs.front()) {
                ok = false;
                failed += std::string(" ") + cmd + " differs";
                break;
            }
    }
    return {ok, ok ? "bench and rates CSVs byte-identical over 4 runs (threads 1, 1, 4, 0)" : "failed:" + failed};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "algorithm equivalence", 30, equivalence},
        {2, "PLS basis constraints and optimality", 10, basis_optimality},
        {3, "Hankel structure and closed-form H", 0, hankel_structure},
        {4, "t_p nonincreasing, zero at rank", 5, tp_ledger},
        {5, "Krylov and H convergence rates", 300, rates},
        {6, "prediction consistency", 120, consistency},
        {7, "PCA vs PLS in high components", 180, pca_vs_pls},
        {8, "noiseless exact recovery", 10, exact_recovery},
        {9, "asymptotic normality of h11", 120, clt},
        {10, "CLI determinism", 0, determinism},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
            o.pass = false;
            o.detail += ", over time limit " + fmt("%.0f s", c.time_limit_s);
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
                  << fmt("%.2f", secs) << " s)" << std::endl;
        failures += o.pass ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
