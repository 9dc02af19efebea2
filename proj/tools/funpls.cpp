// funpls command-line front end.
//
//   funpls fit CURVES RESPONSES --method M --p P [--grid G] [--out model.json]
//   funpls predict MODEL CURVES [--grid G] [--out predictions.csv]
//   funpls bench SPEC [--seed S] [--summary] [--out records.csv]
//   funpls rates SPEC [--seed S] [--summary] [--out rates.csv]
//   funpls simulate MODEL --n N --seed S --out PREFIX
//
// Exit codes: 0 success, 2 input/parse error, 3 numerical/fit error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "funpls/io.hpp"

namespace fs = std::filesystem;
using namespace funpls;

namespace {

constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

struct Options {
    std::string curves, responses, grid, model, spec, out;
    std::string method = "apls_ortho";
    std::size_t p = 1;
    std::size_t n = 0;
    std::optional<std::uint64_t> seed;
    bool summary = false;
};

unsigned thread_count() {
    const char* env = std::getenv("FUNPLS_THREADS");
    if (!env) return std::max(1u, std::thread::hardware_concurrency());
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0') throw InputError("FUNPLS_THREADS must be a nonnegative integer");
    return static_cast<unsigned>(v);
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
    } else {
        io::write_file(out, text);
    }
}

GridPtr grid_for(const std::string& path, Index m) {
    if (path.empty()) return share(Grid::integer(m));
    GridPtr g = share(io::read_grid_csv(path));
    if (g->size() != m)
        throw GridMismatchError(path + ": grid has " + std::to_string(g->size()) + " points, curves have " +
                         std::to_string(m) + " columns");
    return g;
}

io::json parse_json_file(const std::string& path) {
    try {
        return io::json::parse(io::read_file(path));
    } catch (const io::json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

int cmd_fit(const Options& o) {
    Matrix x = io::read_curves_csv(o.curves);
    Vector y = io::read_responses_csv(o.responses);
    GridPtr grid = grid_for(o.grid, x.cols());
    const Dataset data(grid, std::move(x), std::move(y));
    const Method method = parse_method(o.method);
    if (o.p < 1) throw InputError("--p must be >= 1");

    FitSession session(data);
    const LinearModel model = session.fit(method, o.p);
    emit(io::dump(io::model_to_json(model)), o.out);

    const double rmse = std::sqrt(training_criterion(data, model.slope));
    std::cerr << "method " << method_name(method) << ", p " << o.p << "\n";
    std::cerr << "training RMSE " << io::fmt17(rmse) << "\n";
    const AplsDiagnostics diag = session.last_diagnostics()
                                     ? *session.last_diagnostics()
                                     : build_h_hat(session.workspace().krylov(o.p + 1), o.p);
    std::cerr << "Hhat condition estimate " << io::fmt17(diag.condition_estimate) << "\n";
    std::cerr << "Hhat smallest eigenvalue " << io::fmt17(diag.smallest_eigenvalue) << "\n";
    return 0;
}

int cmd_predict(const Options& o) {
    const LinearModel model = io::model_from_json(parse_json_file(o.model));
    Matrix x = io::read_curves_csv(o.curves);
    GridPtr grid = grid_for(o.grid, x.cols());
    const Vector pred = predict_all(model, CurveSet(grid, std::move(x)));
    emit(io::vector_to_csv(pred), o.out);
    return 0;
}

std::string summary_path(const std::string& out) { return out + ".summary.csv"; }

int cmd_bench(const Options& o) {
    SimulationSpec spec = io::simulation_spec_from_json(parse_json_file(o.spec), fs::path(o.spec).parent_path());
    if (o.seed) spec.seed = *o.seed;
    const auto records = run_benchmark(spec, thread_count());
    if (o.summary && o.out.empty()) {
        std::cout << io::summary_to_csv(summarize(records));
        return 0;
    }
    emit(io::records_to_csv(records), o.out);
    if (o.summary) io::write_file(summary_path(o.out), io::summary_to_csv(summarize(records)));
    return 0;
}

int cmd_rates(const Options& o) {
    io::RateSpec spec = io::rate_spec_from_json(parse_json_file(o.spec), fs::path(o.spec).parent_path());
    if (o.seed) spec.seed = *o.seed;
    const auto rows = rate_experiment(spec.model, spec.n_values, spec.j_values, spec.replicates, spec.seed,
                                      thread_count());
    if (o.summary && o.out.empty()) {
        std::cout << io::rate_slopes_to_csv(rows);
        return 0;
    }
    emit(io::rates_to_csv(rows), o.out);
    if (o.summary) io::write_file(summary_path(o.out), io::rate_slopes_to_csv(rows));
    return 0;
}

int cmd_simulate(const Options& o) {
    const SpectralModel model = io::spectral_from_json(parse_json_file(o.model));
    if (o.n < 2) throw InputError("--n must be >= 2");
    const std::uint64_t seed = o.seed.value_or(1);
    const CurveSet x = simulate_curves(model, static_cast<Index>(o.n), rng::derive_seed(seed, {1, 0}));
    const Dataset d = generate_responses(x, model, rng::derive_seed(seed, {2, 0}));
    io::write_file(o.out + "_curves.csv", io::curves_to_csv(d.curves));
    io::write_file(o.out + "_responses.csv", io::vector_to_csv(d.responses));
    io::write_file(o.out + "_grid.csv", io::grid_to_csv(*model.grid));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional partial least squares"};
    app.require_subcommand(1);
    Options o;

    auto* fit = app.add_subcommand("fit", "fit a model to curves and responses");
    fit->add_option("curves", o.curves, "curves CSV (n rows, m columns)")->required()->check(CLI::ExistingFile);
    fit->add_option("responses", o.responses, "responses CSV (one per line)")->required()->check(CLI::ExistingFile);
    fit->add_option("--method", o.method, "apls_raw|apls_qr|apls_ortho|classic|pca")->capture_default_str();
    fit->add_option("--p", o.p, "number of components")->required();
    fit->add_option("--grid", o.grid, "grid CSV (point,weight)")->check(CLI::ExistingFile);
    fit->add_option("--out", o.out, "model JSON path (default stdout)");

    auto* predict = app.add_subcommand("predict", "predict responses for new curves");
    predict->add_option("model", o.model, "model JSON")->required()->check(CLI::ExistingFile);
    predict->add_option("curves", o.curves, "curves CSV")->required()->check(CLI::ExistingFile);
    predict->add_option("--grid", o.grid, "grid CSV (point,weight)")->check(CLI::ExistingFile);
    predict->add_option("--out", o.out, "predictions CSV path (default stdout)");

    auto* bench = app.add_subcommand("bench", "run a train/test benchmark");
    bench->add_option("spec", o.spec, "benchmark spec JSON")->required()->check(CLI::ExistingFile);
    bench->add_option("--seed", o.seed, "override the spec seed");
    bench->add_flag("--summary", o.summary, "also emit per-(method,p) quartiles");
    bench->add_option("--out", o.out, "records CSV path (default stdout)");

    auto* rates = app.add_subcommand("rates", "run a convergence-rate experiment");
    rates->add_option("spec", o.spec, "rate spec JSON")->required()->check(CLI::ExistingFile);
    rates->add_option("--seed", o.seed, "override the spec seed");
    rates->add_flag("--summary", o.summary, "also emit fitted slopes per j");
    rates->add_option("--out", o.out, "rates CSV path (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "draw curves and responses from a spectral model");
    simulate->add_option("model", o.model, "spectral model JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--n", o.n, "number of curves")->required();
    simulate->add_option("--seed", o.seed, "random seed (default 1)");
    simulate->add_option("--out", o.out, "output prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (*fit) return cmd_fit(o);
        if (*predict) return cmd_predict(o);
        if (*bench) return cmd_bench(o);
        if (*rates) return cmd_rates(o);
        if (*simulate) return cmd_simulate(o);
    } catch (const GridMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const io::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
