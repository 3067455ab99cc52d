#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "criticality.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "furstenberg.hpp"
#include "io.hpp"
#include "lyapunov.hpp"
#include "potential.hpp"
#include "scattering.hpp"

namespace anderson::cli {

inline constexpr const char* tool_version = "1.0.0";

using nlohmann::json;

namespace detail {

// Raised for bad flag combinations that CLI11 cannot express; maps to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t seed_from_env()
{
    const char* s = std::getenv("ANDERSON_SEED");
    if (!s || !*s) return 0;
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw UsageError(std::string("ANDERSON_SEED is not an unsigned integer: ") + s);
    return v;
}

inline bool user_gave(const std::vector<std::string>& args, const std::string& flag)
{
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

inline std::optional<std::string> config_path(const std::vector<std::string>& args)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

inline std::string scalar_arg(const json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw UsageError("config values must be scalars or arrays of scalars");
}

// Config keys become flags placed before the user's own, unless the user passed that flag.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args)
{
    const auto path = config_path(args);
    if (!path) return args;
    std::ifstream in(*path);
    if (!in) throw UsageError("cannot open config file " + *path);
    json cfg;
    try {
        in >> cfg;
    }
    catch (const json::exception& e) {
        throw UsageError("config file " + *path + ": " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");

    std::vector<std::string> extra;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "config") continue;
        const std::string flag = "--" + key;
        if (user_gave(args, flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) extra.push_back(flag);
            continue;
        }
        extra.push_back(flag);
        if (value.is_array())
            for (const auto& v : value) extra.push_back(scalar_arg(v));
        else
            extra.push_back(scalar_arg(value));
    }
    // args[0] is the subcommand; its options follow it
    std::vector<std::string> merged;
    if (!args.empty()) merged.push_back(args[0]);
    merged.insert(merged.end(), extra.begin(), extra.end());
    if (args.size() > 1) merged.insert(merged.end(), args.begin() + 1, args.end());
    return merged;
}

inline json potential_json(const SingleSitePotential& p) { return json::parse(potential_to_json(p)); }

inline json manifest(const std::string& subcommand, json parameters, std::uint64_t seed,
                     const std::optional<SingleSitePotential>& p)
{
    json m;
    m["tool"] = "anderson";
    m["version"] = tool_version;
    m["subcommand"] = subcommand;
    m["parameters"] = std::move(parameters);
    m["master_seed"] = seed;
    m["potential_hash"] = p ? json(potential_hash(*p)) : json(nullptr);
    return m;
}

inline json report_json(const CriticalityReport& r)
{
    json j;
    j["E"] = r.E;
    j["critical"] = r.critical();
    j["reasons"] = json::array();
    for (auto reason : r.reasons) j["reasons"].push_back(to_string(reason));
    if (r.lattice_n) j["lattice_n"] = *r.lattice_n;
    if (r.k) j["k"] = *r.k;
    if (r.reflection_residual) j["reflection_residual"] = *r.reflection_residual;
    if (r.alpha) j["alpha"] = *r.alpha;
    if (r.negative_axis_residual) j["negative_axis_residual"] = *r.negative_axis_residual;
    return j;
}

inline std::vector<double> energy_grid(const std::vector<double>& list, const std::vector<double>& range,
                                       std::size_t points)
{
    if (!list.empty()) return list;
    if (range.size() != 2) throw UsageError("give --E or --E-range");
    if (points < 2) throw UsageError("--E-points must be >= 2");
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = i + 1 == points ? range[1]
                                 : range[0] + (range[1] - range[0]) * static_cast<double>(i) / static_cast<double>(points - 1);
    return out;
}

// Writes text to --out, or to the stream when no file was given.
inline void emit(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path);
    f << text;
}

inline void emit_gnuplot(const std::string& script_path, const std::string& data_path, const std::string& body)
{
    if (script_path.empty()) return;
    if (data_path.empty()) throw UsageError("--gnuplot needs --out so the script has a data file to read");
    std::ofstream f(script_path);
    if (!f) throw UsageError("cannot write " + script_path);
    f << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "data = '" << data_path << "'\n"
      << body;
}

} // namespace detail

/// Entry point shared by the executable and the tests. Returns the process exit code.
inline int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Scattering data, critical energies and Lyapunov exponents of continuum Bernoulli-Anderson models",
                 "anderson"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    // shared options
    std::string potential_file, out_path, gnuplot_path, config_file;
    std::optional<double> ex1, ex2;
    std::size_t threads = 1;
    std::uint64_t seed = 0;

    auto add_potential = [&](CLI::App* sub) {
        auto* group = sub->add_option_group("potential", "single-site potential (exactly one)");
        group->add_option("--potential", potential_file, "JSON file with breakpoints and values");
        group->add_option("--ex1", ex1, "lambda * indicator of [-1/2, 1/2]");
        group->add_option("--ex2", ex2, "lambda on [-1/2, 0), -lambda on [0, 1/2]");
        group->require_option(1);
    };
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--config", config_file, "JSON file with defaults for any flag");
    };
    auto add_threads = [&](CLI::App* sub) { sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber); };
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "master seed (default: $ANDERSON_SEED or 0)"); };
    auto add_gnuplot = [&](CLI::App* sub) { sub->add_option("--gnuplot", gnuplot_path, "also write a gnuplot script here"); };

    // scatter
    auto* scatter = app.add_subcommand("scatter", "a(k), b(k) and the Wronskian residual on a k grid");
    std::vector<double> k_range{0.1, 20.0};
    std::size_t k_points = 500;
    add_potential(scatter);
    add_common(scatter);
    add_gnuplot(scatter);
    scatter->add_option("--k-range", k_range, "k_lo k_hi")->expected(2);
    scatter->add_option("--k-points", k_points, "grid size")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));

    // critical
    auto* critical = app.add_subcommand("critical", "critical energies in a k window and on the negative axis");
    std::vector<double> crit_k_range{0.5, 10.0}, alpha_range{0.05, 10.0}, classify_E;
    std::size_t crit_grid = 0, alpha_grid = 4000;
    double tol = 1e-8;
    add_potential(critical);
    add_common(critical);
    critical->add_option("--k-range", crit_k_range, "k_lo k_hi")->expected(2);
    critical->add_option("--alpha-range", alpha_range, "alpha_lo alpha_hi for E = -alpha^2")->expected(2);
    critical->add_option("--grid", crit_grid, "k grid size (0: 2000 per unit k)");
    critical->add_option("--alpha-grid", alpha_grid, "alpha grid size");
    critical->add_option("--tol", tol, "residual tolerance");
    critical->add_option("--E", classify_E, "additional energies to classify");

    // gamma
    auto* gamma = app.add_subcommand("gamma", "Monte Carlo Lyapunov exponent on an energy grid");
    std::vector<double> gamma_E, gamma_E_range;
    std::size_t gamma_E_points = 11;
    EnsembleConfig ens;
    std::string estimator_name = "vector";
    add_potential(gamma);
    add_common(gamma);
    add_threads(gamma);
    add_seed(gamma);
    add_gnuplot(gamma);
    gamma->add_option("--E", gamma_E, "energies");
    gamma->add_option("--E-range", gamma_E_range, "E_lo E_hi")->expected(2);
    gamma->add_option("--E-points", gamma_E_points, "grid size for --E-range");
    gamma->add_option("--p", ens.p_one, "P(q_n = 1)")->check(CLI::Range(0.0, 1.0));
    gamma->add_option("--steps", ens.n_steps, "sites per realization");
    gamma->add_option("--realizations", ens.n_realizations, "independent realizations");
    gamma->add_option("--burn-in", ens.burn_in, "discarded steps (vector estimator)");
    gamma->add_option("--estimator", estimator_name, "vector or matrix")->check(CLI::IsMember({"vector", "matrix"}));
    gamma->add_option("--tol", tol, "criticality tolerance");

    // furstenberg
    auto* furst = app.add_subcommand("furstenberg", "noncompactness and strong irreducibility certificates");
    std::vector<double> furst_E;
    std::size_t max_word = 500, test_dirs = 32, depth = 12;
    double threshold = 10;
    add_potential(furst);
    add_common(furst);
    furst->add_option("--E", furst_E, "energies")->required();
    furst->add_option("--max-word", max_word, "longest witness word");
    furst->add_option("--threshold", threshold, "witness norm threshold");
    furst->add_option("--test-dirs", test_dirs, "projective test directions");
    furst->add_option("--depth", depth, "orbit search depth");
    furst->add_option("--tol", tol, "criticality tolerance");

    // walk
    auto* walk = app.add_subcommand("walk", "sqrt(N) growth at a Type 2 critical energy");
    Type2Spec spec{2, 1, 0.5};
    SqrtGrowthOptions walk_opt;
    add_common(walk);
    add_threads(walk);
    add_seed(walk);
    add_gnuplot(walk);
    walk->add_option("--n", spec.n, "k = (2n-1) pi/2");
    walk->add_option("--m", spec.m, "alpha = (2m-1) pi/2");
    walk->add_option("--p", spec.p, "P(q_n = 1)")->check(CLI::Range(0.0, 1.0));
    walk->add_option("--pairs", walk_opt.n_pairs, "pairs per realization");
    walk->add_option("--realizations", walk_opt.n_realizations, "independent realizations");
    walk->add_option("--min-log2", walk_opt.min_log2_N, "smallest checkpoint exponent");
    walk->add_option("--verify", walk_opt.verify_realizations, "realizations checked against the matrix product");
    walk->add_option("--gamma-steps", walk_opt.gamma_steps, "sites for the gamma estimate");
    walk->add_option("--gamma-realizations", walk_opt.gamma_realizations, "realizations for the gamma estimate");

    // examples
    auto* examples = app.add_subcommand("examples", "tables for the worked examples");
    double ex1_lambda = 1.0, E_max = 100.0;
    int lambda_j = 5;
    add_common(examples);
    examples->add_option("--lambda", ex1_lambda, "barrier height for the Type 1a/1b/2 list");
    examples->add_option("--E-max", E_max, "largest energy in that list");
    examples->add_option("--lambda-j", lambda_j, "N_j table for j = 1..lambda-j")->check(CLI::Range(1, 64));

    std::vector<std::string> args;
    try {
        args = detail::merge_config(raw_args);
        seed = detail::seed_from_env();
    }
    catch (const detail::UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    std::vector<std::string> storage{"anderson"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 1;
    }

    auto load_potential = [&]() -> SingleSitePotential {
        if (ex1) return square_barrier(*ex1);
        if (ex2) return antisymmetric_step(*ex2);
        return read_potential(potential_file);
    };
    auto potential_params = [&](const SingleSitePotential& p) { return detail::potential_json(p); };

    try {
        if (scatter->parsed()) {
            const auto p = load_potential();
            if (!(k_range[0] > 0 && k_range[1] > k_range[0])) throw detail::UsageError("need 0 < k_lo < k_hi");
            json params{{"potential", potential_params(p)}, {"k_range", k_range}, {"k_points", k_points}};
            std::ostringstream csv;
            csv << "# manifest: " << detail::manifest("scatter", params, 0, p).dump() << '\n';
            csv << "k,a_re,a_im,b_re,b_im,abs_a,abs_b,residual\n";
            for (std::size_t i = 0; i < k_points; ++i) {
                const double k = i + 1 == k_points ? k_range[1]
                                                   : k_range[0] + (k_range[1] - k_range[0]) * static_cast<double>(i) /
                                                                      static_cast<double>(k_points - 1);
                const auto s = jost_coefficients(p, k);
                const double A = std::abs(s.a), B = std::abs(s.b);
                csv << format_double(k) << ',' << format_double(s.a.real()) << ',' << format_double(s.a.imag()) << ','
                    << format_double(s.b.real()) << ',' << format_double(s.b.imag()) << ',' << format_double(A) << ','
                    << format_double(B) << ',' << format_double(wronskian_residual(p, k)) << '\n';
            }
            detail::emit_gnuplot(gnuplot_path, out_path,
                                 "set xlabel 'k'\nset logscale y\n"
                                 "plot data using 1:7 with lines title '|b(k)|', data using 1:(abs($8)) with lines title 'residual'\n");
            detail::emit(csv.str(), out_path, out);
        }
        else if (critical->parsed()) {
            const auto p = load_potential();
            json params{{"potential", potential_params(p)}, {"k_range", crit_k_range}, {"alpha_range", alpha_range},
                        {"grid", crit_grid},           {"alpha_grid", alpha_grid},  {"tol", tol},
                        {"E", classify_E}};
            json doc;
            doc["manifest"] = detail::manifest("critical", params, 0, p);

            std::vector<CriticalityReport> found;
            auto add = [&](CriticalityReport r, std::optional<CriticalReason> must) {
                if (must && !r.has(*must)) r.reasons.push_back(*must);
                for (auto& f : found) {
                    if (std::abs(f.E - r.E) > lattice_tolerance * std::max(1.0, std::abs(r.E))) continue;
                    for (auto reason : r.reasons)
                        if (!f.has(reason)) f.reasons.push_back(reason);
                    return;
                }
                found.push_back(std::move(r));
            };

            const auto scan = scan_reflection_zeros(p, crit_k_range[0], crit_k_range[1], crit_grid, tol);
            doc["identically_reflectionless"] = scan.identically_reflectionless;
            for (const auto& z : scan.zeros) {
                auto r = classify_energy(p, z.k * z.k, tol);
                r.reflection_residual = z.residual;
                add(r, CriticalReason::PositiveReflectionZero);
            }
            const double pi = std::numbers::pi;
            for (long long n = 1; n * pi / 2 <= crit_k_range[1]; ++n)
                if (n * pi / 2 >= crit_k_range[0]) add(classify_energy(p, n * n * pi * pi / 4, tol), std::nullopt);

            const auto axis = negative_axis_zeros(p, alpha_range[0], alpha_range[1], alpha_grid, tol);
            doc["negative_axis_identically_zero"] = json::array();
            for (auto w : axis.identically_zero) doc["negative_axis_identically_zero"].push_back(to_string(w));
            json axis_list = json::array();
            for (const auto& z : axis.zeros) {
                axis_list.push_back({{"alpha", z.alpha}, {"E", -z.alpha * z.alpha}, {"function", to_string(z.which)},
                                     {"residual", z.residual}});
                auto r = classify_energy(p, -z.alpha * z.alpha, tol);
                add(r, CriticalReason::NegativeAxisZero);
            }
            doc["negative_axis_zeros"] = axis_list;

            std::sort(found.begin(), found.end(), [](auto& l, auto& r) { return l.E < r.E; });
            doc["critical_energies"] = json::array();
            for (const auto& r : found) doc["critical_energies"].push_back(detail::report_json(r));
            doc["classified"] = json::array();
            for (double E : classify_E) doc["classified"].push_back(detail::report_json(classify_energy(p, E, tol)));
            detail::emit(doc.dump(2) + "\n", out_path, out);
        }
        else if (gamma->parsed()) {
            const auto p = load_potential();
            const auto grid = detail::energy_grid(gamma_E, gamma_E_range, gamma_E_points);
            ens.master_seed = seed;
            const auto est = estimator_name == "matrix" ? Estimator::MatrixNorm : Estimator::VectorNorm;
            json params{{"potential", potential_params(p)}, {"E", grid},          {"p", ens.p_one},
                        {"steps", ens.n_steps},             {"realizations", ens.n_realizations},
                        {"burn_in", ens.burn_in},           {"estimator", estimator_name}, {"tol", tol}};
            const auto rows = gamma_curve(p, grid, ens, est, threads, tol);
            std::ostringstream csv;
            csv << "# manifest: " << detail::manifest("gamma", params, seed, p).dump() << '\n';
            csv << "E,gamma_hat,std_error,n_steps,n_realizations,estimator,criticality_status\n";
            for (const auto& r : rows) {
                csv << format_double(r.E) << ',';
                if (r.estimate) {
                    csv << format_double(r.estimate->gamma_hat) << ',' << format_double(r.estimate->std_error);
                }
                else {
                    csv << "nan,nan";
                    err << json{{"warning", r.error}, {"E", r.E}}.dump() << '\n';
                }
                csv << ',' << ens.n_steps << ',' << ens.n_realizations << ',' << to_string(est) << ','
                    << (r.criticality_status.empty() ? "Unknown" : r.criticality_status) << '\n';
            }
            detail::emit_gnuplot(gnuplot_path, out_path,
                                 "set xlabel 'E'\nset ylabel 'gamma'\n"
                                 "plot data using 1:2:3 with yerrorbars title 'gamma_hat'\n");
            detail::emit(csv.str(), out_path, out);
        }
        else if (furst->parsed()) {
            const auto p = load_potential();
            json params{{"potential", potential_params(p)}, {"E", furst_E},         {"max_word", max_word},
                        {"threshold", threshold},           {"test_dirs", test_dirs}, {"depth", depth},
                        {"tol", tol}};
            json doc;
            doc["manifest"] = detail::manifest("furstenberg", params, 0, p);
            doc["results"] = json::array();
            for (double E : furst_E) {
                json row;
                row["E"] = E;
                const auto report = classify_energy(p, E, tol);
                row["criticality"] = detail::report_json(report);
                const auto w = noncompactness_witness(p, E, max_word, threshold);
                row["noncompact"] = {{"found", w.found},
                                     {"word", w.word},
                                     {"norm", w.norm},
                                     {"rotation_compact", w.rotation_compact},
                                     {"reason", w.reason}};
                const auto irr = strong_irreducibility_check(p, E, test_dirs, depth);
                row["strongly_irreducible"] = to_string(irr.verdict);
                row["directions_tested"] = irr.directions_tested;
                row["min_orbit"] = irr.min_orbit;
                row["method"] = irr.method;
                if (E < 0) row["negative_energy_unstable"] = negative_energy_unstable_check(p, E, tol);
                doc["results"].push_back(row);
            }
            detail::emit(doc.dump(2) + "\n", out_path, out);
        }
        else if (walk->parsed()) {
            spec.check();
            walk_opt.seed = seed;
            walk_opt.threads = threads;
            const auto p = square_barrier(spec.lambda());
            json params{{"n", spec.n},
                        {"m", spec.m},
                        {"p", spec.p},
                        {"pairs", walk_opt.n_pairs},
                        {"realizations", walk_opt.n_realizations},
                        {"min_log2", walk_opt.min_log2_N},
                        {"verify", walk_opt.verify_realizations},
                        {"gamma_steps", walk_opt.gamma_steps},
                        {"gamma_realizations", walk_opt.gamma_realizations},
                        {"potential", potential_params(p)}};
            const auto r = sqrt_growth_experiment(spec, walk_opt);
            std::ostringstream csv;
            csv << "# manifest: " << detail::manifest("walk", params, seed, p).dump() << '\n';
            json summary{{"E", spec.energy()},
                         {"drift_residual", drift_check(spec)},
                         {"fitted_exponent", r.fitted_exponent},
                         {"mean_abs_S_over_sqrtN", r.mean_abs_S_over_sqrt},
                         {"clt_prediction", r.clt_prediction},
                         {"max_product_deviation", r.max_product_deviation},
                         {"gamma_hat", r.gamma.gamma_hat},
                         {"gamma_std_error", r.gamma.std_error}};
            csv << "# summary: " << summary.dump() << '\n';
            csv << "N,mean_abs_S,mean_abs_S_over_sqrtN,q10_abs_S,q50_abs_S,q90_abs_S\n";
            for (const auto& c : r.ladder)
                csv << c.N << ',' << format_double(c.mean_abs_S) << ',' << format_double(c.mean_abs_S_over_sqrtN) << ','
                    << format_double(c.q10) << ',' << format_double(c.q50) << ',' << format_double(c.q90) << '\n';
            detail::emit_gnuplot(gnuplot_path, out_path,
                                 "set logscale xy\nset xlabel 'N'\nset ylabel 'E|S_N|'\n"
                                 "plot data using 1:2 with linespoints title 'mean |S_N|', "
                                 "data using 1:($3 * sqrt($1)) with lines title 'last ratio * sqrt(N)'\n");
            detail::emit(csv.str(), out_path, out);
        }
        else if (examples->parsed()) {
            const double pi = std::numbers::pi;
            json params{{"lambda", ex1_lambda}, {"E_max", E_max}, {"lambda_j", lambda_j}};
            json doc;
            doc["manifest"] = detail::manifest("examples", params, 0, std::nullopt);

            json ex1_list = json::array();
            for (const auto& c : example1_critical_types(ex1_lambda, E_max)) {
                json row{{"type", to_string(c.type)}, {"n", c.n}, {"E", c.E}};
                if (c.type == Example1Type::Type2) row["m"] = c.m;
                ex1_list.push_back(row);
            }
            doc["example1"] = {{"lambda", ex1_lambda}, {"E_max", E_max}, {"critical", ex1_list}};

            json ex2 = json::array();
            for (int N : {3, 8, 24, 80}) {
                const double lambda = 2 * pi * pi * N;
                json pairs = json::array();
                for (const auto& q : example2_reflectionless(lambda))
                    pairs.push_back({{"n", q.n}, {"m", q.m}, {"E", q.E}, {"k", std::sqrt(q.E)}});
                ex2.push_back({{"N", N}, {"lambda", lambda}, {"pairs", pairs}});
            }
            doc["example2"] = ex2;

            json nj = json::array();
            for (int j = 1; j <= lambda_j; ++j) {
                const auto c = nj_construction(j);
                json pairs = json::array();
                for (auto [n, m] : c.pairs) pairs.push_back({n, m});
                nj.push_back({{"j", j}, {"N", c.N}, {"lambda", c.lambda}, {"pairs", pairs}});
            }
            doc["nj_table"] = nj;
            detail::emit(doc.dump(2) + "\n", out_path, out);
        }
    }
    catch (const detail::UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const Error& e) {
        err << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    catch (const std::exception& e) {
        err << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    return 0;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace anderson::cli
