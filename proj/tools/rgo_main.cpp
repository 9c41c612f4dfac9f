#include "rgo/analytic.hpp"
#include "rgo/config.hpp"
#include "rgo/rank.hpp"
#include "rgo/report.hpp"
#include "rgo/simulate.hpp"
#include "rgo/variational.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace rgo;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 42;
    int grid_level = 0;
    double dt = 1e-3;
    double horizon = 2000.0;
    int paths = 8;
    bool quiet = false;
    std::string drift_kind = "worst";  // worst | reversing | perturbed:<scale>
};

json load_schema(const std::string& name) {
    // schemas live next to the binary's source tree; fall back to cwd
    for (const auto& base : {std::string(RGO_SCHEMA_DIR), std::string("schemas")}) {
        const fs::path p = fs::path(base) / name;
        if (fs::exists(p)) {
            std::ifstream in(p);
            json j;
            in >> j;
            return j;
        }
    }
    throw ConfigError("schema file not found: " + name);
}

void emit_json(const CliOptions& opts, const std::string& file, const json& doc,
               const std::string& schema_name) {
    validate_against_schema(doc, load_schema(schema_name));
    fs::create_directories(opts.out_dir);
    write_json((fs::path(opts.out_dir) / file).string(), doc);
    if (!opts.quiet) std::cout << "wrote " << (fs::path(opts.out_dir) / file).string() << "\n";
}

void write_strategy_csv(const CliOptions& opts, const LoadedModel& loaded,
                        const GeneratingFunction& gen) {
    fs::create_directories(opts.out_dir);
    std::ofstream out(fs::path(opts.out_dir) / "strategy.csv");
    const MarketModel& m = loaded.model;
    const int d = m.ambient_dim();
    if (m.is_simplex()) {
        out << "t";
        for (int i = 0; i < d; ++i) out << ",x" << i + 1;
        for (int i = 0; i < d; ++i) out << ",theta" << i + 1;
        out << "\n";
        for (int k = 1; k < 200; ++k) {
            const double t = k / 200.0;
            Vec x(d);
            if (d == 2) {
                x << t / 2, 1 - t / 2;
            } else {
                // edge-to-barycenter ray
                const double a = t / 3.0;
                for (int i = 0; i + 1 < d; ++i) x[i] = a;
                x[d - 1] = 1 - (d - 1) * a;
            }
            if (!m.domain.contains(x, m.domain.levels())) continue;
            Vec th = gen.strategy->value(x);
            th += (1.0 - x.dot(th)) * Vec::Ones(d);  // full investment
            out << t;
            for (int i = 0; i < d; ++i) out << ',' << x[i];
            for (int i = 0; i < d; ++i) out << ',' << th[i];
            out << "\n";
        }
        return;
    }
    const Truncation tr = m.domain.exhaustion(std::min(3, m.domain.levels()));
    out << "x1";
    if (d == 2) out << ",x2";
    for (int i = 0; i < d; ++i) out << ",theta" << i + 1;
    out << "\n";
    for (int k = 0; k <= 400; ++k) {
        Vec x(d);
        x[0] = tr.lo[0] + (tr.hi[0] - tr.lo[0]) * k / 400.0;
        if (d == 2) x[1] = 0.5 * (tr.lo[1] + tr.hi[1]);
        const Vec th = gen.strategy->value(x);
        out << x[0];
        if (d == 2) out << ',' << x[1];
        for (int i = 0; i < d; ++i) out << ',' << th[i];
        out << "\n";
    }
}

GeneratingFunction build_generating(const LoadedModel& loaded, int grid_level,
                                    GrowthReport* report_out = nullptr) {
    const MarketModel& m = loaded.model;
    if (m.is_simplex()) {
        rank::RankOptions ropts;
        if (grid_level > 0) ropts.grid_level = grid_level;
        auto res = rank::rank_pipeline(loaded.rank_setup->inputs, ropts);
        if (report_out) *report_out = res.report;
        return res.gen;
    }
    if (m.ambient_dim() == 1) {
        auto [gen, rep] = analytic::solve_one_dim(m);
        if (report_out) *report_out = rep;
        return gen;
    }
    if (loaded.gradient_h) {
        auto [gen, rep] = analytic::solve_gradient_case(m, loaded.gradient_h);
        if (report_out) *report_out = rep;
        return gen;
    }
    variational::SolveOptions vopts;
    vopts.grid_level = grid_level;
    auto sol = variational::solve_model(m, vopts);
    auto field = std::make_shared<variational::PotentialField>(m, sol.grid, sol.potential.values);
    if (report_out) {
        report_out->classification = Classification::finite;
        report_out->method = "variational";
        report_out->lambda = sol.lambda;
    }
    return generating_from_phi(field);
}

int cmd_solve(const CliOptions& opts) {
    LoadedModel loaded = load_model_file(opts.config_path);
    validate_model(loaded.model);
    if (loaded.model.is_simplex()) {
        rank::RankOptions ropts;
        if (opts.grid_level > 0) ropts.grid_level = opts.grid_level;
        auto res = rank::rank_pipeline(loaded.rank_setup->inputs, ropts);
        const auto& params = loaded.rank_setup->params;
        json doc{{"lambda_ranked", res.lambda_ordered},
                 {"lambda_simplex", res.lambda_simplex},
                 {"theta_params",
                  {{"A", params.A},
                   {"B", params.B},
                   {"C", params.C},
                   {"K", params.strategy_exponent(loaded.model.ambient_dim())}}},
                 {"cutoff", loaded.rank_setup->cutoff
                                ? json{{"delta", loaded.rank_setup->cutoff->delta}}
                                : json(nullptr)},
                 {"report", to_json(res.report)}};
        emit_json(opts, "rank_report.json", doc, "rank_report.schema.json");
        write_strategy_csv(opts, loaded, res.gen);
        if (!opts.quiet)
            std::cout << "lambda (simplex) = " << res.lambda_simplex
                      << ", lambda (ranked) = " << res.lambda_ordered << "\n";
        return 0;
    }

    GrowthReport report;
    GeneratingFunction gen = build_generating(loaded, opts.grid_level, &report);
    // cross-check with the variational solver where a closed form was used
    json doc = to_json(report);
    if (report.method != "variational" && loaded.model.effective_dim() <= 2) {
        variational::SolveOptions vopts;
        vopts.grid_level = opts.grid_level;
        auto sol = variational::solve_model(loaded.model, vopts);
        doc["lambda_variational"] = sol.lambda;
        doc["variational_objective"] = sol.objective;
    }
    emit_json(opts, "growth_report.json", doc, "growth_report.schema.json");
    write_strategy_csv(opts, loaded, gen);
    if (!opts.quiet && report.lambda)
        std::cout << "lambda = " << *report.lambda << " (" << report.method << ")\n";
    return 0;
}

int cmd_classify(const CliOptions& opts) {
    LoadedModel loaded = load_model_file(opts.config_path);
    analytic::ClassifyOptions copts;
    copts.grid_level = opts.grid_level;
    GrowthReport report = analytic::classify(loaded.model, copts);
    emit_json(opts, "growth_report.json", to_json(report), "growth_report.schema.json");
    if (!opts.quiet) std::cout << "classification = " << to_string(report.classification) << "\n";
    return 0;
}

int cmd_simulate(const CliOptions& opts) {
    LoadedModel loaded = load_model_file(opts.config_path);
    validate_model(loaded.model);
    const MarketModel& m = loaded.model;
    GeneratingFunction gen = build_generating(loaded, opts.grid_level);

    VectorFieldPtr drift;
    if (opts.drift_kind == "worst") {
        drift = simulate::worst_case_drift(m, gen);
    } else if (opts.drift_kind == "reversing") {
        drift = simulate::reversing_drift(m);
    } else if (opts.drift_kind.rfind("perturbed:", 0) == 0) {
        if (m.ambient_dim() != 2 || m.is_simplex())
            throw ConfigError("perturbed drift demo is wired for planar box models");
        const double scale = std::stod(opts.drift_kind.substr(10));
        auto p = m.p;
        auto gamma = make_vector_field([scale, p](const Vec& x) {
            // rotation of the density itself: gamma = scale * (-d2 p, d1 p)
            const Vec g = p->gradient(x);
            Vec out(2);
            out << -scale * g[1], scale * g[0];
            return out;
        });
        drift = simulate::perturbed_drift(m, gamma);
    } else {
        throw ConfigError("unknown drift kind: " + opts.drift_kind);
    }

    Rng start_rng(opts.seed, 0xABCD);
    const Vec x0 = simulate::sample_stationary(m, start_rng);
    simulate::SdeSpec spec = simulate::make_spec(m, drift, x0, opts.dt, opts.horizon, opts.seed);
    simulate::PathBundle bundle = simulate::simulate(spec, opts.paths);
    simulate::WealthSeries series = simulate::wealth(bundle, gen, m);
    simulate::OccupancyHistogram hist = simulate::occupancy(bundle, m);

    fs::create_directories(opts.out_dir);
    simulate::write_wealth_csv((fs::path(opts.out_dir) / "wealth.csv").string(), bundle, gen, m);
    simulate::write_occupancy_csv((fs::path(opts.out_dir) / "occupancy.csv").string(), hist);
    json doc{{"model", loaded.name},
             {"drift", opts.drift_kind},
             {"seed", opts.seed},
             {"dt", opts.dt},
             {"horizon", opts.horizon},
             {"paths", opts.paths},
             {"exploded", bundle.n_exploded()},
             {"wealth", to_json(series)},
             {"occupancy", to_json(hist)}};
    emit_json(opts, "summary.json", doc, "summary.schema.json");
    if (!opts.quiet)
        std::cout << "growth = " << series.pooled_growth << " +/- " << series.ci_half_width
                  << ", occupancy tv = " << hist.tv_distance << "\n";
    return 0;
}

struct VerifyOutcome {
    json results = json::array();
    bool all_pass = true;
    void record(const std::string& name, bool pass, const json& detail, bool quiet) {
        results.push_back(json{{"criterion", name}, {"pass", pass}, {"detail", detail}});
        all_pass = all_pass && pass;
        if (!quiet) std::cout << (pass ? "PASS  " : "FAIL  ") << name << "\n";
    }
};

int cmd_verify(const CliOptions& opts) {
    LoadedModel loaded = load_model_file(opts.config_path);
    VerifyOutcome v;
    const MarketModel& m = loaded.model;

    {
        bool ok = true;
        std::string err;
        try {
            validate_model(m);
        } catch (const std::exception& e) {
            ok = false;
            err = e.what();
        }
        v.record("model_valid", ok, json{{"error", err}}, opts.quiet);
    }

    analytic::ClassifyOptions copts;
    copts.grid_level = opts.grid_level;
    GrowthReport report;
    if (m.is_simplex()) {
        rank::RankOptions ropts;
        if (opts.grid_level > 0) ropts.grid_level = opts.grid_level;
        auto res = rank::rank_pipeline(loaded.rank_setup->inputs, ropts);
        report = res.report;
        const double rel = std::abs(res.lambda_simplex - res.lambda_ordered) /
                           std::max(1e-12, std::abs(res.lambda_simplex));
        v.record("rank_lambda_consistency", rel <= 1e-6,
                 json{{"lambda_simplex", res.lambda_simplex},
                      {"lambda_ranked", res.lambda_ordered},
                      {"relative_difference", rel}},
                 opts.quiet);
    } else {
        report = analytic::classify(m, copts);
    }

    if (loaded.expected.classification) {
        const bool ok = to_string(report.classification) == *loaded.expected.classification;
        v.record("classification", ok,
                 json{{"expected", *loaded.expected.classification},
                      {"actual", to_string(report.classification)}},
                 opts.quiet);
    }
    if (loaded.expected.lambda) {
        const bool have = report.lambda.has_value();
        const double rel = have ? std::abs(*report.lambda - *loaded.expected.lambda) /
                                      std::max(1e-12, std::abs(*loaded.expected.lambda))
                                : 1.0;
        const double tol = report.method == "closed_form_1d" ? 1e-6 : 1e-2;
        v.record("lambda", have && rel <= tol,
                 json{{"expected", *loaded.expected.lambda},
                      {"actual", have ? json(*report.lambda) : json(nullptr)},
                      {"relative_error", rel},
                      {"tolerance", tol}},
                 opts.quiet);
    }

    // energy identity on the default grid for finite, non-simplex models
    if (!m.is_simplex() && report.classification == Classification::finite) {
        variational::SolveOptions vopts;
        vopts.grid_level = opts.grid_level;
        auto sol = variational::solve_model(m, vopts);
        const double lhs = std::abs(sol.objective + 8.0 * sol.lambda - sol.ell_energy);
        const double bound = 5.0 * sol.grid.h[0] * sol.ell_energy;
        v.record("energy_identity", lhs <= std::max(bound, 1e-12),
                 json{{"defect", lhs}, {"bound", bound}}, opts.quiet);
        if (loaded.expected.lambda) {
            const double rel = std::abs(sol.lambda - *loaded.expected.lambda) /
                               std::max(1e-12, std::abs(*loaded.expected.lambda));
            v.record("lambda_variational", rel <= 1e-2 || std::abs(sol.lambda) < 1e-3,
                     json{{"actual", sol.lambda}, {"relative_error", rel}}, opts.quiet);
        }
    }

    json doc{{"model", loaded.name},
             {"seed", opts.seed},
             {"all_pass", v.all_pass},
             {"results", v.results},
             {"report", to_json(report)}};
    emit_json(opts, "verify_report.json", doc, "verify_report.schema.json");
    return v.all_pass ? 0 : 2;
}

int cmd_rank_demo(const CliOptions& opts) {
    return cmd_solve(opts);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust growth-optimal portfolio toolkit"};
    app.require_subcommand(1);
    CliOptions opts;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "model config JSON")->required();
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--seed", opts.seed, "random seed");
        cmd->add_option("--grid-level", opts.grid_level, "grid refinement level");
        cmd->add_option("--dt", opts.dt, "time step");
        cmd->add_option("--horizon", opts.horizon, "simulation horizon T");
        cmd->add_option("--paths", opts.paths, "number of paths");
        cmd->add_flag("--quiet", opts.quiet, "suppress console output");
    };

    auto* solve = app.add_subcommand("solve", "growth rate and strategy");
    auto* classify = app.add_subcommand("classify", "finite/infinite/ill-posed classification");
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo wealth and occupancy");
    auto* verify = app.add_subcommand("verify", "per-preset acceptance checks");
    auto* rank_demo = app.add_subcommand("rank-demo", "rank-based pipeline outputs");
    for (auto* c : {solve, classify, simulate_cmd, verify, rank_demo}) add_common(c);
    simulate_cmd->add_option("--drift", opts.drift_kind,
                             "worst | reversing | perturbed:<scale>");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(opts);
        if (classify->parsed()) return cmd_classify(opts);
        if (simulate_cmd->parsed()) return cmd_simulate(opts);
        if (verify->parsed()) return cmd_verify(opts);
        if (rank_demo->parsed()) return cmd_rank_demo(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const BadParams& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
