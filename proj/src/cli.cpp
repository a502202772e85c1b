#include "cml/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cml/analysis.hpp"
#include "cml/config.hpp"
#include "cml/error.hpp"
#include "cml/exact.hpp"
#include "cml/io.hpp"
#include "cml/stochastic.hpp"
#include "cml/topology.hpp"

namespace cml::cli {

namespace {

namespace fs = std::filesystem;

struct Context {
    std::string command;
    fs::path out_dir;
    int threads = 1;
    std::ostream& out;
    std::ostream& err;
};

std::string label(const BoxSpec& box, Site s) { return site_label(s, box.dim()); }

Json number_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

void write_report(const Context& ctx, ExperimentConfig& cfg, Json results, bool passed) {
    Json rep;
    rep["command"] = ctx.command;
    rep["seed"] = cfg.seed;
    rep["config"] = cfg.resolved;
    rep["results"] = std::move(results);
    rep["passed"] = passed;
    write_text_file(ctx.out_dir / "report.json", rep.dump(2) + "\n");
}

int verdict(const Context& ctx, bool passed) {
    ctx.out << ctx.command << ": " << (passed ? "PASS" : "FAIL") << " (report in " << ctx.out_dir.string() << ")\n";
    return passed ? kOk : kAssertionFailed;
}

// experiment.params belong to the probe named in the config
bool owns_params(const ExperimentConfig& cfg, const Context& ctx) {
    return cfg.probe.empty() || cfg.probe == ctx.command;
}

int cmd_check_topology(ExperimentConfig& cfg, const Context& ctx) {
    if (owns_params(cfg, ctx)) params(cfg).finish();
    const BoxSpec& box = *cfg.engine.box;
    const ConnectivityGraph graph = build_graph(cfg.engine.coupling, box);
    write_text_file(ctx.out_dir / "adjacency.txt", export_adjacency(graph));
    Json res;
    res["vertices"] = graph.vertex_count();
    res["edges"] = graph.edge_count();
    res["max_degree"] = graph.max_degree();
    if (auto cycle = detect_cycle(graph)) {
        Json w = Json::array();
        std::string chain;
        for (const Site& s : *cycle) {
            w.push_back(label(box, s));
            chain += label(box, s) + " -> ";
        }
        chain += label(box, cycle->front());
        res["unidirectional"] = false;
        res["cycle"] = w;
        write_report(ctx, cfg, res, false);
        ctx.out << "cycle: " << chain << "\n";
        return kCycleFound;
    }
    const Enumeration en = enumerate_paper(graph);
    const bool valid = validate_enumeration(graph, en);
    const std::string table = export_enumeration_csv(graph, en);
    write_text_file(ctx.out_dir / "enumeration.csv", table);
    res["unidirectional"] = true;
    res["valid_enumeration"] = valid;
    write_report(ctx, cfg, res, valid);
    ctx.out << table;
    return verdict(ctx, valid);
}

int cmd_simulate(ExperimentConfig& cfg, const Context& ctx) {
    Json defaults = Json::object();
    Section p = owns_params(cfg, ctx) ? params(cfg) : Section(defaults, "simulate");
    const int t_max = static_cast<int>(p.integer("t_max", 100));
    const auto run_index = static_cast<std::uint64_t>(p.integer("run", 0));
    p.finish();
    const Engine engine(cfg.engine);
    std::ostringstream csv;
    TrajectoryCsvWriter writer(engine, csv);
    engine.run(engine.random_state(cfg.seed, run_index), t_max,
               [&](int t, const LatticeState& s) { writer.write(t, s); });
    write_text_file(ctx.out_dir / "trajectory.csv", csv.str());
    Json res;
    res["t_max"] = t_max;
    res["rows"] = t_max + 1;
    write_report(ctx, cfg, res, true);
    return verdict(ctx, true);
}

int cmd_lra(ExperimentConfig& cfg, const Context& ctx) {
    Section p = params(cfg);
    ProbeOptions o;
    o.n_initials = static_cast<int>(p.integer("n_initials", 4));
    o.t_max = static_cast<int>(p.integer("t_max", 200));
    o.tol = p.number("tol", 1e-8);
    o.override_condition = p.boolean("override", false);
    const double slack = p.number("rate_slack", 0.05);
    p.finish();
    o.seed = cfg.seed;

    const LraReport r = lra_probe(cfg.engine, o);
    const Engine engine(cfg.engine);
    const BoxSpec& box = engine.box();

    std::ostringstream dist;
    dist << "t,max";
    for (std::size_t k : engine.csv_columns())
        if (k < box.interior_count()) dist << ',' << label(box, box.site_at(k));
    dist << '\n';
    for (std::size_t t = 0; t < r.max_distance.size(); ++t) {
        dist << t << ',' << format_double(r.max_distance[t]);
        for (std::size_t k : engine.csv_columns())
            if (k < box.interior_count()) dist << ',' << format_double(r.per_site_distances[k][t]);
        dist << '\n';
    }
    write_text_file(ctx.out_dir / "distances.csv", dist.str());
    std::ostringstream lim;
    lim << "site,value\n";
    for (std::size_t k : engine.csv_columns())
        if (k < box.interior_count())
            lim << label(box, box.site_at(k)) << ',' << format_double(r.limit_solution.values()[k]) << '\n';
    write_text_file(ctx.out_dir / "limit.csv", lim.str());

    const bool passed = r.converged && r.fitted_rate <= r.rate_bound + slack;
    Json res;
    res["converged"] = r.converged;
    res["max_final_distance"] = r.max_final_distance;
    res["fitted_rate"] = number_or_null(r.fitted_rate);
    res["rate_bound"] = r.rate_bound;
    write_report(ctx, cfg, res, passed);
    ctx.out << "max final distance " << format_double(r.max_final_distance) << ", fitted rate "
            << format_double(r.fitted_rate) << " (bound " << format_double(r.rate_bound) << ")\n";
    return verdict(ctx, passed);
}

int cmd_sensitivity(ExperimentConfig& cfg, const Context& ctx) {
    Section p = params(cfg);
    SensitivityOptions o;
    o.v = p.number("v", 0.5);
    o.delta = p.number("delta", 1e-4);
    o.t_max = static_cast<int>(p.integer("t_max", 400));
    o.tol = p.number("convergence_tol", 1e-13);
    o.n_initials = static_cast<int>(p.integer("n_initials", 2));
    const double tol = p.number("tol", 1e-3);
    const double growth_tol = p.number("growth_tol", 0.1);
    const int max_l = static_cast<int>(p.integer("max_distance", 4));
    p.finish();
    o.seed = cfg.seed;

    const SensitivityReport r = sensitivity_experiment(cfg.engine, o);
    const BoxSpec& box = *cfg.engine.box;
    std::ostringstream csv;
    csv << "site,L,ratio,analytic,in_linear_region\n";
    bool growth_ok = true;
    for (const SiteGrowth& g : r.per_site_growth) {
        csv << label(box, g.site) << ',' << g.distance << ',' << format_double(g.ratio) << ','
            << format_double(g.analytic) << ',' << (g.in_linear_region ? 1 : 0) << '\n';
        if (g.distance <= max_l && g.in_linear_region && !(std::fabs(g.ratio / g.analytic - 1.0) <= growth_tol))
            growth_ok = false;
    }
    write_text_file(ctx.out_dir / "growth.csv", csv.str());

    const double rel = std::fabs(r.simulated_ratio / r.analytic_ratio - 1.0);
    const bool passed = r.converged && r.per_site_growth.front().in_linear_region && rel <= tol && growth_ok;
    Json res;
    res["slope"] = r.slope;
    res["coupling"] = r.coupling;
    res["analytic_ratio"] = r.analytic_ratio;
    res["simulated_ratio"] = number_or_null(r.simulated_ratio);
    res["relative_error"] = number_or_null(rel);
    res["left_linear_region"] = r.left_linear_region;
    res["converged"] = r.converged;
    write_report(ctx, cfg, res, passed);
    ctx.out << "amplification " << format_double(r.simulated_ratio) << " vs analytic "
            << format_double(r.analytic_ratio) << "\n";
    return verdict(ctx, passed);
}

int cmd_free_bc(ExperimentConfig& cfg, const Context& ctx) {
    Section p = params(cfg);
    ProbeOptions o;
    o.n_initials = static_cast<int>(p.integer("n_initials", 4));
    o.t_max = static_cast<int>(p.integer("t_max", 150));
    o.tol = p.number("tol", 1e-6);
    o.override_condition = p.boolean("override", false);
    const double min_var = p.number("min_variation", 1e-3);
    p.finish();
    o.seed = cfg.seed;

    const FreeBcReport r = free_bc_probe(cfg.engine, o);
    std::ostringstream csv;
    csv << "t,distance\n";
    for (std::size_t t = 0; t < r.mutual_distance.size(); ++t)
        csv << t << ',' << format_double(r.mutual_distance[t]) << '\n';
    write_text_file(ctx.out_dir / "mutual_distance.csv", csv.str());

    const bool passed = r.mutual_convergence && r.temporal_variation > min_var;
    Json res;
    res["mutual_convergence"] = r.mutual_convergence;
    res["final_mutual_distance"] = r.final_mutual_distance;
    res["converged_at"] = r.converged_at;
    res["temporal_variation"] = r.temporal_variation;
    write_report(ctx, cfg, res, passed);
    ctx.out << "mutual distance " << format_double(r.final_mutual_distance) << ", temporal variation "
            << format_double(r.temporal_variation) << "\n";
    return verdict(ctx, passed);
}

Rational rational_param(Section& p, std::string_view key, std::string_view fallback) {
    if (!p.has(key)) return parse_rational(p.string(key, fallback));
    const Json& j = p.raw(key);
    try {
        if (j.is_string()) return parse_rational(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config: '" + p.path() + "." + std::string(key) + "': " + e.what());
    }
    if (j.is_number()) return Rational(j.get<double>());
    throw ConfigError("config: '" + p.path() + "." + std::string(key) + "' must be a rational string or number");
}

int cmd_periodic(ExperimentConfig& cfg, const Context& ctx) {
    if (cfg.engine.bc.mode != BcMode::Periodic)
        throw ConfigError("config: the periodic probe needs bc.mode = periodic");
    Section p = params(cfg);
    const Rational xi = rational_param(p, "xi", "0");
    const Rational eta = rational_param(p, "eta", "1/3");
    const int t_max = static_cast<int>(p.integer("t_max", 1000));
    const int max_period = static_cast<int>(p.integer("max_period", 64));
    const double var_tol = p.number("variation_tol", 1e-15);
    const double min_sep = p.number("min_separation", 0.0);
    p.finish();

    const PeriodicReport r = periodic_nonuniqueness_demo(cfg.engine.box, cfg.engine.map, cfg.engine.coupling, xi,
                                                         eta, t_max, max_period);
    const bool passed = r.max_spatial_variation <= var_tol && r.min_separation > 0.0 &&
                        r.min_separation >= min_sep - 1e-12;
    Json res;
    res["xi"] = to_string(xi);
    res["eta"] = to_string(eta);
    res["xi_period"] = r.xi_period;
    res["eta_period"] = r.eta_period;
    res["min_separation"] = r.min_separation;
    res["max_spatial_variation"] = r.max_spatial_variation;
    res["t_max"] = r.t_max;
    write_report(ctx, cfg, res, passed);
    ctx.out << "min separation " << format_double(r.min_separation) << ", spatial variation "
            << format_double(r.max_spatial_variation) << "\n";
    return verdict(ctx, passed);
}

std::string spread_csv(const BoxSpec& box, const SpreadReport& r) {
    std::ostringstream csv;
    csv << "site,L,s_plus,s_minus,count\n";
    for (const SiteSpread& s : r.per_site)
        csv << label(box, s.site) << ',' << s.distance << ',' << format_double(s.s_plus) << ','
            << format_double(s.s_minus) << ',' << s.sample_count << '\n';
    return csv.str();
}

int cmd_stochastic(ExperimentConfig& cfg, const Context& ctx) {
    Section p = params(cfg);
    const std::string mode = p.string("mode", "both");
    if (mode != "both" && mode != "instability" && mode != "contraction")
        throw ConfigError("config: 'experiment.params.mode' must be instability, contraction or both");
    EnsembleConfig ec;
    ec.engine = cfg.engine;
    ec.perturbation.epsilon = p.number("epsilon", 0.005);
    ec.n_trajectories = static_cast<int>(p.integer("n_trajectories", 400));
    ec.burn_in = static_cast<int>(p.integer("burn_in", 1000));
    ec.horizon = static_cast<int>(p.integer("horizon", 2000));
    ec.bins = static_cast<int>(p.integer("bins", 1024));
    ec.sample_stride = static_cast<int>(p.integer("sample_stride", 1));
    ec.seed = cfg.seed;
    ec.threads = ctx.threads;
    const bool allow = p.boolean("allow_violation", false);
    const bool control = p.boolean("control", true);
    const double min_corr = p.number("min_correlation", 0.9);
    const Site site = parse_site(p.raw("site", site_json(cfg.engine.box->site_at(0), cfg.engine.box->dim())),
                                 cfg.engine.box->dim(), "experiment.params.site");
    ContractionOptions co;
    co.site = site;
    co.initial_a = p.number("initial_a", 0.3);
    co.initial_b = p.number("initial_b", 0.35);
    co.steps = static_cast<int>(p.integer("steps", 40));
    const double slack = p.number("slack", 0.1);
    p.finish();

    const BoxSpec& box = *cfg.engine.box;
    Json res;
    bool passed = true;
    if (mode != "contraction") {
        const SpreadReport r = instability_experiment(ec, allow);
        write_text_file(ctx.out_dir / "spread.csv", spread_csv(box, r));
        const bool trend = r.fitted_slope > 0.0 && r.correlation >= min_corr;
        passed = passed && trend;
        Json inst;
        inst["fitted_slope"] = r.fitted_slope;
        inst["correlation"] = r.correlation;
        inst["gamma_estimate"] = r.gamma_estimate;
        inst["a"] = r.a;
        inst["b"] = r.b;
        inst["lambda_lower"] = r.lambda_lower;
        inst["epsilon"] = r.epsilon;
        ctx.out << "instability: slope " << format_double(r.fitted_slope) << ", rank correlation "
                << format_double(r.correlation) << "\n";
        if (control) {
            EnsembleConfig zero = ec;
            zero.perturbation.epsilon = 0.0;
            const SpreadReport z = instability_experiment(zero, allow);
            write_text_file(ctx.out_dir / "spread_control.csv", spread_csv(box, z));
            double worst = 0.0;
            for (const SiteSpread& s : z.per_site) worst = std::max(worst, s.s_minus);
            const bool ok = worst <= 2.0 / (2.0 * ec.bins);
            passed = passed && ok;
            inst["control_max_s_minus"] = worst;
            inst["control_passed"] = ok;
            ctx.out << "control (epsilon = 0): max s_minus " << format_double(worst) << "\n";
        }
        res["instability"] = inst;
    }
    if (mode != "instability") {
        const ContractionReport r = contraction_diagnostic(ec, co);
        std::ostringstream csv;
        csv << "t,w1\n";
        for (std::size_t t = 0; t < r.distances.size(); ++t) csv << t << ',' << format_double(r.distances[t]) << '\n';
        write_text_file(ctx.out_dir / "contraction.csv", csv.str());
        const bool ok = !r.empirical_factors.empty() && r.geometric_mean <= r.bound + slack;
        passed = passed && ok;
        Json con;
        con["site"] = label(box, site);
        con["geometric_mean"] = r.geometric_mean;
        con["bound"] = r.bound;
        con["noise_floor"] = r.noise_floor;
        con["empirical_factors"] = r.empirical_factors;
        res["contraction"] = con;
        ctx.out << "contraction: geometric mean " << format_double(r.geometric_mean) << " (bound "
                << format_double(r.bound) << " + " << format_double(slack) << ")\n";
    }
    write_report(ctx, cfg, res, passed);
    return verdict(ctx, passed);
}

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("CMLAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using Handler = std::function<int(ExperimentConfig&, const Context&)>;
    const std::vector<std::pair<std::string, Handler>> commands = {
        {"check-topology", cmd_check_topology}, {"simulate", cmd_simulate},   {"lra", cmd_lra},
        {"sensitivity", cmd_sensitivity},       {"free-bc", cmd_free_bc},     {"periodic", cmd_periodic},
        {"stochastic", cmd_stochastic},
    };

    CLI::App app{"Coupled map lattice laboratory"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, handler] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads (default: $CMLAB_THREADS or 1)")
            ->check(CLI::PositiveNumber);
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    for (const auto& [name, handler] : commands) {
        if (!subs[name]->parsed()) continue;
        try {
            ExperimentConfig cfg = load_config(config_path, seed ? &*seed : nullptr);
            if (!cfg.probe.empty() && cfg.probe != name && name != "check-topology" && name != "simulate")
                throw ConfigError("config: experiment.probe is '" + cfg.probe + "' but the subcommand is '" + name + "'");
            fs::path dir = !out_dir.empty() ? fs::path(out_dir)
                           : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                                     : fs::path("out") / name;
            Context ctx{name, dir, resolve_threads(threads), out, err};
            return handler(cfg, ctx);
        } catch (const ConfigError& e) {
            err << e.what() << "\n";
            return kConfigError;
        } catch (const InvalidSpec& e) {
            err << "config: " << e.what() << "\n";
            return kConfigError;
        } catch (const DanglingInput& e) {
            err << "config: " << e.what() << "\n";
            return kConfigError;
        } catch (const CycleDetected& e) {
            err << "precondition: " << e.what() << "\n";
            return kPreconditionViolated;
        } catch (const Error& e) {
            err << "precondition: " << e.what() << "\n";
            return kPreconditionViolated;
        } catch (const std::invalid_argument& e) {
            err << "config: " << e.what() << "\n";
            return kConfigError;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kConfigError;
        }
    }
    return kConfigError;
}

}  // namespace cml::cli
