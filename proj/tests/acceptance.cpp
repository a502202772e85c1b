// One line per acceptance criterion; exit status is nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cml/analysis.hpp"
#include "cml/cli.hpp"
#include "cml/config.hpp"
#include "cml/error.hpp"
#include "cml/stochastic.hpp"
#include "cml/topology.hpp"
#include "support.hpp"

using namespace cml;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome enumeration_vs_cycles() {
    const auto t0 = std::chrono::steady_clock::now();
    StreamRng rng(2024, 77);
    int agree = 0, acyclic = 0;
    const int total = 1000;
    for (int k = 0; k < total; ++k) {
        const int n = 1 + static_cast<int>(rng.uniform() * 12);
        const double p = k % 2 ? 0.3 : 0.1;
        std::vector<Site> interior, boundary{{0, 0}};
        for (int i = 1; i <= n; ++i) interior.push_back({i, 0});
        std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
        std::vector<std::pair<Site, Site>> edges;
        for (int i = 1; i <= n; ++i)
            if (rng.uniform() < p) edges.push_back({{0, 0}, {i, 0}});
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (u != v && rng.uniform() < p) {
                    adj[u][v] = true;
                    edges.push_back({{u + 1, 0}, {v + 1, 0}});
                }
        // cycle oracle: transitive closure
        auto r = adj;
        for (int m = 0; m < n; ++m)
            for (int i = 0; i < n; ++i)
                if (r[i][m])
                    for (int j = 0; j < n; ++j)
                        if (r[m][j]) r[i][j] = true;
        bool cyclic = false;
        for (int v = 0; v < n; ++v) cyclic = cyclic || r[v][v];

        const auto g = ConnectivityGraph::from_edges(1, interior, boundary, edges);
        bool ok;
        try {
            ok = validate_enumeration(g, enumerate_paper(g));
        } catch (const CycleDetected&) {
            ok = false;
        }
        if (ok == !cyclic) ++agree;
        if (!cyclic) ++acyclic;
    }
    const double secs = seconds_since(t0);
    return {agree == total && secs < 30.0,
            fmt("%.0f/1000 agree (%.0f acyclic), %.2f s", agree, acyclic, secs)};
}

Outcome lra_random_bc() {
    const auto t0 = std::chrono::steady_clock::now();
    const EngineConfig cfg = testing::standard_chain(16, BoundaryCondition{}, -1.0, 2024);
    int ok = 0;
    double worst_dist = 0.0, worst_rate = 0.0;
    for (std::uint64_t pair = 0; pair < 10; ++pair) {
        ProbeOptions o;
        o.n_initials = 2;
        o.t_max = 100;
        o.tol = 1e-6;
        o.seed = 1000 + pair;
        const LraReport r = lra_probe(cfg, o);
        double rate = 1.0;
        try {
            rate = fit_rate(r.max_distance);
        } catch (const InsufficientData&) {
        }
        worst_dist = std::max(worst_dist, r.max_final_distance);
        worst_rate = std::max(worst_rate, rate);
        if (r.max_final_distance <= 1e-6 && rate <= 0.85) ++ok;
    }
    const double secs = seconds_since(t0);
    return {ok == 10 && secs < 5.0,
            fmt("%.0f/10 pairs converged; worst final distance %.3g, worst rate %.3g", ok, worst_dist, worst_rate) +
                fmt(", %.2f s", secs)};
}

Outcome fixed_point_propagation() {
    const EngineConfig cfg = testing::standard_chain(16, BoundaryCondition{}, 0.0);
    const Engine eng(cfg);
    double worst = 0.0;
    for (std::uint64_t run = 0; run < 10; ++run) {
        LatticeState x = eng.random_state(3, run);
        for (int t = 0; t < 300; ++t) x = eng.step(x);
        for (double v : x.interior()) worst = std::max(worst, circle_dist(v, 0.0));
    }
    return {worst <= 1e-10, fmt("max distance to 0 after 300 steps %.3g", worst)};
}

Outcome sensitivity() {
    SensitivityOptions o;
    o.v = 0.5;
    o.delta = 1e-4;
    const SensitivityReport r = sensitivity_experiment(testing::sensitivity_chain(12), o);
    bool growth_ok = true;
    int checked = 0;
    for (const SiteGrowth& g : r.per_site_growth) {
        if (g.distance < 1 || g.distance > 4 || !g.in_linear_region) continue;
        ++checked;
        growth_ok = growth_ok && std::fabs(g.ratio / g.analytic - 1.0) <= 0.1;
    }
    const double rel = std::fabs(r.simulated_ratio / 1.3125 - 1.0);
    return {r.converged && rel <= 1e-3 && growth_ok && checked == 4,
            fmt("first-site amplification %.6f (rel err %.2g), %.0f sites L<=4 checked", r.simulated_ratio, rel,
                checked)};
}

Outcome free_bc() {
    const EngineConfig cfg = testing::standard_chain(8, BoundaryCondition{BcMode::Free, {}}, -1.0, 5);
    ProbeOptions o;
    o.n_initials = 4;
    o.t_max = 150;
    o.tol = 1e-6;
    o.seed = 5;
    const FreeBcReport r = free_bc_probe(cfg, o);
    return {r.mutual_convergence && r.temporal_variation > 1e-3,
            fmt("mutual distance %.3g at t=150 (converged at %.0f), temporal variation %.4f", r.final_mutual_distance,
                r.converged_at, r.temporal_variation)};
}

Outcome periodic() {
    const EngineConfig cfg = testing::standard_chain(8, BoundaryCondition::periodic());
    const PeriodicReport r =
        periodic_nonuniqueness_demo(cfg.box, cfg.map, cfg.coupling, Rational(0), Rational(1, 3), 1000);
    return {r.max_spatial_variation <= 1e-15 && r.min_separation >= 1.0 / 3.0 - 1e-12,
            fmt("spatial variation %.3g, min separation %.15f over 1000 steps", r.max_spatial_variation,
                r.min_separation)};
}

Outcome premap() {
    auto box = testing::chain_box(10, 2);
    EngineConfig pre;
    pre.box = box;
    pre.map = LocalMapSpec::rotation(0.3);
    const std::vector<double> w{0.2, 0.4, 0.4};
    pre.coupling = CouplingSpec::from_template(*box, StencilTemplate::unidirectional_k(w));
    pre.bc = testing::random_bc(BcMode::Frozen, *box, 7);
    pre.premap_variant = true;
    EngineConfig std_cfg = pre;
    std_cfg.premap_variant = false;
    std_cfg.bc = BoundaryCondition::frozen(premap_equivalence_witness(pre, pre.bc.values));
    const Engine a(pre), b(std_cfg);
    double worst = 0.0;
    for (std::uint64_t run = 0; run < 5; ++run) {
        LatticeState xa = a.random_state(11, run), xb = b.random_state(11, run);
        for (int t = 0; t < 100; ++t) {
            xa = a.step(xa);
            xb = b.step(xb);
            worst = std::max(worst, sup_interior_distance(xa, xb));
        }
    }
    return {worst <= 1e-12, fmt("max interior difference %.3g over 100 steps", worst)};
}

EnsembleConfig standard_ensemble(double eps) {
    EnsembleConfig c;
    c.engine = testing::standard_chain(12, BoundaryCondition{}, -1.0, 42);
    c.perturbation.epsilon = eps;
    c.n_trajectories = 400;
    c.burn_in = 1000;
    c.horizon = 2000;
    c.seed = 42;
    c.bins = 1024;
    return c;
}

Outcome instability() {
    const auto t0 = std::chrono::steady_clock::now();
    const SpreadReport r = instability_experiment(standard_ensemble(0.005));
    double control = 0.0;
    for (const SiteSpread& s : instability_experiment(standard_ensemble(0.0)).per_site)
        control = std::max(control, s.s_minus);
    const double secs = seconds_since(t0);
    const double cap = 2.0 / (2.0 * 1024);
    return {r.correlation >= 0.9 && r.fitted_slope > 0.0 && control <= cap && secs < 120.0,
            fmt("rank correlation %.3f, slope %.4f, control max s_minus %.3g", r.correlation, r.fitted_slope,
                control) +
                fmt(", %.1f s", secs)};
}

Outcome contraction() {
    EnsembleConfig c = standard_ensemble(0.005);
    ContractionOptions o;
    o.site = {1, 0};
    const ContractionReport r = contraction_diagnostic(c, o);
    return {!r.empirical_factors.empty() && r.geometric_mean <= r.bound + 0.1,
            fmt("geometric mean %.3f over %.0f steps (bound %.2f + 0.1)", r.geometric_mean,
                static_cast<double>(r.empirical_factors.size()), r.bound)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"cmlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome reproducibility() {
    const char* env = std::getenv("CMLAB_CONFIGS");
    const fs::path dir = env ? fs::path(env) : fs::path("configs");
    const fs::path tmp = fs::temp_directory_path() / "cmlab_acceptance";
    fs::remove_all(tmp);
    std::vector<fs::path> configs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") configs.push_back(e.path());
    std::sort(configs.begin(), configs.end());
    int same = 0, files = 0;
    std::string mismatch;
    for (const fs::path& p : configs) {
        const auto cfg = cli::load_config(p);
        const std::string cmd = cfg.probe.empty() ? "check-topology" : cfg.probe;
        const fs::path a = tmp / p.stem() / "a", b = tmp / p.stem() / "b";
        const int ca = run_cli({cmd, "--config", p.string(), "--out", a.string(), "--threads", "1"});
        const int cb = run_cli({cmd, "--config", p.string(), "--out", b.string(), "--threads", "2"});
        bool ok = ca == cb && fs::exists(a / "report.json");
        for (const auto& e : fs::directory_iterator(a)) {
            ++files;
            ok = ok && slurp(e.path()) == slurp(b / e.path().filename());
        }
        if (ok)
            ++same;
        else
            mismatch += " " + p.stem().string();
    }
    fs::remove_all(tmp);
    return {same == static_cast<int>(configs.size()) && !configs.empty(),
            fmt("%.0f/%.0f shipped configs byte-identical (%.0f files)", same, static_cast<double>(configs.size()),
                files) +
                mismatch};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"enumeration exists iff acyclic", enumeration_vs_cycles},
        {"LRA under frozen random boundary", lra_random_bc},
        {"fixed point propagates from the boundary", fixed_point_propagation},
        {"boundary sensitivity", sensitivity},
        {"free boundary LRA", free_bc},
        {"periodic non-uniqueness", periodic},
        {"pre-map variant equivalence", premap},
        {"noise-driven spread grows with L", instability},
        {"Wasserstein contraction", contraction},
        {"reproducibility", reproducibility},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
