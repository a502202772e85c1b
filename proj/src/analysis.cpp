#include "cml/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cml/error.hpp"
#include "cml/topology.hpp"

namespace cml {

namespace {

// Sup over interior sites and all run pairs; per-site maxima into `per_site`.
double pairwise_spread(const std::vector<LatticeState>& runs, std::vector<double>* per_site) {
    const std::size_t n = runs.front().box().interior_count();
    if (per_site) per_site->assign(n, 0.0);
    double worst = 0.0;
    for (std::size_t a = 0; a < runs.size(); ++a)
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            const auto va = runs[a].interior();
            const auto vb = runs[b].interior();
            for (std::size_t i = 0; i < n; ++i) {
                const double d = circle_dist(va[i], vb[i]);
                worst = std::max(worst, d);
                if (per_site) (*per_site)[i] = std::max((*per_site)[i], d);
            }
        }
    return worst;
}

void check_probe_options(const ProbeOptions& o) {
    if (o.n_initials < 2) throw std::invalid_argument("probe: n_initials must be >= 2");
    if (o.t_max < 1) throw std::invalid_argument("probe: t_max must be >= 1");
    if (!(o.tol > 0.0)) throw std::invalid_argument("probe: tol must be positive");
}

void check_lra_preconditions(const EngineConfig& config, const ProbeOptions& o) {
    if (o.override_condition) return;
    const ConnectivityGraph graph = build_graph(config.coupling, *config.box);
    if (auto cyc = detect_cycle(graph))
        throw ConditionViolated("coupling is not unidirectional: the dependency graph has a cycle");
    const LraCondition cond = check_lra_condition(config.coupling, config.map);
    if (!cond.satisfied)
        throw ConditionViolated("Lambda_I * Lambda_T = " + std::to_string(cond.lambda_product) + " is not below 1");
}

// Rate from the decaying part of the series: from the first time the runs are
// within 1e-2 of each other until they hit roundoff.
double fit_series_rate(const std::vector<double>& d) {
    std::size_t first = d.size(), last = 0;
    for (std::size_t t = 0; t < d.size(); ++t) {
        if (first == d.size() && d[t] < 1e-2) first = t;
        if (d[t] > kDistanceFloor) last = t;
    }
    if (first < d.size() && last > first && last - first + 1 >= 10) {
        try {
            return fit_rate(std::span<const double>(d).subspan(first, last - first + 1));
        } catch (const InsufficientData&) {
        }
    }
    return fit_rate(d);
}

}  // namespace

double fit_rate(std::span<const double> distances) {
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t t = 0; t < distances.size(); ++t) {
        const double d = distances[t];
        if (!(d > kDistanceFloor) || !std::isfinite(d)) continue;
        const double x = static_cast<double>(t), y = std::log(d);
        n += 1;
        st += x;
        sy += y;
        stt += x * x;
        sty += x * y;
    }
    if (n < 10) throw InsufficientData("fit_rate: fewer than 10 distances above the roundoff floor");
    const double den = n * stt - st * st;
    const double slope = (n * sty - st * sy) / den;
    return std::exp(slope);
}

LraReport lra_probe(const EngineConfig& config, const ProbeOptions& options) {
    check_probe_options(options);
    check_lra_preconditions(config, options);
    const Engine engine(config);

    LraReport rep;
    rep.seed = options.seed;
    rep.rate_bound = check_lra_condition(config.coupling, config.map).lambda_product;

    std::vector<LatticeState> runs;
    for (int r = 0; r < options.n_initials; ++r)
        runs.push_back(engine.random_state(options.seed, static_cast<std::uint64_t>(r)));

    const std::size_t n = engine.interior_count();
    rep.per_site_distances.assign(n, {});
    std::vector<double> site;
    for (int t = 0;; ++t) {
        rep.max_distance.push_back(pairwise_spread(runs, &site));
        for (std::size_t i = 0; i < n; ++i) rep.per_site_distances[i].push_back(site[i]);
        if (t == options.t_max) break;
        for (auto& s : runs) s = engine.step(s);
    }
    rep.max_final_distance = rep.max_distance.back();
    rep.converged = rep.max_final_distance <= options.tol;
    rep.limit_solution = runs.front();
    rep.fitted_rate = fit_series_rate(rep.max_distance);
    return rep;
}

double analytic_limit_linear(double a, double b, double c, double v) {
    const double den = 1.0 - a + c * a;
    if (den == 0.0) throw Degenerate("analytic_limit_linear: 1 - a + ca = 0");
    return (b + c * a * v) / den;
}

double sensitivity_ratio(double a, double c) {
    if (!(std::fabs(a) > 1.0)) throw ConditionViolated("sensitivity_ratio: needs |a| > 1");
    const double den = c * a - (a - 1.0);
    if (den == 0.0) throw Degenerate("sensitivity_ratio: ca - (a - 1) = 0");
    if (den < 0.0) throw ConditionViolated("sensitivity_ratio: needs ca - (a - 1) > 0");
    return c * a / den;
}

SensitivityReport sensitivity_experiment(const EngineConfig& config, const SensitivityOptions& options) {
    if (config.bc.mode != BcMode::Frozen) throw InvalidSpec("sensitivity: needs frozen boundary conditions");
    const BoxSpec& box = *config.box;
    const ConnectivityGraph graph = build_graph(config.coupling, box);
    const Enumeration en = enumerate_paper(graph);
    const std::vector<Site> order = en.order();
    if (order.empty()) throw InvalidSpec("sensitivity: empty box");

    SensitivityReport rep;
    rep.region = config.map.linear_piece_at(wrap_unit(options.v));
    rep.slope = rep.region.slope;
    const Stencil* first = config.coupling.stencil_for(order.front());
    rep.coupling = 1.0 - config.coupling.self_weight(*first);
    rep.analytic_ratio = sensitivity_ratio(rep.slope, rep.coupling);

    ProbeOptions po;
    po.n_initials = options.n_initials;
    po.t_max = options.t_max;
    po.tol = options.tol;
    po.seed = options.seed;

    EngineConfig c0 = config;
    c0.bc = BoundaryCondition::uniform(BcMode::Frozen, box, CirclePoint(options.v));
    EngineConfig c1 = config;
    c1.bc = BoundaryCondition::uniform(BcMode::Frozen, box, CirclePoint(options.v + options.delta));
    const LraReport r0 = lra_probe(c0, po);
    const LraReport r1 = lra_probe(c1, po);
    rep.converged = r0.converged && r1.converged;

    const std::vector<int> dist = boundary_distances(graph);
    for (const Site& s : order) {
        SiteGrowth g;
        g.site = s;
        g.distance = dist[*graph.index_of(s)];
        const double u0 = r0.limit_solution.at(s).value();
        const double u1 = r1.limit_solution.at(s).value();
        const double diff = circle_dist(u0, u1);
        rep.max_limit_difference = std::max(rep.max_limit_difference, diff);
        if (options.delta == 0.0) {
            g.ratio = std::numeric_limits<double>::quiet_NaN();
        } else {
            g.ratio = diff / std::fabs(options.delta);
        }
        g.analytic = g.distance == kUnreachable ? std::numeric_limits<double>::quiet_NaN()
                                                : std::pow(rep.analytic_ratio, g.distance);
        g.in_linear_region = rep.region.contains(u0) && rep.region.contains(u1);
        if (!g.in_linear_region) rep.left_linear_region = true;
        rep.per_site_growth.push_back(g);
    }
    rep.simulated_ratio = rep.per_site_growth.front().ratio;
    return rep;
}

FreeBcReport free_bc_probe(const EngineConfig& config, const ProbeOptions& options) {
    check_probe_options(options);
    if (config.bc.mode != BcMode::Free) throw InvalidSpec("free_bc_probe: needs free boundary conditions");
    check_lra_preconditions(config, options);
    const Engine engine(config);

    FreeBcReport rep;
    rep.seed = options.seed;
    std::vector<LatticeState> runs;
    for (int r = 0; r < options.n_initials; ++r)
        runs.push_back(engine.random_state(options.seed, static_cast<std::uint64_t>(r)));

    for (int t = 0;; ++t) {
        const double d = pairwise_spread(runs, nullptr);
        rep.mutual_distance.push_back(d);
        if (rep.converged_at < 0 && d <= options.tol) rep.converged_at = t;
        if (t == options.t_max) break;
        LatticeState prev = runs.front();
        for (auto& s : runs) s = engine.step(s);
        if (rep.converged_at >= 0)
            rep.temporal_variation = std::max(rep.temporal_variation, sup_interior_distance(prev, runs.front()));
    }
    rep.final_mutual_distance = rep.mutual_distance.back();
    rep.mutual_convergence = rep.final_mutual_distance <= options.tol;
    return rep;
}

namespace {

int find_period(const LocalMapSpec& map, const Rational& x, int max_period, const char* name) {
    Rational y = x;
    for (int p = 1; p <= max_period; ++p) {
        y = map.apply_generic<Rational>(y);
        if (ScalarOps<Rational>::to_double(circle_dist_exact(x, y)) <= 1e-12) return p;
    }
    throw NotPeriodicPoint(std::string(name) + " = " + to_string(x) + " is not periodic within " +
                           std::to_string(max_period) + " steps");
}

std::vector<Rational> orbit(const LocalMapSpec& map, const Rational& x, int period) {
    std::vector<Rational> out{ScalarOps<Rational>::wrap(x)};
    for (int p = 1; p < period; ++p) out.push_back(map.apply_generic<Rational>(out.back()));
    return out;
}

}  // namespace

PeriodicReport periodic_nonuniqueness_demo(std::shared_ptr<const BoxSpec> box, const LocalMapSpec& map,
                                           const CouplingSpec& coupling, const Rational& xi, const Rational& eta,
                                           int t_max, int max_period) {
    if (t_max < 0) throw std::invalid_argument("periodic demo: t_max must be >= 0");
    PeriodicReport rep;
    rep.t_max = t_max;
    rep.xi_period = find_period(map, xi, max_period, "xi");
    rep.eta_period = find_period(map, eta, max_period, "eta");
    for (const Rational& p : orbit(map, xi, rep.xi_period))
        for (const Rational& q : orbit(map, eta, rep.eta_period))
            if (ScalarOps<Rational>::to_double(circle_dist_exact(p, q)) <= 1e-12)
                throw ConditionViolated("periodic demo: the orbits of xi and eta intersect");

    EngineConfig cfg;
    cfg.box = box;
    cfg.map = map;
    cfg.coupling = coupling;
    cfg.bc = BoundaryCondition::periodic();
    const Engine engine(cfg);

    const std::size_t size = box->size(), n = box->interior_count();
    std::vector<Rational> x(size, ScalarOps<Rational>::wrap(xi)), y(size, ScalarOps<Rational>::wrap(eta));
    std::vector<Rational> nx(size), ny(size);
    rep.min_separation = 1.0;
    for (int t = 0;; ++t) {
        Rational sep = 0, var = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Rational d = circle_dist_exact(x[i], y[i]);
            if (i == 0 || d > sep) sep = d;
            var = std::max(var, circle_dist_exact(x[i], x[0]));
            var = std::max(var, circle_dist_exact(y[i], y[0]));
        }
        rep.min_separation = std::min(rep.min_separation, ScalarOps<Rational>::to_double(sep));
        rep.max_spatial_variation = std::max(rep.max_spatial_variation, ScalarOps<Rational>::to_double(var));
        if (t == t_max) break;
        engine.advance<Rational>(x, nx);
        engine.advance<Rational>(y, ny);
        x.swap(nx);
        y.swap(ny);
    }
    return rep;
}

}  // namespace cml
