#include "cml/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "cml/error.hpp"
#include "cml/topology.hpp"

namespace cml {

void PerturbationSpec::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 0.25)) throw InvalidSpec("perturbation: epsilon must lie in [0, 0.25]");
    if (kernel != KernelKind::UniformArc) throw InvalidSpec("perturbation: unknown kernel");
    if (lambda_q != 1.0) throw InvalidSpec("perturbation: UniformArc has lambda_q = 1");
}

CirclePoint sample_perturbation(const PerturbationSpec& spec, CirclePoint x, double u) {
    return CirclePoint(x.value() + spec.epsilon * (2.0 * u - 1.0));
}

CirclePoint sample_perturbation(const PerturbationSpec& spec, CirclePoint x, StreamRng& rng) {
    return sample_perturbation(spec, x, rng.uniform());
}

void EnsembleConfig::validate() const {
    perturbation.validate();
    if (n_trajectories < 1) throw InvalidSpec("ensemble: n_trajectories must be >= 1");
    if (burn_in < 0) throw InvalidSpec("ensemble: burn_in must be >= 0");
    if (horizon < burn_in) throw InvalidSpec("ensemble: horizon must be >= burn_in");
    if (bins < 16) throw InvalidSpec("ensemble: bins must be >= 16");
    if (sample_stride < 1) throw InvalidSpec("ensemble: sample_stride must be >= 1");
    if (threads < 1) throw InvalidSpec("ensemble: threads must be >= 1");
    if (engine.bc.mode != BcMode::Frozen) throw InvalidSpec("ensemble: needs frozen boundary conditions");
}

LatticeState perturbed_step(const Engine& engine, const PerturbationSpec& spec, const LatticeState& state,
                            const CounterRng& noise, std::uint64_t trajectory, std::uint64_t step) {
    if (state.values().size() != engine.box().size())
        throw MissingInput("perturbed_step: state does not cover the box and its shell");
    const auto in = state.values();
    std::vector<double> mapped(in.size());
    engine.map_phase<double>(in, mapped);
    if (spec.epsilon > 0.0)
        for (std::size_t i = 0; i < engine.interior_count(); ++i)
            mapped[i] = sample_perturbation(spec, CirclePoint(mapped[i]), noise.uniform(trajectory, step, i)).value();
    LatticeState next = state;
    engine.interact<double>(in, mapped, next.values());
    return next;
}

LatticeState perturbed_step(const EnsembleConfig& config, const LatticeState& state, std::uint64_t trajectory,
                            std::uint64_t step) {
    config.validate();
    const Engine engine(config.engine);
    return perturbed_step(engine, config.perturbation, state, CounterRng(config.seed, streams::kPerturbation),
                          trajectory, step);
}

namespace {

std::size_t bin_of(double x, int bins) {
    auto k = static_cast<std::size_t>(x * bins);
    return std::min(k, static_cast<std::size_t>(bins - 1));
}

// Runs `body(index)` for index in [0, count) on up to `threads` workers;
// worker w gets slot w for thread-local accumulation.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(0, i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < count;) body(w, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleConfig& config) {
    config.validate();
    if (config.horizon == config.burn_in)
        throw InsufficientSamples("run_ensemble: no steps after burn-in (horizon == burn_in)");
    const Engine engine(config.engine);
    const std::size_t n = engine.interior_count();
    const std::size_t m = static_cast<std::size_t>(config.n_trajectories);
    const std::size_t bins = static_cast<std::size_t>(config.bins);
    const CounterRng noise(config.seed, streams::kPerturbation);
    const std::size_t workers = static_cast<std::size_t>(std::max(1, config.threads));

    std::vector<std::vector<std::uint64_t>> hist(workers, std::vector<std::uint64_t>(n * bins, 0));
    std::vector<std::vector<std::vector<double>>> kept(m);

    parallel_for(m, config.threads, [&](std::size_t w, std::size_t traj) {
        auto& h = hist[w];
        auto& mine = kept[traj];
        mine.assign(n, {});
        LatticeState s = engine.random_state(config.seed, traj);
        for (int t = 1; t <= config.horizon; ++t) {
            s = perturbed_step(engine, config.perturbation, s, noise, traj, static_cast<std::uint64_t>(t));
            if (t <= config.burn_in) continue;
            const bool keep = (t - config.burn_in - 1) % config.sample_stride == 0;
            const auto v = s.interior();
            for (std::size_t i = 0; i < n; ++i) {
                ++h[i * bins + bin_of(v[i], config.bins)];
                if (keep) mine[i].push_back(v[i]);
            }
        }
    });

    EnsembleResult res;
    res.sites.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        SiteMarginal& sm = res.sites[i];
        sm.site = engine.box().site_at(i);
        sm.histogram.assign(bins, 0);
        for (const auto& h : hist)
            for (std::size_t k = 0; k < bins; ++k) sm.histogram[k] += h[i * bins + k];
        sm.count = std::accumulate(sm.histogram.begin(), sm.histogram.end(), std::uint64_t{0});
        for (std::size_t traj = 0; traj < m; ++traj)
            sm.samples.insert(sm.samples.end(), kept[traj][i].begin(), kept[traj][i].end());
    }
    return res;
}

double spread_upper(std::span<const double> samples) {
    if (samples.empty()) throw EmptySamples("spread_upper: no samples");
    std::vector<double> s(samples.begin(), samples.end());
    for (double& x : s) x = wrap_unit(x);
    std::sort(s.begin(), s.end());
    double gap = s.front() + 1.0 - s.back();
    for (std::size_t i = 1; i < s.size(); ++i) gap = std::max(gap, s[i] - s[i - 1]);
    return std::min(0.5, (1.0 - gap) / 2.0);
}

double spread_lower_from_histogram(std::span<const std::uint64_t> histogram) {
    const std::size_t bins = histogram.size();
    if (bins == 0) throw EmptySamples("spread_lower: no cells");
    std::size_t occupied = 0;
    for (auto c : histogram) occupied += c > 0;
    if (occupied == 0) throw EmptySamples("spread_lower: no samples");
    if (occupied == bins) return 0.5;
    // Start scanning right after an empty cell so circular runs are not split.
    std::size_t start = 0;
    while (histogram[start] > 0) ++start;
    std::size_t best = 0, run = 0;
    for (std::size_t k = 1; k <= bins; ++k) {
        if (histogram[(start + k) % bins] > 0) {
            best = std::max(best, ++run);
        } else {
            run = 0;
        }
    }
    return static_cast<double>(best) / (2.0 * static_cast<double>(bins));
}

double spread_lower(std::span<const double> samples, int bins) {
    if (samples.empty()) throw EmptySamples("spread_lower: no samples");
    if (bins < 16) throw std::invalid_argument("spread_lower: bins must be >= 16");
    std::vector<std::uint64_t> h(static_cast<std::size_t>(bins), 0);
    for (double x : samples) ++h[bin_of(wrap_unit(x), bins)];
    return std::min(spread_lower_from_histogram(h), spread_upper(samples));
}

double w1_circle(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptySamples("w1_circle: empty sample set");
    struct Event {
        double x;
        long long jump;
    };
    std::vector<Event> ev;
    ev.reserve(a.size() + b.size());
    // integer levels in units of 1 / (na * nb) keep equal multisets at exactly 0
    const auto na = static_cast<long long>(a.size()), nb = static_cast<long long>(b.size());
    const double unit = 1.0 / (static_cast<double>(na) * static_cast<double>(nb));
    for (double x : a) ev.push_back({wrap_unit(x), nb});
    for (double x : b) ev.push_back({wrap_unit(x), -na});
    std::sort(ev.begin(), ev.end(), [](const Event& p, const Event& q) { return p.x < q.x; });

    // F - G is piecewise constant; W1 = min over alpha of the integral of |F - G - alpha|.
    std::vector<std::pair<double, double>> pieces;  // (value, length)
    pieces.reserve(ev.size() + 1);
    long long level = 0;
    double prev = 0.0;
    for (const Event& e : ev) {
        if (e.x > prev) pieces.emplace_back(static_cast<double>(level) * unit, e.x - prev);
        level += e.jump;
        prev = e.x;
    }
    if (prev < 1.0) pieces.emplace_back(static_cast<double>(level) * unit, 1.0 - prev);

    std::sort(pieces.begin(), pieces.end());
    double acc = 0.0, alpha = pieces.front().first;
    for (const auto& [v, len] : pieces) {
        acc += len;
        if (acc >= 0.5) {
            alpha = v;
            break;
        }
    }
    double w = 0.0;
    for (const auto& [v, len] : pieces) w += std::fabs(v - alpha) * len;
    return w;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t p, std::size_t q) { return x[p] < x[q]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx == 0.0 ? 0.0 : sxy / sxx;
}

}  // namespace

double rank_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("rank_correlation: size mismatch");
    if (x.size() < 2) return 0.0;
    return pearson(average_ranks(x), average_ranks(y));
}

SpreadReport instability_experiment(const EnsembleConfig& config, bool allow_violation) {
    config.validate();
    const CouplingSpec& coupling = config.engine.coupling;
    const SpreadCoefficients ab = spread_coefficients(coupling);
    const double lam = config.engine.map.lambda_lower();
    if (!allow_violation) {
        if (!(ab.a * lam < 1.0 && (ab.a + ab.b) * lam >= 1.0))
            throw ExpansionConditionViolated("expansion condition fails: a*lambda_T = " + std::to_string(ab.a * lam) +
                                             ", (a+b)*lambda_T = " + std::to_string((ab.a + ab.b) * lam));
        if (!check_lra_condition(coupling, config.engine.map).satisfied)
            throw ConditionViolated("Lambda_I * Lambda_T is not below 1");
    }
    const BoxSpec& box = *config.engine.box;
    const ConnectivityGraph graph = build_graph(coupling, box);
    if (detect_cycle(graph) && !allow_violation) throw ConditionViolated("coupling is not unidirectional");
    const std::vector<int> dist = boundary_distances(graph);

    const EnsembleResult ens = run_ensemble(config);
    const std::uint64_t need = 30ull * static_cast<std::uint64_t>(config.bins);

    SpreadReport rep;
    rep.a = ab.a;
    rep.b = ab.b;
    rep.lambda_lower = lam;
    rep.epsilon = config.perturbation.epsilon;
    rep.seed = config.seed;
    for (const SiteMarginal& sm : ens.sites) {
        if (sm.count < need)
            throw InsufficientSamples("instability_experiment: " + std::to_string(sm.count) +
                                      " samples per site, need at least 30 * bins = " + std::to_string(need));
        SiteSpread sp;
        sp.site = sm.site;
        sp.distance = dist[*graph.index_of(sm.site)];
        sp.s_plus = spread_upper(sm.samples);
        sp.s_minus = std::min(spread_lower_from_histogram(sm.histogram), sp.s_plus);
        sp.sample_count = sm.count;
        rep.per_site.push_back(sp);
    }
    std::stable_sort(rep.per_site.begin(), rep.per_site.end(),
                     [](const SiteSpread& p, const SiteSpread& q) { return p.distance < q.distance; });

    std::vector<double> L, s;
    for (const SiteSpread& sp : rep.per_site)
        if (sp.distance != kUnreachable) {
            L.push_back(sp.distance);
            s.push_back(sp.s_minus);
        }
    rep.fitted_slope = L.size() >= 2 ? ls_slope(L, s) : 0.0;
    rep.correlation = rank_correlation(L, s);
    rep.gamma_estimate = rep.epsilon > 0.0 ? rep.fitted_slope / rep.epsilon : 0.0;
    return rep;
}

ContractionReport contraction_diagnostic(const EnsembleConfig& config, const ContractionOptions& options) {
    config.validate();
    if (options.steps < 2) throw std::invalid_argument("contraction_diagnostic: steps must be >= 2");
    const Engine engine(config.engine);
    const BoxSpec& box = *config.engine.box;
    const ConnectivityGraph graph = build_graph(config.engine.coupling, box);
    const auto gi = graph.index_of(options.site);
    if (!gi || !graph.is_interior(*gi)) throw InvalidSpec("contraction_diagnostic: site is not interior");
    if (boundary_distance(graph, options.site) != 1 || !upstream_set(graph, options.site).empty())
        throw ConditionViolated("contraction_diagnostic: site must be fed by frozen boundary values only");
    const std::size_t idx = *box.index_of(options.site);

    const std::size_t m = static_cast<std::size_t>(config.n_trajectories);
    const auto steps = static_cast<std::size_t>(options.steps);
    // Three ensembles: A and B differ in the initial value at the site; C
    // starts like A but uses B's noise, so W1(A, C) measures the noise floor.
    const CounterRng noise_a(config.seed, streams::kPerturbation);
    const CounterRng noise_b(config.seed, streams::kContractionB);
    std::vector<std::vector<double>> va(steps + 1, std::vector<double>(m)), vb = va, vc = va;

    parallel_for(m, config.threads, [&](std::size_t, std::size_t traj) {
        LatticeState a = engine.random_state(config.seed, traj);
        a.set(options.site, CirclePoint(options.initial_a));
        LatticeState b = a;
        b.set(options.site, CirclePoint(options.initial_b));
        LatticeState c = a;
        for (std::size_t t = 0;; ++t) {
            va[t][traj] = a.values()[idx];
            vb[t][traj] = b.values()[idx];
            vc[t][traj] = c.values()[idx];
            if (t == steps) break;
            a = perturbed_step(engine, config.perturbation, a, noise_a, traj, t + 1);
            b = perturbed_step(engine, config.perturbation, b, noise_b, traj, t + 1);
            c = perturbed_step(engine, config.perturbation, c, noise_b, traj, t + 1);
        }
    });

    ContractionReport rep;
    rep.bound = check_lra_condition(config.engine.coupling, config.engine.map).lambda_product;
    double floor_sum = 0.0;
    std::size_t floor_n = 0;
    for (std::size_t t = 0; t <= steps; ++t) {
        rep.distances.push_back(w1_circle(va[t], vb[t]));
        if (2 * t >= steps) {
            floor_sum += w1_circle(va[t], vc[t]);
            ++floor_n;
        }
    }
    rep.noise_floor = floor_sum / static_cast<double>(floor_n);
    const double threshold = std::max(2.0 * rep.noise_floor, 1e-10);
    double log_sum = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        if (!(rep.distances[t] > threshold && rep.distances[t + 1] > threshold)) break;
        const double r = rep.distances[t + 1] / rep.distances[t];
        rep.empirical_factors.push_back(r);
        log_sum += std::log(r);
    }
    rep.geometric_mean = rep.empirical_factors.empty()
                             ? 0.0
                             : std::exp(log_sum / static_cast<double>(rep.empirical_factors.size()));
    return rep;
}

}  // namespace cml
