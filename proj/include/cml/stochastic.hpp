#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cml/coupling.hpp"
#include "cml/engine.hpp"
#include "cml/lattice.hpp"
#include "cml/rng.hpp"

namespace cml {

enum class KernelKind { UniformArc };

// Translation-invariant noise: uniform on the closed arc of radius epsilon.
struct PerturbationSpec {
    double epsilon = 0.0;
    KernelKind kernel = KernelKind::UniformArc;
    double lambda_q = 1.0;

    // Throws InvalidSpec unless 0 <= epsilon <= 0.25.
    void validate() const;
};

// u in [0, 1] picks the position on the arc [x - eps, x + eps].
CirclePoint sample_perturbation(const PerturbationSpec& spec, CirclePoint x, double u);
CirclePoint sample_perturbation(const PerturbationSpec& spec, CirclePoint x, StreamRng& rng);

struct EnsembleConfig {
    EngineConfig engine;
    PerturbationSpec perturbation;
    int n_trajectories = 1;
    int burn_in = 0;
    int horizon = 1;
    std::uint64_t seed = 1;
    int bins = 64;
    int sample_stride = 1;  // keep every k-th post-burn-in sample per trajectory
    int threads = 1;

    void validate() const;
};

// One perturbed step of trajectory `trajectory` at time `step` (the state is
// the one at time step - 1). Noise is drawn from (seed, stream).
LatticeState perturbed_step(const Engine& engine, const PerturbationSpec& spec, const LatticeState& state,
                            const CounterRng& noise, std::uint64_t trajectory, std::uint64_t step);
LatticeState perturbed_step(const EnsembleConfig& config, const LatticeState& state, std::uint64_t trajectory,
                            std::uint64_t step);

struct SiteMarginal {
    Site site;
    std::vector<std::uint64_t> histogram;
    std::vector<double> samples;  // retained samples, trajectory-major
    std::uint64_t count = 0;      // histogram total
};

struct EnsembleResult {
    std::vector<SiteMarginal> sites;  // interior, box order
};

// Throws InsufficientSamples when the window (burn_in, horizon] is empty.
EnsembleResult run_ensemble(const EnsembleConfig& config);

// Radius of the smallest arc containing every sample.
double spread_upper(std::span<const double> samples);
// Half the longest circular run of occupied cells, never above spread_upper.
double spread_lower(std::span<const double> samples, int bins);
double spread_lower_from_histogram(std::span<const std::uint64_t> histogram);

// 1-Wasserstein distance between two empirical measures on the circle.
double w1_circle(std::span<const double> a, std::span<const double> b);

// Spearman rank correlation (average ranks for ties); 0 if either side is constant.
double rank_correlation(std::span<const double> x, std::span<const double> y);

struct SiteSpread {
    Site site;
    int distance = 0;
    double s_plus = 0.0;
    double s_minus = 0.0;
    std::uint64_t sample_count = 0;
};

struct SpreadReport {
    std::vector<SiteSpread> per_site;  // ordered by L
    double fitted_slope = 0.0;
    double correlation = 0.0;
    double gamma_estimate = 0.0;       // fitted_slope / epsilon (0 when epsilon = 0)
    double a = 0.0;
    double b = 0.0;
    double lambda_lower = 0.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

// Throws ExpansionConditionViolated unless a * lambda_T < 1 <= (a + b) * lambda_T,
// and InsufficientSamples with fewer than 30 * bins samples per site.
SpreadReport instability_experiment(const EnsembleConfig& config, bool allow_violation = false);

struct ContractionOptions {
    Site site;
    double initial_a = 0.3;
    double initial_b = 0.35;
    int steps = 40;
};

struct ContractionReport {
    std::vector<double> distances;          // W1 at t = 0..steps
    std::vector<double> empirical_factors;  // ratios before the noise floor
    double noise_floor = 0.0;
    double geometric_mean = 0.0;
    double bound = 0.0;                     // Lambda_I * Lambda_T
};

// Two ensembles that differ only in the initial value at `site` (an L = 1
// site fed by frozen boundary values only), driven by independent noise.
ContractionReport contraction_diagnostic(const EnsembleConfig& config, const ContractionOptions& options);

}  // namespace cml
