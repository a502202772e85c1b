#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cml/coupling.hpp"
#include "cml/engine.hpp"
#include "cml/exact.hpp"
#include "cml/lattice.hpp"
#include "cml/local_map.hpp"

namespace cml {

// Distances at or below this are treated as converged roundoff and skipped
// when fitting rates.
inline constexpr double kDistanceFloor = 1e-14;

struct ProbeOptions {
    int n_initials = 4;
    int t_max = 200;
    double tol = 1e-8;
    std::uint64_t seed = 1;
    // Run even when the coupling is not unidirectional or Lambda_I * Lambda_T >= 1.
    bool override_condition = false;
};

struct LraReport {
    bool converged = false;
    LatticeState limit_solution;      // final state of run 0
    double fitted_rate = 0.0;
    double rate_bound = 0.0;          // Lambda_I * Lambda_T
    double max_final_distance = 0.0;
    std::vector<double> max_distance;                  // [t] max over pairs and sites
    std::vector<std::vector<double>> per_site_distances;  // [interior site][t]
    std::uint64_t seed = 0;
};

// Runs n_initials random interiors under one boundary condition and measures
// how fast they collapse onto a common limit solution.
LraReport lra_probe(const EngineConfig& config, const ProbeOptions& options);

// exp of the least-squares slope of log(distance) against t, using entries
// above kDistanceFloor. Throws InsufficientData with fewer than 10 such entries.
double fit_rate(std::span<const double> distances);

// First-site limit of the unidirectional chain in the locally affine regime
// T x = a x + b (lift values, before reduction mod 1).
double analytic_limit_linear(double a, double b, double c, double v);
// Amplification of a boundary perturbation at the first site: ca / (ca - (a-1)).
double sensitivity_ratio(double a, double c);

struct SensitivityOptions {
    double v = 0.5;
    double delta = 1e-4;
    int t_max = 400;
    double tol = 1e-13;
    int n_initials = 2;
    std::uint64_t seed = 1;
};

struct SiteGrowth {
    Site site;
    int distance = 0;           // L
    double ratio = 0.0;         // |u_L - u'_L| / delta
    double analytic = 0.0;      // sensitivity_ratio^L
    bool in_linear_region = true;
};

struct SensitivityReport {
    double slope = 0.0;         // a
    double coupling = 0.0;      // c
    LinearPiece region;
    double analytic_ratio = 0.0;
    double simulated_ratio = 0.0;
    double max_limit_difference = 0.0;
    std::vector<SiteGrowth> per_site_growth;
    bool left_linear_region = false;
    bool converged = false;
};

// Homogeneous frozen boundary values v and v + delta; compares the two limit
// solutions site by site. Limits leaving the affine piece around v are
// flagged, not fatal.
SensitivityReport sensitivity_experiment(const EngineConfig& config, const SensitivityOptions& options);

struct FreeBcReport {
    bool mutual_convergence = false;
    double final_mutual_distance = 0.0;
    int converged_at = -1;             // first t with mutual distance <= tol
    double temporal_variation = 0.0;   // max step-to-step change of run 0 after converged_at
    std::vector<double> mutual_distance;
    std::uint64_t seed = 0;
};

FreeBcReport free_bc_probe(const EngineConfig& config, const ProbeOptions& options);

struct PeriodicReport {
    int xi_period = 0;
    int eta_period = 0;
    double min_separation = 0.0;
    double max_spatial_variation = 0.0;
    int t_max = 0;
};

// Runs the periodic engine in exact rational arithmetic from the constant
// states xi and eta. Throws NotPeriodicPoint if either is not periodic within
// `max_period` steps.
PeriodicReport periodic_nonuniqueness_demo(std::shared_ptr<const BoxSpec> box, const LocalMapSpec& map,
                                           const CouplingSpec& coupling, const Rational& xi, const Rational& eta,
                                           int t_max, int max_period = 64);

}  // namespace cml
