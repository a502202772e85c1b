#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cml/lattice.hpp"
#include "cml/local_map.hpp"

namespace cml {

struct StencilInput {
    Site site;
    double weight = 0.0;
};

// Translation-invariant stencil: offsets relative to the updated site. The
// zero offset carries the self-weight.
struct StencilTemplate {
    std::string name;
    std::vector<std::pair<Site, double>> entries;

    // x_i -> (1-2c) x_i + c (x_{i-1} + x_{i+1})
    static StencilTemplate diffusive(double c);
    // x_i -> (1-c) x_i + c x_{i-1}
    static StencilTemplate unidirectional(double c);
    // x_i -> w0 x_i + w1 x_{i-1} + ... + wk x_{i-k}
    static StencilTemplate unidirectional_k(std::span<const double> weights);
    // 2D North-East: x_{(i,j)} -> w_self x + w_east x_{(i+1,j)} + w_north x_{(i,j+1)}
    static StencilTemplate toom_ne(double w_self, double w_east, double w_north);

    std::vector<Site> offsets() const;
    int dim() const;
};

struct Stencil {
    Site site;
    std::vector<StencilInput> inputs;  // includes the site itself
};

// Row-stochastic interaction operator: each interior site is replaced by the
// circular convex combination of its stencil inputs.
class CouplingSpec {
public:
    // Every interior site of `box` gets the template, translated.
    static CouplingSpec from_template(const BoxSpec& box, const StencilTemplate& tmpl);
    static CouplingSpec from_stencils(std::vector<Stencil> stencils);

    const std::vector<Stencil>& stencils() const noexcept { return stencils_; }
    const Stencil* stencil_for(Site s) const;

    double self_weight(const Stencil& st) const;
    // Largest Chebyshev distance between a site and any of its inputs.
    int max_range() const;
    // False for couplings with Lambda_I = 1 (e.g. the identity), which fall
    // outside the contracting class but are kept for baselines.
    bool in_contracting_class() const;

private:
    std::vector<Stencil> stencils_;
};

// Diagonal-preserving circular average: inputs are lifted to within half a
// turn of the self value, averaged, and reduced mod 1.
LatticeState apply_interaction(const CouplingSpec& coupling, const LatticeState& state);

// Sum-form Lipschitz constant: the largest single weight over all stencils.
double interaction_lambda(const CouplingSpec& coupling);

struct SpreadCoefficients {
    double a = 0.0;  // largest self-weight
    double b = 0.0;  // smallest total cross-weight
};
SpreadCoefficients spread_coefficients(const CouplingSpec& coupling);

struct LraCondition {
    double lambda_product = 0.0;
    bool satisfied = false;
};
LraCondition check_lra_condition(const CouplingSpec& coupling, const LocalMapSpec& map);

}  // namespace cml
