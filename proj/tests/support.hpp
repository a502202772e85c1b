#pragma once

#include <map>
#include <memory>
#include <vector>

#include "cml/coupling.hpp"
#include "cml/engine.hpp"
#include "cml/lattice.hpp"
#include "cml/local_map.hpp"
#include "cml/rng.hpp"

namespace testing {

inline std::shared_ptr<const cml::BoxSpec> chain_box(int n, int depth) {
    return std::make_shared<const cml::BoxSpec>(cml::BoxSpec::chain(n, depth));
}

// Frozen (or free) boundary values drawn from the boundary stream of `seed`.
inline cml::BoundaryCondition random_bc(cml::BcMode mode, const cml::BoxSpec& box, std::uint64_t seed) {
    const cml::CounterRng rng(seed, cml::streams::kBoundary);
    cml::BoundaryCondition bc{mode, {}};
    std::uint64_t k = 0;
    for (const cml::Site& s : box.shell()) bc.values.emplace(s, cml::CirclePoint(rng.uniform(k++)));
    return bc;
}

// The standard chain: doubling map, weights (0.2, 0.4, 0.4) on x_i, x_{i-1}, x_{i-2}.
inline cml::EngineConfig standard_chain(int n, cml::BoundaryCondition bc_template, double uniform = -1.0,
                                        std::uint64_t bc_seed = 1) {
    auto box = chain_box(n, 2);
    cml::EngineConfig c;
    c.box = box;
    c.map = cml::LocalMapSpec::doubling();
    const std::vector<double> w{0.2, 0.4, 0.4};
    c.coupling = cml::CouplingSpec::from_template(*box, cml::StencilTemplate::unidirectional_k(w));
    if (bc_template.mode == cml::BcMode::Periodic)
        c.bc = bc_template;
    else if (uniform >= 0.0)
        c.bc = cml::BoundaryCondition::uniform(bc_template.mode, *box, cml::CirclePoint(uniform));
    else
        c.bc = random_bc(bc_template.mode, *box, bc_seed);
    return c;
}

inline cml::LocalMapSpec sensitivity_map() {
    return cml::LocalMapSpec::piecewise_linear({0.0, 0.35, 0.65}, {0.64 / 0.7, 1.2, 0.64 / 0.7}, 0.0);
}

inline cml::EngineConfig sensitivity_chain(int n) {
    auto box = chain_box(n, 1);
    cml::EngineConfig c;
    c.box = box;
    c.map = sensitivity_map();
    c.coupling = cml::CouplingSpec::from_template(*box, cml::StencilTemplate::unidirectional(0.7));
    c.bc = cml::BoundaryCondition::uniform(cml::BcMode::Frozen, *box, cml::CirclePoint(0.5));
    return c;
}

}  // namespace testing
