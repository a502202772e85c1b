#include "cml/engine.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "cml/error.hpp"
#include "cml/io.hpp"
#include "cml/rng.hpp"
#include "cml/topology.hpp"

namespace cml {

std::string to_string(BcMode mode) {
    switch (mode) {
        case BcMode::Frozen: return "frozen";
        case BcMode::Free: return "free";
        case BcMode::Periodic: return "periodic";
    }
    return "unknown";
}

BoundaryCondition BoundaryCondition::frozen(std::map<Site, CirclePoint> values) {
    return {BcMode::Frozen, std::move(values)};
}

BoundaryCondition BoundaryCondition::free(std::map<Site, CirclePoint> values) {
    return {BcMode::Free, std::move(values)};
}

BoundaryCondition BoundaryCondition::periodic() { return {BcMode::Periodic, {}}; }

BoundaryCondition BoundaryCondition::uniform(BcMode mode, const BoxSpec& box, CirclePoint value) {
    BoundaryCondition bc{mode, {}};
    if (mode != BcMode::Periodic)
        for (const Site& s : box.shell()) bc.values.emplace(s, value);
    return bc;
}

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
    if (!config_.box) throw InvalidSpec("engine: no box");
    const BoxSpec& box = *config_.box;
    const bool periodic = config_.bc.mode == BcMode::Periodic;

    if (periodic) {
        if (!box.rect()) throw InvalidSpec("engine: periodic boundary conditions need a rectangular box");
    } else {
        std::set<Site> keys;
        for (const auto& [s, v] : config_.bc.values) keys.insert(s);
        const std::set<Site> shell(box.shell().begin(), box.shell().end());
        if (keys != shell)
            throw InvalidSpec("engine: " + to_string(config_.bc.mode) +
                              " boundary values must cover exactly the boundary shell");
    }

    compiled_.resize(box.interior_count());
    std::vector<bool> has_stencil(box.interior_count(), false);
    for (const Stencil& st : config_.coupling.stencils()) {
        auto self = box.index_of(st.site);
        if (!self || *self >= box.interior_count())
            throw InvalidSpec("engine: stencil for non-interior site " + site_label(st.site, box.dim()));
        CompiledSite cs;
        cs.self = *self;
        for (const StencilInput& in : st.inputs) {
            if (in.site == st.site || in.weight == 0.0) continue;
            Site src = in.site;
            if (periodic && !box.is_interior(src)) src = box.wrap_periodic(src);
            auto idx = box.index_of(src);
            if (!idx)
                throw DanglingInput("engine: site " + site_label(st.site, box.dim()) + " reads " +
                                    site_label(in.site, box.dim()) + " outside box and shell");
            if (periodic && *idx >= box.interior_count())
                throw DanglingInput("engine: periodic fold left the box");
            cs.cross.push_back({*idx, in.weight});
        }
        compiled_[*self] = std::move(cs);
        has_stencil[*self] = true;
    }
    if (std::find(has_stencil.begin(), has_stencil.end(), false) != has_stencil.end())
        throw InvalidSpec("engine: every interior site needs a stencil");

    // Column order for trajectory dumps.
    std::vector<std::size_t> interior(box.interior_count());
    for (std::size_t i = 0; i < interior.size(); ++i) interior[i] = i;
    if (!periodic) {
        const ConnectivityGraph graph = build_graph(config_.coupling, box);
        if (!detect_cycle(graph)) {
            const Enumeration en = enumerate_paper(graph);
            std::stable_sort(interior.begin(), interior.end(), [&](std::size_t a, std::size_t b) {
                return en.label(box.site_at(a)) < en.label(box.site_at(b));
            });
        }
    }
    csv_columns_ = interior;
    if (!periodic)
        for (std::size_t k = box.interior_count(); k < box.size(); ++k) csv_columns_.push_back(k);
}

LatticeState Engine::make_state(std::span<const double> interior) const {
    const BoxSpec& box = *config_.box;
    if (interior.size() != box.interior_count()) throw std::invalid_argument("make_state: wrong interior size");
    LatticeState s(config_.box);
    auto v = s.values();
    for (std::size_t i = 0; i < interior.size(); ++i) v[i] = wrap_unit(interior[i]);
    for (const auto& [site, value] : config_.bc.values) s.set(site, value);
    return s;
}

LatticeState Engine::random_state(std::uint64_t seed, std::uint64_t run) const {
    const CounterRng rng(seed, streams::kInitialState);
    std::vector<double> interior(box().interior_count());
    for (std::size_t i = 0; i < interior.size(); ++i) interior[i] = rng.uniform(run, i);
    return make_state(interior);
}

LatticeState Engine::step(const LatticeState& state) const {
    if (state.values().size() != box().size())
        throw MissingInput("engine: state does not cover the box and its shell");
    LatticeState next = state;
    advance<double>(state.values(), next.values());
    return next;
}

std::vector<LatticeState> Engine::trajectory(const LatticeState& initial, int t_max) const {
    if (t_max < 0) throw std::invalid_argument("trajectory: t_max must be >= 0");
    std::vector<LatticeState> out;
    out.reserve(static_cast<std::size_t>(t_max) + 1);
    run(initial, t_max, [&](int, const LatticeState& s) { out.push_back(s); });
    return out;
}

LatticeState step(const EngineConfig& config, const LatticeState& state) { return Engine(config).step(state); }

std::vector<LatticeState> trajectory(const EngineConfig& config, const LatticeState& initial, int t_max) {
    return Engine(config).trajectory(initial, t_max);
}

std::map<Site, CirclePoint> premap_equivalence_witness(const EngineConfig& config,
                                                       const std::map<Site, CirclePoint>& bc_values) {
    if (!config.premap_variant)
        throw std::invalid_argument("premap_equivalence_witness: config is not the pre-map variant");
    if (!config.map.invertible())
        throw NotInvertible("premap_equivalence_witness: local map " + to_string(config.map.kind()) +
                            " has no single-valued inverse");
    std::map<Site, CirclePoint> out;
    for (const auto& [site, value] : bc_values) out.emplace(site, CirclePoint(config.map.inverse(value.value())));
    return out;
}

TrajectoryCsvWriter::TrajectoryCsvWriter(const Engine& engine, std::ostream& os) : engine_(engine), os_(os) {
    os_ << 't';
    for (std::size_t k : engine_.csv_columns()) os_ << ',' << site_label(engine_.box().site_at(k), engine_.box().dim());
    os_ << '\n';
}

void TrajectoryCsvWriter::write(int t, const LatticeState& state) {
    os_ << t;
    const auto v = state.values();
    for (std::size_t k : engine_.csv_columns()) os_ << ',' << format_double(v[k]);
    os_ << '\n';
}

}  // namespace cml
