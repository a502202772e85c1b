#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cml/coupling.hpp"
#include "cml/lattice.hpp"
#include "cml/local_map.hpp"

namespace cml {

enum class BcMode { Frozen, Free, Periodic };

std::string to_string(BcMode mode);

// Values outside the box. Frozen values never change; Free values start at
// `values` and are advanced by the local map each step; Periodic folds the
// stencils back into a rectangular box and ignores the shell.
struct BoundaryCondition {
    BcMode mode = BcMode::Frozen;
    std::map<Site, CirclePoint> values;

    static BoundaryCondition frozen(std::map<Site, CirclePoint> values);
    static BoundaryCondition free(std::map<Site, CirclePoint> values);
    static BoundaryCondition periodic();
    // Same value on every shell site.
    static BoundaryCondition uniform(BcMode mode, const BoxSpec& box, CirclePoint value);
};

struct EngineConfig {
    std::shared_ptr<const BoxSpec> box;
    LocalMapSpec map = LocalMapSpec::doubling();
    CouplingSpec coupling;
    BoundaryCondition bc;
    // Apply the local map inside the box only (boundary values enter the
    // interaction untransformed).
    bool premap_variant = false;
};

// Compiled box-restricted dynamics x -> I(T(x)) for one configuration.
class Engine {
public:
    explicit Engine(EngineConfig config);

    const EngineConfig& config() const noexcept { return config_; }
    const BoxSpec& box() const noexcept { return *config_.box; }
    std::size_t interior_count() const noexcept { return compiled_.size(); }

    // Interior values from `interior` (box order), shell from the boundary condition.
    LatticeState make_state(std::span<const double> interior) const;
    // Interior drawn uniformly from the counter stream (seed, run).
    LatticeState random_state(std::uint64_t seed, std::uint64_t run) const;

    LatticeState step(const LatticeState& state) const;
    std::vector<LatticeState> trajectory(const LatticeState& initial, int t_max) const;

    // Stepwise generation: visit(t, state) for t = 0..t_max without storing the run.
    template <class Visit>
    void run(const LatticeState& initial, int t_max, Visit&& visit) const {
        LatticeState cur = initial;
        visit(0, static_cast<const LatticeState&>(cur));
        for (int t = 1; t <= t_max; ++t) {
            cur = step(cur);
            visit(t, static_cast<const LatticeState&>(cur));
        }
    }

    // The two halves of a step over raw value arrays (box order, interior
    // then shell). `mapped` receives T applied per site; `interact` turns it
    // into the next state. Noise can be injected into `mapped` in between.
    template <class Scalar>
    void map_phase(std::span<const Scalar> in, std::span<Scalar> mapped) const;
    template <class Scalar>
    void interact(std::span<const Scalar> in, std::span<const Scalar> mapped, std::span<Scalar> out) const;

    template <class Scalar>
    void advance(std::span<const Scalar> in, std::span<Scalar> out) const {
        std::vector<Scalar> mapped(in.size());
        map_phase<Scalar>(in, mapped);
        interact<Scalar>(in, mapped, out);
    }

    // CSV column order: interior sites by enumeration label when the graph is
    // acyclic (else lexicographic), then the shell unless periodic.
    const std::vector<std::size_t>& csv_columns() const noexcept { return csv_columns_; }

private:
    struct CompiledSite {
        std::size_t self = 0;
        std::vector<std::pair<std::size_t, double>> cross;
    };

    EngineConfig config_;
    std::vector<CompiledSite> compiled_;
    std::vector<std::size_t> csv_columns_;
};

LatticeState step(const EngineConfig& config, const LatticeState& state);
std::vector<LatticeState> trajectory(const EngineConfig& config, const LatticeState& initial, int t_max);

// Boundary values for the standard engine that reproduce the pre-map
// variant's interior trajectory under boundary values `bc_values`.
std::map<Site, CirclePoint> premap_equivalence_witness(const EngineConfig& config,
                                                       const std::map<Site, CirclePoint>& bc_values);

// Streams "t,<site>...,<site>" rows with round-trip precision.
class TrajectoryCsvWriter {
public:
    TrajectoryCsvWriter(const Engine& engine, std::ostream& os);
    void write(int t, const LatticeState& state);

private:
    const Engine& engine_;
    std::ostream& os_;
};

template <class Scalar>
void Engine::map_phase(std::span<const Scalar> in, std::span<Scalar> mapped) const {
    const std::size_t n = compiled_.size();
    const bool map_shell = !config_.premap_variant;
    for (std::size_t k = 0; k < in.size(); ++k) {
        if (k < n || map_shell)
            mapped[k] = config_.map.apply_generic<Scalar>(in[k]);
        else
            mapped[k] = in[k];
    }
}

template <class Scalar>
void Engine::interact(std::span<const Scalar> in, std::span<const Scalar> mapped, std::span<Scalar> out) const {
    using Ops = ScalarOps<Scalar>;
    const std::size_t n = compiled_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const CompiledSite& cs = compiled_[i];
        const Scalar& self = mapped[cs.self];
        Scalar acc = Ops::from_double(0.0);
        for (const auto& [j, w] : cs.cross) acc += Ops::from_double(w) * signed_diff_generic<Scalar>(mapped[j], self);
        out[i] = Ops::wrap(Scalar(self + acc));
    }
    for (std::size_t k = n; k < in.size(); ++k) {
        if (config_.bc.mode == BcMode::Free)
            out[k] = config_.map.apply_generic<Scalar>(in[k]);
        else
            out[k] = in[k];
    }
}

}  // namespace cml
