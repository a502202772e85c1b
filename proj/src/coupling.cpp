#include "cml/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cml/error.hpp"

namespace cml {

namespace {

constexpr double kWeightSumTol = 1e-12;

void check_weight(double w, const char* what) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidSpec(std::string("coupling: ") + what + " must be >= 0");
}

}  // namespace

StencilTemplate StencilTemplate::diffusive(double c) {
    if (!(c >= 0.0 && c <= 0.5)) throw InvalidSpec("coupling: diffusive c must lie in [0, 1/2]");
    return {"diffusive", {{{0, 0}, 1.0 - 2.0 * c}, {{-1, 0}, c}, {{1, 0}, c}}};
}

StencilTemplate StencilTemplate::unidirectional(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw InvalidSpec("coupling: unidirectional c must lie in [0, 1]");
    return {"unidirectional", {{{0, 0}, 1.0 - c}, {{-1, 0}, c}}};
}

StencilTemplate StencilTemplate::unidirectional_k(std::span<const double> weights) {
    if (weights.size() < 2) throw InvalidSpec("coupling: unidirectional_k needs a self weight and >= 1 input");
    StencilTemplate t{"unidirectional_k", {}};
    for (std::size_t k = 0; k < weights.size(); ++k) {
        check_weight(weights[k], "weight");
        t.entries.push_back({{-static_cast<int>(k), 0}, weights[k]});
    }
    return t;
}

StencilTemplate StencilTemplate::toom_ne(double w_self, double w_east, double w_north) {
    for (double w : {w_self, w_east, w_north}) check_weight(w, "weight");
    return {"toom_ne", {{{0, 0}, w_self}, {{1, 0}, w_east}, {{0, 1}, w_north}}};
}

std::vector<Site> StencilTemplate::offsets() const {
    std::vector<Site> out;
    for (const auto& [off, w] : entries)
        if (off != Site{0, 0}) out.push_back(off);
    return out;
}

int StencilTemplate::dim() const {
    for (const auto& [off, w] : entries)
        if (off.y != 0) return 2;
    return 1;
}

CouplingSpec CouplingSpec::from_template(const BoxSpec& box, const StencilTemplate& tmpl) {
    if (tmpl.dim() > box.dim()) throw InvalidSpec("coupling: " + tmpl.name + " stencil needs a 2D box");
    std::vector<Stencil> stencils;
    for (const Site& s : box.sites()) {
        Stencil st{s, {}};
        for (const auto& [off, w] : tmpl.entries) st.inputs.push_back({s + off, w});
        stencils.push_back(std::move(st));
    }
    return from_stencils(std::move(stencils));
}

CouplingSpec CouplingSpec::from_stencils(std::vector<Stencil> stencils) {
    std::set<Site> seen;
    for (Stencil& st : stencils) {
        if (!seen.insert(st.site).second) throw InvalidSpec("coupling: duplicate stencil for a site");
        double sum = 0.0;
        bool has_self = false;
        std::set<Site> inputs;
        for (const StencilInput& in : st.inputs) {
            check_weight(in.weight, "weight");
            if (!inputs.insert(in.site).second) throw InvalidSpec("coupling: repeated input in a stencil");
            sum += in.weight;
            has_self = has_self || in.site == st.site;
        }
        if (!has_self) st.inputs.push_back({st.site, 0.0});
        if (std::fabs(sum - 1.0) > kWeightSumTol)
            throw InvalidSpec("coupling: stencil weights must sum to 1 (diagonal preservation)");
        std::sort(st.inputs.begin(), st.inputs.end(),
                  [](const StencilInput& a, const StencilInput& b) { return a.site < b.site; });
    }
    std::sort(stencils.begin(), stencils.end(),
              [](const Stencil& a, const Stencil& b) { return a.site < b.site; });
    CouplingSpec c;
    c.stencils_ = std::move(stencils);
    return c;
}

const Stencil* CouplingSpec::stencil_for(Site s) const {
    auto it = std::lower_bound(stencils_.begin(), stencils_.end(), s,
                               [](const Stencil& st, Site v) { return st.site < v; });
    if (it == stencils_.end() || it->site != s) return nullptr;
    return &*it;
}

double CouplingSpec::self_weight(const Stencil& st) const {
    for (const StencilInput& in : st.inputs)
        if (in.site == st.site) return in.weight;
    return 0.0;
}

int CouplingSpec::max_range() const {
    int r = 0;
    for (const Stencil& st : stencils_)
        for (const StencilInput& in : st.inputs)
            if (in.weight != 0.0) r = std::max(r, lattice_range(st.site, in.site));
    return r;
}

bool CouplingSpec::in_contracting_class() const { return interaction_lambda(*this) < 1.0; }

LatticeState apply_interaction(const CouplingSpec& coupling, const LatticeState& state) {
    const BoxSpec& box = state.box();
    LatticeState out = state;
    for (const Stencil& st : coupling.stencils()) {
        const double self = state.at(st.site).value();
        double acc = 0.0;
        for (const StencilInput& in : st.inputs) {
            auto idx = box.index_of(in.site);
            if (!idx)
                throw MissingInput("interaction: state lacks input " + site_label(in.site, box.dim()) +
                                   " of site " + site_label(st.site, box.dim()));
            if (in.site == st.site || in.weight == 0.0) continue;
            acc += in.weight * signed_diff(state.values()[*idx], self);
        }
        out.set(st.site, CirclePoint(self + acc));
    }
    return out;
}

double interaction_lambda(const CouplingSpec& coupling) {
    double lam = 0.0;
    for (const Stencil& st : coupling.stencils())
        for (const StencilInput& in : st.inputs) lam = std::max(lam, in.weight);
    return lam;
}

SpreadCoefficients spread_coefficients(const CouplingSpec& coupling) {
    SpreadCoefficients sc{0.0, 1.0};
    for (const Stencil& st : coupling.stencils()) {
        const double self = coupling.self_weight(st);
        double cross = 0.0;
        for (const StencilInput& in : st.inputs)
            if (in.site != st.site) cross += in.weight;
        sc.a = std::max(sc.a, self);
        sc.b = std::min(sc.b, cross);
    }
    return sc;
}

LraCondition check_lra_condition(const CouplingSpec& coupling, const LocalMapSpec& map) {
    LraCondition c;
    c.lambda_product = interaction_lambda(coupling) * map.lambda_upper();
    c.satisfied = c.lambda_product < 1.0;
    return c;
}

}  // namespace cml
