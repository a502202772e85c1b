#include "cml/config.hpp"

#include <fstream>
#include <sstream>

#include "cml/error.hpp"
#include "cml/rng.hpp"

namespace cml::cli {

Section::Section(Json& node, std::string path) : node_(&node), path_(std::move(path)) {
    if (node_->is_null()) *node_ = Json::object();
    if (!node_->is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
}

std::string Section::key_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

bool Section::has(std::string_view key) const { return node_->contains(key); }

Json& Section::lookup(std::string_view key) {
    auto it = node_->find(key);
    if (it == node_->end()) throw ConfigError("config: missing key '" + key_path(key) + "'");
    used_.emplace(key);
    return *it;
}

double Section::number(std::string_view key) {
    const Json& j = lookup(key);
    if (!j.is_number()) throw ConfigError("config: '" + key_path(key) + "' must be a number");
    return j.get<double>();
}

double Section::number(std::string_view key, double fallback) {
    if (!has(key)) (*node_)[std::string(key)] = fallback;
    return number(key);
}

long long Section::integer(std::string_view key) {
    const Json& j = lookup(key);
    if (!j.is_number_integer()) throw ConfigError("config: '" + key_path(key) + "' must be an integer");
    return j.get<long long>();
}

long long Section::integer(std::string_view key, long long fallback) {
    if (!has(key)) (*node_)[std::string(key)] = fallback;
    return integer(key);
}

bool Section::boolean(std::string_view key, bool fallback) {
    if (!has(key)) (*node_)[std::string(key)] = fallback;
    const Json& j = lookup(key);
    if (!j.is_boolean()) throw ConfigError("config: '" + key_path(key) + "' must be true or false");
    return j.get<bool>();
}

std::string Section::string(std::string_view key) {
    const Json& j = lookup(key);
    if (!j.is_string()) throw ConfigError("config: '" + key_path(key) + "' must be a string");
    return j.get<std::string>();
}

std::string Section::string(std::string_view key, std::string_view fallback) {
    if (!has(key)) (*node_)[std::string(key)] = std::string(fallback);
    return string(key);
}

Json& Section::raw(std::string_view key) { return lookup(key); }

Json& Section::raw(std::string_view key, Json fallback) {
    if (!has(key)) (*node_)[std::string(key)] = std::move(fallback);
    return lookup(key);
}

Section Section::child(std::string_view key) {
    if (!has(key)) (*node_)[std::string(key)] = Json::object();
    return Section(lookup(key), key_path(key));
}

void Section::finish() const {
    for (auto it = node_->begin(); it != node_->end(); ++it)
        if (!used_.contains(it.key())) throw ConfigError("config: unknown key '" + key_path(it.key()) + "'");
}

Site parse_site(const Json& j, int dim, const std::string& where) {
    if (dim == 1) {
        if (!j.is_number_integer()) throw ConfigError("config: '" + where + "' must be an integer site");
        return {j.get<int>(), 0};
    }
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ConfigError("config: '" + where + "' must be an [x, y] site");
    return {j[0].get<int>(), j[1].get<int>()};
}

Json site_json(Site s, int dim) {
    if (dim == 1) return s.x;
    return Json::array({s.x, s.y});
}

namespace {

std::vector<double> number_list(Section& sec, std::string_view key) {
    const Json& j = sec.raw(key);
    const std::string where = sec.path() + "." + std::string(key);
    if (!j.is_array() || j.empty()) throw ConfigError("config: '" + where + "' must be a non-empty array of numbers");
    std::vector<double> out;
    for (const Json& v : j) {
        if (!v.is_number()) throw ConfigError("config: '" + where + "' must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

LocalMapSpec parse_map(Section sec) {
    const std::string kind = sec.string("kind");
    LocalMapSpec map = LocalMapSpec::doubling();
    if (kind == "doubling") {
    } else if (kind == "affine") {
        map = LocalMapSpec::affine(sec.number("slope"), sec.number("offset", 0.0));
    } else if (kind == "rotation") {
        map = LocalMapSpec::rotation(sec.number("angle"));
    } else if (kind == "piecewise_linear") {
        map = LocalMapSpec::piecewise_linear(number_list(sec, "breakpoints"), number_list(sec, "slopes"),
                                             sec.number("offset", 0.0));
    } else {
        throw ConfigError("config: unknown map.kind '" + kind + "'");
    }
    if (sec.has("constants")) {
        Section c = sec.child("constants");
        std::optional<double> sigma;
        if (c.has("sigma")) sigma = c.number("sigma");
        map = map.with_constants(c.number("lower"), c.number("upper"), sigma);
        c.finish();
    }
    sec.finish();
    return map;
}

struct CouplingInput {
    std::optional<StencilTemplate> tmpl;
    std::vector<Stencil> table;
};

CouplingInput parse_coupling(Section sec, int dim) {
    const std::string kind = sec.string("kind");
    CouplingInput in;
    if (kind == "unidirectional") {
        in.tmpl = StencilTemplate::unidirectional(sec.number("c"));
    } else if (kind == "unidirectional_k") {
        const auto w = number_list(sec, "weights");
        in.tmpl = StencilTemplate::unidirectional_k(w);
    } else if (kind == "diffusive") {
        in.tmpl = StencilTemplate::diffusive(sec.number("c"));
    } else if (kind == "toom_ne") {
        in.tmpl = StencilTemplate::toom_ne(sec.number("self"), sec.number("east"), sec.number("north"));
    } else if (kind == "stencils") {
        Json& table = sec.raw("table");
        if (!table.is_array() || table.empty())
            throw ConfigError("config: 'coupling.table' must be a non-empty array");
        for (std::size_t k = 0; k < table.size(); ++k) {
            Section row(table[k], "coupling.table[" + std::to_string(k) + "]");
            Stencil st;
            st.site = parse_site(row.raw("site"), dim, row.path() + ".site");
            Json& inputs = row.raw("inputs");
            if (!inputs.is_array()) throw ConfigError("config: '" + row.path() + ".inputs' must be an array");
            for (std::size_t m = 0; m < inputs.size(); ++m) {
                Section e(inputs[m], row.path() + ".inputs[" + std::to_string(m) + "]");
                st.inputs.push_back({parse_site(e.raw("site"), dim, e.path() + ".site"), e.number("weight")});
                e.finish();
            }
            row.finish();
            in.table.push_back(std::move(st));
        }
    } else {
        throw ConfigError("config: unknown coupling.kind '" + kind + "'");
    }
    sec.finish();
    return in;
}

}  // namespace

ExperimentConfig parse_config(Json document, std::uint64_t const* seed_override) {
    ExperimentConfig cfg;
    cfg.resolved = std::move(document);
    Section top(cfg.resolved, "");

    if (seed_override) cfg.resolved["seed"] = *seed_override;
    if (!top.has("seed")) cfg.resolved["seed"] = 1;
    {
        const Json& s = top.raw("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("config: 'seed' must be a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }

    // Box dimension first: it decides how sites are written.
    Section box = top.child("box");
    const std::string box_kind = box.string("kind");
    int dim = 1;
    if (box_kind == "grid") dim = 2;
    else if (box_kind == "sites") dim = static_cast<int>(box.integer("dim", 1));
    else if (box_kind != "chain") throw ConfigError("config: unknown box.kind '" + box_kind + "'");
    if (dim != 1 && dim != 2) throw ConfigError("config: 'box.dim' must be 1 or 2");

    const CouplingInput coupling = parse_coupling(top.child("coupling"), dim);
    std::vector<Site> offsets;
    if (coupling.tmpl) offsets = coupling.tmpl->offsets();

    std::shared_ptr<const BoxSpec> boxp;
    try {
        if (box_kind == "chain") {
            if (!coupling.tmpl) throw ConfigError("config: a chain box needs a template coupling");
            boxp = std::make_shared<const BoxSpec>(BoxSpec::line(static_cast<int>(box.integer("n")), offsets));
        } else if (box_kind == "grid") {
            if (!coupling.tmpl) throw ConfigError("config: a grid box needs a template coupling");
            boxp = std::make_shared<const BoxSpec>(
                BoxSpec::grid(static_cast<int>(box.integer("nx")), static_cast<int>(box.integer("ny")), offsets));
        } else {
            const Json& list = box.raw("sites");
            if (!list.is_array() || list.empty()) throw ConfigError("config: 'box.sites' must be a non-empty array");
            std::vector<Site> sites;
            for (std::size_t k = 0; k < list.size(); ++k)
                sites.push_back(parse_site(list[k], dim, "box.sites[" + std::to_string(k) + "]"));
            std::set<Site> inside(sites.begin(), sites.end()), shell;
            auto add = [&](Site s) {
                if (!inside.contains(s)) shell.insert(s);
            };
            if (coupling.tmpl) {
                for (const Site& s : sites)
                    for (const Site& o : offsets) add(s + o);
            } else {
                for (const Stencil& st : coupling.table)
                    for (const StencilInput& in : st.inputs) add(in.site);
            }
            boxp = std::make_shared<const BoxSpec>(
                BoxSpec::custom(dim, sites, std::vector<Site>(shell.begin(), shell.end())));
        }
    } catch (const InvalidSpec& e) {
        throw ConfigError(std::string("config: box: ") + e.what());
    }
    box.finish();

    cfg.engine.box = boxp;
    try {
        cfg.engine.coupling = coupling.tmpl ? CouplingSpec::from_template(*boxp, *coupling.tmpl)
                                            : CouplingSpec::from_stencils(coupling.table);
    } catch (const InvalidSpec& e) {
        throw ConfigError(std::string("config: coupling: ") + e.what());
    }
    try {
        cfg.engine.map = parse_map(top.child("map"));
    } catch (const InvalidSpec& e) {
        throw ConfigError(std::string("config: map: ") + e.what());
    }

    Section bc = top.child("bc");
    const std::string mode = bc.string("mode", "frozen");
    cfg.engine.premap_variant = bc.boolean("premap", false);
    if (mode == "periodic") {
        cfg.engine.bc = BoundaryCondition::periodic();
    } else if (mode == "frozen" || mode == "free") {
        const BcMode m = mode == "frozen" ? BcMode::Frozen : BcMode::Free;
        const int given = bc.has("value") + bc.has("values") + bc.has("random");
        if (given != 1) throw ConfigError("config: 'bc' needs exactly one of 'value', 'values', 'random'");
        if (bc.has("value")) {
            cfg.engine.bc = BoundaryCondition::uniform(m, *boxp, CirclePoint(bc.number("value")));
        } else if (bc.has("random")) {
            if (!bc.boolean("random", true)) throw ConfigError("config: 'bc.random' must be true when present");
            const CounterRng rng(cfg.seed, streams::kBoundary);
            cfg.engine.bc.mode = m;
            std::uint64_t k = 0;
            for (const Site& s : boxp->shell()) cfg.engine.bc.values.emplace(s, CirclePoint(rng.uniform(k++)));
        } else {
            Section vals = bc.child("values");
            cfg.engine.bc.mode = m;
            for (const Site& s : boxp->shell()) {
                const std::string label = site_label(s, dim);
                if (!vals.has(label))
                    throw ConfigError("config: 'bc.values' lacks boundary site '" + label + "'");
                cfg.engine.bc.values.emplace(s, CirclePoint(vals.number(label)));
            }
            vals.finish();
        }
    } else {
        throw ConfigError("config: unknown bc.mode '" + mode + "'");
    }
    bc.finish();

    Section exp = top.child("experiment");
    cfg.probe = exp.string("probe", "");
    exp.child("params");
    exp.finish();

    Section out = top.child("output");
    cfg.output_dir = out.string("dir", "");
    out.finish();

    top.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::uint64_t const* seed_override) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open '" + path.string() + "'");
    Json doc;
    try {
        doc = Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return parse_config(std::move(doc), seed_override);
}

Section params(ExperimentConfig& config) {
    return Section(config.resolved["experiment"]["params"], "experiment.params");
}

}  // namespace cml::cli
