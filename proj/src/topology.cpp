#include "cml/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cml/error.hpp"

namespace cml {

ConnectivityGraph ConnectivityGraph::from_edges(int dim, std::vector<Site> interior, std::vector<Site> boundary,
                                                const std::vector<std::pair<Site, Site>>& edges) {
    ConnectivityGraph g;
    g.dim_ = dim;
    std::sort(interior.begin(), interior.end());
    std::sort(boundary.begin(), boundary.end());
    g.interior_count_ = interior.size();
    g.sites_ = std::move(interior);
    g.sites_.insert(g.sites_.end(), boundary.begin(), boundary.end());
    for (std::size_t v = 0; v < g.sites_.size(); ++v)
        if (!g.index_.emplace(g.sites_[v], v).second) throw InvalidSpec("graph: duplicate vertex");
    g.out_.resize(g.sites_.size());
    g.in_.resize(g.sites_.size());

    std::set<std::pair<std::size_t, std::size_t>> unique;
    for (const auto& [from, to] : edges) {
        auto i = g.index_of(from);
        auto j = g.index_of(to);
        if (!i || !j) throw DanglingInput("graph: edge endpoint is not a vertex");
        if (!g.is_interior(*j)) throw InvalidSpec("graph: edge into a boundary vertex");
        if (*i == *j) continue;
        unique.insert({*i, *j});
    }
    for (const auto& [i, j] : unique) {
        g.out_[i].push_back(j);
        g.in_[j].push_back(i);
    }
    for (auto& v : g.in_) std::sort(v.begin(), v.end());
    return g;
}

std::optional<std::size_t> ConnectivityGraph::index_of(Site s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::pair<Site, Site>> ConnectivityGraph::edges() const {
    std::vector<std::pair<Site, Site>> e;
    for (std::size_t i = 0; i < sites_.size(); ++i)
        for (std::size_t j : out_[i]) e.push_back({sites_[i], sites_[j]});
    return e;
}

std::size_t ConnectivityGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& o : out_) n += o.size();
    return n;
}

std::size_t ConnectivityGraph::max_degree() const {
    std::size_t k = 0;
    for (std::size_t v = 0; v < sites_.size(); ++v) k = std::max(k, out_[v].size() + in_[v].size());
    return k;
}

ConnectivityGraph build_graph(const CouplingSpec& coupling, const BoxSpec& box) {
    std::vector<std::pair<Site, Site>> edges;
    for (const Stencil& st : coupling.stencils()) {
        if (!box.is_interior(st.site))
            throw InvalidSpec("graph: stencil for non-interior site " + site_label(st.site, box.dim()));
        for (const StencilInput& in : st.inputs) {
            if (!box.index_of(in.site))
                throw DanglingInput("graph: site " + site_label(st.site, box.dim()) + " reads " +
                                    site_label(in.site, box.dim()) + ", which is neither in the box nor its shell");
            if (in.site != st.site && in.weight != 0.0) edges.push_back({in.site, st.site});
        }
    }
    return ConnectivityGraph::from_edges(box.dim(), box.sites(), box.shell(), edges);
}

std::optional<std::vector<Site>> detect_cycle(const ConnectivityGraph& graph) {
    enum class Color { White, Gray, Black };
    const std::size_t n = graph.interior_count();
    std::vector<Color> color(n, Color::White);
    std::vector<std::size_t> parent(n, n);

    for (std::size_t root = 0; root < n; ++root) {
        if (color[root] != Color::White) continue;
        // (vertex, next out-edge position)
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        color[root] = Color::Gray;
        while (!stack.empty()) {
            auto& [v, pos] = stack.back();
            const auto& outs = graph.out(v);
            if (pos == outs.size()) {
                color[v] = Color::Black;
                stack.pop_back();
                continue;
            }
            const std::size_t w = outs[pos++];
            if (!graph.is_interior(w)) continue;
            if (color[w] == Color::Gray) {
                std::vector<Site> cycle;
                for (std::size_t u = v; u != w; u = parent[u]) cycle.push_back(graph.site(u));
                cycle.push_back(graph.site(w));
                std::reverse(cycle.begin(), cycle.end());
                return cycle;
            }
            if (color[w] == Color::White) {
                color[w] = Color::Gray;
                parent[w] = v;
                stack.push_back({w, 0});
            }
        }
    }
    return std::nullopt;
}

double Enumeration::label(Site s) const {
    auto it = labels_.find(s);
    return it == labels_.end() ? 0.0 : it->second;
}

std::vector<Site> Enumeration::order() const {
    std::vector<Site> sites;
    for (const auto& [s, l] : labels_) sites.push_back(s);
    std::stable_sort(sites.begin(), sites.end(), [&](Site a, Site b) { return label(a) < label(b); });
    return sites;
}

namespace {

// Kahn order of the interior subgraph; the graph is known to be acyclic.
std::vector<std::size_t> interior_topological_order(const ConnectivityGraph& g) {
    const std::size_t n = g.interior_count();
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t u : g.in(v))
            if (g.is_interior(u)) ++indeg[v];
    std::set<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.insert(v);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const std::size_t v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (std::size_t w : g.out(v))
            if (--indeg[w] == 0) ready.insert(w);
    }
    return order;
}

}  // namespace

Enumeration enumerate_paper(const ConnectivityGraph& graph) {
    const std::size_t n = graph.interior_count();
    if (n == 0) throw std::invalid_argument("enumerate_paper: graph has no interior vertex");
    if (auto cycle = detect_cycle(graph))
        throw CycleDetected("interaction is not unidirectional: connectivity graph has a cycle", *cycle);

    constexpr double kNone = std::numeric_limits<double>::infinity();
    std::vector<double> label(n, kNone);
    std::vector<std::size_t> inserted_at(n, 0);  // tie-break for normalization
    std::size_t insertions = 0;
    std::size_t labeled = 0;
    auto is_labeled = [&](std::size_t v) { return label[v] != kNone; };
    auto has_interior_in = [&](std::size_t v, bool only_unlabeled) {
        for (std::size_t u : graph.in(v))
            if (graph.is_interior(u) && (!only_unlabeled || !is_labeled(u))) return true;
        return false;
    };
    auto assign = [&](std::size_t v, double value) {
        label[v] = value;
        inserted_at[v] = insertions++;
        ++labeled;
    };

    // Start from a starting vertex (no interior in-edges) labeled 1.
    for (std::size_t v = 0; v < n; ++v) {
        if (!has_interior_in(v, false)) {
            assign(v, 1.0);
            break;
        }
    }

    const std::vector<std::size_t> topo = interior_topological_order(graph);
    std::vector<double> min_desc(n);       // smallest label among labeled descendants
    std::vector<std::size_t> chain_len(n);  // longest extension available from v

    while (labeled < n) {
        // Normalize to exact ranks 1..M in ascending label order.
        std::vector<std::size_t> done;
        for (std::size_t v = 0; v < n; ++v)
            if (is_labeled(v)) done.push_back(v);
        std::sort(done.begin(), done.end(), [&](std::size_t a, std::size_t b) {
            return label[a] != label[b] ? label[a] < label[b] : inserted_at[a] < inserted_at[b];
        });
        for (std::size_t r = 0; r < done.size(); ++r) label[done[r]] = static_cast<double>(r + 1);
        const double top = static_cast<double>(done.size());

        // Reverse topological sweep over unlabeled vertices.
        for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
            const std::size_t v = *it;
            if (is_labeled(v)) continue;
            double m = kNone;
            for (std::size_t w : graph.out(v)) m = std::min(m, is_labeled(w) ? label[w] : min_desc[w]);
            min_desc[v] = m;
            std::size_t best = 0;
            for (std::size_t w : graph.out(v))
                if (!is_labeled(w) && min_desc[w] == m) best = std::max(best, chain_len[w]);
            chain_len[v] = best + 1;
        }

        // Head: smallest unlabeled vertex all of whose interior in-neighbors are
        // labeled, so it is starting or fed by a labeled vertex.
        std::size_t head = n;
        for (std::size_t v = 0; v < n && head == n; ++v)
            if (!is_labeled(v) && !has_interior_in(v, true)) head = v;
        if (head == n) throw std::logic_error("enumerate_paper: no eligible head in an acyclic graph");

        // Follow the out-neighbor that carries the smallest labeled descendant.
        std::vector<std::size_t> path{head};
        for (;;) {
            const std::size_t t = path.back();
            std::size_t next = n;
            for (std::size_t w : graph.out(t)) {
                if (is_labeled(w) || min_desc[w] != min_desc[t]) continue;
                if (next == n || chain_len[w] > chain_len[next]) next = w;
            }
            if (next == n) break;
            path.push_back(next);
        }

        const double target = min_desc[path.back()];
        const double len = static_cast<double>(path.size());
        for (std::size_t k = 1; k <= path.size(); ++k) {
            const double kk = static_cast<double>(k);
            if (target == kNone)
                assign(path[k - 1], top + kk);  // (a) tail is free
            else
                assign(path[k - 1], target - 1.0 + kk / (len + 1.0));  // (b) tail feeds N(j') = target
        }
    }

    // Final normalization.
    std::vector<std::size_t> all(n);
    for (std::size_t v = 0; v < n; ++v) all[v] = v;
    std::sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) {
        return label[a] != label[b] ? label[a] < label[b] : inserted_at[a] < inserted_at[b];
    });
    std::map<Site, double> out;
    for (std::size_t r = 0; r < n; ++r) out.emplace(graph.site(all[r]), static_cast<double>(r + 1));
    return Enumeration(std::move(out));
}

bool validate_enumeration(const ConnectivityGraph& graph, const Enumeration& enumeration) {
    std::set<double> seen;
    for (std::size_t v = 0; v < graph.interior_count(); ++v) {
        const Site& s = graph.site(v);
        if (!enumeration.has(s)) return false;
        const double l = enumeration.label(s);
        if (!(l > 0.0) || !seen.insert(l).second) return false;
    }
    for (std::size_t i = 0; i < graph.interior_count(); ++i)
        for (std::size_t j : graph.out(i))
            if (!(enumeration.label(graph.site(i)) < enumeration.label(graph.site(j)))) return false;
    return true;
}

std::vector<int> boundary_distances(const ConnectivityGraph& graph) {
    std::vector<int> dist(graph.vertex_count(), kUnreachable);
    std::deque<std::size_t> queue;
    for (std::size_t v = graph.interior_count(); v < graph.vertex_count(); ++v) {
        dist[v] = 0;
        queue.push_back(v);
    }
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t w : graph.out(v)) {
            if (dist[w] != kUnreachable) continue;
            dist[w] = dist[v] + 1;
            queue.push_back(w);
        }
    }
    dist.resize(graph.interior_count());
    return dist;
}

int boundary_distance(const ConnectivityGraph& graph, Site site) {
    auto idx = graph.index_of(site);
    if (!idx || !graph.is_interior(*idx)) throw std::invalid_argument("boundary_distance: site is not interior");
    return boundary_distances(graph)[*idx];
}

std::vector<Site> upstream_set(const ConnectivityGraph& graph, Site site) {
    auto idx = graph.index_of(site);
    if (!idx || !graph.is_interior(*idx)) throw std::invalid_argument("upstream_set: site is not interior");
    std::vector<bool> seen(graph.interior_count(), false);
    std::deque<std::size_t> queue{*idx};
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t u : graph.in(v)) {
            if (!graph.is_interior(u) || seen[u]) continue;
            seen[u] = true;
            queue.push_back(u);
        }
    }
    std::vector<Site> out;
    for (std::size_t v = 0; v < graph.interior_count(); ++v)
        if (seen[v]) out.push_back(graph.site(v));
    return out;
}

std::string export_adjacency(const ConnectivityGraph& graph) {
    std::ostringstream os;
    for (const auto& [from, to] : graph.edges())
        os << site_label(from, graph.dim()) << " -> " << site_label(to, graph.dim()) << '\n';
    return os.str();
}

std::string export_enumeration_csv(const ConnectivityGraph& graph, const Enumeration& enumeration) {
    const std::vector<int> dist = boundary_distances(graph);
    std::ostringstream os;
    os << "site,label,L\n";
    for (const Site& s : enumeration.order()) {
        const int d = dist[*graph.index_of(s)];
        os << site_label(s, graph.dim()) << ',' << static_cast<long long>(enumeration.label(s)) << ','
           << (d == kUnreachable ? std::string("inf") : std::to_string(d)) << '\n';
    }
    return os.str();
}

}  // namespace cml
