#include <doctest.h>

#include <algorithm>
#include <set>

#include "cml/error.hpp"
#include "cml/rng.hpp"
#include "cml/topology.hpp"
#include "support.hpp"

using namespace cml;

namespace {

Site s1(int x) { return {x, 0}; }

ConnectivityGraph path3() {
    return ConnectivityGraph::from_edges(1, {s1(1), s1(2), s1(3)}, {s1(0)},
                                         {{s1(0), s1(1)}, {s1(1), s1(2)}, {s1(2), s1(3)}});
}

struct RandomGraph {
    int n = 0;
    int nb = 0;
    std::vector<std::vector<bool>> adj;  // vertices 0..n-1 interior, n..n+nb-1 boundary
    ConnectivityGraph graph;
};

RandomGraph random_graph(StreamRng& rng, int n, int nb, double p, bool dag) {
    RandomGraph g;
    g.n = n;
    g.nb = nb;
    g.adj.assign(n + nb, std::vector<bool>(n + nb, false));
    std::vector<Site> interior, boundary;
    for (int i = 0; i < n; ++i) interior.push_back(s1(i + 1));
    for (int i = 0; i < nb; ++i) boundary.push_back(s1(100 + i));
    std::vector<std::pair<Site, Site>> edges;
    auto site = [&](int v) { return v < n ? interior[v] : boundary[v - n]; };
    for (int u = 0; u < n + nb; ++u)
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            if (dag && u < n && u > v) continue;
            if (rng.uniform() < p) {
                g.adj[u][v] = true;
                edges.push_back({site(u), site(v)});
            }
        }
    g.graph = ConnectivityGraph::from_edges(1, interior, boundary, edges);
    return g;
}

std::vector<std::vector<bool>> closure(const RandomGraph& g) {
    const int m = g.n + g.nb;
    auto r = g.adj;
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            if (r[i][k])
                for (int j = 0; j < m; ++j)
                    if (r[k][j]) r[i][j] = true;
    return r;
}

}  // namespace

TEST_CASE("chain graph edges follow the stencil") {
    auto box = testing::chain_box(3, 1);
    const auto g = build_graph(CouplingSpec::from_template(*box, StencilTemplate::unidirectional(0.4)), *box);
    const std::vector<std::pair<Site, Site>> want{{s1(0), s1(1)}, {s1(1), s1(2)}, {s1(2), s1(3)}};
    auto edges = g.edges();
    std::sort(edges.begin(), edges.end());
    CHECK(edges == want);
    CHECK(g.max_degree() == 2);

    const auto none = build_graph(CouplingSpec::from_template(*box, StencilTemplate::unidirectional(0.0)), *box);
    CHECK(none.edge_count() == 0);
}

TEST_CASE("2x2 north-east stencil") {
    const std::vector<Site> ne{{1, 0}, {0, 1}};
    const BoxSpec box = BoxSpec::grid(2, 2, ne);
    const auto g = build_graph(CouplingSpec::from_template(box, StencilTemplate::toom_ne(0.2, 0.4, 0.4)), box);
    CHECK(g.edge_count() == 8);
    int from_boundary = 0;
    for (const auto& [a, b] : g.edges())
        if (box.is_shell(a)) ++from_boundary;
    CHECK(from_boundary == 4);
    CHECK_FALSE(detect_cycle(g));
    const Enumeration e = enumerate_paper(g);
    CHECK(validate_enumeration(g, e));
    CHECK(e.label({1, 1}) == 1.0);
    CHECK(e.label({0, 0}) == 4.0);
}

TEST_CASE("diffusive coupling has a cycle") {
    const std::vector<Site> both{{-1, 0}, {1, 0}};
    const BoxSpec box = BoxSpec::line(4, both);
    const auto g = build_graph(CouplingSpec::from_template(box, StencilTemplate::diffusive(0.3)), box);
    const auto cycle = detect_cycle(g);
    REQUIRE(cycle);
    REQUIRE(cycle->size() >= 2);
    for (std::size_t k = 0; k < cycle->size(); ++k) {
        const Site a = (*cycle)[k], b = (*cycle)[(k + 1) % cycle->size()];
        const auto edges = g.edges();
        CHECK(std::find(edges.begin(), edges.end(), std::make_pair(a, b)) != edges.end());
    }
    try {
        enumerate_paper(g);
        FAIL("expected CycleDetected");
    } catch (const CycleDetected& e) {
        CHECK(e.witness().size() == cycle->size());
    }
}

TEST_CASE("path labels") {
    const auto g = path3();
    const Enumeration e = enumerate_paper(g);
    CHECK(e.label(s1(1)) == 1.0);
    CHECK(e.label(s1(2)) == 2.0);
    CHECK(e.label(s1(3)) == 3.0);
    CHECK(e.label(s1(0)) == 0.0);
    CHECK(validate_enumeration(g, e));
    CHECK_FALSE(validate_enumeration(g, Enumeration({{s1(1), 3.0}, {s1(2), 2.0}, {s1(3), 1.0}})));
    CHECK_FALSE(validate_enumeration(g, Enumeration({{s1(1), 1.0}, {s1(2), 2.0}})));
    CHECK(upstream_set(g, s1(3)) == std::vector<Site>{s1(1), s1(2)});
    CHECK(upstream_set(g, s1(1)).empty());
    CHECK(boundary_distance(g, s1(3)) == 3);
}

TEST_CASE("Toom 3x3 boundary distances") {
    const std::vector<Site> ne{{1, 0}, {0, 1}};
    const BoxSpec box = BoxSpec::grid(3, 3, ne);
    const auto g = build_graph(CouplingSpec::from_template(box, StencilTemplate::toom_ne(0.2, 0.4, 0.4)), box);
    CHECK(boundary_distance(g, {1, 1}) == 2);
    CHECK(boundary_distance(g, {2, 2}) == 1);
    CHECK(boundary_distance(g, {0, 0}) == 3);
    CHECK(validate_enumeration(g, enumerate_paper(g)));
}

TEST_CASE("isolated vertex is unreachable") {
    const auto g = ConnectivityGraph::from_edges(1, {s1(1), s1(2)}, {s1(0)}, {{s1(0), s1(1)}});
    CHECK(boundary_distance(g, s1(2)) == kUnreachable);
    const std::string csv = export_enumeration_csv(g, enumerate_paper(g));
    CHECK(csv.find("inf") != std::string::npos);
    CHECK(csv.rfind("site,label,L", 0) == 0);
}

TEST_CASE("adjacency export") {
    CHECK(export_adjacency(path3()) == "1 -> 2\n2 -> 3\n0 -> 1\n");
}

TEST_CASE("dangling inputs are rejected") {
    auto box = testing::chain_box(3, 0);
    CHECK_THROWS_AS(build_graph(CouplingSpec::from_template(*box, StencilTemplate::unidirectional(0.4)), *box),
                    DanglingInput);
}

TEST_CASE("random graphs against brute force") {
    StreamRng rng(17, 5);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform() * 10);
        const int nb = 1 + static_cast<int>(rng.uniform() * 3);
        const double p = trial % 2 ? 0.3 : 0.1;
        const RandomGraph g = random_graph(rng, n, nb, p, trial % 3 != 0);
        const auto r = closure(g);
        bool cyclic = false;
        for (int v = 0; v < n; ++v) cyclic = cyclic || r[v][v];

        const auto cycle = detect_cycle(g.graph);
        CHECK(cycle.has_value() == cyclic);
        if (cyclic) {
            CHECK_THROWS_AS(enumerate_paper(g.graph), CycleDetected);
            continue;
        }
        CHECK(validate_enumeration(g.graph, enumerate_paper(g.graph)));

        // BFS distances by relaxation
        std::vector<int> dist(n + nb, kUnreachable);
        for (int b = n; b < n + nb; ++b) dist[b] = 0;
        for (int round = 0; round < n + nb; ++round)
            for (int u = 0; u < n + nb; ++u)
                for (int v = 0; v < n; ++v)
                    if (g.adj[u][v] && dist[u] != kUnreachable) dist[v] = std::min(dist[v], dist[u] + 1);
        const auto got = boundary_distances(g.graph);
        for (int v = 0; v < n; ++v) {
            CHECK(got[g.graph.index_of(s1(v + 1)).value()] == dist[v]);
            std::vector<Site> up;
            for (int u = 0; u < n; ++u)
                if (r[u][v]) up.push_back(s1(u + 1));
            CHECK(upstream_set(g.graph, s1(v + 1)) == up);
        }
    }
}
