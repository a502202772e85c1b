#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cml/coupling.hpp"
#include "cml/lattice.hpp"

namespace cml {

// Boundary distance of a site no boundary path reaches.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// Directed dependency graph of an interaction: edge (i, j) when the
// post-interaction value at interior site j depends on x_i. Self-dependence
// is not an edge. Vertices are indexed interior-first, each group in
// lexicographic site order.
class ConnectivityGraph {
public:
    static ConnectivityGraph from_edges(int dim, std::vector<Site> interior, std::vector<Site> boundary,
                                        const std::vector<std::pair<Site, Site>>& edges);

    int dim() const noexcept { return dim_; }
    std::size_t vertex_count() const noexcept { return sites_.size(); }
    std::size_t interior_count() const noexcept { return interior_count_; }
    bool is_interior(std::size_t v) const noexcept { return v < interior_count_; }
    const Site& site(std::size_t v) const { return sites_[v]; }
    std::optional<std::size_t> index_of(Site s) const;

    const std::vector<std::size_t>& out(std::size_t v) const { return out_[v]; }
    const std::vector<std::size_t>& in(std::size_t v) const { return in_[v]; }

    std::vector<std::pair<Site, Site>> edges() const;
    std::size_t edge_count() const;
    // Largest in+out degree over all vertices (the constant K).
    std::size_t max_degree() const;

private:
    int dim_ = 1;
    std::size_t interior_count_ = 0;
    std::vector<Site> sites_;
    std::map<Site, std::size_t> index_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

ConnectivityGraph build_graph(const CouplingSpec& coupling, const BoxSpec& box);

// A directed cycle among interior vertices, listed in edge order, or nullopt.
std::optional<std::vector<Site>> detect_cycle(const ConnectivityGraph& graph);

// Labeling N of interior sites; boundary sites are implicitly labeled 0.
class Enumeration {
public:
    Enumeration() = default;
    explicit Enumeration(std::map<Site, double> labels) : labels_(std::move(labels)) {}

    // 0 for sites without a label (the boundary convention).
    double label(Site s) const;
    bool has(Site s) const { return labels_.contains(s); }
    const std::map<Site, double>& labels() const noexcept { return labels_; }
    // Interior sites in increasing label order.
    std::vector<Site> order() const;

private:
    std::map<Site, double> labels_;
};

// Path-extension construction of a unidirectional enumeration. Throws
// CycleDetected (with witness) when the graph has a cycle.
Enumeration enumerate_paper(const ConnectivityGraph& graph);

bool validate_enumeration(const ConnectivityGraph& graph, const Enumeration& enumeration);

// Shortest directed path length from any boundary vertex; kUnreachable if none.
int boundary_distance(const ConnectivityGraph& graph, Site site);
std::vector<int> boundary_distances(const ConnectivityGraph& graph);

// Interior sites with a directed path into `site`.
std::vector<Site> upstream_set(const ConnectivityGraph& graph, Site site);

// One "source -> target" pair per line.
std::string export_adjacency(const ConnectivityGraph& graph);
// CSV "site,label,L" in label order.
std::string export_enumeration_csv(const ConnectivityGraph& graph, const Enumeration& enumeration);

}  // namespace cml
