#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cml/circle.hpp"

namespace cml {

// A lattice site in Z^d, d in {1, 2}. One-dimensional sites keep y == 0.
struct Site {
    int x = 0;
    int y = 0;

    friend auto operator<=>(const Site&, const Site&) = default;
    friend Site operator+(Site a, Site b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Site operator-(Site a, Site b) noexcept { return {a.x - b.x, a.y - b.y}; }
};

// "7" in one dimension, "3:4" in two.
std::string site_label(Site s, int dim);

// Chebyshev distance between two sites.
int lattice_range(Site a, Site b) noexcept;

struct Rect {
    Site origin;
    int nx = 1;
    int ny = 1;
};

// A finite box B together with the finite shell of outside sites that feed
// interactions into it. Interior sites are indexed first, in lexicographic
// order, followed by the shell.
class BoxSpec {
public:
    // Sites 1..n on a line; the shell holds every site reached by `offsets`.
    static BoxSpec line(int n, std::span<const Site> offsets);
    // Sites 1..n with shell 1-depth..0 (the unidirectional chain layout).
    static BoxSpec chain(int n, int shell_depth);
    // Sites (0..nx-1) x (0..ny-1) with the shell reached by `offsets`.
    static BoxSpec grid(int nx, int ny, std::span<const Site> offsets);
    // Arbitrary site sets. `rect` is only needed for periodic runs.
    static BoxSpec custom(int dim, std::vector<Site> sites, std::vector<Site> shell,
                          std::optional<Rect> rect = std::nullopt);

    int dim() const noexcept { return dim_; }
    const std::vector<Site>& sites() const noexcept { return sites_; }
    const std::vector<Site>& shell() const noexcept { return shell_; }
    std::size_t interior_count() const noexcept { return sites_.size(); }
    std::size_t size() const noexcept { return sites_.size() + shell_.size(); }

    std::optional<std::size_t> index_of(Site s) const;
    const Site& site_at(std::size_t index) const { return index < sites_.size() ? sites_[index] : shell_[index - sites_.size()]; }
    bool is_interior(Site s) const;
    bool is_shell(Site s) const;

    const std::optional<Rect>& rect() const noexcept { return rect_; }
    // Folds a site into the rectangular box (periodic continuation).
    Site wrap_periodic(Site s) const;

private:
    BoxSpec() = default;
    void build_index();

    int dim_ = 1;
    std::vector<Site> sites_;
    std::vector<Site> shell_;
    std::optional<Rect> rect_;
    std::map<Site, std::size_t> index_;
};

// Assignment of circle points to every site of a box and its shell. Copies
// are independent; the box geometry is shared and immutable.
class LatticeState {
public:
    LatticeState() = default;
    explicit LatticeState(std::shared_ptr<const BoxSpec> box, double fill = 0.0);

    const BoxSpec& box() const { return *box_; }
    const std::shared_ptr<const BoxSpec>& box_ptr() const noexcept { return box_; }

    CirclePoint at(Site s) const;
    void set(Site s, CirclePoint v);

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> interior() const noexcept {
        return std::span<const double>(values_).first(box_->interior_count());
    }

    friend bool operator==(const LatticeState& a, const LatticeState& b) {
        return a.values_ == b.values_;
    }

private:
    std::shared_ptr<const BoxSpec> box_;
    std::vector<double> values_;
};

// Largest arc distance between corresponding interior sites.
double sup_interior_distance(const LatticeState& a, const LatticeState& b);

}  // namespace cml
