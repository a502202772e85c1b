#include "cml/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "cml/error.hpp"

namespace cml {

std::string site_label(Site s, int dim) {
    if (dim == 1) return std::to_string(s.x);
    return std::to_string(s.x) + ":" + std::to_string(s.y);
}

int lattice_range(Site a, Site b) noexcept {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

namespace {

std::vector<Site> shell_for(const std::vector<Site>& sites, std::span<const Site> offsets) {
    const std::set<Site> inside(sites.begin(), sites.end());
    std::set<Site> shell;
    for (const Site& s : sites) {
        for (const Site& o : offsets) {
            const Site t = s + o;
            if (!inside.contains(t)) shell.insert(t);
        }
    }
    return {shell.begin(), shell.end()};
}

}  // namespace

BoxSpec BoxSpec::line(int n, std::span<const Site> offsets) {
    if (n < 1) throw InvalidSpec("box: line length must be >= 1");
    std::vector<Site> sites;
    for (int i = 1; i <= n; ++i) sites.push_back({i, 0});
    auto shell = shell_for(sites, offsets);
    return custom(1, std::move(sites), std::move(shell), Rect{{1, 0}, n, 1});
}

BoxSpec BoxSpec::chain(int n, int shell_depth) {
    if (shell_depth < 0) throw InvalidSpec("box: shell depth must be >= 0");
    std::vector<Site> offsets;
    for (int k = 1; k <= shell_depth; ++k) offsets.push_back({-k, 0});
    return line(n, offsets);
}

BoxSpec BoxSpec::grid(int nx, int ny, std::span<const Site> offsets) {
    if (nx < 1 || ny < 1) throw InvalidSpec("box: grid extents must be >= 1");
    std::vector<Site> sites;
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) sites.push_back({x, y});
    auto shell = shell_for(sites, offsets);
    return custom(2, std::move(sites), std::move(shell), Rect{{0, 0}, nx, ny});
}

BoxSpec BoxSpec::custom(int dim, std::vector<Site> sites, std::vector<Site> shell,
                        std::optional<Rect> rect) {
    if (dim != 1 && dim != 2) throw InvalidSpec("box: dimension must be 1 or 2");
    if (sites.empty()) throw InvalidSpec("box: no interior sites");
    BoxSpec box;
    box.dim_ = dim;
    std::sort(sites.begin(), sites.end());
    std::sort(shell.begin(), shell.end());
    if (std::adjacent_find(sites.begin(), sites.end()) != sites.end() ||
        std::adjacent_find(shell.begin(), shell.end()) != shell.end())
        throw InvalidSpec("box: duplicate site");
    if (dim == 1) {
        for (const auto* v : {&sites, &shell})
            for (const Site& s : *v)
                if (s.y != 0) throw InvalidSpec("box: 1D site with nonzero y");
    }
    box.sites_ = std::move(sites);
    box.shell_ = std::move(shell);
    box.rect_ = rect;
    box.build_index();
    if (box.index_.size() != box.size()) throw InvalidSpec("box: sites and shell overlap");
    return box;
}

void BoxSpec::build_index() {
    index_.clear();
    for (std::size_t i = 0; i < size(); ++i) index_.emplace(site_at(i), i);
}

std::optional<std::size_t> BoxSpec::index_of(Site s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool BoxSpec::is_interior(Site s) const {
    auto idx = index_of(s);
    return idx && *idx < sites_.size();
}

bool BoxSpec::is_shell(Site s) const {
    auto idx = index_of(s);
    return idx && *idx >= sites_.size();
}

Site BoxSpec::wrap_periodic(Site s) const {
    if (!rect_) throw InvalidSpec("box: periodic continuation needs a rectangular box");
    auto fold = [](int v, int origin, int n) {
        int r = (v - origin) % n;
        if (r < 0) r += n;
        return origin + r;
    };
    return {fold(s.x, rect_->origin.x, rect_->nx), fold(s.y, rect_->origin.y, rect_->ny)};
}

LatticeState::LatticeState(std::shared_ptr<const BoxSpec> box, double fill)
    : box_(std::move(box)), values_(box_->size(), wrap_unit(fill)) {}

CirclePoint LatticeState::at(Site s) const {
    auto idx = box_->index_of(s);
    if (!idx) throw MissingInput("state has no value for site " + site_label(s, box_->dim()));
    return CirclePoint(values_[*idx]);
}

void LatticeState::set(Site s, CirclePoint v) {
    auto idx = box_->index_of(s);
    if (!idx) throw MissingInput("state has no slot for site " + site_label(s, box_->dim()));
    values_[*idx] = v.value();
}

double sup_interior_distance(const LatticeState& a, const LatticeState& b) {
    const auto xa = a.interior();
    const auto xb = b.interior();
    if (xa.size() != xb.size()) throw std::invalid_argument("states over different boxes");
    double d = 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) d = std::max(d, circle_dist(xa[i], xb[i]));
    return d;
}

}  // namespace cml
