#include "cml/local_map.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cml/error.hpp"
#include "cml/rng.hpp"

namespace cml {

std::string to_string(MapKind kind) {
    switch (kind) {
        case MapKind::Doubling: return "doubling";
        case MapKind::AffineMod1: return "affine";
        case MapKind::PiecewiseLinearCircle: return "piecewise_linear";
        case MapKind::Rotation: return "rotation";
    }
    return "unknown";
}

namespace {

void check_constants(double lower, double upper, const std::optional<double>& sigma) {
    if (!(lower > 0.0) || !(upper >= lower) || !std::isfinite(upper))
        throw InvalidSpec("map: declared constants must satisfy upper >= lower > 0");
    if (sigma && !(*sigma > 0.0 && *sigma <= 0.5))
        throw InvalidSpec("map: sigma must lie in (0, 0.5]");
}

bool is_integer(double v) { return std::fabs(v - std::round(v)) <= 1e-12; }

}  // namespace

LocalMapSpec LocalMapSpec::doubling() {
    LocalMapSpec m;
    m.kind_ = MapKind::Doubling;
    m.slope_ = 2.0;
    m.lambda_lower_ = 2.0;
    m.lambda_upper_ = 2.0;
    // Beyond 1/4 the doubled arc wraps past the antipode and the lower bound fails.
    m.sigma_ = 0.25;
    return m;
}

LocalMapSpec LocalMapSpec::affine(double slope, double offset) {
    if (!std::isfinite(slope) || !std::isfinite(offset) || slope == 0.0)
        throw InvalidSpec("map: affine slope must be finite and nonzero");
    LocalMapSpec m;
    m.kind_ = MapKind::AffineMod1;
    m.slope_ = slope;
    m.offset_ = offset;
    m.lambda_lower_ = std::fabs(slope);
    m.lambda_upper_ = std::fabs(slope);
    m.sigma_ = std::min(0.5, 0.5 / std::fabs(slope));
    return m;
}

LocalMapSpec LocalMapSpec::rotation(double angle) {
    if (!std::isfinite(angle)) throw InvalidSpec("map: rotation angle must be finite");
    LocalMapSpec m;
    m.kind_ = MapKind::Rotation;
    m.slope_ = 1.0;
    m.offset_ = angle;
    m.lambda_lower_ = 1.0;
    m.lambda_upper_ = 1.0;
    return m;
}

LocalMapSpec LocalMapSpec::piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes,
                                            double offset) {
    if (breakpoints.empty() || breakpoints.size() != slopes.size())
        throw InvalidSpec("map: piecewise_linear needs one slope per breakpoint");
    if (breakpoints.front() != 0.0) throw InvalidSpec("map: first breakpoint must be 0");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        const double next = i + 1 < breakpoints.size() ? breakpoints[i + 1] : 1.0;
        if (!(breakpoints[i] < next)) throw InvalidSpec("map: breakpoints must increase within [0, 1)");
        if (!(slopes[i] > 0.0) || !std::isfinite(slopes[i]))
            throw InvalidSpec("map: piecewise_linear slopes must be positive");
    }
    LocalMapSpec m;
    m.kind_ = MapKind::PiecewiseLinearCircle;
    m.offset_ = offset;
    double lift = offset;
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        m.node_values_.push_back(lift);
        const double next = i + 1 < breakpoints.size() ? breakpoints[i + 1] : 1.0;
        lift += slopes[i] * (next - breakpoints[i]);
    }
    const double degree = lift - offset;
    if (std::fabs(degree - std::round(degree)) > 1e-9 || std::round(degree) < 1.0)
        throw InvalidSpec("map: piecewise_linear lift must close up with positive integer degree");
    m.slope_ = std::round(degree);
    m.lambda_lower_ = *std::min_element(slopes.begin(), slopes.end());
    m.lambda_upper_ = *std::max_element(slopes.begin(), slopes.end());
    m.sigma_ = std::min(0.5, 0.5 / m.lambda_upper_);
    m.breakpoints_ = std::move(breakpoints);
    m.slopes_ = std::move(slopes);
    return m;
}

LocalMapSpec LocalMapSpec::with_constants(double lower, double upper, std::optional<double> sigma) const {
    check_constants(lower, upper, sigma);
    LocalMapSpec m = *this;
    m.lambda_lower_ = lower;
    m.lambda_upper_ = upper;
    m.sigma_ = sigma;
    return m;
}

std::size_t LocalMapSpec::piece_index(double x) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return static_cast<std::size_t>(std::distance(breakpoints_.begin(), it)) - 1;
}

double LocalMapSpec::operator()(double x) const {
    const double y = wrap_unit(x);
    switch (kind_) {
        case MapKind::Doubling: return wrap_unit(2.0 * y);
        case MapKind::AffineMod1: return wrap_unit(slope_ * y + offset_);
        case MapKind::Rotation: return wrap_unit(y + offset_);
        case MapKind::PiecewiseLinearCircle: {
            const std::size_t i = piece_index(y);
            return wrap_unit(node_values_[i] + slopes_[i] * (y - breakpoints_[i]));
        }
    }
    return y;
}

bool LocalMapSpec::circle_continuous() const noexcept {
    return kind_ != MapKind::AffineMod1 || is_integer(slope_);
}

bool LocalMapSpec::invertible() const noexcept {
    switch (kind_) {
        case MapKind::Doubling: return false;
        case MapKind::Rotation: return true;
        case MapKind::AffineMod1: return std::fabs(std::fabs(slope_) - 1.0) <= 1e-12;
        case MapKind::PiecewiseLinearCircle: return slope_ == 1.0;
    }
    return false;
}

double LocalMapSpec::inverse(double y) const {
    if (!invertible())
        throw NotInvertible("map: " + to_string(kind_) + " has no single-valued inverse");
    const double v = wrap_unit(y);
    switch (kind_) {
        case MapKind::Rotation: return wrap_unit(v - offset_);
        case MapKind::AffineMod1: return slope_ > 0 ? wrap_unit(v - offset_) : wrap_unit(offset_ - v);
        case MapKind::PiecewiseLinearCircle: {
            // Bring y into the lift's fundamental range [F(0), F(0) + 1).
            const double target = offset_ + wrap_unit(v - offset_);
            auto it = std::upper_bound(node_values_.begin(), node_values_.end(), target);
            const std::size_t i = static_cast<std::size_t>(std::distance(node_values_.begin(), it)) - 1;
            return wrap_unit(breakpoints_[i] + (target - node_values_[i]) / slopes_[i]);
        }
        case MapKind::Doubling: break;
    }
    throw NotInvertible("map: no inverse");
}

LinearPiece LocalMapSpec::linear_piece_at(double x) const {
    const double y = wrap_unit(x);
    switch (kind_) {
        case MapKind::Doubling:
            return y < 0.5 ? LinearPiece{0.0, 0.5, 2.0, 0.0} : LinearPiece{0.5, 1.0, 2.0, -1.0};
        case MapKind::AffineMod1: return {0.0, 1.0, slope_, offset_};
        case MapKind::Rotation: return {0.0, 1.0, 1.0, offset_};
        case MapKind::PiecewiseLinearCircle: {
            const std::size_t i = piece_index(y);
            const double hi = i + 1 < breakpoints_.size() ? breakpoints_[i + 1] : 1.0;
            return {breakpoints_[i], hi, slopes_[i], node_values_[i] - slopes_[i] * breakpoints_[i]};
        }
    }
    return {};
}

CirclePoint apply_local_map(const LocalMapSpec& spec, CirclePoint x) { return spec.apply(x); }

LipschitzReport verify_lipschitz(const LocalMapSpec& spec, int n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("verify_lipschitz: need at least 2 samples");
    constexpr double kTol = 1e-9;
    const double reach = spec.sigma().value_or(0.5);
    const bool wrap_pairs = spec.circle_continuous();
    StreamRng rng(seed, streams::kLipschitz);

    LipschitzReport report;
    report.max_observed_ratio = 0.0;
    report.min_observed_ratio = std::numeric_limits<double>::infinity();
    for (int n = 0; n < n_samples; ++n) {
        // h in (0, reach]; pairs separated by less than 1e-6 only measure rounding.
        const double h = std::max(1e-6, reach * (1.0 - rng.uniform()));
        double x = rng.uniform();
        if (!wrap_pairs) x *= (1.0 - h);  // keep [x, x + h] clear of the jump at 0
        const double y = wrap_unit(x + h);
        const double d_in = circle_dist(x, y);
        if (d_in == 0.0) continue;
        const double d_out = circle_dist(spec(x), spec(y));
        const double ratio = d_out / d_in;
        report.max_observed_ratio = std::max(report.max_observed_ratio, ratio);
        report.min_observed_ratio = std::min(report.min_observed_ratio, ratio);
        ++report.pairs;

        if (d_out > spec.lambda_upper() * d_in + kTol) {
            std::ostringstream msg;
            msg << "map: observed expansion " << ratio << " exceeds declared upper constant "
                << spec.lambda_upper() << " at x=" << x << ", y=" << y;
            throw InvalidSpec(msg.str());
        }
        if (spec.sigma() && d_out < spec.lambda_lower() * d_in - kTol) {
            std::ostringstream msg;
            msg << "map: observed expansion " << ratio << " below declared lower constant "
                << spec.lambda_lower() << " at x=" << x << ", y=" << y << " (sigma=" << *spec.sigma() << ")";
            throw InvalidSpec(msg.str());
        }
    }
    return report;
}

}  // namespace cml
