#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cml/circle.hpp"

namespace cml {

enum class MapKind { Doubling, AffineMod1, PiecewiseLinearCircle, Rotation };

std::string to_string(MapKind kind);

// Lift of the map on one interval where it is affine: T(x) = slope * x + intercept.
struct LinearPiece {
    double lo = 0.0;
    double hi = 1.0;
    double slope = 1.0;
    double intercept = 0.0;

    bool contains(double x) const noexcept { return lo <= x && x < hi; }
};

// A local map of the unit circle together with its declared expansion data:
//   lambda_lower * rho(x, y) <= rho(Tx, Ty) <= lambda_upper * rho(x, y)
// for rho(x, y) <= sigma (the upper bound is required globally when sigma is
// unset).
class LocalMapSpec {
public:
    static LocalMapSpec doubling();
    static LocalMapSpec affine(double slope, double offset);
    static LocalMapSpec rotation(double angle);
    // Degree-d circle map with the lift linear on [breakpoints[i], breakpoints[i+1])
    // (the last piece ends at 1); `offset` is the lift's value at 0.
    static LocalMapSpec piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes,
                                         double offset);

    // Replaces the declared constants; throws InvalidSpec unless upper >= lower > 0.
    LocalMapSpec with_constants(double lower, double upper, std::optional<double> sigma) const;

    MapKind kind() const noexcept { return kind_; }
    double lambda_lower() const noexcept { return lambda_lower_; }
    double lambda_upper() const noexcept { return lambda_upper_; }
    const std::optional<double>& sigma() const noexcept { return sigma_; }

    double slope() const noexcept { return slope_; }
    double offset() const noexcept { return offset_; }
    double angle() const noexcept { return offset_; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<double>& slopes() const noexcept { return slopes_; }

    double operator()(double x) const;
    CirclePoint apply(CirclePoint x) const { return CirclePoint((*this)(x.value())); }

    template <class Scalar>
    Scalar apply_generic(const Scalar& x) const;

    // True when the map is continuous as a circle map (AffineMod1 with a
    // non-integer slope jumps at 0).
    bool circle_continuous() const noexcept;
    bool invertible() const noexcept;
    // Single-valued inverse; throws NotInvertible for non-injective maps.
    double inverse(double y) const;

    LinearPiece linear_piece_at(double x) const;

private:
    LocalMapSpec() = default;
    std::size_t piece_index(double x) const;

    MapKind kind_ = MapKind::Doubling;
    double slope_ = 2.0;
    double offset_ = 0.0;  // AffineMod1 offset, Rotation angle, or PL lift at 0
    std::vector<double> breakpoints_;
    std::vector<double> slopes_;
    std::vector<double> node_values_;  // PL lift at each breakpoint
    double lambda_lower_ = 2.0;
    double lambda_upper_ = 2.0;
    std::optional<double> sigma_;
};

CirclePoint apply_local_map(const LocalMapSpec& spec, CirclePoint x);

struct LipschitzReport {
    double max_observed_ratio = 0.0;
    double min_observed_ratio = 0.0;
    std::size_t pairs = 0;
};

// Samples point pairs (within sigma when declared) and checks the declared
// constants to absolute tolerance 1e-9 on distances. Throws InvalidSpec on a
// violation.
LipschitzReport verify_lipschitz(const LocalMapSpec& spec, int n_samples, std::uint64_t seed = 1);

template <class Scalar>
Scalar LocalMapSpec::apply_generic(const Scalar& x) const {
    using Ops = ScalarOps<Scalar>;
    const Scalar y = Ops::wrap(x);
    switch (kind_) {
        case MapKind::Doubling:
            return Ops::wrap(Scalar(y + y));
        case MapKind::AffineMod1:
            return Ops::wrap(Scalar(Ops::from_double(slope_) * y + Ops::from_double(offset_)));
        case MapKind::Rotation:
            return Ops::wrap(Scalar(y + Ops::from_double(offset_)));
        case MapKind::PiecewiseLinearCircle: {
            Scalar lift = Ops::from_double(offset_);
            for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
                const Scalar lo = Ops::from_double(breakpoints_[i]);
                const Scalar hi = i + 1 < breakpoints_.size() ? Ops::from_double(breakpoints_[i + 1])
                                                               : Scalar(1);
                const Scalar s = Ops::from_double(slopes_[i]);
                if (y < hi) return Ops::wrap(Scalar(lift + s * (y - lo)));
                lift += s * (hi - lo);
            }
            return Ops::wrap(lift);
        }
    }
    return y;
}

}  // namespace cml
