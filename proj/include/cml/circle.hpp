#pragma once

#include <cmath>

namespace cml {

// Values this close to 1 after reduction are treated as 0 so that a point
// never escapes [0, 1) through rounding.
inline constexpr double kWrapSnap = 1e-15;

inline double wrap_unit(double x) noexcept {
    double r = x - std::floor(x);
    if (r >= 1.0 - kWrapSnap) r = 0.0;
    return r;
}

// A point on the unit circle R/Z, always held in [0, 1).
class CirclePoint {
public:
    constexpr CirclePoint() noexcept = default;
    explicit CirclePoint(double v) noexcept : value_(wrap_unit(v)) {}

    double value() const noexcept { return value_; }

    friend bool operator==(CirclePoint, CirclePoint) = default;

private:
    double value_ = 0.0;
};

// Signed displacement from `from` to `to`, taken in [-0.5, 0.5).
inline double signed_diff(double to, double from) noexcept {
    double d = to - from;
    return d - std::floor(d + 0.5);
}

// Length of the shortest arc between two points; in [0, 0.5].
inline double circle_dist(double x, double y) noexcept {
    double d = std::fabs(wrap_unit(x) - wrap_unit(y));
    return d < 1.0 - d ? d : 1.0 - d;
}

inline double circle_dist(CirclePoint x, CirclePoint y) noexcept {
    return circle_dist(x.value(), y.value());
}

// Arithmetic hooks for the scalar-generic engine path. double is the
// production scalar; exact.hpp adds an exact rational specialization.
template <class Scalar>
struct ScalarOps;

template <>
struct ScalarOps<double> {
    static double wrap(double x) noexcept { return wrap_unit(x); }
    static double floor(double x) noexcept { return std::floor(x); }
    static double from_double(double x) noexcept { return x; }
    static double to_double(double x) noexcept { return x; }
};

template <class Scalar>
Scalar signed_diff_generic(const Scalar& to, const Scalar& from) {
    Scalar d = to - from;
    Scalar shifted = d + ScalarOps<Scalar>::from_double(0.5);
    return d - ScalarOps<Scalar>::floor(shifted);
}

}  // namespace cml
