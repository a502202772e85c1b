#pragma once

// Exact rational scalar for engine runs that must follow periodic orbits of
// expanding maps (binary floating point has no nonzero periodic points of the
// doubling map).

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "cml/circle.hpp"

namespace cml {

using Rational = boost::multiprecision::cpp_rational;

template <>
struct ScalarOps<Rational> {
    static Rational floor(const Rational& q) {
        using boost::multiprecision::cpp_int;
        const cpp_int num = boost::multiprecision::numerator(q);
        const cpp_int den = boost::multiprecision::denominator(q);
        cpp_int quot = num / den;  // truncates toward zero
        if (num < 0 && quot * den != num) quot -= 1;
        return Rational(quot);
    }
    static Rational wrap(const Rational& q) { return q - floor(q); }
    // Exact: every finite double is a dyadic rational.
    static Rational from_double(double x) { return Rational(x); }
    static double to_double(const Rational& q) { return q.convert_to<double>(); }
};

// Parses "p/q", an integer, or a finite decimal such as "0.25" exactly.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

// Arc distance between two exact circle points, returned as a rational.
Rational circle_dist_exact(const Rational& x, const Rational& y);

}  // namespace cml
