#include "cml/exact.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

namespace cml {

namespace {

boost::multiprecision::cpp_int parse_int(std::string_view digits, std::string_view whole) {
    if (digits.empty()) throw std::invalid_argument("not a rational: '" + std::string(whole) + "'");
    for (char ch : digits)
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw std::invalid_argument("not a rational: '" + std::string(whole) + "'");
    return boost::multiprecision::cpp_int(std::string(digits));
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    Rational value;
    if (auto slash = body.find('/'); slash != std::string_view::npos) {
        const auto num = parse_int(body.substr(0, slash), text);
        const auto den = parse_int(body.substr(slash + 1), text);
        if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
        value = Rational(num, den);
    } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
        const std::string_view ip = body.substr(0, dot);
        const std::string_view fp = body.substr(dot + 1);
        const auto whole = ip.empty() ? boost::multiprecision::cpp_int(0) : parse_int(ip, text);
        const auto frac = fp.empty() ? boost::multiprecision::cpp_int(0) : parse_int(fp, text);
        boost::multiprecision::cpp_int scale = 1;
        for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
        value = Rational(whole) + Rational(frac, scale);
    } else {
        value = Rational(parse_int(body, text));
    }
    return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& q) {
    const auto den = boost::multiprecision::denominator(q);
    if (den == 1) return boost::multiprecision::numerator(q).str();
    return boost::multiprecision::numerator(q).str() + "/" + den.str();
}

Rational circle_dist_exact(const Rational& x, const Rational& y) {
    using Ops = ScalarOps<Rational>;
    Rational d = Ops::wrap(Rational(x - y));
    Rational other = Rational(1) - d;
    return d < other ? d : other;
}

}  // namespace cml
