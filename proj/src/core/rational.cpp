#include "socratic/rational.hpp"

#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace socratic {

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw std::domain_error("Rational: zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g == 0 ? 0 : num / g;
    den_ = g == 0 ? 1 : den / g;
}

Rational operator+(const Rational& a, const Rational& b) {
    const std::int64_t l = std::lcm(a.den_, b.den_);
    return Rational(a.num_ * (l / a.den_) + b.num_ * (l / b.den_), l);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    // Denominators are positive, so cross multiplication preserves order.
    return a.num_ * b.den_ <=> b.num_ * a.den_;
}

std::string Rational::to_fixed(int decimals) const {
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) {
        scale *= 10;
    }
    const bool negative = num_ < 0;
    const std::int64_t mag = std::llabs(num_);
    // round(mag * scale / den) half away from zero
    std::int64_t scaled = (2 * mag * scale + den_) / (2 * den_);

    std::string digits = std::to_string(scaled / scale);
    if (decimals > 0) {
        std::string frac = std::to_string(scaled % scale);
        frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
        digits += "." + frac;
    }
    if (negative && scaled != 0) {
        digits.insert(0, "-");
    }
    return digits;
}

std::string to_string(const Rational& r) {
    return r.den() == 1 ? std::to_string(r.num())
                        : std::to_string(r.num()) + "/" + std::to_string(r.den());
}

}  // namespace socratic
