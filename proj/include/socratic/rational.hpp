#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace socratic {

/// Exact non-negative-denominator fraction, always stored in lowest terms.
/// Preference indices are means of quarter units, so every value the
/// analytics layer produces is representable without rounding.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// Decimal rendering rounded half away from zero, e.g. 3/100 -> "0.03".
    std::string to_fixed(int decimals) const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

std::string to_string(const Rational& r);

}  // namespace socratic
