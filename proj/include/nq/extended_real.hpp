#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <string>

namespace nq {

/// Real number extended by the two sentinels +inf and -inf.
///
/// Suprema and infima of the fibered quotient are genuinely infinite for
/// several model problems, so every extremal value travels as one of these.
/// NaN is never representable: construction from NaN throws.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    ExtendedReal(double v);  // NOLINT(google-explicit-constructor)

    static ExtendedReal pos_inf() { return ExtendedReal(std::numeric_limits<double>::infinity()); }
    static ExtendedReal neg_inf() { return ExtendedReal(-std::numeric_limits<double>::infinity()); }

    bool is_finite() const { return std::isfinite(value_); }
    bool is_pos_inf() const { return value_ > 0 && std::isinf(value_); }
    bool is_neg_inf() const { return value_ < 0 && std::isinf(value_); }

    /// Raw value; infinities map to IEEE infinities.
    double value() const { return value_; }

    friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) { return a.value_ == b.value_; }
    friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
        return a.value_ <=> b.value_;
    }

    /// "inf", "-inf" or the shortest round-trip decimal.
    std::string to_string() const;
    static ExtendedReal parse(const std::string& text);

private:
    double value_ = 0.0;
};

inline ExtendedReal max(const ExtendedReal& a, const ExtendedReal& b) { return a < b ? b : a; }
inline ExtendedReal min(const ExtendedReal& a, const ExtendedReal& b) { return b < a ? b : a; }

}  // namespace nq
