#include "nq/extended_real.hpp"

#include <charconv>
#include <stdexcept>

#include "nq/errors.hpp"

namespace nq {

ExtendedReal::ExtendedReal(double v) : value_(v) {
    if (std::isnan(v)) fail(ErrorKind::InvalidSpec, "ExtendedReal cannot hold NaN");
}

std::string ExtendedReal::to_string() const {
    if (is_pos_inf()) return "inf";
    if (is_neg_inf()) return "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value_);
    return std::string(buf, res.ptr);
}

ExtendedReal ExtendedReal::parse(const std::string& text) {
    if (text == "inf" || text == "+inf") return pos_inf();
    if (text == "-inf") return neg_inf();
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return ExtendedReal(v);
    } catch (const std::logic_error&) {
        fail(ErrorKind::ConfigError, "not an extended real: '" + text + "'");
    }
}

}  // namespace nq
