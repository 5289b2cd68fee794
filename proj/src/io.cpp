#include "gpmesh/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace gpmesh {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

bool parse_double(const std::string& s, double& out) {
    std::size_t begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return false;
    std::size_t end = s.find_last_not_of(" \t") + 1;
    if (s[begin] == '+') ++begin;  // from_chars rejects a leading plus
    const auto res = std::from_chars(s.data() + begin, s.data() + end, out);
    return res.ec == std::errc{} && res.ptr == s.data() + end;
}

}  // namespace gpmesh
