#pragma once

#include <string>

namespace gpmesh {

/// Shortest round-trip decimal representation; locale independent, so CSV and
/// JSON output is byte-stable across runs.
std::string format_double(double v);

/// Strict full-string double parse. Returns false on trailing junk or empty.
bool parse_double(const std::string& s, double& out);

}  // namespace gpmesh
