#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gpmesh {
namespace svg {

struct Series {
    enum class Kind { Line, Scatter };
    std::string label;
    Kind kind = Kind::Line;
    std::vector<std::pair<double, double>> points;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

/// Static line/scatter chart. Output is deterministic: fixed palette, fixed
/// number formatting, and a single version comment line at the top.
void write_chart(const ChartSpec& spec, const std::filesystem::path& path);

}  // namespace svg
}  // namespace gpmesh
