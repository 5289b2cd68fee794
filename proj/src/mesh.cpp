#include "gpmesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "gpmesh/errors.hpp"
#include "gpmesh/io.hpp"

namespace gpmesh {

std::string Diagonal::label() const {
    std::string s;
    for (int o : offsets) s += (o > 0 ? "+1" : "-1");
    return s;
}

std::vector<Diagonal> enumerate_diagonals(int dims) {
    if (dims < 1) throw validation_error("enumerate_diagonals: dimension must be >= 1");
    const int count = 1 << (dims - 1);
    std::vector<Diagonal> out;
    out.reserve(count);
    for (int m = 0; m < count; ++m) {
        Diagonal diag;
        diag.offsets.resize(dims, 1);
        for (int b = 0; b < dims - 1; ++b)
            diag.offsets[1 + b] = ((m >> (dims - 2 - b)) & 1) ? -1 : 1;
        out.push_back(std::move(diag));
    }
    return out;
}

double NormalizationRecord::denormalize_axis(int axis, double normalized) const {
    const auto& raw = raw_axis_coords[axis];
    const int n = static_cast<int>(raw.size());
    if (n == 1) return raw[0];
    if (normalized <= 0.0) return raw[0] + normalized * (raw[1] - raw[0]);
    if (normalized >= n - 1) return raw[n - 1] + (normalized - (n - 1)) * (raw[n - 1] - raw[n - 2]);
    const int i = static_cast<int>(normalized);
    const double frac = normalized - i;
    if (frac == 0.0) return raw[i];
    return raw[i] + frac * (raw[i + 1] - raw[i]);
}

StructuredMesh::StructuredMesh(std::vector<std::vector<double>> axis_coords, std::vector<double> values)
    : axis_coords_(std::move(axis_coords)), values_(std::move(values)) {
    if (axis_coords_.empty()) throw validation_error("mesh needs at least one axis");
    shape_.reserve(axis_coords_.size());
    std::size_t total = 1;
    for (std::size_t k = 0; k < axis_coords_.size(); ++k) {
        const auto& c = axis_coords_[k];
        if (c.empty()) throw validation_error("axis " + std::to_string(k + 1) + " has no coordinates");
        for (std::size_t i = 1; i < c.size(); ++i)
            if (!(c[i] > c[i - 1]))
                throw validation_error("axis " + std::to_string(k + 1) +
                                       " coordinates are not strictly increasing");
        shape_.push_back(static_cast<int>(c.size()));
        total *= c.size();
    }
    if (values_.size() != total)
        throw validation_error("value count " + std::to_string(values_.size()) +
                               " does not match grid size " + std::to_string(total));
    strides_.assign(shape_.size(), 1);
    for (int k = dims() - 2; k >= 0; --k)
        strides_[k] = strides_[k + 1] * static_cast<std::size_t>(shape_[k + 1]);
}

std::size_t StructuredMesh::linear_index(std::span<const int> idx) const {
    std::size_t lin = 0;
    for (int k = 0; k < dims(); ++k) lin += static_cast<std::size_t>(idx[k]) * strides_[k];
    return lin;
}

PointSet StructuredMesh::points() const {
    PointSet ps(dims());
    ps.coords.resize(size() * static_cast<std::size_t>(dims()));
    std::vector<int> idx(dims(), 0);
    for (std::size_t lin = 0; lin < size(); ++lin) {
        for (int k = 0; k < dims(); ++k) ps.coords[lin * dims() + k] = axis_coords_[k][idx[k]];
        for (int k = dims() - 1; k >= 0; --k) {
            if (++idx[k] < shape_[k]) break;
            idx[k] = 0;
        }
    }
    return ps;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

StructuredMesh load_mesh_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset: " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() < 2) throw std::runtime_error("dataset header needs at least one coordinate column and y");
    const int dims = static_cast<int>(header.size()) - 1;

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("row " + std::to_string(lineno) + ": expected " +
                                     std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_double(cells[c], row[c]))
                throw std::runtime_error("row " + std::to_string(lineno) + ": cell '" + cells[c] +
                                         "' is not a number");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("dataset has no data rows: " + path.string());

    std::vector<std::vector<double>> axis_coords(dims);
    {
        std::vector<std::map<double, int>> uniq(dims);
        for (const auto& r : rows)
            for (int k = 0; k < dims; ++k) uniq[k].emplace(r[k], 0);
        for (int k = 0; k < dims; ++k) {
            int i = 0;
            for (auto& [coord, index] : uniq[k]) {
                index = i++;
                axis_coords[k].push_back(coord);
            }
        }
        std::size_t total = 1;
        for (int k = 0; k < dims; ++k) total *= axis_coords[k].size();
        if (rows.size() > total) {
            // more rows than grid nodes: some point must repeat
        }
        std::vector<double> values(total, 0.0);
        std::vector<std::uint8_t> seen(total, 0);
        std::vector<std::size_t> strides(dims, 1);
        for (int k = dims - 2; k >= 0; --k) strides[k] = strides[k + 1] * axis_coords[k + 1].size();
        for (const auto& r : rows) {
            std::size_t lin = 0;
            for (int k = 0; k < dims; ++k) lin += static_cast<std::size_t>(uniq[k].at(r[k])) * strides[k];
            if (seen[lin]) {
                std::string at;
                for (int k = 0; k < dims; ++k) at += (k ? "," : "(") + format_double(r[k]);
                throw std::runtime_error("duplicate grid point " + at + ")");
            }
            seen[lin] = 1;
            values[lin] = r[dims];
        }
        for (std::size_t lin = 0; lin < total; ++lin) {
            if (!seen[lin]) {
                std::string at;
                std::size_t rem = lin;
                for (int k = 0; k < dims; ++k) {
                    const std::size_t i = rem / strides[k];
                    rem %= strides[k];
                    at += (k ? "," : "(") + format_double(axis_coords[k][i]);
                }
                throw std::runtime_error("missing grid point " + at +
                                         "): rows do not form a complete tensor product");
            }
        }
        return StructuredMesh(std::move(axis_coords), std::move(values));
    }
}

void write_mesh_csv(const StructuredMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset: " + path.string());
    for (int k = 0; k < mesh.dims(); ++k) out << "x" << (k + 1) << ",";
    out << "y\n";
    std::vector<int> idx(mesh.dims(), 0);
    for (std::size_t lin = 0; lin < mesh.size(); ++lin) {
        for (int k = 0; k < mesh.dims(); ++k) out << format_double(mesh.axis_coords(k)[idx[k]]) << ",";
        out << format_double(mesh.values()[lin]) << "\n";
        for (int k = mesh.dims() - 1; k >= 0; --k) {
            if (++idx[k] < mesh.shape()[k]) break;
            idx[k] = 0;
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::pair<StructuredMesh, NormalizationRecord> normalize_mesh(const StructuredMesh& mesh, double value_floor) {
    if (!(value_floor > 0.0) || value_floor >= 1.0)
        throw validation_error("value_floor must be in (0, 1)");
    NormalizationRecord rec;
    rec.value_floor = value_floor;

    std::vector<std::vector<double>> coords(mesh.dims());
    for (int k = 0; k < mesh.dims(); ++k) {
        const auto& raw = mesh.axis_coords(k);
        rec.raw_axis_coords.push_back(raw);
        NormalizationRecord::Affine map;
        if (raw.size() > 1) {
            map.scale = (static_cast<double>(raw.size()) - 1.0) / (raw.back() - raw.front());
            map.shift = -raw.front() * map.scale;
        }
        rec.axis_maps.push_back(map);
        coords[k].resize(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) coords[k][i] = static_cast<double>(i);
    }

    const auto& v = mesh.values();
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> nv(v.size());
    if (hi > lo) {
        rec.value_map.scale = (1.0 - value_floor) / (hi - lo);
        rec.value_map.shift = value_floor - lo * rec.value_map.scale;
        for (std::size_t i = 0; i < v.size(); ++i) nv[i] = rec.value_map.apply(v[i]);
    } else {
        rec.degenerate_values = true;
        rec.value_map.scale = 1.0;
        const double mid = value_floor + 0.5 * (1.0 - value_floor);
        rec.value_map.shift = mid - lo;
        for (auto& x : nv) x = mid;
    }
    return {StructuredMesh(std::move(coords), std::move(nv)), rec};
}

StaggeredMesh build_staggered_mesh(const StructuredMesh& mesh) {
    const int d = mesh.dims();
    StaggeredMesh stag;
    stag.shape.resize(d);
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) {
        if (mesh.shape()[k] < 2)
            throw validation_error("no cells along axis " + std::to_string(k + 1));
        stag.shape[k] = mesh.shape()[k] - 1;
        total *= static_cast<std::size_t>(stag.shape[k]);
    }
    std::vector<std::vector<double>> mids(d);
    for (int k = 0; k < d; ++k) {
        const auto& c = mesh.axis_coords(k);
        mids[k].resize(stag.shape[k]);
        for (int i = 0; i < stag.shape[k]; ++i) mids[k][i] = 0.5 * (c[i] + c[i + 1]);
    }
    stag.points.dim = d;
    stag.points.coords.resize(total * static_cast<std::size_t>(d));
    std::vector<int> idx(d, 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
        for (int k = 0; k < d; ++k) stag.points.coords[lin * d + k] = mids[k][idx[k]];
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[k] < stag.shape[k]) break;
            idx[k] = 0;
        }
    }
    return stag;
}

std::vector<int> interior_shape(const StructuredMesh& mesh) {
    std::vector<int> s(mesh.dims());
    for (int k = 0; k < mesh.dims(); ++k) s[k] = std::max(0, mesh.shape()[k] - 2);
    return s;
}

std::size_t interior_count(const StructuredMesh& mesh) {
    std::size_t total = 1;
    for (int e : interior_shape(mesh)) total *= static_cast<std::size_t>(e);
    return total;
}

std::vector<std::vector<int>> interior_multi_indices(const StructuredMesh& mesh) {
    std::vector<std::vector<int>> out;
    const auto ishape = interior_shape(mesh);
    const std::size_t total = interior_count(mesh);
    if (total == 0 || *std::min_element(ishape.begin(), ishape.end()) == 0) return out;
    out.reserve(total);
    std::vector<int> idx(mesh.dims(), 1);
    for (std::size_t lin = 0; lin < total; ++lin) {
        out.push_back(idx);
        for (int k = mesh.dims() - 1; k >= 0; --k) {
            if (++idx[k] <= ishape[k]) break;
            idx[k] = 1;
        }
    }
    return out;
}

}  // namespace gpmesh
