#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gpmesh/linalg.hpp"

namespace gpmesh {

/// A centre-crossing diagonal: one offset (+1 or -1) per axis, first entry
/// fixed to +1 so that no enumerated diagonal is the negation of another.
struct Diagonal {
    std::vector<int> offsets;

    bool operator==(const Diagonal& other) const { return offsets == other.offsets; }
    std::string label() const;  // e.g. "+1+1-1"
};

/// All 2^(d-1) centre-crossing diagonals of dimension d, lexicographic
/// (+1 before -1).
std::vector<Diagonal> enumerate_diagonals(int dims);

/// Affine maps taking raw data to normalized data, with enough information
/// to invert exactly even when the raw spacing is non-uniform.
struct NormalizationRecord {
    struct Affine {
        double scale = 1.0;
        double shift = 0.0;
        double apply(double raw) const { return scale * raw + shift; }
        double invert(double normalized) const { return (normalized - shift) / scale; }
    };

    std::vector<Affine> axis_maps;                     // raw coord -> index, fitted to endpoints
    std::vector<std::vector<double>> raw_axis_coords;  // kept for exact inversion
    Affine value_map;
    double value_floor = 0.05;
    bool degenerate_values = false;  // raw value field was constant

    double denormalize_value(double v) const { return value_map.invert(v); }
    double normalize_axis(int axis, double raw) const { return axis_maps[axis].apply(raw); }
    /// Exact inverse of the index mapping at grid nodes; affine between them.
    double denormalize_axis(int axis, double normalized) const;
};

/// d-dimensional tensor-product grid with a value per node. Values are stored
/// row-major with axis 0 slowest. Immutable after construction.
class StructuredMesh {
public:
    StructuredMesh(std::vector<std::vector<double>> axis_coords, std::vector<double> values);

    int dims() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    const std::vector<double>& axis_coords(int axis) const { return axis_coords_[axis]; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<std::size_t>& strides() const { return strides_; }

    std::size_t linear_index(std::span<const int> idx) const;
    /// All node coordinates as a point set, in value order.
    PointSet points() const;

private:
    std::vector<int> shape_;
    std::vector<std::vector<double>> axis_coords_;
    std::vector<double> values_;
    std::vector<std::size_t> strides_;
};

/// Cell-centroid point set of a mesh; shape is (n_i - 1) per axis.
struct StaggeredMesh {
    std::vector<int> shape;
    PointSet points;  // centroids, row-major over the staggered shape
    std::optional<std::vector<double>> predictions;

    std::size_t size() const { return points.size(); }
};

/// Load a mesh from CSV with header x1,...,xd,y. Row order is free; the rows
/// must form a complete tensor product of the unique per-axis coordinates.
StructuredMesh load_mesh_csv(const std::filesystem::path& path);

/// Write a mesh in the same CSV format, rows in row-major index order.
void write_mesh_csv(const StructuredMesh& mesh, const std::filesystem::path& path);

/// Replace axis coordinates by indices 0..n_i-1 and affinely map values into
/// [value_floor, 1]. A constant value field maps to the midpoint of that
/// range and sets the degenerate flag.
std::pair<StructuredMesh, NormalizationRecord> normalize_mesh(const StructuredMesh& mesh,
                                                              double value_floor = 0.05);

/// Cell-centroid staggered mesh; every axis needs at least 2 points.
StaggeredMesh build_staggered_mesh(const StructuredMesh& mesh);

/// Multi-indices 1 <= i_k <= n_k-2, lexicographic. Empty when any axis has
/// fewer than 3 points.
std::vector<std::vector<int>> interior_multi_indices(const StructuredMesh& mesh);

/// Interior extents (n_i - 2, clamped at 0) and their node count.
std::vector<int> interior_shape(const StructuredMesh& mesh);
std::size_t interior_count(const StructuredMesh& mesh);

}  // namespace gpmesh
