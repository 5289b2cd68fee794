#pragma once

#include <span>
#include <vector>

#include "gpmesh/gpr.hpp"
#include "gpmesh/mesh.hpp"

namespace gpmesh {

struct SensorOptions {
    double spacing = 1.0;          // Delta; normalized meshes have unit spacing
    bool appendix_scaling = false; // divide both sensors by an extra factor of 3
};

/// Diffusion sensor over the interior nodes: one tensor per centre-crossing
/// diagonal plus their sum. All entries are finite and non-negative.
struct SensorField {
    std::vector<int> interior_shape;           // n_i - 2
    std::vector<Diagonal> diagonals;
    std::vector<std::vector<double>> per_diagonal;  // row-major over interior nodes
    std::vector<double> total;                      // fixed-order sum over diagonals

    std::size_t node_count() const { return total.size(); }
};

/// 1-d true-label sensor (3-point stencil) over interior points.
std::vector<double> sensor_1d_true(std::span<const double> values, double spacing,
                                   const SensorOptions& opts = {});

/// 1-d staggered sensor (half-index stencil); pred_stag holds the midpoint
/// predictions, one fewer than pred_orig.
std::vector<double> sensor_1d_staggered(std::span<const double> pred_orig,
                                        std::span<const double> pred_stag, double spacing,
                                        const SensorOptions& opts = {});

/// True-label sensor on the training mesh, per diagonal and summed.
SensorField sensor_true_md(const StructuredMesh& mesh, const SensorOptions& opts = {});

/// Staggered sensor from predictions at the original nodes (shape n_i) and at
/// the cell centroids (shape n_i - 1).
SensorField sensor_staggered_md(std::span<const double> mesh_preds, std::span<const int> shape,
                                std::span<const double> stag_preds, const SensorOptions& opts = {});

/// The `count` diagonals with the highest mean sensor value, ties broken by
/// enumeration order.
std::vector<Diagonal> select_top_diagonals(const SensorField& field, int count);

/// Same field restricted to a diagonal subset, with the total recomputed.
SensorField restrict_diagonals(const SensorField& field, const std::vector<Diagonal>& keep);

struct LossReport {
    double rmse_training = 0.0;
    double rmse_diffusion = 0.0;
    double beta1 = 1.0;
    double beta2 = 1.0;
    double total = 0.0;  // beta1*rmse_training + beta2*rmse_diffusion
};

/// Composite loss from precomputed predictions. `true_label` must come from
/// the training values, not from predictions.
LossReport diffusion_loss_from_predictions(std::span<const double> preds_orig,
                                           std::span<const double> preds_stag,
                                           const StructuredMesh& mesh,
                                           const SensorField& true_label, double beta1,
                                           double beta2,
                                           const std::vector<Diagonal>* selected = nullptr,
                                           const SensorOptions& opts = {});

/// Composite loss of a fitted model on a mesh and its staggered counterpart.
LossReport diffusion_loss(const GPModel& model, const StructuredMesh& mesh,
                          const StaggeredMesh& stag, const SensorField& true_label, double beta1,
                          double beta2, const std::vector<Diagonal>* selected = nullptr,
                          const SensorOptions& opts = {});

namespace ref {

/// Naive loop implementations used as the oracle in tests and as the serial
/// side of the benchmark. They walk multi-indices directly instead of the
/// linearized-offset traversal above.
SensorField sensor_true_md(const StructuredMesh& mesh, const SensorOptions& opts = {});
SensorField sensor_staggered_md(std::span<const double> mesh_preds, std::span<const int> shape,
                                std::span<const double> stag_preds, const SensorOptions& opts = {});

}  // namespace ref

}  // namespace gpmesh
