#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpmesh/diffusion.hpp"
#include "gpmesh/gpr.hpp"
#include "gpmesh/mesh.hpp"
#include "gpmesh/optimize.hpp"

namespace gpmesh {

/// Closed-form generator behind a synthetic dataset; kept alongside the data
/// so the ground truth stays evaluable off-mesh.
struct SyntheticSpec {
    std::vector<int> shape;
    std::uint64_t seed = 0;
    // front steepness/centre along axes 1 and 2, thickness modulation along
    // axis 3, and the bump near the axis-1 maximum
    double a1 = 0, c1 = 0, a2 = 0, c2 = 0, w3 = 0;
    double bump_amp = 0, bump_centre = 0, bump_width = 0;
    double value_scale = 1.0, value_shift = 0.0;  // affine into (0, 1]
    std::vector<std::vector<double>> axis_coords;

    /// Ground-truth value at a raw-coordinate point.
    double evaluate(std::span<const double> raw_point) const;
};

/// Smooth positive field with a fast front along axis 1, a sharper one along
/// axis 2 combining at one corner, axis-3 modulation, and a mild bump near
/// the axis-1 maximum. Deterministic in the seed; values end up in (0, 1].
std::pair<StructuredMesh, SyntheticSpec> generate_synthetic_dataset(std::span<const int> shape,
                                                                    std::uint64_t seed);

enum class TrainMethod { Lml, Diffusion };
std::string train_method_name(TrainMethod method);
TrainMethod train_method_from_name(const std::string& name);

struct DatasetSpec {
    std::string path;           // CSV dataset, or
    bool synthetic = false;     // generate in-process
    std::vector<int> shape{19, 15, 5};
    std::uint64_t seed = 7;
};

struct SliceSpec {
    std::map<int, double> fixed;  // 0-based axis -> raw coordinate
    int dense_factor = 8;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    std::vector<KernelKind> kernels{KernelKind::SquaredExponential};
    std::vector<double> lengthscale_inits{0.01, 0.1, 0.5, 1.0, 5.0, 10.0};
    std::vector<double> alpha_inits{0.005, 0.05, 0.5, 5.0, 10.0, 50.0};
    double sigma = 0.15;
    bool train_sigma = false;
    bool tied_lengthscales = false;
    double noise = 1e-10;
    std::vector<TrainMethod> methods{TrainMethod::Lml, TrainMethod::Diffusion};
    double beta1 = 1.0;
    double beta2 = 1.0;
    double value_floor = 0.05;
    bool appendix_scaling = false;
    int top_diagonals = 0;  // 0 keeps the full diagonal set
    OptimizerConfig quasi_newton{OptMethod::QuasiNewton, 500, 3.0, 1e-8, 1e-10, {}, {}};
    OptimizerConfig dfo{OptMethod::Dfo, 2000, 3.0, 1e-8, 1e-10, {}, {}};
    double dfo_lower_bound = 1e-6;
    SliceSpec slice;
    std::string output_dir = "results";
    int jobs = 1;
    bool include_timings = true;

    void validate() const;
};

/// One planned grid entry.
struct RunPlan {
    KernelKind kernel = KernelKind::SquaredExponential;
    TrainMethod method = TrainMethod::Lml;
    double lengthscale_init = 1.0;
    std::optional<double> alpha_init;
    std::string run_id;
};

/// Cartesian product kernel x init x method, in deterministic order.
std::vector<RunPlan> plan_runs(const ExperimentConfig& config);

struct RunResult {
    RunPlan plan;
    KernelSpec initial_spec;
    KernelSpec final_spec;
    LmlTerms final_lml;
    LossReport final_loss;
    OptStatus opt_status = OptStatus::MaxEvals;
    std::string opt_message;
    int evals = 0;
    int jitter_escalations = 0;  // escalations needed at the final refit
    double wall_seconds = 0.0;
    std::string status;  // "ok", "aborted" or "failed: ..."
    ConvergenceHistory history;
    // rmse components per evaluation, aligned with history (nan when a method
    // does not produce them per evaluation)
    std::vector<std::pair<double, double>> history_components;
};

/// Inputs shared by every run of a grid: the normalized mesh, its staggered
/// counterpart and the precomputed true label. Immutable during execution.
struct TrainingInputs {
    StructuredMesh mesh;
    NormalizationRecord normalization;
    StaggeredMesh staggered;
    SensorField true_label;
    std::vector<Diagonal> selected_diagonals;  // empty = all
    SensorOptions sensor_options;

    const std::vector<Diagonal>* selection() const {
        return selected_diagonals.empty() ? nullptr : &selected_diagonals;
    }
};

/// Normalize a raw mesh and precompute everything the training loops share.
TrainingInputs prepare_training_inputs(const StructuredMesh& raw_mesh,
                                       const ExperimentConfig& config);

/// Train by minimizing the negative log marginal likelihood with the
/// quasi-Newton path; the final diffusion loss is recorded for comparison.
RunResult run_lml_training(const TrainingInputs& inputs, const KernelSpec& init_spec,
                           const ExperimentConfig& config);

/// Train by minimizing the composite diffusion loss with the derivative-free
/// path; the final LML is recorded too.
RunResult run_diffusion_training(const TrainingInputs& inputs, const KernelSpec& init_spec,
                                 const ExperimentConfig& config);

/// Initial kernel spec for a planned run (scalar inits broadcast per axis).
KernelSpec initial_spec_for(const RunPlan& plan, int dims, const ExperimentConfig& config);

/// Execute one planned run.
RunResult execute_run(const RunPlan& plan, const TrainingInputs& inputs,
                      const ExperimentConfig& config);

/// Execute the whole grid with up to config.jobs concurrent runs. Results come
/// back in plan order regardless of scheduling; on_result fires as runs finish
/// (serialized).
std::vector<RunResult> run_grid(const TrainingInputs& inputs, const ExperimentConfig& config,
                                const std::function<void(const RunResult&)>& on_result = {});

/// Dense 1-d sweep of the posterior along one axis, everything else fixed.
struct SliceTable {
    int free_axis = 0;
    struct Row {
        double coord = 0.0;      // raw units
        double mean = 0.0;       // raw units
        double variance = 0.0;   // raw units squared
        double train_value = 0.0;  // nan when the row is not a training node
    };
    std::vector<Row> rows;
};

SliceTable slice_predictions(const GPModel& model, const StructuredMesh& raw_mesh,
                             const NormalizationRecord& record,
                             const std::map<int, double>& fixed_raw, int dense_factor);

/// Oscillation of a sampled curve: sign alternations of its discrete second
/// differences above a noise floor.
int count_curvature_sign_changes(std::span<const double> values, double eps = 0.0);

}  // namespace gpmesh
