#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gpmesh {

enum class OptMethod { QuasiNewton, Dfo };

struct OptimizerConfig {
    OptMethod method = OptMethod::Dfo;
    int max_evals = 2000;
    double initial_radius = 3.0;  // derivative-free trust region start
    double tol_obj = 1e-8;
    double tol_step = 1e-10;
    std::vector<double> lower_bounds;  // empty = unbounded
    std::vector<double> upper_bounds;

    void validate(int dims) const;
};

struct EvalRecord {
    int index = 0;                // evaluation order, also the timestamp index
    std::vector<double> params;
    double value = 0.0;
    bool accepted = false;        // improved the best-so-far objective
};

struct ConvergenceHistory {
    std::vector<EvalRecord> evals;
};

enum class OptStatus {
    Converged,       // gradient / predicted-reduction tolerance reached
    StepConverged,   // step or trust-region radius below tol_step
    MaxEvals,
    Aborted,         // non-finite objective on the gradient path
};

std::string opt_status_name(OptStatus status);

struct OptResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    OptStatus status = OptStatus::MaxEvals;
    std::string message;
    ConvergenceHistory history;
};

/// Objective for the gradient path. grad_out is null when only the value is
/// needed (line search); otherwise it must be filled with the gradient.
using GradObjective = std::function<double(std::span<const double> x, std::vector<double>* grad_out)>;

/// Value-only objective for the derivative-free path. Non-finite values are
/// treated as rejected trial points.
using ValueObjective = std::function<double(std::span<const double> x)>;

/// Limited-memory BFGS with projected line search on box bounds.
OptResult minimize_quasi_newton(const GradObjective& objective, std::span<const double> x0,
                                const OptimizerConfig& config);

/// Derivative-free trust-region method with full quadratic interpolation
/// models and bound constraints. Deterministic given x0 and config.
OptResult minimize_dfo(const ValueObjective& objective, std::span<const double> x0,
                       const OptimizerConfig& config);

}  // namespace gpmesh
