#pragma once

#include <span>
#include <vector>

#include "gpmesh/kernels.hpp"
#include "gpmesh/linalg.hpp"

namespace gpmesh {

/// The three pieces of the log marginal likelihood; total is their sum.
struct LmlTerms {
    double data_fit = 0.0;        // -1/2 y^T K^{-1} y
    double complexity = 0.0;      // -1/2 log |K|
    double normalization = 0.0;   // -(n/2) log 2 pi
    double total = 0.0;
};

/// Fitted noiseless GP posterior: training data, kernel matrix, its Cholesky
/// factor at the effective jitter, and the precomputed weights K^{-1} y.
/// Immutable after fit; predictions may run concurrently.
struct GPModel {
    PointSet train_points;
    std::vector<double> train_values;
    KernelSpec spec;
    double noise = 0.0;            // jitter requested at fit time
    double effective_noise = 0.0;  // jitter actually used after escalation
    int jitter_escalations = 0;
    Matrix kernel;  // K(X, X) without jitter
    Matrix chol;    // lower factor of K + effective_noise * I
    std::vector<double> weights;
};

/// Exact GP fit via Cholesky of K + noise*I. Throws factorization_error with
/// the failing pivot when the matrix is not positive definite at this jitter.
GPModel fit(const PointSet& points, std::span<const double> values, const KernelSpec& spec,
            double noise);

/// fit() with automatic x10 jitter escalation up to max_noise; each escalation
/// is counted on the returned model.
GPModel fit_with_jitter_escalation(const PointSet& points, std::span<const double> values,
                                   const KernelSpec& spec, double noise, double max_noise = 1e-6);

/// Posterior mean at the query points.
std::vector<double> predict_mean(const GPModel& model, const PointSet& queries);

/// Posterior mean at the training points, reusing the stored kernel matrix.
std::vector<double> predict_at_train(const GPModel& model);

struct VarResult {
    std::vector<double> variance;
    int clamp_count = 0;      // negative variances clamped to zero
    double max_clamp = 0.0;   // largest magnitude clamped away
};

/// Pointwise posterior variance (diagonal only), clamped at zero from below.
VarResult predict_var(const GPModel& model, const PointSet& queries);

/// Log marginal likelihood of the fitted model, by Cholesky.
LmlTerms log_marginal_likelihood(const GPModel& model);

/// Analytic LML gradient with respect to the packed log hyperparameters.
std::vector<double> lml_gradient(const GPModel& model);

}  // namespace gpmesh
