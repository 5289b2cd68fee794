#include "gpmesh/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gpmesh/errors.hpp"

namespace gpmesh {

GPModel fit(const PointSet& points, std::span<const double> values, const KernelSpec& spec,
            double noise) {
    spec.validate();
    if (points.size() < 1) throw validation_error("fit: need at least one training point");
    if (static_cast<int>(values.size()) != points.size())
        throw validation_error("fit: point/value count mismatch");
    if (noise < 0.0) throw validation_error("fit: noise must be non-negative");
    for (double v : values)
        if (!std::isfinite(v)) throw validation_error("fit: training values must be finite");

    GPModel model;
    model.train_points = points;
    model.train_values.assign(values.begin(), values.end());
    model.spec = spec;
    model.noise = noise;
    model.effective_noise = noise;
    model.kernel = kernel_matrix_sym(spec, points);
    model.chol = model.kernel;
    for (int i = 0; i < model.chol.rows; ++i) model.chol(i, i) += noise;
    cholesky_factor(model.chol);
    model.weights = chol_solve(model.chol, model.train_values);
    return model;
}

GPModel fit_with_jitter_escalation(const PointSet& points, std::span<const double> values,
                                   const KernelSpec& spec, double noise, double max_noise) {
    double jitter = noise;
    int escalations = 0;
    for (;;) {
        try {
            GPModel model = fit(points, values, spec, jitter);
            model.noise = noise;
            model.effective_noise = jitter;
            model.jitter_escalations = escalations;
            return model;
        } catch (const factorization_error&) {
            if (jitter >= max_noise) throw;
            jitter = jitter == 0.0 ? 1e-12 : std::min(jitter * 10.0, max_noise);
            ++escalations;
        }
    }
}

std::vector<double> predict_mean(const GPModel& model, const PointSet& queries) {
    const Matrix cross = kernel_matrix(model.spec, queries, model.train_points);
    return matvec(cross, model.weights);
}

std::vector<double> predict_at_train(const GPModel& model) {
    return matvec(model.kernel, model.weights);
}

VarResult predict_var(const GPModel& model, const PointSet& queries) {
    const Matrix cross = kernel_matrix(model.spec, queries, model.train_points);
    const int m = queries.size(), n = model.train_points.size();
    VarResult out;
    out.variance.resize(m);
    std::vector<double> clamped(m, 0.0);
    const double prior = model.spec.params.sigma * model.spec.params.sigma;
#pragma omp parallel for schedule(static) if (m > 8)
    for (int i = 0; i < m; ++i) {
        std::vector<double> v(cross.row(i), cross.row(i) + n);
        solve_lower_inplace(model.chol, v);
        double s = prior;
        for (int t = 0; t < n; ++t) s -= v[t] * v[t];
        if (s < 0.0) {
            clamped[i] = -s;
            s = 0.0;
        }
        out.variance[i] = s;
    }
    for (int i = 0; i < m; ++i) {
        if (clamped[i] > 0.0) {
            ++out.clamp_count;
            out.max_clamp = std::max(out.max_clamp, clamped[i]);
        }
    }
    return out;
}

LmlTerms log_marginal_likelihood(const GPModel& model) {
    const int n = static_cast<int>(model.train_values.size());
    LmlTerms terms;
    double fit = 0.0;
    for (int i = 0; i < n; ++i) fit += model.train_values[i] * model.weights[i];
    terms.data_fit = -0.5 * fit;
    double logdet_half = 0.0;
    for (int i = 0; i < n; ++i) logdet_half += std::log(model.chol(i, i));
    terms.complexity = -logdet_half;
    terms.normalization = -0.5 * n * std::log(2.0 * std::numbers::pi);
    terms.total = terms.data_fit + terms.complexity + terms.normalization;
    return terms;
}

std::vector<double> lml_gradient(const GPModel& model) {
    const KernelSpec& spec = model.spec;
    const int p = spec.trainable_count();
    if (p == 0) return {};
    const int n = model.train_points.size();
    const int d = model.train_points.dim;
    const Matrix kinv = spd_inverse_from_chol(model.chol);
    const auto& w = model.weights;
    const auto& lam = spec.params.lengthscales;
    const bool se = spec.kind == KernelKind::SquaredExponential;
    const double alpha = se ? 0.0 : *spec.params.alpha;

    const int nlam = spec.train_lengthscales ? (spec.tied_lengthscales ? 1 : d) : 0;
    int slot_alpha = -1, slot_sigma = -1, at = nlam;
    if (!se && spec.train_alpha) slot_alpha = at++;
    if (spec.train_sigma) slot_sigma = at++;

    // Per-row partial sums, reduced serially afterwards so the result does not
    // depend on the thread count.
    Matrix partial(n, p);
#pragma omp parallel for schedule(static) if (n > 64)
    for (int i = 0; i < n; ++i) {
        const double* xi = model.train_points.coords.data() + static_cast<std::size_t>(i) * d;
        const double* k0 = model.kernel.row(i);
        const double* ki = kinv.row(i);
        double* out = partial.row(i);
        for (int l = 0; l < n; ++l) {
            const double* xl = model.train_points.coords.data() + static_cast<std::size_t>(l) * d;
            const double a = w[i] * w[l] - ki[l];
            const double k0v = k0[l];
            if (se) {
                if (spec.train_lengthscales) {
                    const double base = 0.5 * a * k0v;
                    if (spec.tied_lengthscales) {
                        double s = 0.0;
                        for (int k = 0; k < d; ++k) {
                            const double z = (xi[k] - xl[k]) / lam[k];
                            s += z * z;
                        }
                        out[0] += base * s;
                    } else {
                        for (int k = 0; k < d; ++k) {
                            const double z = (xi[k] - xl[k]) / lam[k];
                            out[k] += base * z * z;
                        }
                    }
                }
                if (slot_sigma >= 0) out[slot_sigma] += a * k0v;  // 0.5 * a * 2K
            } else {
                double u = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double dx = xi[k] - xl[k];
                    u += dx * dx / (2.0 * alpha * lam[k] * lam[k]);
                }
                const double one_u = 1.0 + u;
                if (spec.train_lengthscales) {
                    const double base = 0.5 * a * k0v / one_u;
                    if (spec.tied_lengthscales) {
                        double s = 0.0;
                        for (int k = 0; k < d; ++k) {
                            const double z = (xi[k] - xl[k]) / lam[k];
                            s += z * z;
                        }
                        out[0] += base * s;
                    } else {
                        for (int k = 0; k < d; ++k) {
                            const double z = (xi[k] - xl[k]) / lam[k];
                            out[k] += base * z * z;
                        }
                    }
                }
                if (slot_alpha >= 0)
                    out[slot_alpha] += 0.5 * a * k0v * alpha * (u / one_u - std::log(one_u));
                if (slot_sigma >= 0) out[slot_sigma] += a * k0v;
            }
        }
    }
    std::vector<double> grad(p, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) grad[j] += partial(i, j);
    return grad;
}

}  // namespace gpmesh
