#include "gpmesh/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "gpmesh/errors.hpp"
#include "gpmesh/io.hpp"

namespace gpmesh {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Uniform in [0, 1) from the raw generator output; bit-stable across
// platforms, unlike std::uniform_real_distribution.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double SyntheticSpec::evaluate(std::span<const double> raw_point) const {
    const int d = static_cast<int>(shape.size());
    std::vector<double> u(d, 0.5);
    for (int k = 0; k < d; ++k) {
        const auto& c = axis_coords[k];
        u[k] = c.size() > 1 ? (raw_point[k] - c.front()) / (c.back() - c.front()) : 0.5;
    }
    const double u1 = u[0];
    const double u2 = d > 1 ? u[1] : 0.5;
    const double u3 = d > 2 ? u[2] : 0.5;
    const double s1 = sigmoid(a1 * (u1 - c1));
    const double s2 = sigmoid(a2 * (u2 - c2));
    double f = 0.15 + 0.45 * s1 + 0.35 * s1 * s2 + 0.20 * s2;
    f *= 1.0 + w3 * (u3 - 0.5) * (0.5 + 0.5 * s1);
    const double b = (u1 - bump_centre) / bump_width;
    f += bump_amp * std::exp(-b * b) * (0.3 + 0.4 * u2);
    for (int k = 3; k < d; ++k) f *= 1.0 + 0.1 * (u[k] - 0.5);
    return value_scale * f + value_shift;
}

std::pair<StructuredMesh, SyntheticSpec> generate_synthetic_dataset(std::span<const int> shape,
                                                                    std::uint64_t seed) {
    if (shape.empty()) throw validation_error("synthetic dataset needs at least one axis");
    for (int n : shape)
        if (n < 2) throw validation_error("synthetic dataset needs at least 2 points per axis");

    SyntheticSpec spec;
    spec.shape.assign(shape.begin(), shape.end());
    spec.seed = seed;
    std::mt19937_64 rng(seed);
    spec.a1 = 12.0 + 3.0 * next_uniform(rng);
    spec.c1 = 0.62 + 0.06 * next_uniform(rng);
    spec.a2 = 60.0 + 12.0 * next_uniform(rng);
    spec.c2 = 0.72 + 0.06 * next_uniform(rng);
    spec.w3 = 0.25 + 0.10 * next_uniform(rng);
    spec.bump_amp = 0.10 + 0.04 * next_uniform(rng);
    spec.bump_centre = 0.93 + 0.03 * next_uniform(rng);
    spec.bump_width = 0.07 + 0.02 * next_uniform(rng);

    const int d = static_cast<int>(shape.size());
    spec.axis_coords.resize(d);
    for (int k = 0; k < d; ++k) {
        spec.axis_coords[k].resize(shape[k]);
        for (int i = 0; i < shape[k]; ++i) {
            // axes 1 and 2 carry index-like coordinates, later axes sit in [0, 1]
            spec.axis_coords[k][i] =
                k < 2 ? static_cast<double>(i)
                      : static_cast<double>(i) / static_cast<double>(shape[k] - 1);
        }
    }

    std::size_t total = 1;
    for (int n : shape) total *= static_cast<std::size_t>(n);
    std::vector<double> values(total);
    std::vector<int> idx(d, 0);
    std::vector<double> pt(d);
    for (std::size_t lin = 0; lin < total; ++lin) {
        for (int k = 0; k < d; ++k) pt[k] = spec.axis_coords[k][idx[k]];
        values[lin] = spec.evaluate(pt);
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    spec.value_scale = 0.9 / (hi - lo);
    spec.value_shift = 0.1 - lo * spec.value_scale;
    for (auto& v : values) v = spec.value_scale * v + spec.value_shift;
    return {StructuredMesh(spec.axis_coords, std::move(values)), spec};
}

std::string train_method_name(TrainMethod method) {
    return method == TrainMethod::Lml ? "LML" : "DIFFUSION";
}

TrainMethod train_method_from_name(const std::string& name) {
    if (name == "LML") return TrainMethod::Lml;
    if (name == "DIFFUSION") return TrainMethod::Diffusion;
    throw validation_error("unknown training method \"" + name + "\" (expected LML or DIFFUSION)");
}

void ExperimentConfig::validate() const {
    if (!(sigma > 0.0)) throw validation_error("sigma must be positive");
    if (noise < 0.0) throw validation_error("noise must be non-negative");
    if (!(value_floor > 0.0) || value_floor >= 1.0)
        throw validation_error("value_floor must be in (0, 1)");
    if (beta1 < 0.0 || beta2 < 0.0) throw validation_error("betas must be non-negative");
    if (kernels.empty()) throw validation_error("at least one kernel is required");
    if (lengthscale_inits.empty()) throw validation_error("at least one lengthscale init is required");
    for (double v : lengthscale_inits)
        if (!(v > 0.0)) throw validation_error("lengthscale inits must be positive");
    const bool has_rq = std::find(kernels.begin(), kernels.end(),
                                  KernelKind::RationalQuadratic) != kernels.end();
    if (has_rq && alpha_inits.empty())
        throw validation_error("alpha inits are required for the RQ kernel");
    for (double v : alpha_inits)
        if (!(v > 0.0)) throw validation_error("alpha inits must be positive");
    if (jobs < 1) throw validation_error("jobs must be >= 1");
    if (top_diagonals < 0) throw validation_error("top_diagonals must be >= 0");
    if (slice.dense_factor < 1) throw validation_error("slice dense_factor must be >= 1");
    if (!(dfo_lower_bound > 0.0)) throw validation_error("dfo_lower_bound must be positive");
}

namespace {

std::string run_id_for(const RunPlan& plan) {
    std::string id = plan.kernel == KernelKind::SquaredExponential ? "se" : "rq";
    id += plan.method == TrainMethod::Lml ? "_lml" : "_diffusion";
    id += "_l" + format_double(plan.lengthscale_init);
    if (plan.alpha_init) id += "_a" + format_double(*plan.alpha_init);
    return id;
}

}  // namespace

std::vector<RunPlan> plan_runs(const ExperimentConfig& config) {
    config.validate();
    std::vector<RunPlan> plans;
    for (KernelKind kernel : config.kernels) {
        for (TrainMethod method : config.methods) {
            for (double linit : config.lengthscale_inits) {
                if (kernel == KernelKind::RationalQuadratic) {
                    for (double ainit : config.alpha_inits) {
                        RunPlan plan{kernel, method, linit, ainit, ""};
                        plan.run_id = run_id_for(plan);
                        plans.push_back(std::move(plan));
                    }
                } else {
                    RunPlan plan{kernel, method, linit, std::nullopt, ""};
                    plan.run_id = run_id_for(plan);
                    plans.push_back(std::move(plan));
                }
            }
        }
    }
    return plans;
}

KernelSpec initial_spec_for(const RunPlan& plan, int dims, const ExperimentConfig& config) {
    KernelSpec spec;
    spec.kind = plan.kernel;
    spec.params.sigma = config.sigma;
    spec.params.lengthscales.assign(dims, plan.lengthscale_init);
    if (plan.kernel == KernelKind::RationalQuadratic) spec.params.alpha = plan.alpha_init;
    spec.train_sigma = config.train_sigma;
    spec.tied_lengthscales = config.tied_lengthscales;
    spec.validate();
    return spec;
}

TrainingInputs prepare_training_inputs(const StructuredMesh& raw_mesh,
                                       const ExperimentConfig& config) {
    auto [mesh, record] = normalize_mesh(raw_mesh, config.value_floor);
    SensorOptions opts;
    opts.appendix_scaling = config.appendix_scaling;
    SensorField label = sensor_true_md(mesh, opts);
    std::vector<Diagonal> selected;
    if (config.top_diagonals > 0 &&
        config.top_diagonals < static_cast<int>(label.diagonals.size()))
        selected = select_top_diagonals(label, config.top_diagonals);
    StaggeredMesh staggered = build_staggered_mesh(mesh);
    return TrainingInputs{std::move(mesh), std::move(record), std::move(staggered),
                          std::move(label), std::move(selected), opts};
}

namespace {

struct FinalEvaluation {
    KernelSpec spec;
    LmlTerms lml;
    LossReport loss;
    int escalations = 0;
};

FinalEvaluation evaluate_final(const TrainingInputs& inputs, const KernelSpec& spec,
                               const ExperimentConfig& config) {
    FinalEvaluation out;
    out.spec = spec;
    const GPModel model = fit_with_jitter_escalation(inputs.mesh.points(),
                                                     inputs.mesh.values(), spec, config.noise);
    out.escalations = model.jitter_escalations;
    out.lml = log_marginal_likelihood(model);
    try {
        out.loss = diffusion_loss(model, inputs.mesh, inputs.staggered, inputs.true_label,
                                  config.beta1, config.beta2, inputs.selection(),
                                  inputs.sensor_options);
    } catch (const std::runtime_error&) {
        // sensor denominators collapsed (ringing drove predictions negative)
        out.loss.beta1 = config.beta1;
        out.loss.beta2 = config.beta2;
        out.loss.rmse_training = kNan;
        out.loss.rmse_diffusion = kInf;
        out.loss.total = kInf;
    }
    return out;
}

RunResult finish_run(const TrainingInputs& inputs, const ExperimentConfig& config,
                     const KernelSpec& base_spec, const OptResult& opt, bool log_space,
                     RunResult result) {
    result.opt_status = opt.status;
    result.opt_message = opt.message;
    result.evals = static_cast<int>(opt.history.evals.size());
    result.history = opt.history;
    result.status = opt.status == OptStatus::Aborted ? "aborted" : "ok";
    if (!opt.x.empty() && std::isfinite(opt.value)) {
        try {
            const KernelSpec final_spec =
                log_space ? unpack_log(base_spec, opt.x) : unpack_raw(base_spec, opt.x);
            FinalEvaluation fin = evaluate_final(inputs, final_spec, config);
            result.final_spec = fin.spec;
            result.final_lml = fin.lml;
            result.final_loss = fin.loss;
            result.jitter_escalations = fin.escalations;
        } catch (const std::exception& e) {
            result.status = std::string("failed: ") + e.what();
            result.final_spec = base_spec;
        }
    } else {
        result.status = "failed: " + (opt.message.empty() ? "no finite objective value"
                                                          : opt.message);
        result.final_spec = base_spec;
    }
    return result;
}

}  // namespace

RunResult run_lml_training(const TrainingInputs& inputs, const KernelSpec& init_spec,
                           const ExperimentConfig& config) {
    init_spec.validate();
    RunResult result;
    result.initial_spec = init_spec;
    const PointSet points = inputs.mesh.points();
    const auto& values = inputs.mesh.values();
    std::vector<std::pair<double, double>> components;

    const GradObjective objective = [&](std::span<const double> x,
                                        std::vector<double>* grad_out) -> double {
        components.emplace_back(kNan, kNan);
        KernelSpec spec;
        try {
            spec = unpack_log(init_spec, x);
        } catch (const validation_error&) {
            if (grad_out) std::fill(grad_out->begin(), grad_out->end(), 0.0);
            return kInf;
        }
        GPModel model;
        try {
            model = fit_with_jitter_escalation(points, values, spec, config.noise);
        } catch (const factorization_error&) {
            if (grad_out) std::fill(grad_out->begin(), grad_out->end(), 0.0);
            return kInf;
        }
        if (grad_out) {
            *grad_out = lml_gradient(model);
            for (auto& g : *grad_out) g = -g;
        }
        return -log_marginal_likelihood(model).total;
    };

    const std::vector<double> x0 = pack_log(init_spec);
    OptimizerConfig opt_config = config.quasi_newton;
    opt_config.method = OptMethod::QuasiNewton;
    const OptResult opt = minimize_quasi_newton(objective, x0, opt_config);
    result.history_components = std::move(components);
    return finish_run(inputs, config, init_spec, opt, /*log_space=*/true, std::move(result));
}

RunResult run_diffusion_training(const TrainingInputs& inputs, const KernelSpec& init_spec,
                                 const ExperimentConfig& config) {
    init_spec.validate();
    RunResult result;
    result.initial_spec = init_spec;
    const PointSet points = inputs.mesh.points();
    const auto& values = inputs.mesh.values();
    std::vector<std::pair<double, double>> components;

    const ValueObjective objective = [&](std::span<const double> x) -> double {
        KernelSpec spec;
        try {
            spec = unpack_raw(init_spec, x);
        } catch (const validation_error&) {
            components.emplace_back(kNan, kNan);
            return kInf;
        }
        try {
            const GPModel model =
                fit_with_jitter_escalation(points, values, spec, config.noise);
            const LossReport report =
                diffusion_loss(model, inputs.mesh, inputs.staggered, inputs.true_label,
                               config.beta1, config.beta2, inputs.selection(),
                               inputs.sensor_options);
            components.emplace_back(report.rmse_training, report.rmse_diffusion);
            return report.total;
        } catch (const std::exception&) {
            // factorization failed even with escalated jitter, or the sensor
            // guard tripped: reject this trial point
            components.emplace_back(kNan, kNan);
            return kInf;
        }
    };

    const std::vector<double> x0 = pack_raw(init_spec);
    OptimizerConfig opt_config = config.dfo;
    opt_config.method = OptMethod::Dfo;
    if (opt_config.lower_bounds.empty())
        opt_config.lower_bounds.assign(x0.size(), config.dfo_lower_bound);
    const OptResult opt = minimize_dfo(objective, x0, opt_config);
    result.history_components = std::move(components);
    return finish_run(inputs, config, init_spec, opt, /*log_space=*/false, std::move(result));
}

RunResult execute_run(const RunPlan& plan, const TrainingInputs& inputs,
                      const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    try {
        const KernelSpec init = initial_spec_for(plan, inputs.mesh.dims(), config);
        result = plan.method == TrainMethod::Lml ? run_lml_training(inputs, init, config)
                                                 : run_diffusion_training(inputs, init, config);
    } catch (const std::exception& e) {
        result.status = std::string("failed: ") + e.what();
    }
    result.plan = plan;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<RunResult> run_grid(const TrainingInputs& inputs, const ExperimentConfig& config,
                                const std::function<void(const RunResult&)>& on_result) {
    const std::vector<RunPlan> plans = plan_runs(config);
    std::vector<RunResult> results(plans.size());
    if (plans.empty()) return results;

    const int workers = std::min<int>(config.jobs, static_cast<int>(plans.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < plans.size(); ++i) {
            results[i] = execute_run(plans[i], inputs, config);
            if (on_result) on_result(results[i]);
        }
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::mutex collect_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plans.size()) return;
            RunResult r = execute_run(plans[i], inputs, config);
            {
                const std::lock_guard<std::mutex> lock(collect_mutex);
                results[i] = std::move(r);
                if (on_result) on_result(results[i]);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

SliceTable slice_predictions(const GPModel& model, const StructuredMesh& raw_mesh,
                             const NormalizationRecord& record,
                             const std::map<int, double>& fixed_raw, int dense_factor) {
    const int d = raw_mesh.dims();
    if (dense_factor < 1) throw validation_error("slice: dense_factor must be >= 1");
    if (static_cast<int>(fixed_raw.size()) != d - 1)
        throw validation_error("slice: exactly one axis must be left free");
    int free_axis = -1;
    for (int k = 0; k < d; ++k) {
        if (fixed_raw.count(k) == 0) {
            free_axis = k;
        } else {
            const auto& c = raw_mesh.axis_coords(k);
            const double v = fixed_raw.at(k);
            if (v < c.front() || v > c.back())
                throw validation_error("slice: fixed coordinate " + format_double(v) +
                                       " outside axis " + std::to_string(k + 1) + " range [" +
                                       format_double(c.front()) + ", " + format_double(c.back()) +
                                       "]");
        }
    }
    if (free_axis < 0) throw validation_error("slice: fixed axes out of range");

    // normalized coordinates of the fixed axes, piecewise-linear in the cells
    std::vector<double> fixed_norm(d, 0.0);
    std::vector<bool> fixed_on_node(d, true);
    for (const auto& [axis, value] : fixed_raw) {
        const auto& c = raw_mesh.axis_coords(axis);
        const auto it = std::upper_bound(c.begin(), c.end(), value);
        int cell = static_cast<int>(it - c.begin()) - 1;
        cell = std::min(std::max(cell, 0), static_cast<int>(c.size()) - 2);
        const double frac = (value - c[cell]) / (c[cell + 1] - c[cell]);
        fixed_norm[axis] = cell + frac;
        fixed_on_node[axis] = std::abs(fixed_norm[axis] - std::round(fixed_norm[axis])) < 1e-9;
    }

    const int n_free = raw_mesh.shape()[free_axis];
    SliceTable table;
    table.free_axis = free_axis;
    PointSet queries(d);
    std::vector<double> line_norm;
    for (int i = 0; i < n_free - 1; ++i)
        for (int j = 0; j < dense_factor; ++j)
            line_norm.push_back(i + static_cast<double>(j) / dense_factor);
    line_norm.push_back(n_free - 1);
    for (double u : line_norm) {
        std::vector<double> pt(fixed_norm);
        pt[free_axis] = u;
        queries.push_back(pt);
    }
    const std::vector<double> mean = predict_mean(model, queries);
    const VarResult var = predict_var(model, queries);

    const double vscale = record.value_map.scale;
    bool all_fixed_on_node = true;
    for (int k = 0; k < d; ++k)
        if (k != free_axis && !fixed_on_node[k]) all_fixed_on_node = false;

    std::vector<int> node_idx(d, 0);
    for (const auto& [axis, value] : fixed_raw)
        node_idx[axis] = static_cast<int>(std::round(fixed_norm[axis]));

    for (std::size_t r = 0; r < line_norm.size(); ++r) {
        SliceTable::Row row;
        row.coord = record.denormalize_axis(free_axis, line_norm[r]);
        row.mean = record.value_map.invert(mean[r]);
        row.variance = var.variance[r] / (vscale * vscale);
        row.train_value = kNan;
        const double u = line_norm[r];
        if (all_fixed_on_node && std::abs(u - std::round(u)) < 1e-9) {
            node_idx[free_axis] = static_cast<int>(std::round(u));
            row.train_value = raw_mesh.values()[raw_mesh.linear_index(node_idx)];
        }
        table.rows.push_back(row);
    }
    return table;
}

int count_curvature_sign_changes(std::span<const double> values, double eps) {
    if (values.size() < 4) return 0;
    if (eps <= 0.0) {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        eps = 1e-12 * std::max(m, 1.0);
    }
    std::vector<double> second;
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        second.push_back(values[i + 1] - 2.0 * values[i] + values[i - 1]);
    int changes = 0;
    for (std::size_t i = 0; i + 1 < second.size(); ++i) {
        if (std::abs(second[i]) > eps && std::abs(second[i + 1]) > eps &&
            second[i] * second[i + 1] < 0.0)
            ++changes;
    }
    return changes;
}

}  // namespace gpmesh
