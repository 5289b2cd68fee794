#include "gpmesh/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "gpmesh/errors.hpp"

namespace gpmesh {

namespace {

constexpr double kDenominatorGuard = 1e-12;

[[noreturn]] void denominator_error(double value) {
    throw std::runtime_error("diffusion sensor denominator " + std::to_string(value) +
                             " is below the positivity guard; field values must be positive");
}

double true_prefactor(const SensorOptions& opts) {
    const double f = 1.0 / (opts.spacing * opts.spacing);
    return opts.appendix_scaling ? f / 3.0 : f;
}

double staggered_prefactor(const SensorOptions& opts) {
    const double h = 0.5 * opts.spacing;
    const double f = 1.0 / (3.0 * h * h);
    return opts.appendix_scaling ? f / 3.0 : f;
}

std::vector<std::size_t> row_major_strides(std::span<const int> shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (int k = static_cast<int>(shape.size()) - 2; k >= 0; --k)
        strides[k] = strides[k + 1] * static_cast<std::size_t>(shape[k + 1]);
    return strides;
}

/// Linear indices of all interior nodes in the full tensor, plus the matching
/// base index into the staggered tensor (the cell whose low corner is the
/// interior node itself).
struct InteriorIndexing {
    std::vector<int> interior_shape;
    std::vector<std::size_t> center;     // full-tensor linear index per interior node
    std::vector<std::size_t> stag_base;  // staggered-tensor linear index per interior node
};

InteriorIndexing build_interior_indexing(std::span<const int> shape) {
    const int d = static_cast<int>(shape.size());
    InteriorIndexing out;
    out.interior_shape.resize(d);
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) {
        if (shape[k] < 3)
            throw validation_error("diffusion sensor needs at least 3 points along axis " +
                                   std::to_string(k + 1));
        out.interior_shape[k] = shape[k] - 2;
        total *= static_cast<std::size_t>(out.interior_shape[k]);
    }
    const auto strides = row_major_strides(shape);
    std::vector<int> stag_shape(d);
    for (int k = 0; k < d; ++k) stag_shape[k] = shape[k] - 1;
    const auto sstrides = row_major_strides(stag_shape);

    out.center.resize(total);
    out.stag_base.resize(total);
    std::vector<int> idx(d, 1);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t c = 0, s = 0;
        for (int k = 0; k < d; ++k) {
            c += static_cast<std::size_t>(idx[k]) * strides[k];
            s += static_cast<std::size_t>(idx[k]) * sstrides[k];
        }
        out.center[lin] = c;
        out.stag_base[lin] = s;
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[k] <= out.interior_shape[k]) break;
            idx[k] = 1;
        }
    }
    return out;
}

void sum_per_diagonal(SensorField& field) {
    const std::size_t n = field.per_diagonal.empty() ? 0 : field.per_diagonal.front().size();
    field.total.assign(n, 0.0);
#pragma omp parallel for schedule(static) if (n > 16384)
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& diag : field.per_diagonal) s += diag[i];
        field.total[i] = s;
    }
}

}  // namespace

std::vector<double> sensor_1d_true(std::span<const double> values, double spacing,
                                   const SensorOptions& opts) {
    if (values.size() < 3) throw validation_error("sensor_1d_true: need at least 3 values");
    if (!(spacing > 0.0)) throw validation_error("sensor_1d_true: spacing must be positive");
    SensorOptions o = opts;
    o.spacing = spacing;
    const double pref = true_prefactor(o);
    std::vector<double> out(values.size() - 2);
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        const double num = std::abs(values[i + 1] - 2.0 * values[i] + values[i - 1]);
        const double den = values[i + 1] + 2.0 * values[i] + values[i - 1];
        if (den <= kDenominatorGuard) denominator_error(den);
        out[i - 1] = pref * num / den;
    }
    return out;
}

std::vector<double> sensor_1d_staggered(std::span<const double> pred_orig,
                                        std::span<const double> pred_stag, double spacing,
                                        const SensorOptions& opts) {
    if (pred_orig.size() < 3) throw validation_error("sensor_1d_staggered: need at least 3 values");
    if (pred_stag.size() != pred_orig.size() - 1)
        throw validation_error("sensor_1d_staggered: staggered length must be original length - 1");
    if (!(spacing > 0.0)) throw validation_error("sensor_1d_staggered: spacing must be positive");
    SensorOptions o = opts;
    o.spacing = spacing;
    const double pref = staggered_prefactor(o);
    std::vector<double> out(pred_orig.size() - 2);
    for (std::size_t i = 1; i + 1 < pred_orig.size(); ++i) {
        const double hi = pred_stag[i];      // i + 1/2
        const double lo = pred_stag[i - 1];  // i - 1/2
        const double num = std::abs(pred_orig[i + 1] - hi - lo + pred_orig[i - 1]);
        const double den = pred_orig[i + 1] + hi + lo + pred_orig[i - 1];
        if (den <= kDenominatorGuard) denominator_error(den);
        out[i - 1] = pref * num / den;
    }
    return out;
}

SensorField sensor_true_md(const StructuredMesh& mesh, const SensorOptions& opts) {
    const auto indexing = build_interior_indexing(mesh.shape());
    const auto strides = row_major_strides(mesh.shape());
    const auto& values = mesh.values();
    const double pref = true_prefactor(opts);

    SensorField field;
    field.interior_shape = indexing.interior_shape;
    field.diagonals = enumerate_diagonals(mesh.dims());
    const std::size_t n = indexing.center.size();
    for (const auto& diag : field.diagonals) {
        long long delta = 0;
        for (int k = 0; k < mesh.dims(); ++k)
            delta += static_cast<long long>(diag.offsets[k]) * static_cast<long long>(strides[k]);
        std::vector<double> comp(n);
        int bad = 0;
#pragma omp parallel for schedule(static) reduction(| : bad) if (n > 4096)
        for (std::size_t i = 0; i < n; ++i) {
            const long long c = static_cast<long long>(indexing.center[i]);
            const double plus = values[static_cast<std::size_t>(c + delta)];
            const double minus = values[static_cast<std::size_t>(c - delta)];
            const double mid = values[static_cast<std::size_t>(c)];
            const double den = plus + 2.0 * mid + minus;
            if (den <= kDenominatorGuard) {
                bad = 1;
                comp[i] = 0.0;
            } else {
                comp[i] = pref * std::abs(plus - 2.0 * mid + minus) / den;
            }
        }
        if (bad) denominator_error(0.0);
        field.per_diagonal.push_back(std::move(comp));
    }
    sum_per_diagonal(field);
    return field;
}

SensorField sensor_staggered_md(std::span<const double> mesh_preds, std::span<const int> shape,
                                std::span<const double> stag_preds, const SensorOptions& opts) {
    const int d = static_cast<int>(shape.size());
    std::size_t total = 1, stag_total = 1;
    for (int k = 0; k < d; ++k) {
        total *= static_cast<std::size_t>(shape[k]);
        stag_total *= static_cast<std::size_t>(shape[k] - 1);
    }
    if (mesh_preds.size() != total || stag_preds.size() != stag_total)
        throw validation_error("sensor_staggered_md: prediction tensor shapes do not match the mesh");

    const auto indexing = build_interior_indexing(shape);
    const auto strides = row_major_strides(shape);
    std::vector<int> stag_shape(d);
    for (int k = 0; k < d; ++k) stag_shape[k] = shape[k] - 1;
    const auto sstrides = row_major_strides(stag_shape);
    const double pref = staggered_prefactor(opts);

    SensorField field;
    field.interior_shape = indexing.interior_shape;
    field.diagonals = enumerate_diagonals(d);
    const std::size_t n = indexing.center.size();
    for (const auto& diag : field.diagonals) {
        long long delta = 0, dplus = 0, dminus = 0;
        for (int k = 0; k < d; ++k) {
            delta += static_cast<long long>(diag.offsets[k]) * static_cast<long long>(strides[k]);
            // half-index neighbours: v + p/2 and v - p/2 in staggered indexing
            if (diag.offsets[k] < 0) dplus -= static_cast<long long>(sstrides[k]);
            if (diag.offsets[k] > 0) dminus -= static_cast<long long>(sstrides[k]);
        }
        std::vector<double> comp(n);
        int bad = 0;
#pragma omp parallel for schedule(static) reduction(| : bad) if (n > 4096)
        for (std::size_t i = 0; i < n; ++i) {
            const long long c = static_cast<long long>(indexing.center[i]);
            const long long s = static_cast<long long>(indexing.stag_base[i]);
            const double plus = mesh_preds[static_cast<std::size_t>(c + delta)];
            const double minus = mesh_preds[static_cast<std::size_t>(c - delta)];
            const double half_plus = stag_preds[static_cast<std::size_t>(s + dplus)];
            const double half_minus = stag_preds[static_cast<std::size_t>(s + dminus)];
            const double den = plus + half_plus + half_minus + minus;
            if (den <= kDenominatorGuard) {
                bad = 1;
                comp[i] = 0.0;
            } else {
                comp[i] = pref * std::abs(plus - half_plus - half_minus + minus) / den;
            }
        }
        if (bad) denominator_error(0.0);
        field.per_diagonal.push_back(std::move(comp));
    }
    sum_per_diagonal(field);
    return field;
}

std::vector<Diagonal> select_top_diagonals(const SensorField& field, int count) {
    if (count < 0 || count > static_cast<int>(field.diagonals.size()))
        throw validation_error("select_top_diagonals: requested count exceeds diagonal count");
    std::vector<double> means(field.diagonals.size(), 0.0);
    for (std::size_t p = 0; p < field.per_diagonal.size(); ++p) {
        double s = 0.0;
        for (double v : field.per_diagonal[p]) s += v;
        means[p] = field.per_diagonal[p].empty() ? 0.0 : s / field.per_diagonal[p].size();
    }
    std::vector<int> order(field.diagonals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return means[a] > means[b]; });
    std::vector<Diagonal> out;
    for (int i = 0; i < count; ++i) out.push_back(field.diagonals[order[i]]);
    return out;
}

SensorField restrict_diagonals(const SensorField& field, const std::vector<Diagonal>& keep) {
    SensorField out;
    out.interior_shape = field.interior_shape;
    for (const auto& diag : keep) {
        const auto it = std::find(field.diagonals.begin(), field.diagonals.end(), diag);
        if (it == field.diagonals.end())
            throw validation_error("restrict_diagonals: diagonal " + diag.label() +
                                   " not present in field");
        out.diagonals.push_back(diag);
        out.per_diagonal.push_back(field.per_diagonal[it - field.diagonals.begin()]);
    }
    sum_per_diagonal(out);
    if (out.total.empty() && !field.total.empty()) out.total.assign(field.total.size(), 0.0);
    return out;
}

LossReport diffusion_loss_from_predictions(std::span<const double> preds_orig,
                                           std::span<const double> preds_stag,
                                           const StructuredMesh& mesh,
                                           const SensorField& true_label, double beta1,
                                           double beta2, const std::vector<Diagonal>* selected,
                                           const SensorOptions& opts) {
    if (beta1 < 0.0 || beta2 < 0.0) throw validation_error("diffusion_loss: betas must be >= 0");
    if (preds_orig.size() != mesh.size())
        throw validation_error("diffusion_loss: prediction count does not match mesh");

    LossReport report;
    report.beta1 = beta1;
    report.beta2 = beta2;

    double se = 0.0;
    for (std::size_t i = 0; i < preds_orig.size(); ++i) {
        const double r = mesh.values()[i] - preds_orig[i];
        se += r * r;
    }
    report.rmse_training = std::sqrt(se / static_cast<double>(preds_orig.size()));

    SensorField stag_field = sensor_staggered_md(preds_orig, mesh.shape(), preds_stag, opts);
    const SensorField* truth = &true_label;
    SensorField truth_restricted, stag_restricted;
    if (selected != nullptr) {
        truth_restricted = restrict_diagonals(true_label, *selected);
        stag_restricted = restrict_diagonals(stag_field, *selected);
        truth = &truth_restricted;
        stag_field = std::move(stag_restricted);
    }
    if (truth->total.size() != stag_field.total.size())
        throw validation_error("diffusion_loss: true label does not match mesh interior");
    double sd = 0.0;
    for (std::size_t i = 0; i < stag_field.total.size(); ++i) {
        const double r = truth->total[i] - stag_field.total[i];
        sd += r * r;
    }
    report.rmse_diffusion = std::sqrt(sd / static_cast<double>(stag_field.total.size()));
    report.total = beta1 * report.rmse_training + beta2 * report.rmse_diffusion;
    return report;
}

LossReport diffusion_loss(const GPModel& model, const StructuredMesh& mesh,
                          const StaggeredMesh& stag, const SensorField& true_label, double beta1,
                          double beta2, const std::vector<Diagonal>* selected,
                          const SensorOptions& opts) {
    const PointSet mesh_points = mesh.points();
    std::vector<double> preds_orig;
    if (mesh_points.coords == model.train_points.coords)
        preds_orig = predict_at_train(model);
    else
        preds_orig = predict_mean(model, mesh_points);
    const std::vector<double> preds_stag = predict_mean(model, stag.points);
    return diffusion_loss_from_predictions(preds_orig, preds_stag, mesh, true_label, beta1, beta2,
                                           selected, opts);
}

namespace ref {

SensorField sensor_true_md(const StructuredMesh& mesh, const SensorOptions& opts) {
    SensorField field;
    field.interior_shape = interior_shape(mesh);
    field.diagonals = enumerate_diagonals(mesh.dims());
    const auto interior = interior_multi_indices(mesh);
    const double pref = true_prefactor(opts);
    for (int k = 0; k < mesh.dims(); ++k)
        if (mesh.shape()[k] < 3)
            throw validation_error("diffusion sensor needs at least 3 points along axis " +
                                   std::to_string(k + 1));
    for (const auto& diag : field.diagonals) {
        std::vector<double> comp;
        comp.reserve(interior.size());
        std::vector<int> neighbor(mesh.dims());
        for (const auto& idx : interior) {
            for (int k = 0; k < mesh.dims(); ++k) neighbor[k] = idx[k] + diag.offsets[k];
            const double plus = mesh.values()[mesh.linear_index(neighbor)];
            for (int k = 0; k < mesh.dims(); ++k) neighbor[k] = idx[k] - diag.offsets[k];
            const double minus = mesh.values()[mesh.linear_index(neighbor)];
            const double mid = mesh.values()[mesh.linear_index(idx)];
            const double den = plus + 2.0 * mid + minus;
            if (den <= kDenominatorGuard) denominator_error(den);
            comp.push_back(pref * std::abs(plus - 2.0 * mid + minus) / den);
        }
        field.per_diagonal.push_back(std::move(comp));
    }
    field.total.assign(interior.size(), 0.0);
    for (std::size_t i = 0; i < interior.size(); ++i)
        for (const auto& diag : field.per_diagonal) field.total[i] += diag[i];
    return field;
}

SensorField sensor_staggered_md(std::span<const double> mesh_preds, std::span<const int> shape,
                                std::span<const double> stag_preds, const SensorOptions& opts) {
    const int d = static_cast<int>(shape.size());
    std::vector<std::vector<double>> dummy_coords(d);
    for (int k = 0; k < d; ++k) {
        dummy_coords[k].resize(shape[k]);
        for (int i = 0; i < shape[k]; ++i) dummy_coords[k][i] = i;
    }
    const StructuredMesh frame(dummy_coords, std::vector<double>(mesh_preds.begin(), mesh_preds.end()));
    std::vector<int> stag_shape(d);
    for (int k = 0; k < d; ++k) stag_shape[k] = shape[k] - 1;
    const auto sstrides = row_major_strides(stag_shape);

    SensorField field;
    field.interior_shape = interior_shape(frame);
    field.diagonals = enumerate_diagonals(d);
    const auto interior = interior_multi_indices(frame);
    const double pref = staggered_prefactor(opts);
    for (const auto& diag : field.diagonals) {
        std::vector<double> comp;
        comp.reserve(interior.size());
        std::vector<int> neighbor(d);
        for (const auto& idx : interior) {
            for (int k = 0; k < d; ++k) neighbor[k] = idx[k] + diag.offsets[k];
            const double plus = mesh_preds[frame.linear_index(neighbor)];
            for (int k = 0; k < d; ++k) neighbor[k] = idx[k] - diag.offsets[k];
            const double minus = mesh_preds[frame.linear_index(neighbor)];
            std::size_t hp = 0, hm = 0;
            for (int k = 0; k < d; ++k) {
                hp += static_cast<std::size_t>(idx[k] + (diag.offsets[k] - 1) / 2) * sstrides[k];
                hm += static_cast<std::size_t>(idx[k] - (diag.offsets[k] + 1) / 2) * sstrides[k];
            }
            const double half_plus = stag_preds[hp];
            const double half_minus = stag_preds[hm];
            const double den = plus + half_plus + half_minus + minus;
            if (den <= kDenominatorGuard) denominator_error(den);
            comp.push_back(pref * std::abs(plus - half_plus - half_minus + minus) / den);
        }
        field.per_diagonal.push_back(std::move(comp));
    }
    field.total.assign(interior.size(), 0.0);
    for (std::size_t i = 0; i < interior.size(); ++i)
        for (const auto& diag : field.per_diagonal) field.total[i] += diag[i];
    return field;
}

}  // namespace ref

}  // namespace gpmesh
