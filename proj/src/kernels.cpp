#include "gpmesh/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "gpmesh/errors.hpp"

namespace gpmesh {

std::string kernel_kind_name(KernelKind kind) {
    return kind == KernelKind::SquaredExponential ? "SE" : "RQ";
}

KernelKind kernel_kind_from_name(const std::string& name) {
    if (name == "SE") return KernelKind::SquaredExponential;
    if (name == "RQ") return KernelKind::RationalQuadratic;
    throw validation_error("unknown kernel kind \"" + name + "\" (expected SE or RQ)");
}

void KernelSpec::validate() const {
    if (!(params.sigma > 0.0)) throw validation_error("sigma must be positive");
    if (params.lengthscales.empty()) throw validation_error("lengthscales must not be empty");
    for (double l : params.lengthscales)
        if (!(l > 0.0)) throw validation_error("lengthscales must be positive");
    const bool is_rq = kind == KernelKind::RationalQuadratic;
    if (is_rq != params.alpha.has_value())
        throw validation_error("alpha must be present exactly for the RQ kernel");
    if (params.alpha && !(*params.alpha > 0.0)) throw validation_error("alpha must be positive");
}

int KernelSpec::trainable_count() const {
    int n = 0;
    if (train_lengthscales) n += tied_lengthscales ? 1 : static_cast<int>(params.lengthscales.size());
    if (kind == KernelKind::RationalQuadratic && train_alpha) ++n;
    if (train_sigma) ++n;
    return n;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> xp) {
    const auto& p = spec.params;
    const int d = static_cast<int>(p.lengthscales.size());
    if (static_cast<int>(x.size()) != d || static_cast<int>(xp.size()) != d)
        throw validation_error("kernel_eval: point dimension does not match lengthscale vector");
    const double s2 = p.sigma * p.sigma;
    if (spec.kind == KernelKind::SquaredExponential) {
        double q = 0.0;
        for (int k = 0; k < d; ++k) {
            const double z = (x[k] - xp[k]) / p.lengthscales[k];
            q += z * z;
        }
        return s2 * std::exp(-0.5 * q);
    }
    const double alpha = *p.alpha;
    double q = 0.0;
    for (int k = 0; k < d; ++k) {
        const double dx = x[k] - xp[k];
        q += dx * dx / (2.0 * alpha * p.lengthscales[k] * p.lengthscales[k]);
    }
    return s2 * std::pow(1.0 + q, -alpha);
}

namespace {

struct AxisIndexing {
    std::vector<std::vector<double>> uniq;  // sorted unique coords per axis
    std::vector<int> index;                 // n x d, index into uniq
};

AxisIndexing build_axis_indexing(const PointSet& pts) {
    const int d = pts.dim, n = pts.size();
    AxisIndexing ai;
    ai.uniq.resize(d);
    ai.index.resize(static_cast<std::size_t>(n) * d);
    for (int k = 0; k < d; ++k) {
        auto& u = ai.uniq[k];
        u.resize(n);
        for (int i = 0; i < n; ++i) u[i] = pts.coords[static_cast<std::size_t>(i) * d + k];
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        for (int i = 0; i < n; ++i) {
            const double c = pts.coords[static_cast<std::size_t>(i) * d + k];
            ai.index[static_cast<std::size_t>(i) * d + k] =
                static_cast<int>(std::lower_bound(u.begin(), u.end(), c) - u.begin());
        }
    }
    return ai;
}

bool factored_worthwhile(const AxisIndexing& a, const AxisIndexing& b, std::size_t pairs) {
    std::size_t table = 0;
    for (std::size_t k = 0; k < a.uniq.size(); ++k) table += a.uniq[k].size() * b.uniq[k].size();
    return table * 4 <= pairs;
}

// K via per-axis tables. For SE the tables hold exp factors and entries are
// products; for RQ they hold scaled squared distances and entries need one pow.
void fill_factored(Matrix& out, const KernelSpec& spec, const AxisIndexing& a, const AxisIndexing& b,
                   bool lower_only) {
    const auto& p = spec.params;
    const int d = static_cast<int>(p.lengthscales.size());
    const double s2 = p.sigma * p.sigma;
    const bool se = spec.kind == KernelKind::SquaredExponential;
    const double alpha = se ? 0.0 : *p.alpha;

    std::vector<Matrix> tables(d);
    for (int k = 0; k < d; ++k) {
        const auto& ua = a.uniq[k];
        const auto& ub = b.uniq[k];
        Matrix t(static_cast<int>(ua.size()), static_cast<int>(ub.size()));
        const double lam = p.lengthscales[k];
        for (int i = 0; i < t.rows; ++i)
            for (int j = 0; j < t.cols; ++j) {
                const double z = ua[i] - ub[j];
                t(i, j) = se ? std::exp(-0.5 * (z / lam) * (z / lam))
                             : z * z / (2.0 * alpha * lam * lam);
            }
        tables[k] = std::move(t);
    }

#pragma omp parallel for schedule(static) if (out.rows > 128)
    for (int i = 0; i < out.rows; ++i) {
        const int* ia = a.index.data() + static_cast<std::size_t>(i) * d;
        double* ri = out.row(i);
        const int jn = lower_only ? i + 1 : out.cols;
        for (int j = 0; j < jn; ++j) {
            const int* jb = b.index.data() + static_cast<std::size_t>(j) * d;
            if (se) {
                double prod = s2;
                for (int k = 0; k < d; ++k) prod *= tables[k](ia[k], jb[k]);
                ri[j] = prod;
            } else {
                double q = 0.0;
                for (int k = 0; k < d; ++k) q += tables[k](ia[k], jb[k]);
                ri[j] = s2 * std::pow(1.0 + q, -alpha);
            }
        }
    }
}

void fill_direct(Matrix& out, const KernelSpec& spec, const PointSet& a, const PointSet& b,
                 bool lower_only) {
    const int d = a.dim;
#pragma omp parallel for schedule(static) if (out.rows > 128)
    for (int i = 0; i < out.rows; ++i) {
        const double* xi = a.coords.data() + static_cast<std::size_t>(i) * d;
        double* ri = out.row(i);
        const int jn = lower_only ? i + 1 : out.cols;
        for (int j = 0; j < jn; ++j) {
            ri[j] = kernel_eval(spec, {xi, static_cast<std::size_t>(d)}, b.point(j));
        }
    }
}

}  // namespace

Matrix kernel_matrix(const KernelSpec& spec, const PointSet& a, const PointSet& b) {
    spec.validate();
    if (a.dim != b.dim || a.dim != static_cast<int>(spec.params.lengthscales.size()))
        throw validation_error("kernel_matrix: dimension mismatch");
    Matrix out(a.size(), b.size());
    const auto ia = build_axis_indexing(a);
    const auto ib = build_axis_indexing(b);
    if (factored_worthwhile(ia, ib, static_cast<std::size_t>(a.size()) * b.size()))
        fill_factored(out, spec, ia, ib, /*lower_only=*/false);
    else
        fill_direct(out, spec, a, b, /*lower_only=*/false);
    return out;
}

Matrix kernel_matrix_sym(const KernelSpec& spec, const PointSet& a) {
    spec.validate();
    if (a.dim != static_cast<int>(spec.params.lengthscales.size()))
        throw validation_error("kernel_matrix: dimension mismatch");
    Matrix out(a.size(), a.size());
    const auto ia = build_axis_indexing(a);
    if (factored_worthwhile(ia, ia, static_cast<std::size_t>(a.size()) * a.size()))
        fill_factored(out, spec, ia, ia, /*lower_only=*/true);
    else
        fill_direct(out, spec, a, a, /*lower_only=*/true);
    for (int i = 0; i < out.rows; ++i)
        for (int j = i + 1; j < out.cols; ++j) out(i, j) = out(j, i);
    return out;
}

std::vector<std::string> packed_names(const KernelSpec& spec) {
    std::vector<std::string> names;
    if (spec.train_lengthscales) {
        if (spec.tied_lengthscales) {
            names.push_back("lengthscale");
        } else {
            for (std::size_t k = 0; k < spec.params.lengthscales.size(); ++k)
                names.push_back("lengthscale_" + std::to_string(k + 1));
        }
    }
    if (spec.kind == KernelKind::RationalQuadratic && spec.train_alpha) names.push_back("alpha");
    if (spec.train_sigma) names.push_back("sigma");
    return names;
}

std::vector<double> pack_raw(const KernelSpec& spec) {
    spec.validate();
    std::vector<double> packed;
    if (spec.train_lengthscales) {
        if (spec.tied_lengthscales) {
            packed.push_back(spec.params.lengthscales.front());
        } else {
            for (double l : spec.params.lengthscales) packed.push_back(l);
        }
    }
    if (spec.kind == KernelKind::RationalQuadratic && spec.train_alpha)
        packed.push_back(*spec.params.alpha);
    if (spec.train_sigma) packed.push_back(spec.params.sigma);
    return packed;
}

KernelSpec unpack_raw(const KernelSpec& base, std::span<const double> packed) {
    KernelSpec spec = base;
    std::size_t at = 0;
    if (spec.train_lengthscales) {
        if (spec.tied_lengthscales) {
            for (auto& l : spec.params.lengthscales) l = packed[at];
            ++at;
        } else {
            for (auto& l : spec.params.lengthscales) l = packed[at++];
        }
    }
    if (spec.kind == KernelKind::RationalQuadratic && spec.train_alpha)
        spec.params.alpha = packed[at++];
    if (spec.train_sigma) spec.params.sigma = packed[at++];
    if (at != packed.size()) throw validation_error("packed parameter vector has wrong length");
    spec.validate();
    return spec;
}

std::vector<double> pack_log(const KernelSpec& spec) {
    auto packed = pack_raw(spec);
    for (auto& v : packed) v = std::log(v);
    return packed;
}

KernelSpec unpack_log(const KernelSpec& base, std::span<const double> packed) {
    std::vector<double> raw(packed.begin(), packed.end());
    for (auto& v : raw) v = std::exp(v);
    return unpack_raw(base, raw);
}

}  // namespace gpmesh
