#include "gpmesh/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include "gpmesh/errors.hpp"
#include "gpmesh/linalg.hpp"

namespace gpmesh {

void OptimizerConfig::validate(int dims) const {
    if (max_evals < 1) throw validation_error("optimizer: max_evals must be >= 1");
    if (!(initial_radius > 0.0)) throw validation_error("optimizer: initial_radius must be > 0");
    if (!(tol_obj > 0.0) || !(tol_step > 0.0))
        throw validation_error("optimizer: tolerances must be > 0");
    if (!lower_bounds.empty() && static_cast<int>(lower_bounds.size()) != dims)
        throw validation_error("optimizer: lower_bounds dimension mismatch");
    if (!upper_bounds.empty() && static_cast<int>(upper_bounds.size()) != dims)
        throw validation_error("optimizer: upper_bounds dimension mismatch");
    for (std::size_t i = 0; i < lower_bounds.size() && i < upper_bounds.size(); ++i)
        if (lower_bounds[i] > upper_bounds[i])
            throw validation_error("optimizer: inconsistent bounds at index " + std::to_string(i));
}

std::string opt_status_name(OptStatus status) {
    switch (status) {
        case OptStatus::Converged: return "converged";
        case OptStatus::StepConverged: return "step_converged";
        case OptStatus::MaxEvals: return "max_evals";
        case OptStatus::Aborted: return "aborted";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Bounds {
    std::vector<double> lo, hi;

    Bounds(const OptimizerConfig& cfg, int n) {
        lo = cfg.lower_bounds.empty() ? std::vector<double>(n, -kInf) : cfg.lower_bounds;
        hi = cfg.upper_bounds.empty() ? std::vector<double>(n, kInf) : cfg.upper_bounds;
    }
    void clamp(std::vector<double>& x) const {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
    }
};

class Recorder {
public:
    Recorder(ConvergenceHistory& history, int max_evals)
        : history_(history), max_evals_(max_evals) {}

    bool exhausted() const { return count_ >= max_evals_; }
    int count() const { return count_; }
    double best() const { return best_; }

    double record(const std::vector<double>& x, double f) {
        EvalRecord rec;
        rec.index = count_++;
        rec.params = x;
        rec.value = f;
        if (std::isfinite(f) && f < best_) {
            best_ = f;
            rec.accepted = true;
        }
        history_.evals.push_back(std::move(rec));
        return f;
    }

private:
    ConvergenceHistory& history_;
    int max_evals_;
    int count_ = 0;
    double best_ = kInf;
};

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Norm of the projected gradient step: how far a unit gradient descent step
// can actually move inside the box.
double projected_gradient_norm(const std::vector<double>& x, const std::vector<double>& g,
                               const Bounds& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double moved = std::min(std::max(x[i] - g[i], b.lo[i]), b.hi[i]) - x[i];
        m = std::max(m, std::abs(moved));
    }
    return m;
}

}  // namespace

OptResult minimize_quasi_newton(const GradObjective& objective, std::span<const double> x0,
                                const OptimizerConfig& config) {
    const int n = static_cast<int>(x0.size());
    config.validate(n);
    const Bounds bounds(config, n);
    OptResult result;
    Recorder rec(result.history, config.max_evals);

    std::vector<double> x(x0.begin(), x0.end());
    bounds.clamp(x);
    std::vector<double> g(n, 0.0);
    double fx = objective(x, &g);
    rec.record(x, fx);
    if (!std::isfinite(fx)) {
        result.x = x;
        result.value = fx;
        result.status = OptStatus::Aborted;
        result.message = "objective not finite at the start point";
        return result;
    }
    result.x = x;
    result.value = fx;

    if (projected_gradient_norm(x, g, bounds) <= config.tol_obj) {
        result.status = OptStatus::Converged;
        result.message = "gradient norm below tol_obj at the start point";
        return result;
    }

    const int memory = 10;
    std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)

    auto two_loop = [&](const std::vector<double>& grad) {
        std::vector<double> q(grad);
        std::vector<double> alphas(pairs.size());
        for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
            const auto& [s, y] = pairs[i];
            const double rho = 1.0 / dot(y, s);
            alphas[i] = rho * dot(s, q);
            for (int k = 0; k < n; ++k) q[k] -= alphas[i] * y[k];
        }
        if (!pairs.empty()) {
            const auto& [s, y] = pairs.back();
            const double gamma = dot(s, y) / dot(y, y);
            for (auto& v : q) v *= gamma;
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& [s, y] = pairs[i];
            const double rho = 1.0 / dot(y, s);
            const double beta = rho * dot(y, q);
            for (int k = 0; k < n; ++k) q[k] += (alphas[i] - beta) * s[k];
        }
        for (auto& v : q) v = -v;
        return q;
    };

    while (!rec.exhausted()) {
        std::vector<double> dir = two_loop(g);
        if (dot(dir, g) >= 0.0) {
            for (int k = 0; k < n; ++k) dir[k] = -g[k];
        }

        // Cap the first trial so a steep gradient cannot fling the iterate
        // into overflow territory; backtracking handles the rest.
        double alpha = std::min(1.0, 2.0 / std::max(inf_norm(dir), 1.0));
        std::vector<double> xn(n), gn(n);
        double fn = kInf;
        bool took_step = false;
        bool have_grad = false;
        bool saw_nonfinite = false;
        for (int ls = 0; ls < 40 && !rec.exhausted(); ++ls) {
            for (int k = 0; k < n; ++k) xn[k] = x[k] + alpha * dir[k];
            bounds.clamp(xn);
            std::vector<double> step(n);
            for (int k = 0; k < n; ++k) step[k] = xn[k] - x[k];
            if (inf_norm(step) == 0.0) break;
            const bool want_grad = (ls == 0);
            fn = objective(xn, want_grad ? &gn : nullptr);
            rec.record(xn, fn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * dot(g, step)) {
                took_step = true;
                have_grad = want_grad;
                break;
            }
            if (!std::isfinite(fn)) saw_nonfinite = true;  // backtrack out of the bad region
            alpha *= 0.5;
        }
        if (!took_step) {
            if (saw_nonfinite) {
                result.status = OptStatus::Aborted;
                result.message = "objective returned non-finite values along the search direction";
            } else {
                result.status = OptStatus::StepConverged;
                result.message = "line search could not make progress";
            }
            return result;
        }
        if (!have_grad) {
            if (rec.exhausted()) break;
            fn = objective(xn, &gn);
            rec.record(xn, fn);
        }
        bool grad_finite = std::isfinite(fn);
        for (int k = 0; k < n && grad_finite; ++k)
            if (!std::isfinite(gn[k])) grad_finite = false;
        if (!grad_finite) {
            result.status = OptStatus::Aborted;
            result.message = "objective returned a non-finite value or gradient";
            return result;
        }

        std::vector<double> s(n), y(n);
        for (int k = 0; k < n; ++k) {
            s[k] = xn[k] - x[k];
            y[k] = gn[k] - g[k];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * inf_norm(s) * inf_norm(y)) {
            pairs.emplace_back(s, y);
            if (static_cast<int>(pairs.size()) > memory) pairs.pop_front();
        }
        x = xn;
        fx = fn;
        g = gn;
        if (fx < result.value) {
            result.value = fx;
            result.x = x;
        }

        if (projected_gradient_norm(x, g, bounds) <= config.tol_obj) {
            result.status = OptStatus::Converged;
            result.message = "projected gradient norm below tol_obj";
            return result;
        }
        if (inf_norm(s) <= config.tol_step) {
            result.status = OptStatus::StepConverged;
            result.message = "step size below tol_step";
            return result;
        }
    }
    result.status = OptStatus::MaxEvals;
    result.message = "evaluation budget exhausted";
    return result;
}

namespace {

// Full quadratic model in scaled coordinates u = (x - base) / scale:
// m(u) = c + g.u + 1/2 u^T H u, coefficient layout [c, g, diag H, offdiag H].
struct QuadraticModel {
    int n = 0;
    double c = 0.0;
    std::vector<double> g;
    Matrix h;

    double eval(std::span<const double> u) const {
        double v = c + dot(g, u);
        for (int i = 0; i < n; ++i) {
            v += 0.5 * h(i, i) * u[i] * u[i];
            for (int j = 0; j < i; ++j) v += h(i, j) * u[i] * u[j];
        }
        return v;
    }
    std::vector<double> gradient(std::span<const double> u) const {
        std::vector<double> out(g.begin(), g.end());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out[i] += h(i, j) * u[j];
        return out;
    }
};

int quad_coeff_count(int n) { return 1 + 2 * n + n * (n - 1) / 2; }

bool fit_quadratic(const std::vector<std::vector<double>>& us, const std::vector<double>& fs,
                   QuadraticModel& model) {
    const int n = static_cast<int>(us.front().size());
    const int q = quad_coeff_count(n);
    Matrix v(q, q);
    std::vector<double> rhs(fs);
    for (int r = 0; r < q; ++r) {
        const auto& u = us[r];
        int at = 0;
        v(r, at++) = 1.0;
        for (int i = 0; i < n; ++i) v(r, at++) = u[i];
        for (int i = 0; i < n; ++i) v(r, at++) = 0.5 * u[i] * u[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) v(r, at++) = u[i] * u[j];
    }
    if (!solve_dense(std::move(v), rhs)) return false;
    model.n = n;
    int at = 0;
    model.c = rhs[at++];
    model.g.assign(rhs.begin() + at, rhs.begin() + at + n);
    at += n;
    model.h = Matrix(n, n);
    for (int i = 0; i < n; ++i) model.h(i, i) = rhs[at++];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            model.h(i, j) = rhs[at];
            model.h(j, i) = rhs[at];
            ++at;
        }
    return true;
}

// Approximate minimizer of the model over a box in u-space: the best of the
// (regularized) Newton point and a projected-gradient descent, both clipped.
std::vector<double> minimize_model_in_box(const QuadraticModel& model,
                                          const std::vector<double>& lo,
                                          const std::vector<double>& hi) {
    const int n = model.n;
    auto clip = [&](std::vector<double>& u) {
        for (int i = 0; i < n; ++i) u[i] = std::min(std::max(u[i], lo[i]), hi[i]);
    };
    std::vector<double> best(n, 0.0);
    clip(best);
    double best_val = model.eval(best);

    auto consider = [&](std::vector<double> u) {
        clip(u);
        const double v = model.eval(u);
        if (v < best_val) {
            best_val = v;
            best = std::move(u);
        }
    };

    // Newton attempts with escalating ridge for indefinite Hessians.
    double ridge = 0.0;
    double hscale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) hscale = std::max(hscale, std::abs(model.h(i, j)));
    for (int attempt = 0; attempt < 4; ++attempt) {
        Matrix hmod = model.h;
        for (int i = 0; i < n; ++i) hmod(i, i) += ridge;
        std::vector<double> step(model.g);
        for (auto& s : step) s = -s;
        if (solve_dense(std::move(hmod), step)) consider(step);
        ridge = (ridge == 0.0) ? std::max(1e-8, 1e-4 * hscale) : ridge * 100.0;
    }

    // Projected gradient with a curvature-based step length.
    std::vector<double> u(n, 0.0);
    clip(u);
    for (int it = 0; it < 60; ++it) {
        const auto grad = model.gradient(u);
        std::vector<double> dir(n);
        for (int i = 0; i < n; ++i) {
            dir[i] = -grad[i];
            if (u[i] <= lo[i] && dir[i] < 0.0) dir[i] = 0.0;
            if (u[i] >= hi[i] && dir[i] > 0.0) dir[i] = 0.0;
        }
        const double dnorm = inf_norm(dir);
        if (dnorm < 1e-15) break;
        double dhd = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dhd += dir[i] * model.h(i, j) * dir[j];
        double t = (dhd > 0.0) ? dot(grad, dir) / -dhd : 1.0 / dnorm;
        if (!(t > 0.0)) t = 1.0 / dnorm;
        for (int i = 0; i < n; ++i) u[i] += t * dir[i];
        clip(u);
        const double v = model.eval(u);
        if (v < best_val) {
            best_val = v;
            best = u;
        }
    }
    return best;
}

}  // namespace

OptResult minimize_dfo(const ValueObjective& objective, std::span<const double> x0,
                       const OptimizerConfig& config) {
    const int n = static_cast<int>(x0.size());
    config.validate(n);
    const Bounds bounds(config, n);
    OptResult result;
    Recorder rec(result.history, config.max_evals);
    const int q = quad_coeff_count(n);

    std::vector<std::vector<double>> xs;  // interpolation set
    std::vector<double> fs;

    auto contains = [&](const std::vector<double>& x) {
        return std::any_of(xs.begin(), xs.end(), [&](const auto& p) { return p == x; });
    };
    auto evaluate = [&](std::vector<double> x) {
        bounds.clamp(x);
        const double f = objective(x);
        rec.record(x, f);
        if (std::isfinite(f) && f < result.value) {
            result.value = f;
            result.x = x;
        }
        return std::make_pair(std::move(x), f);
    };
    auto insert_point = [&](std::vector<double> x, double f) {
        if (!std::isfinite(f)) return;
        xs.push_back(std::move(x));
        fs.push_back(f);
    };

    double radius = config.initial_radius;

    // Poised bootstrap: centre, both axis neighbours, and one diagonal pair
    // per axis pair, all clamped into the box and deduplicated. Probes that
    // come back non-finite shrink toward the centre and retry.
    auto bootstrap = [&](const std::vector<double>& centre, double r,
                         std::optional<double> centre_value) {
        xs.clear();
        fs.clear();
        std::vector<double> xc = centre;
        bounds.clamp(xc);
        if (centre_value) {
            insert_point(xc, *centre_value);
        } else {
            auto [cx, cf] = evaluate(xc);
            xc = cx;
            insert_point(xc, cf);
        }
        auto try_add = [&](std::vector<double> cand) {
            bounds.clamp(cand);
            for (double shrink = 1.0; shrink > 1.0 / 64.0 && !rec.exhausted(); shrink *= 0.5) {
                std::vector<double> probe(n);
                for (int k = 0; k < n; ++k) probe[k] = xc[k] + (cand[k] - xc[k]) * shrink;
                bounds.clamp(probe);
                if (contains(probe)) continue;
                auto [px, pf] = evaluate(probe);
                if (std::isfinite(pf)) {
                    insert_point(px, pf);
                    return;
                }
            }
        };
        for (int i = 0; i < n && !rec.exhausted(); ++i) {
            std::vector<double> plus(xc), minus(xc);
            plus[i] += r;
            minus[i] -= r;
            bounds.clamp(plus);
            bounds.clamp(minus);
            if (plus == xc) {  // blocked by the upper bound: step further down instead
                minus[i] = xc[i] - 2.0 * r;
            } else if (minus == xc) {
                plus[i] = xc[i] + 2.0 * r;
            }
            try_add(plus);
            if (rec.exhausted()) break;
            try_add(minus);
        }
        for (int i = 0; i < n && !rec.exhausted(); ++i)
            for (int j = 0; j < i && !rec.exhausted(); ++j) {
                std::vector<double> pt(xc);
                pt[i] += r;
                pt[j] += r;
                try_add(pt);
            }
    };

    bootstrap(std::vector<double>(x0.begin(), x0.end()), radius, std::nullopt);
    if (!std::isfinite(result.value) || xs.empty()) {
        result.status = rec.exhausted() ? OptStatus::MaxEvals : OptStatus::Aborted;
        result.message = "no finite objective value found during bootstrap";
        if (result.x.empty()) {
            result.x.assign(x0.begin(), x0.end());
            bounds.clamp(result.x);
        }
        return result;
    }

    // Exploration directions for flat-model situations: both corners of the
    // trust-region box first, then the coordinate directions.
    std::vector<std::vector<double>> explore_dirs;
    explore_dirs.emplace_back(n, 1.0);
    explore_dirs.emplace_back(n, -1.0);
    for (int k = 0; k < n; ++k) {
        std::vector<double> e(n, 0.0);
        e[k] = 1.0;
        explore_dirs.push_back(e);
        e[k] = -1.0;
        explore_dirs.push_back(std::move(e));
    }
    int explored = 0;
    double last_radius = radius;

    // Two-scale trust-region discipline: the working radius adapts per step
    // but never falls below the resolution rho; rho drops by a factor of 10
    // only once progress at the current resolution is exhausted. Keeping
    // early steps at the initial scale lets the search hop between basins
    // instead of polishing the first one it touches.
    double rho = config.initial_radius;
    int consecutive_failures = 0;
    bool resolution_done = false;
    auto lower_resolution = [&]() {
        if (rho <= config.tol_step) {
            resolution_done = true;
            return;
        }
        rho = std::max(rho * 0.1, config.tol_step * 0.99);
        radius = rho;
        consecutive_failures = 0;
    };
    auto shrink_radius = [&]() {
        if (radius > rho)
            radius = std::max(radius * 0.5, rho);
        else
            ++consecutive_failures;
        if (radius <= rho && consecutive_failures >= 3) lower_resolution();
    };

    int geometry_counter = 0;
    while (!rec.exhausted()) {
        if (radius != last_radius) {
            explored = 0;
            last_radius = radius;
        }
        if (resolution_done || rho <= config.tol_step) {
            result.status = OptStatus::StepConverged;
            result.message = "trust-region radius below tol_step";
            return result;
        }

        // Centre the model on the best point seen so far.
        const auto& xb = result.x;
        const double fb = result.value;
        const double scale = std::max(radius, 1e-12);

        // Keep the q points closest to the centre (always keeping the best).
        if (static_cast<int>(xs.size()) > q) {
            std::vector<int> order(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) order[i] = static_cast<int>(i);
            auto dist = [&](int i) {
                double d2 = 0.0;
                for (int k = 0; k < n; ++k) d2 += (xs[i][k] - xb[k]) * (xs[i][k] - xb[k]);
                return d2;
            };
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return dist(a) < dist(b); });
            std::vector<std::vector<double>> nxs;
            std::vector<double> nfs;
            for (int i = 0; i < q; ++i) {
                nxs.push_back(xs[order[i]]);
                nfs.push_back(fs[order[i]]);
            }
            xs = std::move(nxs);
            fs = std::move(nfs);
        }

        QuadraticModel model;
        bool fitted = false;
        if (static_cast<int>(xs.size()) == q) {
            std::vector<std::vector<double>> us(q, std::vector<double>(n));
            for (int r = 0; r < q; ++r)
                for (int k = 0; k < n; ++k) us[r][k] = (xs[r][k] - xb[k]) / scale;
            fitted = fit_quadratic(us, fs, model);
        }
        if (!fitted) {
            // Degenerate or incomplete set: rebuild the geometry around the best point.
            std::vector<double> centre = xb;
            const double centre_value = fb;
            bootstrap(centre, radius, centre_value);
            if (rec.exhausted()) break;
            if (++geometry_counter > 64) {
                result.status = OptStatus::StepConverged;
                result.message = "interpolation set degenerate";
                return result;
            }
            continue;
        }

        std::vector<double> lo(n), hi(n);
        for (int k = 0; k < n; ++k) {
            lo[k] = (std::max(bounds.lo[k], xb[k] - radius) - xb[k]) / scale;
            hi[k] = (std::min(bounds.hi[k], xb[k] + radius) - xb[k]) / scale;
        }
        const std::vector<double> ustar = minimize_model_in_box(model, lo, hi);
        const double predicted = model.eval(std::vector<double>(n, 0.0)) - model.eval(ustar);

        std::vector<double> xtrial(n);
        for (int k = 0; k < n; ++k) xtrial[k] = xb[k] + ustar[k] * scale;
        bounds.clamp(xtrial);
        std::vector<double> step(n);
        for (int k = 0; k < n; ++k) step[k] = xtrial[k] - xb[k];

        if (predicted <= config.tol_obj * std::max(1.0, std::abs(fb)) || inf_norm(step) == 0.0 ||
            contains(xtrial)) {
            // The model sees nothing useful at this radius. While the radius
            // is still of the same order as the initial one, probe a
            // deterministic direction cycle (box corner first, then the
            // axes): flat-looking landscapes such as a collapsed lengthscale
            // are often flat along every axis but not diagonally. Once the
            // radius has contracted far below the initial scale this is a
            // converged bowl, not a plateau, and probing would only burn
            // evaluations.
            const bool plateau_scale = radius > 0.05 * config.initial_radius;
            bool probed = false;
            while (plateau_scale && explored < static_cast<int>(explore_dirs.size()) &&
                   !rec.exhausted()) {
                const auto& dir = explore_dirs[explored++];
                std::vector<double> xe(n);
                for (int k = 0; k < n; ++k) xe[k] = xb[k] + radius * dir[k];
                bounds.clamp(xe);
                if (xe == xb || contains(xe)) continue;
                auto [px, pf] = evaluate(xe);
                probed = true;
                if (std::isfinite(pf)) {
                    int far_idx = -1;
                    double far_d = -1.0;
                    for (std::size_t i = 0; i < xs.size(); ++i) {
                        if (xs[i] == result.x) continue;
                        double d2 = 0.0;
                        for (int k = 0; k < n; ++k)
                            d2 += (xs[i][k] - xb[k]) * (xs[i][k] - xb[k]);
                        if (d2 > far_d) {
                            far_d = d2;
                            far_idx = static_cast<int>(i);
                        }
                    }
                    if (far_idx >= 0) {
                        xs[far_idx] = px;
                        fs[far_idx] = pf;
                    } else {
                        insert_point(px, pf);
                    }
                    if (pf < fb) explored = 0;  // new best: restart the cycle
                }
                break;
            }
            if (!probed) {
                if (radius > rho)
                    radius = std::max(radius * 0.5, rho);
                else
                    lower_resolution();
                explored = 0;
            }
            continue;
        }

        auto [xt, ft] = evaluate(xtrial);
        if (!std::isfinite(ft)) {
            shrink_radius();  // rejected trial point
            continue;
        }
        const double ratio = (fb - ft) / predicted;
        if (ft < fb) {
            explored = 0;
            consecutive_failures = 0;
        }

        // Replace the point farthest from the best with the trial.
        int worst = -1;
        double worst_d = -1.0;
        const auto& anchor = (ft < fb) ? xt : xb;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] == result.x && ft >= fb) continue;  // keep the incumbent best
            double d2 = 0.0;
            for (int k = 0; k < n; ++k) d2 += (xs[i][k] - anchor[k]) * (xs[i][k] - anchor[k]);
            if (d2 > worst_d) {
                worst_d = d2;
                worst = static_cast<int>(i);
            }
        }
        if (worst >= 0) {
            xs[worst] = xt;
            fs[worst] = ft;
        } else {
            insert_point(xt, ft);
        }

        const bool on_boundary = inf_norm(ustar) >= 0.9 * radius / scale;
        if (ratio >= 0.7 && on_boundary)
            radius = std::min(radius * 2.0, 1e6);
        else if (ratio < 0.1)
            shrink_radius();
    }
    result.status = OptStatus::MaxEvals;
    result.message = "evaluation budget exhausted";
    return result;
}

}  // namespace gpmesh
