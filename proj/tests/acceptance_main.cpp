// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "gpmesh/diffusion.hpp"
#include "gpmesh/experiment.hpp"
#include "gpmesh/gpr.hpp"
#include "gpmesh/mesh.hpp"
#include "gpmesh/results_io.hpp"

using namespace gpmesh;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

struct Timer {
    clock_type::time_point start = clock_type::now();
    double seconds() const {
        return std::chrono::duration<double>(clock_type::now() - start).count();
    }
};

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

StructuredMesh random_positive_mesh(const std::vector<int>& shape, std::mt19937_64& rng) {
    std::vector<std::vector<double>> coords(shape.size());
    std::size_t total = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        coords[k].resize(shape[k]);
        for (int i = 0; i < shape[k]; ++i) coords[k][i] = i;
        total *= shape[k];
    }
    std::vector<double> values(total);
    for (auto& v : values) v = uniform(rng, 0.05, 1.0);
    return StructuredMesh(coords, std::move(values));
}

double max_sensor_diff(const SensorField& a, const SensorField& b) {
    double worst = 0;
    for (std::size_t p = 0; p < a.per_diagonal.size(); ++p)
        for (std::size_t i = 0; i < a.per_diagonal[p].size(); ++i)
            worst = std::max(worst, std::abs(a.per_diagonal[p][i] - b.per_diagonal[p][i]));
    for (std::size_t i = 0; i < a.total.size(); ++i)
        worst = std::max(worst, std::abs(a.total[i] - b.total[i]));
    return worst;
}

std::vector<double> cell_means(const StructuredMesh& mesh) {
    const int d = mesh.dims();
    std::vector<int> sshape(mesh.shape());
    for (auto& n : sshape) --n;
    std::size_t total = 1;
    for (int n : sshape) total *= n;
    std::vector<double> out(total);
    std::vector<int> idx(d, 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
        double sum = 0;
        for (int corner = 0; corner < (1 << d); ++corner) {
            std::vector<int> c(idx);
            for (int k = 0; k < d; ++k) c[k] += (corner >> k) & 1;
            sum += mesh.values()[mesh.linear_index(c)];
        }
        out[lin] = sum / static_cast<double>(1 << d);
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[k] < sshape[k]) break;
            idx[k] = 0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void criterion_1_sensor_oracle() {
    Timer timer;
    std::mt19937_64 rng(101);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 2);
        std::vector<int> shape;
        for (int k = 0; k < d; ++k) shape.push_back(3 + static_cast<int>(rng() % 4));
        const StructuredMesh mesh = random_positive_mesh(shape, rng);
        worst = std::max(worst, max_sensor_diff(sensor_true_md(mesh), ref::sensor_true_md(mesh)));
        std::vector<int> sshape(shape);
        for (auto& n : sshape) --n;
        const StructuredMesh stag = random_positive_mesh(sshape, rng);
        worst = std::max(worst, max_sensor_diff(
                                    sensor_staggered_md(mesh.values(), shape, stag.values()),
                                    ref::sensor_staggered_md(mesh.values(), shape, stag.values())));
    }
    const double secs = timer.seconds();
    report(1, "vectorized sensors match the naive loop oracle",
           worst <= 1e-14 && secs < 10.0,
           "max diff " + fmt(worst) + " <= 1e-14 over 50 random fields, d in {2,3}; " +
               fmt(secs) + "s < 10s");
}

void criterion_2_affine_annihilation() {
    Timer timer;
    double worst = 0;
    for (const auto& shape : std::vector<std::vector<int>>{{9}, {6, 7}, {5, 4, 6}}) {
        const int d = static_cast<int>(shape.size());
        std::vector<std::vector<double>> coords(d);
        std::size_t total = 1;
        for (int k = 0; k < d; ++k) {
            coords[k].resize(shape[k]);
            for (int i = 0; i < shape[k]; ++i) coords[k][i] = i;
            total *= shape[k];
        }
        std::vector<double> values(total);
        std::vector<int> idx(d, 0);
        for (std::size_t lin = 0; lin < total; ++lin) {
            double v = 2.0;
            for (int k = 0; k < d; ++k) v += (0.11 + 0.07 * k) * idx[k];
            values[lin] = v;
            for (int k = d - 1; k >= 0; --k) {
                if (++idx[k] < shape[k]) break;
                idx[k] = 0;
            }
        }
        const StructuredMesh mesh(coords, values);
        for (double v : sensor_true_md(mesh).total) worst = std::max(worst, v);
        const auto stag_values = cell_means(mesh);
        for (double v : sensor_staggered_md(mesh.values(), shape, stag_values).total)
            worst = std::max(worst, v);
    }
    const double secs = timer.seconds();
    report(2, "both sensors annihilate affine fields for d in {1,2,3}",
           worst <= 1e-12 && secs < 1.0,
           "max sensor value " + fmt(worst) + " <= 1e-12; " + fmt(secs) + "s < 1s");
}

void criterion_3_hand_values() {
    const auto true_val = sensor_1d_true(std::vector<double>{1, 2, 5}, 1.0);
    const auto stag_val =
        sensor_1d_staggered(std::vector<double>{1, 2, 1}, std::vector<double>{2, 2}, 1.0);
    const double err_true = std::abs(true_val[0] - 0.2);
    const double err_stag = std::abs(stag_val[0] - 4.0 / 9.0);
    report(3, "hand values: true sensor 0.2 and staggered wiggle 4/9",
           err_true <= 1e-15 && err_stag <= 1e-15,
           "|" + fmt(true_val[0]) + " - 0.2| = " + fmt(err_true) + ", |" + fmt(stag_val[0]) +
               " - 4/9| = " + fmt(err_stag) + ", both <= 1e-15");
}

void criterion_4_noiseless_interpolation() {
    Timer timer;
    auto [raw, truth] = generate_synthetic_dataset(std::vector<int>{19, 15, 5}, 7);
    auto [mesh, record] = normalize_mesh(raw, 0.05);
    KernelSpec spec;
    spec.params.sigma = 0.15;
    spec.params.lengthscales = {1.0, 1.0, 1.0};
    std::string detail;
    bool pass = false;
    try {
        const GPModel model = fit(mesh.points(), mesh.values(), spec, 1e-10);  // no escalation
        const auto pred = predict_at_train(model);
        double worst = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            worst = std::max(worst, std::abs(pred[i] - mesh.values()[i]));
        const double secs = timer.seconds();
        pass = worst <= 1e-5 && secs < 60.0;
        detail = "max training-point error " + fmt(worst) + " <= 1e-5 at jitter 1e-10; " +
                 fmt(secs) + "s < 60s";
    } catch (const std::exception& e) {
        detail = std::string("fit failed: ") + e.what();
    }
    report(4, "noiseless interpolation on the 19x15x5 dataset", pass, detail);
}

void criterion_5_gradient_check() {
    Timer timer;
    std::mt19937_64 rng(505);
    PointSet pts(3);
    std::vector<double> values;
    for (int i = 0; i < 30; ++i) {
        for (int k = 0; k < 3; ++k) pts.coords.push_back(uniform(rng, 0.0, 3.0));
        values.push_back(uniform(rng, 0.1, 1.0));
    }
    double worst = 0;
    for (int draw = 0; draw < 20; ++draw) {
        KernelSpec spec;
        spec.kind = draw % 2 == 0 ? KernelKind::SquaredExponential : KernelKind::RationalQuadratic;
        spec.params.sigma = 0.15;
        spec.params.lengthscales = {uniform(rng, 0.4, 2.5), uniform(rng, 0.4, 2.5),
                                    uniform(rng, 0.4, 2.5)};
        if (spec.kind == KernelKind::RationalQuadratic) spec.params.alpha = uniform(rng, 0.5, 5.0);
        spec.train_sigma = draw % 3 == 0;
        const double noise = 1e-8;
        const auto analytic = lml_gradient(fit(pts, values, spec, noise));
        const auto packed = pack_log(spec);
        const double h = 1e-5;
        double err2 = 0, ref2 = 0;
        for (std::size_t j = 0; j < packed.size(); ++j) {
            auto plus = packed, minus = packed;
            plus[j] += h;
            minus[j] -= h;
            const double fp =
                log_marginal_likelihood(fit(pts, values, unpack_log(spec, plus), noise)).total;
            const double fm =
                log_marginal_likelihood(fit(pts, values, unpack_log(spec, minus), noise)).total;
            const double fd = (fp - fm) / (2.0 * h);
            err2 += (fd - analytic[j]) * (fd - analytic[j]);
            ref2 += fd * fd;
        }
        worst = std::max(worst, std::sqrt(err2) / std::max(std::sqrt(ref2), 1e-12));
    }
    const double secs = timer.seconds();
    report(5, "analytic LML gradient matches central finite differences",
           worst <= 1e-4 && secs < 30.0,
           "worst relative error " + fmt(worst) + " <= 1e-4 over 20 draws; " + fmt(secs) +
               "s < 30s");
}

struct GridOutcome {
    std::vector<RunResult> results;
    double seconds = 0;
};

GridOutcome run_se_grid() {
    ExperimentConfig cfg;  // defaults: 19x15x5 seed 7, 6 lengthscale inits, both methods
    cfg.kernels = {KernelKind::SquaredExponential};
    auto [raw, truth] = generate_synthetic_dataset(cfg.dataset.shape, cfg.dataset.seed);
    const TrainingInputs inputs = prepare_training_inputs(raw, cfg);
    Timer timer;
    GridOutcome out;
    out.results = run_grid(inputs, cfg, [](const RunResult& r) {
        std::printf("    %-22s %-8s rmse_diffusion=%-12s evals=%d\n", r.plan.run_id.c_str(),
                    r.status.c_str(), fmt(r.final_loss.rmse_diffusion).c_str(), r.evals);
        std::fflush(stdout);
    });
    out.seconds = timer.seconds();
    return out;
}

void criteria_6_7_8(const GridOutcome& grid) {
    const auto& results = grid.results;
    std::vector<double> inits{0.01, 0.1, 0.5, 1.0, 5.0, 10.0};

    // --- criterion 6: per-init comparison and geometric-mean ratio ---
    bool all_le = true;
    std::vector<double> ratios;
    for (double init : inits) {
        const RunResult* lml = nullptr;
        const RunResult* diff = nullptr;
        for (const auto& r : results) {
            if (r.plan.lengthscale_init != init) continue;
            (r.plan.method == TrainMethod::Lml ? lml : diff) = &r;
        }
        if (!lml || !diff || lml->status != "ok" || diff->status != "ok") {
            all_le = false;
            continue;
        }
        const double rl = lml->final_loss.rmse_diffusion;
        const double rd = diff->final_loss.rmse_diffusion;
        if (!(rd <= rl)) all_le = false;
        if (std::isfinite(rl) && std::isfinite(rd) && rl > 0) ratios.push_back(rd / rl);
    }
    double geomean = std::numeric_limits<double>::infinity();
    if (!ratios.empty()) {
        double s = 0;
        for (double r : ratios) s += std::log(r);
        geomean = std::exp(s / static_cast<double>(ratios.size()));
    }
    report(6, "diffusion training never loses on rmse_diffusion, geomean ratio <= 0.8",
           all_le && geomean <= 0.8 && grid.seconds < 600.0,
           std::string(all_le ? "all inits <=" : "an init violates <=") + "; geomean " +
               fmt(geomean) + " <= 0.8; grid " + fmt(grid.seconds) + "s < 600s");

    // --- criterion 7: initialization robustness of the final lengthscales ---
    auto mean_cv = [&](TrainMethod method) {
        const int dims = 3;
        double cv_sum = 0;
        for (int axis = 0; axis < dims; ++axis) {
            std::vector<double> finals;
            for (const auto& r : results)
                if (r.plan.method == method && r.status == "ok")
                    finals.push_back(r.final_spec.params.lengthscales[axis]);
            double mean = 0;
            for (double v : finals) mean += v;
            mean /= static_cast<double>(finals.size());
            double var = 0;
            for (double v : finals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(finals.size());
            cv_sum += std::sqrt(var) / mean;
        }
        return cv_sum / dims;
    };
    const double cv_lml = mean_cv(TrainMethod::Lml);
    const double cv_diff = mean_cv(TrainMethod::Diffusion);
    report(7, "final lengthscales vary less across inits for the diffusion method",
           cv_diff < cv_lml,
           "mean per-axis CV " + fmt(cv_diff) + " (diffusion) < " + fmt(cv_lml) + " (LML)");

    // --- criterion 8: training-floor behaviour ---
    double diff_max_tr = 0, diff_min_tr = std::numeric_limits<double>::infinity();
    double lml_max_tr = 0;
    bool all_ok = true;
    for (const auto& r : results) {
        if (r.status != "ok") {
            all_ok = false;
            continue;
        }
        if (r.plan.method == TrainMethod::Diffusion) {
            diff_max_tr = std::max(diff_max_tr, r.final_loss.rmse_training);
            diff_min_tr = std::min(diff_min_tr, r.final_loss.rmse_training);
        } else {
            lml_max_tr = std::max(lml_max_tr, r.final_loss.rmse_training);
        }
    }
    report(8, "diffusion rmse_training sits on a small positive floor, LML interpolates",
           all_ok && diff_min_tr > 0.0 && diff_max_tr <= 1e-2 && lml_max_tr <= 1e-5,
           "diffusion rmse_training in [" + fmt(diff_min_tr) + ", " + fmt(diff_max_tr) +
               "] subset of (0, 1e-2]; LML max " + fmt(lml_max_tr) + " <= 1e-5");
}

void criterion_9_diagonal_coordinate_relation() {
    // On 2-d quadratics the undivided second differences summed over the two
    // centre-crossing diagonals equal exactly twice the coordinate-direction
    // sum. Both sides are computed here by direct stencil arithmetic.
    std::mt19937_64 rng(909);
    double worst = 0;
    const auto diagonals = enumerate_diagonals(2);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1), c = uniform(rng, -1, 1);
        const double d = uniform(rng, -1, 1), e = uniform(rng, -1, 1), f = uniform(rng, 2, 3);
        auto y = [&](int i, int j) {
            return a * i * i + b * j * j + c * i * j + d * i + e * j + f;
        };
        for (int i = 1; i < 6; ++i)
            for (int j = 1; j < 5; ++j) {
                double diag_sum = 0;
                for (const auto& diag : diagonals) {
                    const int oi = diag.offsets[0], oj = diag.offsets[1];
                    diag_sum += y(i + oi, j + oj) - 2.0 * y(i, j) + y(i - oi, j - oj);
                }
                const double coord_sum = (y(i + 1, j) - 2.0 * y(i, j) + y(i - 1, j)) +
                                         (y(i, j + 1) - 2.0 * y(i, j) + y(i, j - 1));
                worst = std::max(worst, std::abs(diag_sum - 2.0 * coord_sum));
            }
    }
    report(9, "2-d diagonal second differences equal twice the coordinate sum on quadratics",
           worst <= 1e-12, "max |diagonal - 2 x coordinate| = " + fmt(worst) + " <= 1e-12");
}

void criterion_10_determinism() {
    Timer timer;
    ExperimentConfig cfg;
    cfg.kernels = {KernelKind::SquaredExponential};
    cfg.dataset.shape = {9, 8, 5};  // reduced size keeps the double run affordable
    cfg.dataset.seed = 7;
    cfg.include_timings = false;
    auto [raw, truth] = generate_synthetic_dataset(cfg.dataset.shape, cfg.dataset.seed);
    const TrainingInputs inputs = prepare_training_inputs(raw, cfg);

    const fs::path dir = fs::temp_directory_path() / "gpmesh_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
        const std::vector<RunResult> results = run_grid(inputs, cfg);
        const fs::path summary = dir / ("summary" + std::to_string(rep) + ".csv");
        write_summary_csv(results, cfg, summary);
        std::ifstream in(summary, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        bytes[rep] = ss.str();
    }
    const bool pass = !bytes[0].empty() && bytes[0] == bytes[1];
    report(10, "repeated full-grid runs produce byte-identical summary.csv", pass,
           std::string(pass ? "12-run SE grid summaries identical"
                            : "summaries differ between repeats") +
               "; " + fmt(timer.seconds()) + "s");
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1_sensor_oracle();
    criterion_2_affine_annihilation();
    criterion_3_hand_values();
    criterion_4_noiseless_interpolation();
    criterion_5_gradient_check();
    std::printf("  running the SE initialization grid (criteria 6-8)...\n");
    const GridOutcome grid = run_se_grid();
    criteria_6_7_8(grid);
    criterion_9_diagonal_coordinate_relation();
    criterion_10_determinism();
    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria failed\n", failures);
    return failures;
}
