#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpmesh/diffusion.hpp"
#include "gpmesh/errors.hpp"
#include "gpmesh/experiment.hpp"

using namespace gpmesh;

namespace {

// small, fast configuration used for the executed-grid tests
ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.dataset.synthetic = true;
    cfg.dataset.shape = {7, 6, 4};
    cfg.dataset.seed = 7;
    cfg.lengthscale_inits = {0.1, 1.0};
    cfg.methods = {TrainMethod::Lml, TrainMethod::Diffusion};
    cfg.kernels = {KernelKind::SquaredExponential};
    cfg.quasi_newton.max_evals = 200;
    cfg.dfo.max_evals = 300;
    cfg.dfo.tol_step = 1e-6;
    return cfg;
}

struct TinyGrid {
    StructuredMesh raw;
    TrainingInputs inputs;
    ExperimentConfig cfg;
};

TinyGrid make_tiny_grid() {
    ExperimentConfig cfg = tiny_config();
    auto [raw, truth] = generate_synthetic_dataset(cfg.dataset.shape, cfg.dataset.seed);
    TrainingInputs inputs = prepare_training_inputs(raw, cfg);
    return {std::move(raw), std::move(inputs), std::move(cfg)};
}

}  // namespace

TEST_CASE("synthetic dataset is deterministic in the seed") {
    const std::vector<int> shape{9, 8, 4};
    auto [a, ta] = generate_synthetic_dataset(shape, 42);
    auto [b, tb] = generate_synthetic_dataset(shape, 42);
    CHECK(a.values() == b.values());
    auto [c, tc] = generate_synthetic_dataset(shape, 43);
    CHECK(a.values() != c.values());
}

TEST_CASE("synthetic values lie in (0, 1]") {
    auto [mesh, truth] = generate_synthetic_dataset(std::vector<int>{19, 15, 5}, 7);
    CHECK(mesh.size() == 1425);
    for (double v : mesh.values()) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("stored truth reproduces the dataset values") {
    auto [mesh, truth] = generate_synthetic_dataset(std::vector<int>{6, 5, 4}, 11);
    std::vector<int> idx(3, 0);
    for (std::size_t lin = 0; lin < mesh.size(); ++lin) {
        std::vector<double> pt(3);
        for (int k = 0; k < 3; ++k) pt[k] = mesh.axis_coords(k)[idx[k]];
        CHECK(truth.evaluate(pt) == doctest::Approx(mesh.values()[lin]).epsilon(1e-12));
        for (int k = 2; k >= 0; --k) {
            if (++idx[k] < mesh.shape()[k]) break;
            idx[k] = 0;
        }
    }
}

TEST_CASE("true-label sensor concentrates near the fast front") {
    auto [raw, truth] = generate_synthetic_dataset(std::vector<int>{19, 15, 5}, 7);
    auto [mesh, rec] = normalize_mesh(raw, 0.05);
    const SensorField field = sensor_true_md(mesh);
    // rank interior nodes by total sensor value and look at the top decile
    std::vector<std::size_t> order(field.total.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return field.total[a] > field.total[b]; });
    const std::size_t decile = order.size() / 10;
    const int n2 = field.interior_shape[1];
    const double front = truth.c2 * 14.0;  // axis-2 front centre in index units
    int near = 0;
    for (std::size_t r = 0; r < decile; ++r) {
        const std::size_t lin = order[r];
        const int i2 = 1 + static_cast<int>((lin / field.interior_shape[2]) % n2);
        if (std::abs(i2 - front) <= 2.5) ++near;
    }
    CHECK(near >= static_cast<int>(0.8 * decile));
    // and the top decile is sharply above the field average
    double mean = 0;
    for (double v : field.total) mean += v;
    mean /= static_cast<double>(field.total.size());
    CHECK(field.total[order[0]] > 5.0 * mean);
}

TEST_CASE("plan_runs enumerates the cartesian product") {
    ExperimentConfig cfg;
    SUBCASE("SE grid, both methods, 6 inits -> 12 runs") {
        cfg.kernels = {KernelKind::SquaredExponential};
        CHECK(plan_runs(cfg).size() == 12);
    }
    SUBCASE("SE-only LML-only -> 6 runs") {
        cfg.kernels = {KernelKind::SquaredExponential};
        cfg.methods = {TrainMethod::Lml};
        CHECK(plan_runs(cfg).size() == 6);
    }
    SUBCASE("full default config -> 12 SE + 72 RQ") {
        cfg.kernels = {KernelKind::SquaredExponential, KernelKind::RationalQuadratic};
        const auto plans = plan_runs(cfg);
        CHECK(plans.size() == 84);
        int se = 0, rq = 0;
        for (const auto& p : plans) (p.kernel == KernelKind::SquaredExponential ? se : rq)++;
        CHECK(se == 12);
        CHECK(rq == 72);
    }
    SUBCASE("empty method set -> empty run list") {
        cfg.methods = {};
        CHECK(plan_runs(cfg).empty());
    }
    SUBCASE("run ids are unique") {
        cfg.kernels = {KernelKind::SquaredExponential, KernelKind::RationalQuadratic};
        auto plans = plan_runs(cfg);
        std::vector<std::string> ids;
        for (const auto& p : plans) ids.push_back(p.run_id);
        std::sort(ids.begin(), ids.end());
        CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    }
}

TEST_CASE("lml training: stall at tiny init, shared basin from large inits") {
    const TinyGrid grid = make_tiny_grid();
    const KernelSpec tiny = initial_spec_for(
        RunPlan{KernelKind::SquaredExponential, TrainMethod::Lml, 0.01, {}, "t"}, 3, grid.cfg);
    const RunResult stall = run_lml_training(grid.inputs, tiny, grid.cfg);
    CHECK(stall.status == "ok");
    for (double l : stall.final_spec.params.lengthscales) CHECK(l < 0.05);  // stayed short

    const KernelSpec unit = initial_spec_for(
        RunPlan{KernelKind::SquaredExponential, TrainMethod::Lml, 1.0, {}, "u"}, 3, grid.cfg);
    const RunResult good = run_lml_training(grid.inputs, unit, grid.cfg);
    CHECK(good.status == "ok");
    CHECK(good.final_loss.rmse_diffusion < stall.final_loss.rmse_diffusion);
    CHECK(good.final_lml.total > stall.final_lml.total);
}

TEST_CASE("grid results: reproducibility, order independence, method comparison") {
    const TinyGrid grid = make_tiny_grid();
    const std::vector<RunResult> results = run_grid(grid.inputs, grid.cfg);
    REQUIRE(results.size() == 4);
    for (const auto& r : results) CHECK(r.status == "ok");

    SUBCASE("final loss is recomputable from final params") {
        for (const auto& r : results) {
            const GPModel model =
                fit_with_jitter_escalation(grid.inputs.mesh.points(), grid.inputs.mesh.values(),
                                           r.final_spec, grid.cfg.noise);
            const LossReport again =
                diffusion_loss(model, grid.inputs.mesh, grid.inputs.staggered,
                               grid.inputs.true_label, grid.cfg.beta1, grid.cfg.beta2,
                               grid.inputs.selection(), grid.inputs.sensor_options);
            CHECK(std::abs(again.total - r.final_loss.total) <= 1e-10);
            const LmlTerms lml = log_marginal_likelihood(model);
            CHECK(std::abs(lml.total - r.final_lml.total) <= 1e-10);
        }
    }

    SUBCASE("diffusion-trained rmse_diffusion <= LML-trained, per shared init") {
        for (double init : grid.cfg.lengthscale_inits) {
            const RunResult* lml = nullptr;
            const RunResult* diff = nullptr;
            for (const auto& r : results) {
                if (r.plan.lengthscale_init != init) continue;
                (r.plan.method == TrainMethod::Lml ? lml : diff) = &r;
            }
            REQUIRE(lml != nullptr);
            REQUIRE(diff != nullptr);
            CHECK(diff->final_loss.rmse_diffusion <= lml->final_loss.rmse_diffusion);
        }
    }

    SUBCASE("histories align with their component records") {
        for (const auto& r : results) {
            CHECK(r.history.evals.size() == r.history_components.size());
            if (r.plan.method == TrainMethod::Diffusion) {
                // diffusion objective records both components on finite evals
                bool any = false;
                for (std::size_t i = 0; i < r.history.evals.size(); ++i)
                    if (std::isfinite(r.history_components[i].first)) any = true;
                CHECK(any);
            }
            // best-so-far monotonicity over accepted iterates
            double best = std::numeric_limits<double>::infinity();
            for (const auto& rec : r.history.evals) {
                if (!rec.accepted) continue;
                CHECK(rec.value < best);
                best = rec.value;
            }
        }
    }

    SUBCASE("concurrent execution yields identical outputs") {
        ExperimentConfig cfg2 = grid.cfg;
        cfg2.jobs = 2;
        const std::vector<RunResult> parallel = run_grid(grid.inputs, cfg2);
        REQUIRE(parallel.size() == results.size());
        for (std::size_t i = 0; i < results.size(); ++i) {
            CHECK(parallel[i].plan.run_id == results[i].plan.run_id);
            CHECK(parallel[i].final_spec.params.lengthscales ==
                  results[i].final_spec.params.lengthscales);
            CHECK(parallel[i].final_loss.total == results[i].final_loss.total);
            CHECK(parallel[i].final_lml.total == results[i].final_lml.total);
            CHECK(parallel[i].evals == results[i].evals);
        }
    }
}

TEST_CASE("slice_predictions") {
    const TinyGrid grid = make_tiny_grid();
    const KernelSpec spec = initial_spec_for(
        RunPlan{KernelKind::SquaredExponential, TrainMethod::Lml, 1.0, {}, "s"}, 3, grid.cfg);
    const GPModel model = fit_with_jitter_escalation(
        grid.inputs.mesh.points(), grid.inputs.mesh.values(), spec, grid.cfg.noise);

    SUBCASE("training plane rows carry the training values") {
        // fix axes 0 and 2 at grid coordinates -> the line passes training nodes
        const std::map<int, double> fixed{{0, grid.raw.axis_coords(0)[3]},
                                          {2, grid.raw.axis_coords(2)[1]}};
        const SliceTable table =
            slice_predictions(model, grid.raw, grid.inputs.normalization, fixed, 4);
        int training_rows = 0;
        for (const auto& row : table.rows) {
            if (!std::isfinite(row.train_value)) continue;
            ++training_rows;
            CHECK(row.mean == doctest::Approx(row.train_value).epsilon(2e-4));
        }
        CHECK(training_rows == grid.raw.shape()[1]);
    }

    SUBCASE("dense_factor 1 emits exactly the training-line coordinates") {
        const std::map<int, double> fixed{{0, grid.raw.axis_coords(0)[2]},
                                          {2, grid.raw.axis_coords(2)[0]}};
        const SliceTable table =
            slice_predictions(model, grid.raw, grid.inputs.normalization, fixed, 1);
        REQUIRE(table.rows.size() == static_cast<std::size_t>(grid.raw.shape()[1]));
        for (std::size_t i = 0; i < table.rows.size(); ++i)
            CHECK(table.rows[i].coord == doctest::Approx(grid.raw.axis_coords(1)[i]));
    }

    SUBCASE("off-plane fixed coordinates yield no training values") {
        const std::map<int, double> fixed{{0, 0.5 * (grid.raw.axis_coords(0)[0] +
                                                     grid.raw.axis_coords(0)[1])},
                                          {2, grid.raw.axis_coords(2)[1]}};
        const SliceTable table =
            slice_predictions(model, grid.raw, grid.inputs.normalization, fixed, 2);
        for (const auto& row : table.rows) CHECK_FALSE(std::isfinite(row.train_value));
    }

    SUBCASE("out-of-range fixed coordinates are rejected") {
        const std::map<int, double> fixed{{0, -100.0}, {2, 0.0}};
        CHECK_THROWS_AS(slice_predictions(model, grid.raw, grid.inputs.normalization, fixed, 2),
                        validation_error);
    }

    SUBCASE("wrong number of fixed axes is rejected") {
        const std::map<int, double> fixed{{0, 0.0}};
        CHECK_THROWS_AS(slice_predictions(model, grid.raw, grid.inputs.normalization, fixed, 2),
                        validation_error);
    }
}

TEST_CASE("an overfit model wiggles along the dense slice") {
    // 1-d line of affine data: a smooth fit stays straight, a forced short
    // lengthscale rings between the training points
    std::vector<std::vector<double>> coords{{}};
    std::vector<double> values;
    for (int i = 0; i < 16; ++i) {
        coords[0].push_back(i);
        values.push_back(0.2 + 0.04 * i);
    }
    const StructuredMesh raw(coords, values);
    ExperimentConfig cfg;
    const TrainingInputs inputs = prepare_training_inputs(raw, cfg);
    const auto fit_at = [&](double lengthscale) {
        KernelSpec spec;
        spec.params.sigma = 0.15;
        spec.params.lengthscales = {lengthscale};
        return fit_with_jitter_escalation(inputs.mesh.points(), inputs.mesh.values(), spec,
                                          cfg.noise);
    };
    const std::map<int, double> fixed;  // d = 1: the only axis stays free
    const GPModel overfit = fit_at(0.05);
    const GPModel smooth = fit_at(1.5);
    const SliceTable wiggly = slice_predictions(overfit, raw, inputs.normalization, fixed, 8);
    const SliceTable calm = slice_predictions(smooth, raw, inputs.normalization, fixed, 8);
    std::vector<double> wv, cv;
    for (const auto& r : wiggly.rows) wv.push_back(r.mean);
    for (const auto& r : calm.rows) cv.push_back(r.mean);
    const double eps = 1e-3;  // interpolation-level curvature does not count
    const int wiggles = count_curvature_sign_changes(wv, eps);
    const int calm_wiggles = count_curvature_sign_changes(cv, eps);
    CHECK(wiggles > 10);
    CHECK(calm_wiggles <= 2);
}

TEST_CASE("count_curvature_sign_changes basics") {
    // parabola: constant curvature, no alternation
    std::vector<double> parabola;
    for (int i = 0; i < 20; ++i) parabola.push_back(0.1 * i * i);
    CHECK(count_curvature_sign_changes(parabola) == 0);
    // alternating saw: curvature flips at every interior sample
    std::vector<double> saw;
    for (int i = 0; i < 20; ++i) saw.push_back(i % 2 == 0 ? 0.0 : 1.0);
    CHECK(count_curvature_sign_changes(saw) == 17);
    CHECK(count_curvature_sign_changes(std::vector<double>{1.0, 2.0}) == 0);
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg;
    cfg.sigma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = ExperimentConfig{};
    cfg.lengthscale_inits = {};
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = ExperimentConfig{};
    cfg.kernels = {KernelKind::RationalQuadratic};
    cfg.alpha_inits = {};
    CHECK_THROWS_AS(cfg.validate(), validation_error);
}
