#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpmesh/config.hpp"
#include "gpmesh/diffusion.hpp"
#include "gpmesh/errors.hpp"
#include "gpmesh/experiment.hpp"
#include "gpmesh/gpr.hpp"
#include "gpmesh/io.hpp"
#include "gpmesh/mesh.hpp"
#include "gpmesh/results_io.hpp"
#include "gpmesh/svg.hpp"

namespace fs = std::filesystem;
using namespace gpmesh;

namespace {

std::vector<int> parse_shape(const std::string& text) {
    std::vector<int> shape;
    std::string cur;
    for (char ch : text + "x") {
        if (ch == 'x' || ch == 'X') {
            if (cur.empty()) throw validation_error("bad shape \"" + text + "\"");
            shape.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (shape.empty()) throw validation_error("bad shape \"" + text + "\"");
    for (int n : shape)
        if (n < 2) throw validation_error("shape axes need at least 2 points");
    return shape;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string cur;
    for (char ch : text + ",") {
        if (ch == ',') {
            double v = 0;
            if (!parse_double(cur, v)) throw validation_error("bad number \"" + cur + "\"");
            out.push_back(v);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return out;
}

std::map<int, double> parse_fixes(const std::vector<std::string>& fixes) {
    std::map<int, double> out;
    for (const auto& f : fixes) {
        const auto eq = f.find('=');
        if (eq == std::string::npos)
            throw validation_error("--fix expects axis=value, got \"" + f + "\"");
        const int axis = std::stoi(f.substr(0, eq));
        if (axis < 1) throw validation_error("--fix axes are 1-based");
        double v = 0;
        if (!parse_double(f.substr(eq + 1), v))
            throw validation_error("bad --fix value in \"" + f + "\"");
        out[axis - 1] = v;
    }
    return out;
}

SensorField trained_sensor_field(const GPModel& model, const TrainingInputs& inputs) {
    const std::vector<double> po = predict_at_train(model);
    const std::vector<double> ps = predict_mean(model, inputs.staggered.points);
    return sensor_staggered_md(po, inputs.mesh.shape(), ps, inputs.sensor_options);
}

std::map<int, double> effective_slice_fixed(const SliceSpec& slice, const StructuredMesh& raw) {
    if (!slice.fixed.empty() || raw.dims() == 1) return slice.fixed;
    // default: sweep axis 2, everything else fixed at its middle grid coordinate
    std::map<int, double> fixed;
    const int free_axis = raw.dims() > 1 ? 1 : 0;
    for (int k = 0; k < raw.dims(); ++k) {
        if (k == free_axis) continue;
        const auto& c = raw.axis_coords(k);
        fixed[k] = c[(c.size() - 1) / 2];
    }
    return fixed;
}

void validate_slice_spec(const SliceSpec& slice, const StructuredMesh& raw) {
    const auto fixed = effective_slice_fixed(slice, raw);
    if (static_cast<int>(fixed.size()) != raw.dims() - 1)
        throw validation_error("slice must fix exactly " + std::to_string(raw.dims() - 1) +
                               " axes");
    for (const auto& [axis, value] : fixed) {
        if (axis < 0 || axis >= raw.dims())
            throw validation_error("slice axis " + std::to_string(axis + 1) + " out of range");
        const auto& c = raw.axis_coords(axis);
        if (value < c.front() || value > c.back())
            throw validation_error("slice coordinate " + format_double(value) + " outside axis " +
                                   std::to_string(axis + 1) + " range");
    }
}

void write_run_artifacts(const RunResult& result, const TrainingInputs& inputs,
                         const StructuredMesh& raw_mesh, const ExperimentConfig& config,
                         const fs::path& run_dir) {
    fs::create_directories(run_dir);
    write_result_json(result, config, run_dir / "result.json");
    write_history_csv(result, run_dir / "history.csv");
    if (result.status != "ok") return;
    const GPModel model = fit_with_jitter_escalation(inputs.mesh.points(), inputs.mesh.values(),
                                                     result.final_spec, config.noise);
    try {
        write_sensor_csv(trained_sensor_field(model, inputs), run_dir / "sensors_trained.csv");
    } catch (const std::runtime_error&) {
        // sensor undefined for this model (non-positive predictions); skip the file
    }
    const auto fixed = effective_slice_fixed(config.slice, raw_mesh);
    if (static_cast<int>(fixed.size()) == raw_mesh.dims() - 1) {
        const SliceTable table = slice_predictions(model, raw_mesh, inputs.normalization, fixed,
                                                   config.slice.dense_factor);
        write_slice_csv(table, run_dir / ("slice_x" + std::to_string(table.free_axis + 1) + ".csv"));
    }
}

StructuredMesh load_dataset(const ExperimentConfig& config, const fs::path& out_dir,
                            bool write_copies) {
    if (config.dataset.synthetic) {
        auto [mesh, truth] = generate_synthetic_dataset(config.dataset.shape, config.dataset.seed);
        if (write_copies) {
            write_mesh_csv(mesh, out_dir / "dataset.csv");
            write_synthetic_truth_json(truth, out_dir / "dataset.truth.json");
        }
        return std::move(mesh);
    }
    return load_mesh_csv(config.dataset.path);
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_synth(const std::string& shape_text, std::uint64_t seed, const std::string& out,
              bool force) {
    const std::vector<int> shape = parse_shape(shape_text);
    const int min_axis = *std::min_element(shape.begin(), shape.end());
    if (min_axis < 3) {
        if (!force)
            throw validation_error("axis requires >= 3 points for sensors (use --force to write anyway)");
        std::cerr << "warning: axis with fewer than 3 points; diffusion sensors will be undefined\n";
    }
    auto [mesh, truth] = generate_synthetic_dataset(shape, seed);
    write_mesh_csv(mesh, out);
    write_synthetic_truth_json(truth, out + ".truth.json");
    std::cout << "wrote " << out << " (" << mesh.size() << " rows) and " << out << ".truth.json\n";
    return 0;
}

int cmd_sensors(const std::string& data, const std::string& out, double value_floor,
                bool appendix_scaling) {
    const StructuredMesh raw = load_mesh_csv(data);
    for (int k = 0; k < raw.dims(); ++k)
        if (raw.shape()[k] < 3)
            throw validation_error("axis " + std::to_string(k + 1) +
                                   " requires >= 3 points for sensors");
    auto [mesh, record] = normalize_mesh(raw, value_floor);
    SensorOptions opts;
    opts.appendix_scaling = appendix_scaling;
    const SensorField field = sensor_true_md(mesh, opts);
    write_sensor_csv(field, out);

    nlohmann::json stats;
    for (std::size_t p = 0; p < field.per_diagonal.size(); ++p) {
        const auto& comp = field.per_diagonal[p];
        const auto [mn, mx] = std::minmax_element(comp.begin(), comp.end());
        double mean = 0;
        for (double v : comp) mean += v;
        mean /= static_cast<double>(comp.size());
        stats["diagonals"].push_back({{"offsets", field.diagonals[p].label()},
                                      {"min", *mn},
                                      {"max", *mx},
                                      {"mean", mean}});
    }
    const auto mx = std::max_element(field.total.begin(), field.total.end());
    std::vector<int> argmax(field.interior_shape.size());
    {
        std::size_t rem = mx - field.total.begin();
        for (int k = static_cast<int>(field.interior_shape.size()) - 1; k >= 0; --k) {
            argmax[k] = 1 + static_cast<int>(rem % field.interior_shape[k]);
            rem /= field.interior_shape[k];
        }
    }
    double total_mean = 0;
    for (double v : field.total) total_mean += v;
    total_mean /= static_cast<double>(field.total.size());
    stats["total"] = {{"max", *mx}, {"mean", total_mean}, {"argmax_index", argmax}};
    const fs::path stats_path = fs::path(out).replace_extension(".stats.json");
    std::ofstream sj(stats_path);
    sj << stats.dump(2) << "\n";
    std::cout << "wrote " << out << " and " << stats_path.string() << "\n";
    std::cout << "total sensor: mean=" << format_double(total_mean) << " max=" << format_double(*mx)
              << " at interior index (";
    for (std::size_t k = 0; k < argmax.size(); ++k) std::cout << (k ? "," : "") << argmax[k];
    std::cout << ")\n";
    return 0;
}

int cmd_fit(const std::string& data, const std::string& kernel, const std::string& lengthscales,
            double alpha, double sigma, const std::string& method, double beta1, double beta2,
            double noise, double value_floor, const std::string& out) {
    ExperimentConfig config;
    config.dataset.path = data;
    config.dataset.synthetic = false;
    config.sigma = sigma;
    config.noise = noise;
    config.beta1 = beta1;
    config.beta2 = beta2;
    config.value_floor = value_floor;

    const StructuredMesh raw = load_mesh_csv(data);
    const TrainingInputs inputs = prepare_training_inputs(raw, config);

    KernelSpec spec;
    spec.kind = kernel_kind_from_name(kernel);
    spec.params.sigma = sigma;
    std::vector<double> ls = parse_double_list(lengthscales);
    if (static_cast<int>(ls.size()) == 1) ls.assign(raw.dims(), ls.front());
    if (static_cast<int>(ls.size()) != raw.dims())
        throw validation_error("--lengthscale needs 1 or " + std::to_string(raw.dims()) +
                               " comma-separated values");
    spec.params.lengthscales = ls;
    if (spec.kind == KernelKind::RationalQuadratic) spec.params.alpha = alpha;
    spec.validate();

    const TrainMethod tm = train_method_from_name(method);
    RunResult result = tm == TrainMethod::Lml ? run_lml_training(inputs, spec, config)
                                              : run_diffusion_training(inputs, spec, config);
    result.plan.kernel = spec.kind;
    result.plan.method = tm;
    result.plan.lengthscale_init = ls.front();
    if (spec.params.alpha) result.plan.alpha_init = alpha;
    result.plan.run_id = "fit";

    fs::create_directories(out);
    write_run_artifacts(result, inputs, raw, config, out);
    write_sensor_csv(inputs.true_label, fs::path(out) / "sensors_true.csv");
    write_normalization_json(inputs.normalization, fs::path(out) / "normalization.json");
    std::cout << "status=" << result.status << " evals=" << result.evals
              << " rmse_training=" << format_double(result.final_loss.rmse_training)
              << " rmse_diffusion=" << format_double(result.final_loss.rmse_diffusion)
              << " lml=" << format_double(result.final_lml.total) << "\n";
    return result.status == "ok" ? 0 : 2;
}

int cmd_grid(const std::string& config_path, const std::string& out_override, int jobs_override) {
    ExperimentConfig config = load_experiment_config(config_path);
    if (!out_override.empty()) config.output_dir = out_override;
    if (jobs_override > 0) config.jobs = jobs_override;

    const fs::path out_dir = config.output_dir;
    fs::create_directories(out_dir);
    const StructuredMesh raw = load_dataset(config, out_dir, /*write_copies=*/true);
    for (int k = 0; k < raw.dims(); ++k)
        if (raw.shape()[k] < 3)
            throw validation_error("axis " + std::to_string(k + 1) +
                                   " requires >= 3 points for sensors");
    validate_slice_spec(config.slice, raw);

    const TrainingInputs inputs = prepare_training_inputs(raw, config);
    write_sensor_csv(inputs.true_label, out_dir / "sensors_true.csv");
    write_normalization_json(inputs.normalization, out_dir / "normalization.json");

    const std::vector<RunPlan> plans = plan_runs(config);
    std::cout << plans.size() << " runs planned\n";
    std::size_t done = 0;
    const auto on_result = [&](const RunResult& result) {
        write_run_artifacts(result, inputs, raw, config, out_dir / result.plan.run_id);
        ++done;
        std::cout << "[" << done << "/" << plans.size() << "] " << result.plan.run_id << " "
                  << result.status << " rmse_diffusion="
                  << format_double(result.final_loss.rmse_diffusion)
                  << " evals=" << result.evals << "\n";
    };
    const std::vector<RunResult> results = run_grid(inputs, config, on_result);
    write_summary_csv(results, config, out_dir / "summary.csv");
    std::cout << "wrote " << (out_dir / "summary.csv").string() << "\n";
    const bool all_ok = std::all_of(results.begin(), results.end(),
                                    [](const RunResult& r) { return r.status == "ok"; });
    return all_ok ? 0 : 2;
}

int cmd_slice(const std::string& data, const std::string& result_path,
              const std::vector<std::string>& fixes, int dense, double value_floor, double noise,
              const std::string& out) {
    const StructuredMesh raw = load_mesh_csv(data);
    const std::map<int, double> fixed = parse_fixes(fixes);

    std::ifstream in(result_path);
    if (!in) throw validation_error("cannot open result file: " + result_path);
    const nlohmann::json rj = nlohmann::json::parse(in);
    const auto& fin = rj.at("final");
    KernelSpec spec;
    spec.kind = kernel_kind_from_name(fin.at("kind").get<std::string>());
    spec.params.sigma = fin.at("sigma").get<double>();
    spec.params.lengthscales = fin.at("lengthscales").get<std::vector<double>>();
    if (fin.contains("alpha")) spec.params.alpha = fin.at("alpha").get<double>();
    spec.validate();

    auto [mesh, record] = normalize_mesh(raw, value_floor);
    const GPModel model =
        fit_with_jitter_escalation(mesh.points(), mesh.values(), spec, noise);
    const SliceTable table = slice_predictions(model, raw, record, fixed, dense);
    write_slice_csv(table, out);
    std::cout << "wrote " << out << " (" << table.rows.size() << " rows, free axis x"
              << (table.free_axis + 1) << ")\n";
    return 0;
}

int cmd_plot(const std::string& results_dir, const std::string& kind, const std::string& run,
             const std::string& out) {
    const fs::path dir = results_dir;
    if (!fs::exists(dir)) throw validation_error("results directory not found: " + results_dir);
    svg::ChartSpec chart;

    auto values_of = [](const CsvTable& table, int col) {
        std::vector<double> out;
        for (const auto& row : table.rows) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (col >= 0 && col < static_cast<int>(row.size())) parse_double(row[col], v);
            out.push_back(v);
        }
        return out;
    };

    if (kind == "convergence" || kind == "slice") {
        if (run.empty()) throw validation_error("--run is required for kind=" + kind);
        const fs::path run_dir = dir / run;
        if (!fs::exists(run_dir)) throw validation_error("run directory not found: " + run_dir.string());
        if (kind == "convergence") {
            const CsvTable hist = read_csv(run_dir / "history.csv");
            if (hist.rows.empty()) throw validation_error("history.csv has no rows");
            const auto obj = values_of(hist, hist.column("objective"));
            const auto rt = values_of(hist, hist.column("rmse_training"));
            const auto rd = values_of(hist, hist.column("rmse_diffusion"));
            svg::Series total{"objective", svg::Series::Kind::Line, {}};
            svg::Series train{"rmse_training", svg::Series::Kind::Line, {}};
            svg::Series diff{"rmse_diffusion", svg::Series::Kind::Line, {}};
            for (std::size_t i = 0; i < obj.size(); ++i) {
                total.points.emplace_back(static_cast<double>(i), obj[i]);
                train.points.emplace_back(static_cast<double>(i), rt[i]);
                diff.points.emplace_back(static_cast<double>(i), rd[i]);
            }
            chart.title = "convergence " + run;
            chart.x_label = "evaluation";
            chart.y_label = "loss";
            chart.log_y = true;
            chart.series = {total, train, diff};
        } else {
            fs::path slice_path;
            std::vector<fs::path> candidates;
            for (const auto& entry : fs::directory_iterator(run_dir)) {
                const std::string name = entry.path().filename().string();
                if (name.rfind("slice_", 0) == 0 && entry.path().extension() == ".csv")
                    candidates.push_back(entry.path());
            }
            std::sort(candidates.begin(), candidates.end());
            if (candidates.empty())
                throw validation_error("no slice_*.csv in " + run_dir.string());
            slice_path = candidates.front();
            const CsvTable table = read_csv(slice_path);
            const auto coord = values_of(table, 0);
            const auto mean = values_of(table, table.column("mean"));
            const auto train_vals = values_of(table, table.column("train_value"));
            svg::Series mean_s{"posterior mean", svg::Series::Kind::Line, {}};
            svg::Series train_s{"training data", svg::Series::Kind::Scatter, {}};
            for (std::size_t i = 0; i < coord.size(); ++i) {
                mean_s.points.emplace_back(coord[i], mean[i]);
                if (std::isfinite(train_vals[i])) train_s.points.emplace_back(coord[i], train_vals[i]);
            }
            chart.title = "slice " + run;
            chart.x_label = table.header.empty() ? "x" : table.header.front();
            chart.y_label = "y";
            chart.series = {mean_s, train_s};
        }
    } else if (kind == "lengthscales" || kind == "losses") {
        const fs::path summary_path = dir / "summary.csv";
        if (!fs::exists(summary_path))
            throw validation_error("summary.csv not found in " + results_dir);
        const CsvTable summary = read_csv(summary_path);
        if (summary.rows.empty()) throw validation_error("summary.csv has no rows");
        const int c_method = summary.column("method");
        const int c_init = summary.column("init_lengthscale");
        std::map<std::string, svg::Series> series;
        if (kind == "losses") {
            const int c_loss = summary.column("rmse_diffusion");
            for (const auto& row : summary.rows) {
                const std::string key = row[c_method];
                double x = 0, y = 0;
                if (!parse_double(row[c_init], x) || !parse_double(row[c_loss], y)) continue;
                auto& s = series[key];
                s.label = key;
                s.kind = svg::Series::Kind::Scatter;
                s.points.emplace_back(x, y);
            }
            chart.title = "final diffusion losses";
            chart.y_label = "rmse_diffusion";
        } else {
            std::vector<int> axis_cols;
            for (std::size_t c = 0; c < summary.header.size(); ++c)
                if (summary.header[c].rfind("final_lengthscale_", 0) == 0)
                    axis_cols.push_back(static_cast<int>(c));
            for (const auto& row : summary.rows) {
                for (std::size_t a = 0; a < axis_cols.size(); ++a) {
                    double x = 0, y = 0;
                    if (!parse_double(row[c_init], x)) continue;
                    if (!parse_double(row[axis_cols[a]], y)) continue;
                    const std::string key = row[c_method] + " axis " + std::to_string(a + 1);
                    auto& s = series[key];
                    s.label = key;
                    s.kind = svg::Series::Kind::Scatter;
                    s.points.emplace_back(x, y);
                }
            }
            chart.title = "final lengthscales";
            chart.y_label = "final lengthscale";
            chart.log_y = true;
        }
        chart.x_label = "initial lengthscale";
        chart.log_x = true;
        if (kind == "losses") chart.log_y = true;
        for (auto& [key, s] : series) chart.series.push_back(std::move(s));
        if (chart.series.empty()) throw validation_error("no plottable rows in summary.csv");
    } else {
        throw validation_error("unknown plot kind \"" + kind +
                               "\" (expected convergence|slice|lengthscales|losses)");
    }
    svg::write_chart(chart, out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-process regression on mesh data with diffusion-loss training"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
    std::string synth_shape = "19x15x5", synth_out = "data.csv";
    std::uint64_t synth_seed = 7;
    bool synth_force = false;
    synth->add_option("--shape", synth_shape, "grid shape, e.g. 19x15x5");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output CSV path")->required();
    synth->add_flag("--force", synth_force, "allow axes with fewer than 3 points");

    // sensors
    auto* sensors = app.add_subcommand("sensors", "true-label diffusion sensor of a dataset");
    std::string sensors_data, sensors_out = "sensors_true.csv";
    double sensors_floor = 0.05;
    bool sensors_appendix = false;
    sensors->add_option("--data", sensors_data, "dataset CSV")->required();
    sensors->add_option("--out", sensors_out, "output CSV path");
    sensors->add_option("--value-floor", sensors_floor, "normalization floor");
    sensors->add_flag("--appendix-scaling", sensors_appendix, "divide sensors by an extra 3");

    // fit
    auto* fitc = app.add_subcommand("fit", "train a single model");
    std::string fit_data, fit_kernel = "SE", fit_ls = "1", fit_method = "LML", fit_out = "fit_out";
    double fit_alpha = 1.0, fit_sigma = 0.15, fit_beta1 = 1.0, fit_beta2 = 1.0;
    double fit_noise = 1e-10, fit_floor = 0.05;
    fitc->add_option("--data", fit_data, "dataset CSV")->required();
    fitc->add_option("--kernel", fit_kernel, "SE or RQ");
    fitc->add_option("--lengthscale", fit_ls, "initial lengthscale(s), comma separated");
    fitc->add_option("--alpha", fit_alpha, "initial RQ alpha");
    fitc->add_option("--sigma", fit_sigma, "fixed amplitude");
    fitc->add_option("--method", fit_method, "LML or DIFFUSION");
    fitc->add_option("--beta1", fit_beta1, "training RMSE weight");
    fitc->add_option("--beta2", fit_beta2, "diffusion RMSE weight");
    fitc->add_option("--noise", fit_noise, "jitter");
    fitc->add_option("--value-floor", fit_floor, "normalization floor");
    fitc->add_option("--out", fit_out, "output directory");

    // grid
    auto* grid = app.add_subcommand("grid", "run the full initialization grid from a config");
    std::string grid_config, grid_out;
    int grid_jobs = 0;
    grid->add_option("--config", grid_config, "run-config JSON")->required();
    grid->add_option("--out", grid_out, "override output directory");
    grid->add_option("--jobs", grid_jobs, "concurrent runs");

    // slice
    auto* slice = app.add_subcommand("slice", "dense posterior slice along one axis");
    std::string slice_data, slice_result, slice_out = "slice.csv";
    std::vector<std::string> slice_fixes;
    int slice_dense = 8;
    double slice_floor = 0.05, slice_noise = 1e-10;
    slice->add_option("--data", slice_data, "dataset CSV")->required();
    slice->add_option("--result", slice_result, "result.json with final hyperparameters")->required();
    slice->add_option("--fix", slice_fixes, "fixed axis, e.g. --fix 1=14 (repeatable)");
    slice->add_option("--dense", slice_dense, "query points per cell");
    slice->add_option("--value-floor", slice_floor, "normalization floor");
    slice->add_option("--noise", slice_noise, "jitter");
    slice->add_option("--out", slice_out, "output CSV path");

    // plot
    auto* plot = app.add_subcommand("plot", "render an SVG chart from results");
    std::string plot_results, plot_kind, plot_run, plot_out = "chart.svg";
    plot->add_option("--results", plot_results, "results directory")->required();
    plot->add_option("--kind", plot_kind, "convergence|slice|lengthscales|losses")->required();
    plot->add_option("--run", plot_run, "run id (convergence and slice kinds)");
    plot->add_option("--out", plot_out, "output SVG path");

    // default-config (prints the config the grid assumes for omitted fields)
    auto* defc = app.add_subcommand("default-config", "print the default run-config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_shape, synth_seed, synth_out, synth_force);
        if (sensors->parsed())
            return cmd_sensors(sensors_data, sensors_out, sensors_floor, sensors_appendix);
        if (fitc->parsed())
            return cmd_fit(fit_data, fit_kernel, fit_ls, fit_alpha, fit_sigma, fit_method,
                           fit_beta1, fit_beta2, fit_noise, fit_floor, fit_out);
        if (grid->parsed()) return cmd_grid(grid_config, grid_out, grid_jobs);
        if (slice->parsed())
            return cmd_slice(slice_data, slice_result, slice_fixes, slice_dense, slice_floor,
                             slice_noise, slice_out);
        if (plot->parsed()) return cmd_plot(plot_results, plot_kind, plot_run, plot_out);
        if (defc->parsed()) {
            std::cout << default_config_json();
            return 0;
        }
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
