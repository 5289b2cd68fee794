#include "gpmesh/results_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gpmesh/errors.hpp"
#include "gpmesh/io.hpp"

namespace gpmesh {

namespace {

using nlohmann::json;

json hyperparams_json(const KernelSpec& spec) {
    json j;
    j["kind"] = kernel_kind_name(spec.kind);
    j["sigma"] = spec.params.sigma;
    j["lengthscales"] = spec.params.lengthscales;
    if (spec.params.alpha) j["alpha"] = *spec.params.alpha;
    j["train_sigma"] = spec.train_sigma;
    j["tied_lengthscales"] = spec.tied_lengthscales;
    return j;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

void write_result_json(const RunResult& result, const ExperimentConfig& config,
                       const std::filesystem::path& path) {
    json j;
    j["run_id"] = result.plan.run_id;
    j["kernel"] = kernel_kind_name(result.plan.kernel);
    j["method"] = train_method_name(result.plan.method);
    j["status"] = result.status;
    j["initial"] = hyperparams_json(result.initial_spec);
    j["final"] = hyperparams_json(result.final_spec);
    j["final_lml"] = {{"total", result.final_lml.total},
                      {"data_fit", result.final_lml.data_fit},
                      {"complexity", result.final_lml.complexity},
                      {"normalization", result.final_lml.normalization}};
    j["final_loss"] = {{"rmse_training", result.final_loss.rmse_training},
                       {"rmse_diffusion", result.final_loss.rmse_diffusion},
                       {"beta1", result.final_loss.beta1},
                       {"beta2", result.final_loss.beta2},
                       {"total", result.final_loss.total}};
    const OptimizerConfig& opt =
        result.plan.method == TrainMethod::Lml ? config.quasi_newton : config.dfo;
    j["optimizer"] = {{"method", result.plan.method == TrainMethod::Lml ? "quasi_newton" : "dfo"},
                      {"status", opt_status_name(result.opt_status)},
                      {"message", result.opt_message},
                      {"evals", result.evals},
                      {"max_evals", opt.max_evals},
                      {"tol_obj", opt.tol_obj},
                      {"tol_step", opt.tol_step}};
    if (result.plan.method == TrainMethod::Diffusion)
        j["optimizer"]["initial_radius"] = opt.initial_radius;
    j["jitter"] = {{"base", config.noise},
                   {"escalations_at_final_fit", result.jitter_escalations}};
    if (config.include_timings) j["wall_seconds"] = result.wall_seconds;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_history_csv(const RunResult& result, const std::filesystem::path& path) {
    auto out = open_out(path);
    const bool log_space = result.plan.method == TrainMethod::Lml;
    out << "eval";
    for (const auto& name : packed_names(result.initial_spec))
        out << "," << (log_space ? "log_" + name : name);
    out << ",objective,rmse_training,rmse_diffusion\n";
    for (std::size_t i = 0; i < result.history.evals.size(); ++i) {
        const EvalRecord& rec = result.history.evals[i];
        out << rec.index;
        for (double p : rec.params) out << "," << format_double(p);
        out << "," << format_double(rec.value);
        if (i < result.history_components.size()) {
            out << "," << format_double(result.history_components[i].first) << ","
                << format_double(result.history_components[i].second);
        } else {
            out << ",nan,nan";
        }
        out << "\n";
    }
}

void write_sensor_csv(const SensorField& field, const std::filesystem::path& path) {
    auto out = open_out(path);
    const int d = static_cast<int>(field.interior_shape.size());
    for (int k = 0; k < d; ++k) out << "i" << (k + 1) << ",";
    for (const auto& diag : field.diagonals) out << "diag_" << diag.label() << ",";
    out << "total\n";
    std::vector<int> idx(d, 1);
    for (std::size_t lin = 0; lin < field.node_count(); ++lin) {
        for (int k = 0; k < d; ++k) out << idx[k] << ",";
        for (const auto& comp : field.per_diagonal) out << format_double(comp[lin]) << ",";
        out << format_double(field.total[lin]) << "\n";
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[k] <= field.interior_shape[k]) break;
            idx[k] = 1;
        }
    }
}

void write_slice_csv(const SliceTable& table, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "x" << (table.free_axis + 1) << ",mean,variance,train_value\n";
    for (const auto& row : table.rows) {
        out << format_double(row.coord) << "," << format_double(row.mean) << ","
            << format_double(row.variance) << "," << format_double(row.train_value) << "\n";
    }
}

void write_summary_csv(const std::vector<RunResult>& results, const ExperimentConfig& config,
                       const std::filesystem::path& path) {
    std::vector<const RunResult*> sorted;
    for (const auto& r : results) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const RunResult* a, const RunResult* b) {
        return a->plan.run_id < b->plan.run_id;
    });
    int dims = 0;
    for (const auto* r : sorted)
        dims = std::max(dims, static_cast<int>(r->final_spec.params.lengthscales.size()));

    auto out = open_out(path);
    out << "run_id,kernel,method,init_lengthscale,init_alpha";
    for (int k = 0; k < dims; ++k) out << ",final_lengthscale_" << (k + 1);
    out << ",final_alpha,final_sigma,final_lml,rmse_training,rmse_diffusion,total_loss,evals,"
           "status,wall_seconds\n";
    for (const auto* r : sorted) {
        out << r->plan.run_id << "," << kernel_kind_name(r->plan.kernel) << ","
            << train_method_name(r->plan.method) << "," << format_double(r->plan.lengthscale_init)
            << "," << (r->plan.alpha_init ? format_double(*r->plan.alpha_init) : "");
        for (int k = 0; k < dims; ++k) {
            out << ",";
            if (k < static_cast<int>(r->final_spec.params.lengthscales.size()))
                out << format_double(r->final_spec.params.lengthscales[k]);
        }
        out << "," << (r->final_spec.params.alpha ? format_double(*r->final_spec.params.alpha) : "");
        out << "," << format_double(r->final_spec.params.sigma);
        out << "," << format_double(r->final_lml.total);
        out << "," << format_double(r->final_loss.rmse_training);
        out << "," << format_double(r->final_loss.rmse_diffusion);
        out << "," << format_double(r->final_loss.total);
        out << "," << r->evals;
        out << "," << (r->status.rfind("failed", 0) == 0 ? "failed" : r->status);
        out << "," << (config.include_timings ? format_double(r->wall_seconds) : "0") << "\n";
    }
}

void write_normalization_json(const NormalizationRecord& record,
                              const std::filesystem::path& path) {
    json j;
    j["value_floor"] = record.value_floor;
    j["degenerate_values"] = record.degenerate_values;
    j["value_map"] = {{"scale", record.value_map.scale}, {"shift", record.value_map.shift}};
    j["axis_maps"] = json::array();
    for (const auto& m : record.axis_maps)
        j["axis_maps"].push_back({{"scale", m.scale}, {"shift", m.shift}});
    j["raw_axis_coords"] = record.raw_axis_coords;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_synthetic_truth_json(const SyntheticSpec& spec, const std::filesystem::path& path) {
    json j;
    j["shape"] = spec.shape;
    j["seed"] = spec.seed;
    j["params"] = {{"a1", spec.a1},
                   {"c1", spec.c1},
                   {"a2", spec.a2},
                   {"c2", spec.c2},
                   {"w3", spec.w3},
                   {"bump_amp", spec.bump_amp},
                   {"bump_centre", spec.bump_centre},
                   {"bump_width", spec.bump_width}};
    j["value_map"] = {{"scale", spec.value_scale}, {"shift", spec.value_shift}};
    j["axis_coords"] = spec.axis_coords;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

SyntheticSpec read_synthetic_truth_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const json j = json::parse(in);
    SyntheticSpec spec;
    spec.shape = j.at("shape").get<std::vector<int>>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    const json& p = j.at("params");
    spec.a1 = p.at("a1").get<double>();
    spec.c1 = p.at("c1").get<double>();
    spec.a2 = p.at("a2").get<double>();
    spec.c2 = p.at("c2").get<double>();
    spec.w3 = p.at("w3").get<double>();
    spec.bump_amp = p.at("bump_amp").get<double>();
    spec.bump_centre = p.at("bump_centre").get<double>();
    spec.bump_width = p.at("bump_width").get<double>();
    spec.value_scale = j.at("value_map").at("scale").get<double>();
    spec.value_shift = j.at("value_map").at("shift").get<double>();
    spec.axis_coords = j.at("axis_coords").get<std::vector<std::vector<double>>>();
    return spec;
}

int CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable table;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        out.push_back(cur);
        return out;
    };
    if (std::getline(in, line)) table.header = split(line);
    while (std::getline(in, line)) {
        if (!line.empty()) table.rows.push_back(split(line));
    }
    return table;
}

}  // namespace gpmesh
