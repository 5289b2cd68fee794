#include "gpmesh/config.hpp"

#include <fstream>

#include <json.hpp>

namespace gpmesh {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
    throw config_error(pointer + ": " + what);
}

void expect_object(const json& j, const std::string& ptr) {
    if (!j.is_object()) fail(ptr, "expected an object");
}

double require_number(const json& j, const std::string& ptr) {
    if (!j.is_number()) fail(ptr, "expected a number");
    return j.get<double>();
}

bool require_bool(const json& j, const std::string& ptr) {
    if (!j.is_boolean()) fail(ptr, "expected a boolean");
    return j.get<bool>();
}

int require_int(const json& j, const std::string& ptr) {
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    return j.get<int>();
}

std::string require_string(const json& j, const std::string& ptr) {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
}

std::vector<double> require_number_array(const json& j, const std::string& ptr) {
    if (!j.is_array()) fail(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(require_number(j[i], ptr + "/" + std::to_string(i)));
    return out;
}

void parse_optimizer(const json& j, const std::string& ptr, OptimizerConfig& cfg) {
    expect_object(j, ptr);
    for (const auto& [key, value] : j.items()) {
        const std::string p = ptr + "/" + key;
        if (key == "max_evals") {
            cfg.max_evals = require_int(value, p);
        } else if (key == "initial_radius") {
            cfg.initial_radius = require_number(value, p);
        } else if (key == "tol_obj") {
            cfg.tol_obj = require_number(value, p);
        } else if (key == "tol_step") {
            cfg.tol_step = require_number(value, p);
        } else if (key == "lower_bounds") {
            cfg.lower_bounds = require_number_array(value, p);
        } else if (key == "upper_bounds") {
            cfg.upper_bounds = require_number_array(value, p);
        } else {
            fail(p, "unknown key");
        }
    }
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("/: cannot open config file " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("/: " + std::string(e.what()));
    }
    expect_object(root, "/");

    ExperimentConfig cfg;
    bool saw_version = false;
    for (const auto& [key, value] : root.items()) {
        const std::string p = "/" + key;
        if (key == "spec_version") {
            if (require_int(value, p) != 1) fail(p, "unsupported spec_version (expected 1)");
            saw_version = true;
        } else if (key == "dataset") {
            expect_object(value, p);
            const bool has_path = value.contains("path");
            const bool has_synth = value.contains("synthetic");
            if (has_path == has_synth)
                fail(p, "exactly one of \"path\" or \"synthetic\" is required");
            if (has_path) {
                cfg.dataset.path = require_string(value["path"], p + "/path");
                cfg.dataset.synthetic = false;
            } else {
                const json& s = value["synthetic"];
                expect_object(s, p + "/synthetic");
                cfg.dataset.synthetic = true;
                cfg.dataset.shape.clear();
                if (!s.contains("shape")) fail(p + "/synthetic", "missing \"shape\"");
                const json& shape = s["shape"];
                if (!shape.is_array() || shape.empty())
                    fail(p + "/synthetic/shape", "expected a non-empty array of integers");
                for (std::size_t i = 0; i < shape.size(); ++i)
                    cfg.dataset.shape.push_back(
                        require_int(shape[i], p + "/synthetic/shape/" + std::to_string(i)));
                if (s.contains("seed"))
                    cfg.dataset.seed = static_cast<std::uint64_t>(
                        require_int(s["seed"], p + "/synthetic/seed"));
                for (const auto& [skey, sval] : s.items()) {
                    (void)sval;
                    if (skey != "shape" && skey != "seed")
                        fail(p + "/synthetic/" + skey, "unknown key");
                }
            }
        } else if (key == "kernels") {
            if (!value.is_array() || value.empty()) fail(p, "expected a non-empty array");
            cfg.kernels.clear();
            for (std::size_t i = 0; i < value.size(); ++i) {
                const std::string ptr = p + "/" + std::to_string(i);
                const std::string name = require_string(value[i], ptr);
                try {
                    cfg.kernels.push_back(kernel_kind_from_name(name));
                } catch (const validation_error& e) {
                    fail(ptr, e.what());
                }
            }
        } else if (key == "methods") {
            if (!value.is_array()) fail(p, "expected an array");
            cfg.methods.clear();
            for (std::size_t i = 0; i < value.size(); ++i) {
                const std::string ptr = p + "/" + std::to_string(i);
                const std::string name = require_string(value[i], ptr);
                try {
                    cfg.methods.push_back(train_method_from_name(name));
                } catch (const validation_error& e) {
                    fail(ptr, e.what());
                }
            }
        } else if (key == "lengthscale_inits") {
            cfg.lengthscale_inits = require_number_array(value, p);
        } else if (key == "alpha_inits") {
            cfg.alpha_inits = require_number_array(value, p);
        } else if (key == "sigma") {
            cfg.sigma = require_number(value, p);
        } else if (key == "train_sigma") {
            cfg.train_sigma = require_bool(value, p);
        } else if (key == "tied_lengthscales") {
            cfg.tied_lengthscales = require_bool(value, p);
        } else if (key == "noise") {
            cfg.noise = require_number(value, p);
        } else if (key == "beta1") {
            cfg.beta1 = require_number(value, p);
        } else if (key == "beta2") {
            cfg.beta2 = require_number(value, p);
        } else if (key == "value_floor") {
            cfg.value_floor = require_number(value, p);
        } else if (key == "appendix_scaling") {
            cfg.appendix_scaling = require_bool(value, p);
        } else if (key == "top_diagonals") {
            cfg.top_diagonals = require_int(value, p);
        } else if (key == "quasi_newton") {
            parse_optimizer(value, p, cfg.quasi_newton);
        } else if (key == "dfo") {
            parse_optimizer(value, p, cfg.dfo);
        } else if (key == "dfo_lower_bound") {
            cfg.dfo_lower_bound = require_number(value, p);
        } else if (key == "slice") {
            expect_object(value, p);
            for (const auto& [skey, sval] : value.items()) {
                const std::string sp = p + "/" + skey;
                if (skey == "dense_factor") {
                    cfg.slice.dense_factor = require_int(sval, sp);
                } else if (skey == "fixed") {
                    expect_object(sval, sp);
                    cfg.slice.fixed.clear();
                    for (const auto& [axis_key, axis_val] : sval.items()) {
                        int axis = 0;
                        try {
                            axis = std::stoi(axis_key);
                        } catch (...) {
                            fail(sp + "/" + axis_key, "axis keys must be 1-based integers");
                        }
                        if (axis < 1) fail(sp + "/" + axis_key, "axis keys must be >= 1");
                        cfg.slice.fixed[axis - 1] = require_number(axis_val, sp + "/" + axis_key);
                    }
                } else {
                    fail(sp, "unknown key");
                }
            }
        } else if (key == "output_dir") {
            cfg.output_dir = require_string(value, p);
        } else if (key == "jobs") {
            cfg.jobs = require_int(value, p);
        } else if (key == "include_timings") {
            cfg.include_timings = require_bool(value, p);
        } else {
            fail(p, "unknown key");
        }
    }
    if (!saw_version) fail("/spec_version", "missing (expected 1)");
    try {
        cfg.validate();
    } catch (const validation_error& e) {
        throw config_error("/: " + std::string(e.what()));
    }
    return cfg;
}

std::string default_config_json() {
    const ExperimentConfig cfg;
    json j;
    j["spec_version"] = 1;
    j["dataset"] = {{"synthetic", {{"shape", cfg.dataset.shape}, {"seed", cfg.dataset.seed}}}};
    j["kernels"] = json::array();
    for (KernelKind k : cfg.kernels) j["kernels"].push_back(kernel_kind_name(k));
    j["methods"] = json::array();
    for (TrainMethod m : cfg.methods) j["methods"].push_back(train_method_name(m));
    j["lengthscale_inits"] = cfg.lengthscale_inits;
    j["alpha_inits"] = cfg.alpha_inits;
    j["sigma"] = cfg.sigma;
    j["train_sigma"] = cfg.train_sigma;
    j["tied_lengthscales"] = cfg.tied_lengthscales;
    j["noise"] = cfg.noise;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["value_floor"] = cfg.value_floor;
    j["appendix_scaling"] = cfg.appendix_scaling;
    j["top_diagonals"] = cfg.top_diagonals;
    j["quasi_newton"] = {{"max_evals", cfg.quasi_newton.max_evals},
                         {"tol_obj", cfg.quasi_newton.tol_obj},
                         {"tol_step", cfg.quasi_newton.tol_step}};
    j["dfo"] = {{"max_evals", cfg.dfo.max_evals},
                {"initial_radius", cfg.dfo.initial_radius},
                {"tol_obj", cfg.dfo.tol_obj},
                {"tol_step", cfg.dfo.tol_step}};
    j["dfo_lower_bound"] = cfg.dfo_lower_bound;
    j["slice"] = {{"dense_factor", cfg.slice.dense_factor}, {"fixed", json::object()}};
    j["output_dir"] = cfg.output_dir;
    j["jobs"] = cfg.jobs;
    j["include_timings"] = cfg.include_timings;
    return j.dump(2) + "\n";
}

}  // namespace gpmesh
