#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gpmesh/experiment.hpp"

namespace gpmesh {

void write_result_json(const RunResult& result, const ExperimentConfig& config,
                       const std::filesystem::path& path);

/// eval index, packed parameter columns, objective, rmse components.
void write_history_csv(const RunResult& result, const std::filesystem::path& path);

/// Interior multi-index columns plus one column per diagonal and the total.
void write_sensor_csv(const SensorField& field, const std::filesystem::path& path);

void write_slice_csv(const SliceTable& table, const std::filesystem::path& path);

/// One row per run, sorted by run id; wall time is zeroed when timings are
/// excluded so repeated runs compare byte-identical.
void write_summary_csv(const std::vector<RunResult>& results, const ExperimentConfig& config,
                       const std::filesystem::path& path);

void write_normalization_json(const NormalizationRecord& record,
                              const std::filesystem::path& path);

void write_synthetic_truth_json(const SyntheticSpec& spec, const std::filesystem::path& path);
SyntheticSpec read_synthetic_truth_json(const std::filesystem::path& path);

/// Minimal CSV-with-header reader for the plot command.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gpmesh
