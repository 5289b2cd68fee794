#pragma once

#include <filesystem>

#include "gpmesh/errors.hpp"
#include "gpmesh/experiment.hpp"

namespace gpmesh {

/// Configuration rejected; the message starts with the JSON pointer of the
/// offending element.
struct config_error : validation_error {
    using validation_error::validation_error;
};

/// Parse and validate a run-config JSON file (spec_version 1).
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// The default configuration serialized as JSON (what `grid` assumes for
/// omitted fields).
std::string default_config_json();

}  // namespace gpmesh
