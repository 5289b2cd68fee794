#pragma once

#include <stdexcept>
#include <string>

namespace gpmesh {

/// Input or configuration rejected before any computation ran.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Cholesky factorization hit a non-positive pivot.
struct factorization_error : std::runtime_error {
    int pivot;
    explicit factorization_error(int pivot_index)
        : std::runtime_error("matrix not positive definite at pivot " + std::to_string(pivot_index)),
          pivot(pivot_index) {}
};

}  // namespace gpmesh
