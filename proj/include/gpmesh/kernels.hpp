#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpmesh/linalg.hpp"

namespace gpmesh {

enum class KernelKind { SquaredExponential, RationalQuadratic };

std::string kernel_kind_name(KernelKind kind);
KernelKind kernel_kind_from_name(const std::string& name);  // "SE" | "RQ"

/// Kernel hyperparameters: amplitude sigma, one lengthscale per axis, and the
/// RQ mixture alpha when applicable. All strictly positive.
struct Hyperparams {
    double sigma = 1.0;
    std::vector<double> lengthscales;
    std::optional<double> alpha;
};

/// Kernel choice plus trainability flags. With tied_lengthscales the packed
/// parameter vector carries a single shared lengthscale.
struct KernelSpec {
    KernelKind kind = KernelKind::SquaredExponential;
    Hyperparams params;
    bool train_sigma = false;
    bool train_lengthscales = true;
    bool train_alpha = true;
    bool tied_lengthscales = false;

    void validate() const;  // positivity, alpha presence iff RQ
    int trainable_count() const;
};

/// Covariance between two points.
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> xp);

/// Pairwise covariance matrix |A| x |B|. For gridded point sets the assembly
/// uses per-axis difference tables; values agree with kernel_eval to a few
/// ulps and the symmetric variant is exactly symmetric.
Matrix kernel_matrix(const KernelSpec& spec, const PointSet& a, const PointSet& b);

/// K(X, X), mirrored from the lower triangle so it equals its transpose
/// exactly.
Matrix kernel_matrix_sym(const KernelSpec& spec, const PointSet& a);

/// Names of the packed (trainable) parameters, in packing order:
/// lengthscales, then alpha, then sigma.
std::vector<std::string> packed_names(const KernelSpec& spec);

/// Log-space packing of the trainable parameters (fixed ones excluded).
std::vector<double> pack_log(const KernelSpec& spec);
KernelSpec unpack_log(const KernelSpec& base, std::span<const double> packed);

/// Raw-space packing, used by the derivative-free path where bounds and the
/// search radius are stated in raw units.
std::vector<double> pack_raw(const KernelSpec& spec);
KernelSpec unpack_raw(const KernelSpec& base, std::span<const double> packed);

}  // namespace gpmesh
