#pragma once

#include <span>
#include <vector>

namespace gpmesh {

/// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
};

/// Flat list of d-dimensional points, one point per row.
struct PointSet {
    int dim = 0;
    std::vector<double> coords;  // size() x dim, row-major

    PointSet() = default;
    explicit PointSet(int d) : dim(d) {}

    int size() const { return dim == 0 ? 0 : static_cast<int>(coords.size()) / dim; }
    std::span<const double> point(int i) const {
        return {coords.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
    void push_back(std::span<const double> p) { coords.insert(coords.end(), p.begin(), p.end()); }
};

/// In-place Cholesky of a symmetric positive-definite matrix; on return the
/// lower triangle holds L with A = L*L^T. Blocked, trailing updates run in
/// parallel; results are identical for any thread count. Throws
/// factorization_error naming the failing pivot.
void cholesky_factor(Matrix& a);

/// Forward substitution: solve L*x = b in place (lower triangle of `l`).
void solve_lower_inplace(const Matrix& l, std::span<double> x);

/// Back substitution: solve L^T*x = b in place.
void solve_lower_transposed_inplace(const Matrix& l, std::span<double> x);

/// Solve (L*L^T)*x = b.
std::vector<double> chol_solve(const Matrix& l, std::span<const double> b);

/// Full inverse (L*L^T)^{-1} from a Cholesky factor.
Matrix spd_inverse_from_chol(const Matrix& l);

/// Dense LU solve with partial pivoting for small systems (consumes `a`).
/// Returns false when the system is numerically singular.
bool solve_dense(Matrix a, std::span<double> x);

/// y = A*x for row-major A.
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

namespace ref {

/// Unblocked single-threaded Cholesky, kept as the reference implementation
/// for tests and the benchmark.
void cholesky_factor(Matrix& a);

}  // namespace ref

}  // namespace gpmesh
