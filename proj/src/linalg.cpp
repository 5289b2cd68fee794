#include "gpmesh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gpmesh/errors.hpp"

namespace gpmesh {

namespace {

constexpr int kPanel = 96;   // panel width of the blocked factorization
constexpr int kTile = 64;    // trailing-update tile edge

// Serial Cholesky of the nb x nb diagonal block starting at (k0, k0).
// Rows below the block are untouched here.
void factor_diagonal_block(Matrix& a, int k0, int nb) {
    for (int j = k0; j < k0 + nb; ++j) {
        double* rj = a.row(j);
        double d = rj[j];
        for (int t = k0; t < j; ++t) d -= rj[t] * rj[t];
        if (!(d > 0.0)) throw factorization_error(j);
        const double ljj = std::sqrt(d);
        rj[j] = ljj;
        for (int i = j + 1; i < k0 + nb; ++i) {
            double* ri = a.row(i);
            double s = ri[j];
            for (int t = k0; t < j; ++t) s -= ri[t] * rj[t];
            ri[j] = s / ljj;
        }
    }
}

// Rank-nb update of one trailing tile: C[i0:i1, j0:j1] -= P_i * P_j^T where
// P_i, P_j are the already-factored panel rows. `pt` is the packed transpose
// of the j-side panel rows (nb x tile width).
void update_tile(Matrix& a, int i0, int i1, int j0, int j1, int k0, int nb, const double* pt, int tw) {
    for (int i = i0; i < i1; ++i) {
        const double* pi = a.row(i) + k0;
        double* ci = a.row(i) + j0;
        const int jn = std::min(j1, i + 1) - j0;  // stay within the lower triangle
        if (jn <= 0) continue;
        if (jn == kTile) {
            double acc[kTile];
            for (int j = 0; j < kTile; ++j) acc[j] = ci[j];
            for (int t = 0; t < nb; ++t) {
                const double p = pi[t];
                const double* tt = pt + static_cast<std::size_t>(t) * tw;
                for (int j = 0; j < kTile; ++j) acc[j] -= p * tt[j];
            }
            for (int j = 0; j < kTile; ++j) ci[j] = acc[j];
        } else {
            for (int t = 0; t < nb; ++t) {
                const double p = pi[t];
                const double* tt = pt + static_cast<std::size_t>(t) * tw;
                for (int j = 0; j < jn; ++j) ci[j] -= p * tt[j];
            }
        }
    }
}

}  // namespace

void cholesky_factor(Matrix& a) {
    const int n = a.rows;
    for (int k0 = 0; k0 < n; k0 += kPanel) {
        const int nb = std::min(kPanel, n - k0);
        factor_diagonal_block(a, k0, nb);

        // Panel solve: L[i, k0:k0+nb] = A[i, k0:k0+nb] * L11^{-T}, independent rows.
#pragma omp parallel for schedule(static) if (n - k0 - nb > 256)
        for (int i = k0 + nb; i < n; ++i) {
            double* ri = a.row(i);
            for (int j = k0; j < k0 + nb; ++j) {
                const double* rj = a.row(j);
                double s = ri[j];
                for (int t = k0; t < j; ++t) s -= ri[t] * rj[t];
                ri[j] = s / rj[j];
            }
        }

        // Trailing update over lower-triangle tiles; each tile is one task.
        const int t0 = k0 + nb;
        if (t0 >= n) break;
        struct Tile { int i0, j0; };
        std::vector<Tile> tiles;
        for (int i0 = t0; i0 < n; i0 += kTile)
            for (int j0 = t0; j0 <= i0; j0 += kTile) tiles.push_back({i0, j0});

#pragma omp parallel for schedule(static) if (tiles.size() > 2)
        for (std::size_t t = 0; t < tiles.size(); ++t) {
            const int i0 = tiles[t].i0, j0 = tiles[t].j0;
            const int i1 = std::min(i0 + kTile, n), j1 = std::min(j0 + kTile, n);
            const int tw = j1 - j0;
            double packed[kPanel * kTile];
            for (int tt = 0; tt < nb; ++tt)
                for (int j = 0; j < tw; ++j) packed[tt * tw + j] = a(j0 + j, k0 + tt);
            update_tile(a, i0, i1, j0, j1, k0, nb, packed, tw);
        }
    }
    // Zero the strict upper triangle so L is directly usable.
    for (int i = 0; i < n; ++i) {
        double* ri = a.row(i);
        for (int j = i + 1; j < n; ++j) ri[j] = 0.0;
    }
}

void solve_lower_inplace(const Matrix& l, std::span<double> x) {
    const int n = l.rows;
    for (int i = 0; i < n; ++i) {
        const double* ri = l.row(i);
        double s = x[i];
        for (int t = 0; t < i; ++t) s -= ri[t] * x[t];
        x[i] = s / ri[i];
    }
}

void solve_lower_transposed_inplace(const Matrix& l, std::span<double> x) {
    const int n = l.rows;
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int t = i + 1; t < n; ++t) s -= l(t, i) * x[t];
        x[i] = s / l(i, i);
    }
}

std::vector<double> chol_solve(const Matrix& l, std::span<const double> b) {
    std::vector<double> x(b.begin(), b.end());
    solve_lower_inplace(l, x);
    solve_lower_transposed_inplace(l, x);
    return x;
}

Matrix spd_inverse_from_chol(const Matrix& l) {
    const int n = l.rows;
    // Z = L^{-1}, computed column by column (column j of Z is zero above row j).
    Matrix zt(n, n);  // stores Z^T so rows of zt are columns of Z
#pragma omp parallel for schedule(static, 8) if (n > 128)
    for (int j = 0; j < n; ++j) {
        double* zj = zt.row(j);
        zj[j] = 1.0 / l(j, j);
        for (int i = j + 1; i < n; ++i) {
            const double* ri = l.row(i);
            double s = 0.0;
            for (int t = j; t < i; ++t) s -= ri[t] * zj[t];
            zj[i] = s / ri[i];
        }
    }
    // K^{-1} = Z^T Z; with zt = Z^T this is zt[i] . zt[j] over entries >= max(i,j).
    // Interleaved scheduling balances the triangular work; outputs are
    // element-independent, so the result does not depend on the schedule.
    Matrix inv(n, n);
#pragma omp parallel for schedule(static, 8) if (n > 128)
    for (int i = 0; i < n; ++i) {
        const double* zi = zt.row(i);
        for (int j = 0; j <= i; ++j) {
            const double* zj = zt.row(j);
            double s = 0.0;
            for (int t = i; t < n; ++t) s += zi[t] * zj[t];
            inv(i, j) = s;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) inv(i, j) = inv(j, i);
    return inv;
}

bool solve_dense(Matrix a, std::span<double> x) {
    const int n = a.rows;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best < 1e-14) return false;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(x[k], x[piv]);
        }
        const double d = a(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / d;
            if (f == 0.0) continue;
            for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            x[i] -= f * x[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return true;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    std::vector<double> y(a.rows, 0.0);
#pragma omp parallel for schedule(static) if (a.rows > 512)
    for (int i = 0; i < a.rows; ++i) {
        const double* ri = a.row(i);
        double s = 0.0;
        for (int j = 0; j < a.cols; ++j) s += ri[j] * x[j];
        y[i] = s;
    }
    return y;
}

namespace ref {

void cholesky_factor(Matrix& a) {
    const int n = a.rows;
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int t = 0; t < j; ++t) d -= a(j, t) * a(j, t);
        if (!(d > 0.0)) throw factorization_error(j);
        a(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int t = 0; t < j; ++t) s -= a(i, t) * a(j, t);
            a(i, j) = s / a(j, j);
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a(i, j) = 0.0;
}

}  // namespace ref

}  // namespace gpmesh
