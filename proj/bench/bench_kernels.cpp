// Timing comparison of the OpenMP kernels against their serial references:
// covariance assembly, Cholesky factorization, and the diffusion sensors.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "gpmesh/diffusion.hpp"
#include "gpmesh/gpr.hpp"
#include "gpmesh/kernels.hpp"
#include "gpmesh/linalg.hpp"
#include "gpmesh/mesh.hpp"

using namespace gpmesh;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

double checksum(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
}

StructuredMesh random_positive_mesh(std::vector<int> shape, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> coords(shape.size());
    std::size_t total = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        coords[k].resize(shape[k]);
        for (int i = 0; i < shape[k]; ++i) coords[k][i] = i;
        total *= shape[k];
    }
    std::vector<double> values(total);
    for (auto& v : values) v = 0.05 + 0.95 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return StructuredMesh(coords, values);
}

}  // namespace

int main() {
    std::printf("%-34s %10s %10s %8s\n", "kernel", "serial ms", "omp ms", "speedup");

    {
        const int n = 1200, d = 3;
        std::mt19937_64 rng(1);
        PointSet pts(d);
        for (int i = 0; i < n * d; ++i)
            pts.coords.push_back(10.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53);
        KernelSpec spec;
        spec.params.sigma = 0.15;
        spec.params.lengthscales = {1.0, 1.3, 0.7};
        Matrix k = kernel_matrix_sym(spec, pts);
        for (int i = 0; i < n; ++i) k(i, i) += 1e-8;

        Matrix a = k;
        auto t0 = clock_type::now();
        ref::cholesky_factor(a);
        const double serial = ms_since(t0);
        Matrix b = k;
        t0 = clock_type::now();
        cholesky_factor(b);
        const double par = ms_since(t0);
        std::printf("%-34s %10.2f %10.2f %8.2f  (n=%d, check %.6g / %.6g)\n",
                    "cholesky_factor", serial, par, serial / par, n, b(n - 1, n - 1),
                    a(n - 1, n - 1));
    }

    {
        const auto mesh = random_positive_mesh({60, 60, 60}, 2);
        auto t0 = clock_type::now();
        const SensorField s1 = ref::sensor_true_md(mesh);
        const double serial = ms_since(t0);
        t0 = clock_type::now();
        const SensorField s2 = sensor_true_md(mesh);
        const double par = ms_since(t0);
        std::printf("%-34s %10.2f %10.2f %8.2f  (check %.6g / %.6g)\n", "sensor_true_md 60^3",
                    serial, par, serial / par, checksum(s2.total), checksum(s1.total));
    }

    {
        const auto mesh = random_positive_mesh({60, 60, 60}, 3);
        const auto stag_mesh = random_positive_mesh({59, 59, 59}, 4);
        auto t0 = clock_type::now();
        const SensorField s1 =
            ref::sensor_staggered_md(mesh.values(), mesh.shape(), stag_mesh.values());
        const double serial = ms_since(t0);
        t0 = clock_type::now();
        const SensorField s2 = sensor_staggered_md(mesh.values(), mesh.shape(), stag_mesh.values());
        const double par = ms_since(t0);
        std::printf("%-34s %10.2f %10.2f %8.2f  (check %.6g / %.6g)\n", "sensor_staggered_md 60^3",
                    serial, par, serial / par, checksum(s2.total), checksum(s1.total));
    }

    return 0;
}
