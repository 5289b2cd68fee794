#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gpmesh/errors.hpp"
#include "gpmesh/kernels.hpp"
#include "gpmesh/linalg.hpp"

using namespace gpmesh;

namespace {

KernelSpec se_spec(std::vector<double> ls, double sigma = 0.15) {
    KernelSpec spec;
    spec.kind = KernelKind::SquaredExponential;
    spec.params.sigma = sigma;
    spec.params.lengthscales = std::move(ls);
    return spec;
}

KernelSpec rq_spec(std::vector<double> ls, double alpha, double sigma = 0.15) {
    KernelSpec spec;
    spec.kind = KernelKind::RationalQuadratic;
    spec.params.sigma = sigma;
    spec.params.lengthscales = std::move(ls);
    spec.params.alpha = alpha;
    return spec;
}

PointSet random_points(int n, int d, unsigned seed, double span = 5.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, span);
    PointSet pts(d);
    for (int i = 0; i < n * d; ++i) pts.coords.push_back(uni(rng));
    return pts;
}

}  // namespace

TEST_CASE("kernel_eval hand values") {
    const auto se = se_spec({1.0, 1.0, 1.0});
    const std::vector<double> x{1.0, 2.0, 3.0};
    CHECK(kernel_eval(se, x, x) == doctest::Approx(0.0225).epsilon(1e-15));

    const auto se1 = se_spec({0.7});
    const std::vector<double> a{0.0}, b{0.7 * std::sqrt(2.0)};
    CHECK(kernel_eval(se1, a, b) ==
          doctest::Approx(0.0225 * std::exp(-1.0)).epsilon(1e-14));

    const auto rq = rq_spec({1.0, 1.0}, 0.37);
    const std::vector<double> p{0.3, -0.4};
    CHECK(kernel_eval(rq, p, p) == doctest::Approx(0.0225).epsilon(1e-15));
}

TEST_CASE("kernel_eval is symmetric in its arguments") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-4.0, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(3), y(3), ls(3);
        for (int k = 0; k < 3; ++k) {
            x[k] = uni(rng);
            y[k] = uni(rng);
            ls[k] = 0.3 + std::abs(uni(rng));
        }
        const auto se = se_spec(ls);
        CHECK(kernel_eval(se, x, y) == kernel_eval(se, y, x));
        const auto rq = rq_spec(ls, 0.8);
        CHECK(kernel_eval(rq, x, y) == kernel_eval(rq, y, x));
    }
}

TEST_CASE("kernel_eval decreases with each coordinate distance") {
    const auto se = se_spec({1.0, 2.0});
    const auto rq = rq_spec({1.0, 2.0}, 1.5);
    const std::vector<double> origin{0.0, 0.0};
    for (const auto* spec : {&se, &rq}) {
        for (int axis = 0; axis < 2; ++axis) {
            double prev = kernel_eval(*spec, origin, origin);
            for (double r : {0.5, 1.0, 2.0, 4.0}) {
                std::vector<double> q{0.0, 0.0};
                q[axis] = r;
                const double v = kernel_eval(*spec, origin, q);
                CHECK(v < prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("kernel_matrix single point and symmetry") {
    const auto se = se_spec({1.0});
    PointSet one(1);
    one.coords = {2.5};
    const Matrix k = kernel_matrix_sym(se, one);
    REQUIRE(k.rows == 1);
    CHECK(k(0, 0) == doctest::Approx(0.0225).epsilon(1e-15));

    const PointSet pts = random_points(40, 3, 11);
    const Matrix big = kernel_matrix_sym(se_spec({1.0, 0.7, 2.0}), pts);
    for (int i = 0; i < big.rows; ++i)
        for (int j = 0; j < big.cols; ++j) CHECK(big(i, j) == big(j, i));  // exact
}

TEST_CASE("kernel_matrix on collinear points matches the closed form") {
    const double lam = 0.8;
    const auto se = se_spec({lam});
    PointSet pts(1);
    pts.coords = {0.0, lam, 2.0 * lam};
    const Matrix k = kernel_matrix_sym(se, pts);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double lag = std::abs(i - j);
            CHECK(k(i, j) ==
                  doctest::Approx(0.0225 * std::exp(-0.5 * lag * lag)).epsilon(1e-12));
        }
}

TEST_CASE("kernel_matrix factored path agrees with direct evaluation") {
    // gridded points trigger the per-axis table assembly; compare to kernel_eval
    PointSet grid(2);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 9; ++j) {
            grid.coords.push_back(i);
            grid.coords.push_back(j * 0.5);
        }
    const PointSet scattered = random_points(30, 2, 21);
    for (const auto& spec : {se_spec({1.3, 0.6}), rq_spec({1.3, 0.6}, 2.5)}) {
        const Matrix k = kernel_matrix(spec, grid, scattered);
        for (int i = 0; i < k.rows; i += 17)
            for (int j = 0; j < k.cols; ++j) {
                const double direct = kernel_eval(spec, grid.point(i), scattered.point(j));
                CHECK(k(i, j) == doctest::Approx(direct).epsilon(1e-14));
            }
    }
}

TEST_CASE("kernel_matrix rejects dimension mismatches") {
    const PointSet a = random_points(5, 2, 1);
    const PointSet b = random_points(5, 3, 2);
    CHECK_THROWS_AS(kernel_matrix(se_spec({1.0, 1.0}), a, b), validation_error);
    CHECK_THROWS_AS(kernel_matrix_sym(se_spec({1.0, 1.0, 1.0}), a), validation_error);
}

TEST_CASE("RQ approaches SE as alpha grows") {
    const PointSet pts = random_points(20, 3, 7);
    const Matrix kse = kernel_matrix_sym(se_spec({1.0, 0.8, 1.4}), pts);
    const Matrix krq = kernel_matrix_sym(rq_spec({1.0, 0.8, 1.4}, 1e6), pts);
    const double sigma2 = 0.0225;
    for (int i = 0; i < kse.rows; ++i)
        for (int j = 0; j < kse.cols; ++j)
            CHECK(std::abs(krq(i, j) - kse(i, j)) <= 1e-4 * sigma2);
}

TEST_CASE("K + 1e-10 I admits a Cholesky factorization up to n = 1500") {
    PointSet pts = random_points(1500, 3, 13, 10.0);
    Matrix k = kernel_matrix_sym(se_spec({1.0, 1.0, 1.0}), pts);
    for (int i = 0; i < k.rows; ++i) k(i, i) += 1e-10;
    CHECK_NOTHROW(cholesky_factor(k));
}

TEST_CASE("pack_log / unpack_log round trip") {
    SUBCASE("unit lengthscales pack to zeros") {
        const auto spec = se_spec({1.0, 1.0, 1.0});
        const auto packed = pack_log(spec);
        REQUIRE(packed.size() == 3);  // sigma fixed, absent
        for (double v : packed) CHECK(v == 0.0);
        CHECK(packed_names(spec) ==
              std::vector<std::string>{"lengthscale_1", "lengthscale_2", "lengthscale_3"});
    }
    SUBCASE("log of 0.01") {
        const auto packed = pack_log(se_spec({0.01}));
        REQUIRE(packed.size() == 1);
        CHECK(packed[0] == doctest::Approx(-4.605170185988091).epsilon(1e-14));
    }
    SUBCASE("round trip is exact to 1e-15 relative") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> uni(0.001, 50.0);
        for (int trial = 0; trial < 30; ++trial) {
            auto spec = rq_spec({uni(rng), uni(rng)}, uni(rng));
            spec.train_sigma = true;
            const auto packed = pack_log(spec);
            REQUIRE(packed.size() == 4);  // 2 lengthscales + alpha + sigma
            const auto back = unpack_log(spec, packed);
            for (int k = 0; k < 2; ++k)
                CHECK(back.params.lengthscales[k] ==
                      doctest::Approx(spec.params.lengthscales[k]).epsilon(1e-15));
            CHECK(*back.params.alpha == doctest::Approx(*spec.params.alpha).epsilon(1e-15));
            CHECK(back.params.sigma == doctest::Approx(spec.params.sigma).epsilon(1e-15));
        }
    }
    SUBCASE("tied lengthscales pack a single entry") {
        auto spec = se_spec({2.0, 2.0, 2.0});
        spec.tied_lengthscales = true;
        const auto packed = pack_log(spec);
        REQUIRE(packed.size() == 1);
        const auto back = unpack_raw(spec, std::vector<double>{3.0});
        CHECK(back.params.lengthscales == std::vector<double>{3.0, 3.0, 3.0});
    }
    SUBCASE("non-positive parameters are rejected") {
        auto spec = se_spec({1.0});
        spec.params.lengthscales[0] = -1.0;
        CHECK_THROWS_AS(pack_log(spec), validation_error);
        CHECK_THROWS_AS(unpack_raw(se_spec({1.0}), std::vector<double>{0.0}), validation_error);
    }
}

TEST_CASE("alpha presence is tied to the RQ kind") {
    auto se = se_spec({1.0});
    se.params.alpha = 1.0;
    CHECK_THROWS_AS(se.validate(), validation_error);
    auto rq = rq_spec({1.0}, 1.0);
    rq.params.alpha.reset();
    CHECK_THROWS_AS(rq.validate(), validation_error);
}
