#include <catch2/catch_amalgamated.hpp>

#include <lintel/kernels.hpp>

#include <cmath>

using lintel::KernelFamily;
using lintel::KernelSpec;

TEST_CASE("kernel at zero lag equals the process variance", "[kernels]") {
    CHECK(lintel::kernel_eval(KernelSpec::matern52(2.0, 1.0), 0.0) == 2.0);
    CHECK(lintel::kernel_eval(KernelSpec::matern32(0.7, 3.0), 0.0) == 0.7);
    CHECK(lintel::kernel_eval(KernelSpec::matern12(1.5, 0.2), 0.0) == 1.5);
}

TEST_CASE("exponential kernel closed form", "[kernels]") {
    // OU covariance: kappa(r) = sigma_f^2 exp(-r/ell)
    CHECK(lintel::kernel_eval(KernelSpec::matern12(1.0, 1.0), 1.0) ==
          Catch::Approx(0.3678794411714423).epsilon(1e-14));
    CHECK(lintel::kernel_eval(KernelSpec::matern12(2.0, 4.0), 2.0) ==
          Catch::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("matern 5/2 against high-precision reference", "[kernels]") {
    // Frozen from an independent 40-digit evaluation of
    // sigma_f^2 (1 + sqrt(5) r / ell + 5 r^2 / (3 ell^2)) exp(-sqrt(5) r / ell)
    CHECK(lintel::kernel_eval(KernelSpec::matern52(1.0, 0.5), 0.3) ==
          Catch::Approx(0.7689931092516180).epsilon(1e-14));
}

TEST_CASE("sum kernel adds its children", "[kernels]") {
    const KernelSpec sum =
        KernelSpec::sum({KernelSpec::matern12(1.0, 2.0), KernelSpec::matern52(0.5, 1.0)});
    for (double r : {0.0, 0.4, 1.7}) {
        const double expected = lintel::kernel_eval(KernelSpec::matern12(1.0, 2.0), r) +
                                lintel::kernel_eval(KernelSpec::matern52(0.5, 1.0), r);
        CHECK(lintel::kernel_eval(sum, r) == Catch::Approx(expected).epsilon(1e-15));
    }
    CHECK(lintel::kernel_variance(sum) == Catch::Approx(1.5));
}

TEST_CASE("invalid hyperparameters are rejected", "[kernels]") {
    CHECK_THROWS_AS(lintel::kernel_eval(KernelSpec::matern32(-1.0, 1.0), 0.5),
                    lintel::invalid_spec_error);
    CHECK_THROWS_AS(lintel::kernel_eval(KernelSpec::matern32(1.0, 0.0), 0.5),
                    lintel::invalid_spec_error);
    CHECK_THROWS_AS(lintel::kernel_eval(KernelSpec::sum({KernelSpec::matern12(1.0, 1.0)}), 0.5),
                    lintel::invalid_spec_error);
}

TEST_CASE("kernel specs round-trip through json", "[kernels]") {
    const KernelSpec spec =
        KernelSpec::sum({KernelSpec::matern52(1.25, 8.5), KernelSpec::matern32(0.5, 1.0625)});
    const nlohmann::json j = spec;
    const auto parsed = j.get<KernelSpec>();
    REQUIRE(parsed.family == KernelFamily::SumOfKernels);
    REQUIRE(parsed.children.size() == 2);
    CHECK(parsed.children[0].process_variance == 1.25);
    CHECK(parsed.children[0].lengthscale == 8.5);
    CHECK(parsed.children[1].process_variance == 0.5);
    CHECK(parsed.children[1].lengthscale == 1.0625);
}
