#include <catch2/catch_amalgamated.hpp>

#include <lintel/expm.hpp>
#include <lintel/kernels.hpp>
#include <lintel/random.hpp>
#include <lintel/state_space.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using lintel::KernelSpec;
using lintel::StateSpaceModel;

namespace {

double lyapunov_residual(const StateSpaceModel& ssm) {
    const Eigen::MatrixXd residual = ssm.F * ssm.Pinf + ssm.Pinf * ssm.F.transpose() +
                                     ssm.L * ssm.Qc * ssm.L.transpose();
    return residual.cwiseAbs().maxCoeff();
}

std::vector<KernelSpec> sample_specs() {
    return {
        KernelSpec::matern12(1.0, 1.0),   KernelSpec::matern12(2.5, 0.3),
        KernelSpec::matern32(1.0, 1.0),   KernelSpec::matern32(0.4, 6.0),
        KernelSpec::matern52(1.0, 1.0),   KernelSpec::matern52(3.0, 0.7),
        KernelSpec::sum({KernelSpec::matern52(1.0, 8.0), KernelSpec::matern32(0.5, 1.0)}),
    };
}

} // namespace

TEST_CASE("exponential kernel canonical state space", "[state_space]") {
    const auto ssm = lintel::to_state_space(KernelSpec::matern12(3.0, 2.0));
    REQUIRE(ssm.state_dim() == 1);
    CHECK(ssm.F(0, 0) == Catch::Approx(-0.5));
    CHECK(ssm.Pinf(0, 0) == Catch::Approx(3.0));
    CHECK(ssm.h(0) == 1.0);
}

TEST_CASE("sum kernel stacks blocks with concatenated observation", "[state_space]") {
    const auto ssm = lintel::to_state_space(
        KernelSpec::sum({KernelSpec::matern12(1.0, 1.0), KernelSpec::matern32(0.5, 2.0)}));
    REQUIRE(ssm.state_dim() == 3);
    CHECK(ssm.h(0) == 1.0);
    CHECK(ssm.h(1) == 1.0);
    CHECK(ssm.h(2) == 0.0);
    CHECK(ssm.F(0, 1) == 0.0); // no cross-block coupling
    CHECK(ssm.h.dot(ssm.Pinf * ssm.h) == Catch::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("stationary covariance solves the Lyapunov equation", "[state_space]") {
    for (const auto& spec : sample_specs()) {
        const auto ssm = lintel::to_state_space(spec);
        INFO("family " << lintel::family_name(spec.family));
        CHECK(lyapunov_residual(ssm) < 1e-9);
        CHECK(ssm.h.dot(ssm.Pinf * ssm.h) ==
              Catch::Approx(lintel::kernel_variance(spec)).epsilon(1e-12));
        CHECK((ssm.Pinf - ssm.Pinf.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("state space reconstructs the kernel", "[state_space]") {
    // h' exp(F r) Pinf h must equal kappa(r) for every supported kernel.
    for (const auto& spec : sample_specs()) {
        const auto ssm = lintel::to_state_space(spec);
        for (double r : {0.0, 0.1, 0.5, 1.0, 2.0, 7.3}) {
            const double expected = lintel::kernel_eval(spec, r);
            const double got =
                ssm.h.dot(lintel::matrix_exponential(ssm.F * r) * ssm.Pinf * ssm.h);
            INFO("family " << lintel::family_name(spec.family) << " r=" << r);
            CHECK(got == Catch::Approx(expected).epsilon(1e-8).margin(1e-10));
        }
    }
}

TEST_CASE("discretize at dt=0 is the identity", "[state_space]") {
    const auto ssm = lintel::to_state_space(KernelSpec::matern52(1.3, 2.2));
    const auto trans = lintel::discretize(ssm, 0.0);
    CHECK(trans.A.isIdentity(0.0));
    CHECK(trans.Sigma.isZero(0.0));
}

TEST_CASE("scalar OU discretization closed form", "[state_space]") {
    // For the exponential kernel, A = exp(-dt/ell) and
    // Sigma = sigma_f^2 (1 - exp(-2 dt/ell)).
    const auto ssm = lintel::to_state_space(KernelSpec::matern12(1.0, 2.0));
    const auto trans = lintel::discretize(ssm, 1.0);
    CHECK(trans.A(0, 0) == Catch::Approx(0.6065306597126334).epsilon(1e-14));
    CHECK(trans.Sigma(0, 0) == Catch::Approx(0.6321205588285577).epsilon(1e-12));
}

TEST_CASE("matrix exponential against independent implementation", "[state_space][expm]") {
    const auto m52 = lintel::to_state_space(KernelSpec::matern52(1.0, 1.0));
    {
        const Eigen::MatrixXd scaled = m52.F * 0.7;
        const Eigen::MatrixXd reference = scaled.exp();
        const Eigen::MatrixXd ours = lintel::matrix_exponential(scaled);
        CHECK((ours - reference).cwiseAbs().maxCoeff() < 1e-10);
    }

    lintel::Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 2 + static_cast<int>(rng.index(5));
        Eigen::MatrixXd mat(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) mat(i, j) = rng.uniform(-3.0, 3.0);
        const Eigen::MatrixXd reference = mat.exp();
        const Eigen::MatrixXd ours = lintel::matrix_exponential(mat);
        const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
        CHECK((ours - reference).cwiseAbs().maxCoeff() / scale < 1e-10);
    }
}

TEST_CASE("discretization semigroup property", "[state_space][property]") {
    lintel::Rng rng(11);
    const auto specs = sample_specs();
    for (int trial = 0; trial < 200; ++trial) {
        const auto& spec = specs[trial % specs.size()];
        const auto ssm = lintel::to_state_space(spec);
        const double a = rng.uniform(0.0, 3.0);
        const double b = rng.uniform(0.0, 3.0);
        const Eigen::MatrixXd whole = lintel::discretize(ssm, a + b).A;
        const Eigen::MatrixXd split =
            lintel::discretize(ssm, a).A * lintel::discretize(ssm, b).A;
        CHECK((whole - split).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("process noise covariance stays PSD", "[state_space][property]") {
    lintel::Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        const double process_variance = rng.uniform(0.05, 5.0);
        const double lengthscale = rng.uniform(0.05, 10.0);
        KernelSpec spec;
        switch (trial % 4) {
        case 0: spec = KernelSpec::matern12(process_variance, lengthscale); break;
        case 1: spec = KernelSpec::matern32(process_variance, lengthscale); break;
        case 2: spec = KernelSpec::matern52(process_variance, lengthscale); break;
        default:
            spec = KernelSpec::sum({KernelSpec::matern52(process_variance, lengthscale),
                                    KernelSpec::matern32(0.3, 0.8)});
        }
        const auto ssm = lintel::to_state_space(spec);
        const double dt = rng.uniform(0.0, 50.0);
        const auto trans = lintel::discretize(ssm, dt);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(trans.Sigma);
        const double tol = 2e-12 * std::max(1.0, trans.Sigma.trace());
        CHECK(eigen.eigenvalues().minCoeff() >= -tol);
        CHECK((trans.Sigma - trans.Sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("very large dt converges to the stationary covariance", "[state_space]") {
    const auto spec = KernelSpec::matern32(2.0, 0.5);
    const auto ssm = lintel::to_state_space(spec);
    const auto trans = lintel::discretize(ssm, 500.0);
    CHECK(trans.A.cwiseAbs().maxCoeff() < 1e-12);
    CHECK((trans.Sigma - ssm.Pinf).cwiseAbs().maxCoeff() < 1e-12);
}
