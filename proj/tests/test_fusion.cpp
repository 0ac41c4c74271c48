#include <catch2/catch_amalgamated.hpp>

#include <lintel/fusion.hpp>
#include <lintel/random.hpp>

#include <algorithm>
#include <cmath>

using lintel::FusionRule;
using lintel::PredictiveDistribution;
using lintel::WeightVector;

namespace {

WeightVector make_weights(std::initializer_list<double> values) {
    WeightVector w(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) w(i++) = v;
    return w;
}

} // namespace

TEST_CASE("forgetting with alpha=1 keeps the weights", "[fusion]") {
    const WeightVector w = make_weights({0.7, 0.2, 0.1});
    const WeightVector kept = lintel::forget(w, 1.0);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        CHECK(kept(i) == Catch::Approx(w(i)).epsilon(1e-14));
}

TEST_CASE("forgetting with alpha=0 resets to uniform", "[fusion]") {
    const WeightVector w = make_weights({0.99, 0.005, 0.005});
    const WeightVector flat = lintel::forget(w, 0.0);
    for (Eigen::Index i = 0; i < flat.size(); ++i)
        CHECK(flat(i) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("forgetting with alpha=1/2 takes square roots", "[fusion]") {
    // (sqrt(0.9), sqrt(0.1)) normalizes to exactly (3/4, 1/4).
    const WeightVector w = lintel::forget(make_weights({0.9, 0.1}), 0.5);
    CHECK(w(0) == Catch::Approx(0.75).epsilon(1e-12));
    CHECK(w(1) == Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("bayes update with equal likelihoods is a no-op", "[fusion]") {
    const WeightVector w = make_weights({0.6, 0.3, 0.1});
    const Eigen::VectorXd log_liks = Eigen::VectorXd::Constant(3, -1.7);
    const WeightVector updated = lintel::bayes_update(w, log_liks);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        CHECK(updated(i) == Catch::Approx(w(i)).epsilon(1e-12));
}

TEST_CASE("bayes update single model", "[fusion]") {
    const WeightVector w = make_weights({1.0});
    const Eigen::VectorXd log_liks = Eigen::VectorXd::Constant(1, -42.0);
    CHECK(lintel::bayes_update(w, log_liks)(0) == 1.0);
}

TEST_CASE("bayes update direct arithmetic", "[fusion]") {
    const WeightVector w = make_weights({0.5, 0.5});
    Eigen::VectorXd log_liks(2);
    log_liks << std::log(0.2), std::log(0.6);
    const WeightVector updated = lintel::bayes_update(w, log_liks);
    CHECK(updated(0) == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(updated(1) == Catch::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("bayes update survives extreme log likelihoods", "[fusion]") {
    const WeightVector w = make_weights({0.5, 0.5});
    Eigen::VectorXd log_liks(2);
    log_liks << -5000.0, -5003.0; // both underflow as raw densities
    const WeightVector updated = lintel::bayes_update(w, log_liks);
    CHECK(updated(0) == Catch::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-10));
    CHECK(updated.sum() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("fusing a single forecast returns it unchanged", "[fusion]") {
    const PredictiveDistribution p{1.3, 0.8};
    for (auto rule : {FusionRule::Arithmetic, FusionRule::Geometric}) {
        const auto fused = lintel::fuse({p}, make_weights({1.0}), rule);
        CHECK(fused.mean == p.mean);
        CHECK(fused.variance == p.variance);
    }
}

TEST_CASE("identical forecasts fuse to themselves", "[fusion]") {
    const PredictiveDistribution p{-0.4, 1.7};
    const WeightVector w = make_weights({0.3, 0.7});
    for (auto rule : {FusionRule::Arithmetic, FusionRule::Geometric}) {
        const auto fused = lintel::fuse({p, p}, w, rule);
        CHECK(fused.mean == Catch::Approx(p.mean).epsilon(1e-14));
        CHECK(fused.variance == Catch::Approx(p.variance).epsilon(1e-14));
    }
}

TEST_CASE("two-expert fusion closed forms", "[fusion]") {
    const std::vector<PredictiveDistribution> preds = {{0.0, 1.0}, {2.0, 1.0}};
    const WeightVector w = make_weights({0.5, 0.5});
    const auto arithmetic = lintel::fuse(preds, w, FusionRule::Arithmetic);
    CHECK(arithmetic.mean == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(arithmetic.variance == Catch::Approx(2.0).epsilon(1e-14));
    const auto geometric = lintel::fuse(preds, w, FusionRule::Geometric);
    CHECK(geometric.mean == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(geometric.variance == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("arithmetic fusion matches mixture moments by Monte Carlo", "[fusion][montecarlo]") {
    const std::vector<PredictiveDistribution> preds = {{-1.0, 0.5}, {2.0, 2.0}};
    const WeightVector w = make_weights({0.3, 0.7});
    const auto fused = lintel::fuse(preds, w, FusionRule::Arithmetic);

    lintel::Rng rng(99);
    const int n_draws = 400000;
    double sum = 0.0;
    double sum_squares = 0.0;
    for (int i = 0; i < n_draws; ++i) {
        const int pick = rng.uniform() < 0.3 ? 0 : 1;
        const double draw = preds[static_cast<std::size_t>(pick)].mean +
                            std::sqrt(preds[static_cast<std::size_t>(pick)].variance) *
                                rng.normal();
        sum += draw;
        sum_squares += draw * draw;
    }
    const double mc_mean = sum / n_draws;
    const double mc_var = sum_squares / n_draws - mc_mean * mc_mean;
    CHECK(std::abs(mc_mean - fused.mean) < 0.01);
    CHECK(std::abs(mc_var - fused.variance) < 0.03);
}

TEST_CASE("fusion invariants over random ensembles", "[fusion][property]") {
    lintel::Rng rng(555);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.index(5));
        std::vector<PredictiveDistribution> preds;
        WeightVector w(k);
        for (int i = 0; i < k; ++i) {
            preds.push_back({rng.uniform(-5.0, 5.0), rng.uniform(0.05, 4.0)});
            w(i) = rng.uniform(0.0, 1.0) + 1e-6;
        }
        w /= w.sum();

        double min_mean = preds[0].mean, max_mean = preds[0].mean;
        double weighted_var = 0.0;
        for (int i = 0; i < k; ++i) {
            min_mean = std::min(min_mean, preds[static_cast<std::size_t>(i)].mean);
            max_mean = std::max(max_mean, preds[static_cast<std::size_t>(i)].mean);
            weighted_var += w(i) * preds[static_cast<std::size_t>(i)].variance;
        }

        const auto arithmetic = lintel::fuse(preds, w, FusionRule::Arithmetic);
        CHECK(arithmetic.mean >= min_mean - 1e-12);
        CHECK(arithmetic.mean <= max_mean + 1e-12);
        CHECK(arithmetic.variance >= weighted_var - 1e-12);

        const auto geometric = lintel::fuse(preds, w, FusionRule::Geometric);
        CHECK(geometric.mean >= min_mean - 1e-12);
        CHECK(geometric.mean <= max_mean + 1e-12);
        double max_ratio = 0.0;
        for (int i = 0; i < k; ++i)
            max_ratio = std::max(max_ratio, preds[static_cast<std::size_t>(i)].variance / w(i));
        CHECK(geometric.variance <= max_ratio + 1e-12);

        // permutation equivariance: reverse the ensemble
        std::vector<PredictiveDistribution> reversed(preds.rbegin(), preds.rend());
        WeightVector w_reversed = w.reverse();
        for (auto rule : {FusionRule::Arithmetic, FusionRule::Geometric}) {
            const auto direct = lintel::fuse(preds, w, rule);
            const auto permuted = lintel::fuse(reversed, w_reversed, rule);
            CHECK(permuted.mean == Catch::Approx(direct.mean).margin(1e-12));
            CHECK(permuted.variance == Catch::Approx(direct.variance).margin(1e-12));
        }
    }
}

TEST_CASE("equal variances under geometric fusion are preserved", "[fusion][property]") {
    lintel::Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.index(4));
        const double variance = rng.uniform(0.1, 3.0);
        std::vector<PredictiveDistribution> preds;
        WeightVector w(k);
        for (int i = 0; i < k; ++i) {
            preds.push_back({rng.uniform(-1.0, 1.0), variance});
            w(i) = rng.uniform(0.01, 1.0);
        }
        w /= w.sum();
        const auto fused = lintel::fuse(preds, w, FusionRule::Geometric);
        CHECK(fused.variance == Catch::Approx(variance).epsilon(1e-10));
    }
}

TEST_CASE("no weight ever collapses to zero", "[fusion][property]") {
    lintel::Rng rng(321);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.index(6));
        WeightVector w = lintel::uniform_weights(k);
        for (int step = 0; step < 60; ++step) {
            w = lintel::forget(w, rng.uniform(0.0, 1.0));
            Eigen::VectorXd log_liks(k);
            for (int i = 0; i < k; ++i) log_liks(i) = rng.uniform(-2000.0, 0.0);
            w = lintel::bayes_update(w, log_liks);
        }
        CHECK(w.minCoeff() >= lintel::kWeightFloor / 2.0);
        CHECK(w.sum() == Catch::Approx(1.0).margin(1e-12));
        CHECK(w.minCoeff() > 0.0);
    }
}
