#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace lintel {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
};

/// Derivative-free simplex minimizer (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Stops on the evaluation budget or when the
/// simplex collapses below `tolerance` in both value spread and edge length.
inline NelderMeadResult nelder_mead_minimize(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, double initial_step, int max_evaluations,
    double tolerance = 1e-8) {
    const auto dim = start.size();
    NelderMeadResult result;
    result.x = start;

    int evals = 0;
    auto evaluate = [&](const Eigen::VectorXd& x) {
        ++evals;
        return objective(x);
    };

    std::vector<Eigen::VectorXd> simplex;
    std::vector<double> values;
    simplex.reserve(dim + 1);
    simplex.push_back(start);
    values.push_back(evaluate(start));
    for (Eigen::Index i = 0; i < dim && evals < max_evaluations; ++i) {
        Eigen::VectorXd vertex = start;
        vertex(i) += initial_step;
        simplex.push_back(vertex);
        values.push_back(evaluate(vertex));
    }

    result.x = simplex.front();
    result.value = values.front();
    auto remember_best = [&](const Eigen::VectorXd& x, double v) {
        if (v < result.value) {
            result.value = v;
            result.x = x;
        }
    };
    for (std::size_t i = 0; i < simplex.size(); ++i) remember_best(simplex[i], values[i]);

    const auto n_vertices = simplex.size();
    std::vector<std::size_t> order(n_vertices);
    while (evals < max_evaluations && n_vertices == static_cast<std::size_t>(dim) + 1) {
        for (std::size_t i = 0; i < n_vertices; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n_vertices - 2];

        double max_edge = 0.0;
        for (std::size_t i = 0; i < n_vertices; ++i)
            max_edge = std::max(max_edge, (simplex[i] - simplex[best]).cwiseAbs().maxCoeff());
        if (values[worst] - values[best] < tolerance && max_edge < tolerance) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (std::size_t i = 0; i < n_vertices; ++i)
            if (i != worst) centroid += simplex[i];
        centroid /= static_cast<double>(n_vertices - 1);

        const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
        const double reflected_value = evaluate(reflected);
        remember_best(reflected, reflected_value);

        if (reflected_value < values[best]) {
            if (evals >= max_evaluations) break;
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
            const double expanded_value = evaluate(expanded);
            remember_best(expanded, expanded_value);
            if (expanded_value < reflected_value) {
                simplex[worst] = expanded;
                values[worst] = expanded_value;
            } else {
                simplex[worst] = reflected;
                values[worst] = reflected_value;
            }
        } else if (reflected_value < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = reflected_value;
        } else {
            if (evals >= max_evaluations) break;
            const Eigen::VectorXd contracted =
                centroid + 0.5 * (simplex[worst] - centroid);
            const double contracted_value = evaluate(contracted);
            remember_best(contracted, contracted_value);
            if (contracted_value < values[worst]) {
                simplex[worst] = contracted;
                values[worst] = contracted_value;
            } else {
                for (std::size_t i = 0; i < n_vertices; ++i) {
                    if (i == best) continue;
                    if (evals >= max_evaluations) break;
                    simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
                    values[i] = evaluate(simplex[i]);
                    remember_best(simplex[i], values[i]);
                }
            }
        }
    }

    result.evaluations = evals;
    return result;
}

} // namespace lintel
