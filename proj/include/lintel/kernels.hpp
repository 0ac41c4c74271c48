#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "lintel/errors.hpp"

namespace lintel {

enum class KernelFamily { Matern12, Matern32, Matern52, SumOfKernels };

/// Parametric description of a stationary covariance function.
///
/// Leaf kernels carry a process variance sigma_f^2 (output units squared)
/// and a lengthscale ell (time units). A SumOfKernels node has no
/// hyperparameters of its own and at least two children.
struct KernelSpec {
    KernelFamily family = KernelFamily::Matern52;
    double process_variance = 1.0; // sigma_f^2
    double lengthscale = 1.0;      // ell
    std::vector<KernelSpec> children;

    static KernelSpec matern12(double process_variance, double lengthscale) {
        return {KernelFamily::Matern12, process_variance, lengthscale, {}};
    }
    static KernelSpec matern32(double process_variance, double lengthscale) {
        return {KernelFamily::Matern32, process_variance, lengthscale, {}};
    }
    static KernelSpec matern52(double process_variance, double lengthscale) {
        return {KernelFamily::Matern52, process_variance, lengthscale, {}};
    }
    static KernelSpec sum(std::vector<KernelSpec> parts) {
        return {KernelFamily::SumOfKernels, 0.0, 0.0, std::move(parts)};
    }
};

inline void validate(const KernelSpec& spec) {
    if (spec.family == KernelFamily::SumOfKernels) {
        if (spec.children.size() < 2)
            throw invalid_spec_error("sum kernel needs at least two children");
        for (const auto& child : spec.children) {
            if (child.family == KernelFamily::SumOfKernels)
                throw invalid_spec_error("nested sum kernels are not supported");
            validate(child);
        }
        return;
    }
    if (!(spec.process_variance > 0.0))
        throw invalid_spec_error("process variance must be positive");
    if (!(spec.lengthscale > 0.0))
        throw invalid_spec_error("lengthscale must be positive");
}

/// Evaluates the covariance kappa(r) at lag r >= 0.
inline double kernel_eval(const KernelSpec& spec, double r) {
    validate(spec);
    switch (spec.family) {
    case KernelFamily::Matern12:
        return spec.process_variance * std::exp(-r / spec.lengthscale);
    case KernelFamily::Matern32: {
        const double z = std::sqrt(3.0) * r / spec.lengthscale;
        return spec.process_variance * (1.0 + z) * std::exp(-z);
    }
    case KernelFamily::Matern52: {
        const double z = std::sqrt(5.0) * r / spec.lengthscale;
        return spec.process_variance * (1.0 + z + z * z / 3.0) * std::exp(-z);
    }
    case KernelFamily::SumOfKernels: {
        double total = 0.0;
        for (const auto& child : spec.children) total += kernel_eval(child, r);
        return total;
    }
    }
    throw unsupported_kernel_error("unknown kernel family");
}

/// kappa(0), the total process variance.
inline double kernel_variance(const KernelSpec& spec) { return kernel_eval(spec, 0.0); }

inline std::string family_name(KernelFamily family) {
    switch (family) {
    case KernelFamily::Matern12: return "matern12";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
    case KernelFamily::SumOfKernels: return "sum";
    }
    return "unknown";
}

inline KernelFamily family_from_name(const std::string& name) {
    if (name == "matern12") return KernelFamily::Matern12;
    if (name == "matern32") return KernelFamily::Matern32;
    if (name == "matern52") return KernelFamily::Matern52;
    if (name == "sum") return KernelFamily::SumOfKernels;
    throw invalid_spec_error("unknown kernel family: " + name);
}

inline void to_json(nlohmann::json& j, const KernelSpec& spec) {
    j = nlohmann::json{{"family", family_name(spec.family)}};
    if (spec.family == KernelFamily::SumOfKernels) {
        j["children"] = spec.children;
    } else {
        j["process_variance"] = spec.process_variance;
        j["lengthscale"] = spec.lengthscale;
    }
}

inline void from_json(const nlohmann::json& j, KernelSpec& spec) {
    spec = KernelSpec{};
    spec.family = family_from_name(j.at("family").get<std::string>());
    if (spec.family == KernelFamily::SumOfKernels) {
        spec.children = j.at("children").get<std::vector<KernelSpec>>();
    } else {
        spec.process_variance = j.at("process_variance").get<double>();
        spec.lengthscale = j.at("lengthscale").get<double>();
    }
    validate(spec);
}

} // namespace lintel
