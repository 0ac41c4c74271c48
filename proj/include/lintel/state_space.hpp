#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "lintel/errors.hpp"
#include "lintel/expm.hpp"
#include "lintel/kernels.hpp"

namespace lintel {

/// SDE form of a Markovian GP prior:
///
///   d theta = F theta dt + L d beta,   beta Brownian with diffusion Qc,
///   f(t)    = h' theta(t),
///
/// together with the stationary state covariance Pinf solving the Lyapunov
/// equation F Pinf + Pinf F' + L Qc L' = 0.
struct StateSpaceModel {
    Eigen::MatrixXd F;    // d x d continuous transition
    Eigen::MatrixXd L;    // d x q noise input
    Eigen::MatrixXd Qc;   // q x q diffusion of the driving Brownian motion
    Eigen::VectorXd h;    // d observation vector
    Eigen::MatrixXd Pinf; // d x d stationary covariance
    // Diagonal block sizes of F/Pinf; more than one entry for sum kernels.
    // Lets discretize() exponentiate per block instead of the whole matrix.
    std::vector<Eigen::Index> block_dims;

    Eigen::Index state_dim() const { return F.rows(); }
};

/// Exact transition over a time step dt:
///   theta(t + dt) = A theta(t) + q,   q ~ N(0, Sigma).
struct DiscreteTransition {
    Eigen::MatrixXd A;
    Eigen::MatrixXd Sigma;
    double dt = 0.0;
};

namespace detail {

inline StateSpaceModel matern12_state_space(double process_variance, double lengthscale) {
    StateSpaceModel ssm;
    const double decay = 1.0 / lengthscale;
    ssm.F = Eigen::MatrixXd::Constant(1, 1, -decay);
    ssm.L = Eigen::MatrixXd::Constant(1, 1, 1.0);
    ssm.Qc = Eigen::MatrixXd::Constant(1, 1, 2.0 * process_variance * decay);
    ssm.h = Eigen::VectorXd::Constant(1, 1.0);
    ssm.Pinf = Eigen::MatrixXd::Constant(1, 1, process_variance);
    ssm.block_dims = {1};
    return ssm;
}

inline StateSpaceModel matern32_state_space(double process_variance, double lengthscale) {
    StateSpaceModel ssm;
    const double lambda = std::sqrt(3.0) / lengthscale;
    ssm.F.setZero(2, 2);
    ssm.F << 0.0, 1.0, -lambda * lambda, -2.0 * lambda;
    ssm.L.setZero(2, 1);
    ssm.L(1, 0) = 1.0;
    ssm.Qc = Eigen::MatrixXd::Constant(1, 1, 4.0 * process_variance * std::pow(lambda, 3));
    ssm.h.setZero(2);
    ssm.h(0) = 1.0;
    ssm.Pinf.setZero(2, 2);
    ssm.Pinf(0, 0) = process_variance;
    ssm.Pinf(1, 1) = process_variance * lambda * lambda;
    ssm.block_dims = {2};
    return ssm;
}

inline StateSpaceModel matern52_state_space(double process_variance, double lengthscale) {
    StateSpaceModel ssm;
    const double lambda = std::sqrt(5.0) / lengthscale;
    ssm.F.setZero(3, 3);
    ssm.F << 0.0, 1.0, 0.0,
             0.0, 0.0, 1.0,
             -std::pow(lambda, 3), -3.0 * lambda * lambda, -3.0 * lambda;
    ssm.L.setZero(3, 1);
    ssm.L(2, 0) = 1.0;
    ssm.Qc = Eigen::MatrixXd::Constant(1, 1,
        process_variance * 16.0 / 3.0 * std::pow(lambda, 5));
    ssm.h.setZero(3);
    ssm.h(0) = 1.0;
    // kappa below is the stationary variance of the first derivative
    const double kappa = process_variance * lambda * lambda / 3.0;
    ssm.Pinf.setZero(3, 3);
    ssm.Pinf(0, 0) = process_variance;
    ssm.Pinf(1, 1) = kappa;
    ssm.Pinf(2, 2) = process_variance * std::pow(lambda, 4);
    ssm.Pinf(0, 2) = -kappa;
    ssm.Pinf(2, 0) = -kappa;
    ssm.block_dims = {3};
    return ssm;
}

inline StateSpaceModel block_diagonal_stack(const std::vector<StateSpaceModel>& parts) {
    Eigen::Index dim = 0;
    Eigen::Index noise_dim = 0;
    for (const auto& part : parts) {
        dim += part.state_dim();
        noise_dim += part.L.cols();
    }
    StateSpaceModel ssm;
    ssm.F = Eigen::MatrixXd::Zero(dim, dim);
    ssm.L = Eigen::MatrixXd::Zero(dim, noise_dim);
    ssm.Qc = Eigen::MatrixXd::Zero(noise_dim, noise_dim);
    ssm.h = Eigen::VectorXd::Zero(dim);
    ssm.Pinf = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::Index row = 0;
    Eigen::Index noise_row = 0;
    for (const auto& part : parts) {
        const auto d = part.state_dim();
        const auto q = part.L.cols();
        ssm.F.block(row, row, d, d) = part.F;
        ssm.L.block(row, noise_row, d, q) = part.L;
        ssm.Qc.block(noise_row, noise_row, q, q) = part.Qc;
        ssm.h.segment(row, d) = part.h;
        ssm.Pinf.block(row, row, d, d) = part.Pinf;
        ssm.block_dims.push_back(d);
        row += d;
        noise_row += q;
    }
    return ssm;
}

} // namespace detail

/// Builds the canonical companion-form SDE for a kernel spec. Sum kernels
/// stack their children block-diagonally with concatenated observation
/// vectors.
inline StateSpaceModel to_state_space(const KernelSpec& spec) {
    validate(spec);
    switch (spec.family) {
    case KernelFamily::Matern12:
        return detail::matern12_state_space(spec.process_variance, spec.lengthscale);
    case KernelFamily::Matern32:
        return detail::matern32_state_space(spec.process_variance, spec.lengthscale);
    case KernelFamily::Matern52:
        return detail::matern52_state_space(spec.process_variance, spec.lengthscale);
    case KernelFamily::SumOfKernels: {
        std::vector<StateSpaceModel> parts;
        parts.reserve(spec.children.size());
        for (const auto& child : spec.children) parts.push_back(to_state_space(child));
        return detail::block_diagonal_stack(parts);
    }
    }
    throw unsupported_kernel_error("kernel family has no state-space form");
}

/// Clips negative eigenvalues of a symmetric matrix at zero. The threshold
/// below which clipping is skipped is 1e-12 relative to the trace.
inline void clip_negative_eigenvalues(Eigen::MatrixXd& sym) {
    const double tol = 1e-12 * std::max(sym.trace(), 1.0);
    Eigen::LLT<Eigen::MatrixXd> llt(sym + tol * Eigen::MatrixXd::Identity(sym.rows(), sym.cols()));
    if (llt.info() == Eigen::Success) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(sym);
    Eigen::VectorXd values = eigen.eigenvalues().cwiseMax(0.0);
    sym = eigen.eigenvectors() * values.asDiagonal() * eigen.eigenvectors().transpose();
    sym = 0.5 * (sym + sym.transpose()).eval();
}

/// Discretizes the SDE over dt >= 0: A = exp(F dt) and, using stationarity,
/// Sigma = Pinf - A Pinf A'. Sum kernels are handled block by block (F and
/// Pinf are block diagonal, so A and Sigma are too).
inline DiscreteTransition discretize(const StateSpaceModel& ssm, double dt) {
    if (dt < 0.0) throw out_of_order_error("discretize: negative time step");
    const auto d = ssm.state_dim();
    DiscreteTransition trans;
    trans.dt = dt;
    if (dt == 0.0) {
        trans.A = Eigen::MatrixXd::Identity(d, d);
        trans.Sigma = Eigen::MatrixXd::Zero(d, d);
        return trans;
    }
    if (ssm.block_dims.size() <= 1) {
        trans.A = matrix_exponential(ssm.F * dt);
        trans.Sigma = ssm.Pinf - trans.A * ssm.Pinf * trans.A.transpose();
    } else {
        trans.A = Eigen::MatrixXd::Zero(d, d);
        trans.Sigma = Eigen::MatrixXd::Zero(d, d);
        Eigen::Index row = 0;
        for (const auto block : ssm.block_dims) {
            const Eigen::MatrixXd a = matrix_exponential(ssm.F.block(row, row, block, block) * dt);
            const Eigen::MatrixXd pinf = ssm.Pinf.block(row, row, block, block);
            trans.A.block(row, row, block, block) = a;
            trans.Sigma.block(row, row, block, block) = pinf - a * pinf * a.transpose();
            row += block;
        }
    }
    trans.Sigma = 0.5 * (trans.Sigma + trans.Sigma.transpose()).eval();
    clip_negative_eigenvalues(trans.Sigma);
    return trans;
}

} // namespace lintel
