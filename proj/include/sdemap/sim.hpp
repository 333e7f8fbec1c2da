#pragma once

// Seeded forward simulation of the joint SDE
//   dX = f(t, X, Z, theta) dt + G dW        (noisy block)
//   dZ = h(t, X, Z, theta) dt               (clean block)
// for ground-truth trajectories and measurement datasets.
//
// Two schemes: Euler-Maruyama, and a strong order-1.5 Taylor scheme for
// additive noise. The order-1.5 scheme treats the clean block as drift-only
// channels (zero diffusion rows) and evaluates all drift derivatives by
// central differences, so it needs nothing beyond the drift closures.
// Step functions take the noise increments as arguments, which lets tests
// drive both schemes with a common Brownian path.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdemap/model.hpp"
#include "sdemap/rng.hpp"

namespace sdemap {

enum class SimScheme { euler_maruyama, order15_additive };

inline std::string scheme_name(SimScheme s) {
    return s == SimScheme::euler_maruyama ? "euler_maruyama" : "order15_additive";
}

struct SimConfig {
    double h_sim = 0.005;
    SimScheme scheme = SimScheme::order15_additive;
    std::uint64_t seed = 0;
};

struct Trajectory {
    std::vector<double> times;  // dense grid k * h_sim
    MatrixXd X;                 // n-by-(M+1)
    MatrixXd Z;                 // q-by-(M+1)
    VectorXd theta;             // parameters used
    std::uint64_t seed = 0;
    std::string scheme;
    double h_sim = 0.0;
    bool left_validity_box = false;

    double t_f() const { return times.empty() ? 0.0 : times.back(); }
};

// One Euler-Maruyama step with an injected Brownian increment.
inline void euler_maruyama_step(const DynamicsModel& mdl, double t, double h, const VectorXd& dW,
                                VectorXd& x, VectorXd& z, const VectorXd& th) {
    const VectorXd f = mdl.drift_noisy(t, x, z, th);
    VectorXd z_next = z;
    if (mdl.q > 0) z_next += h * mdl.drift_clean(t, x, z, th);
    x += h * f + mdl.G * dW;
    z = std::move(z_next);
}

// One strong order-1.5 Taylor step for additive noise, with injected
// increment pair (dW, dZ) per noise channel; dZ is the iterated integral
// of W over the step.
inline void order15_step(const DynamicsModel& mdl, double t, double h, const VectorXd& dW,
                         const VectorXd& dZ, VectorXd& x, VectorXd& z, const VectorXd& th) {
    const int n = mdl.n, q = mdl.q, d = n + q;
    auto joint_drift = [&](double tt, const VectorXd& Y) {
        VectorXd F(d);
        const VectorXd xx = Y.head(n), zz = Y.tail(q);
        F.head(n) = mdl.drift_noisy(tt, xx, zz, th);
        if (q > 0) F.tail(q) = mdl.drift_clean(tt, xx, zz, th);
        return F;
    };

    VectorXd Y(d);
    Y.head(n) = x;
    Y.tail(q) = z;
    const VectorXd F = joint_drift(t, Y);

    // time derivative and state Jacobian by central differences
    const double ts = detail::fd_step(t);
    const VectorXd Ft = (joint_drift(t + ts, Y) - joint_drift(t - ts, Y)) / (2.0 * ts);
    const MatrixXd JF =
        detail::jacobian_fd([&](const VectorXd& v) { return joint_drift(t, v); }, Y, d);

    // diffusion columns in the joint space: [G e_j; 0]
    MatrixXd B = MatrixXd::Zero(d, n);
    B.topRows(n) = mdl.G;

    // L0 F = F_t + JF F + 1/2 sum_j d^2F/ds^2 along B_j
    VectorXd L0 = Ft + JF * F;
    const double eps = 1e-4;
    for (int j = 0; j < n; ++j) {
        const VectorXd dir = B.col(j);
        if (dir.isZero(0.0)) continue;
        L0 += 0.5 * (joint_drift(t, Y + eps * dir) - 2.0 * F + joint_drift(t, Y - eps * dir))
              / (eps * eps);
    }

    VectorXd Y_next = Y + h * F + 0.5 * h * h * L0;
    Y_next.head(n) += mdl.G * dW;
    for (int j = 0; j < n; ++j) Y_next += (JF * B.col(j)) * dZ(j);

    x = Y_next.head(n);
    z = Y_next.tail(q);
}

namespace detail {

inline Trajectory simulate_with_stream(const DynamicsModel& mdl, VectorXd x, VectorXd z,
                                       const VectorXd& th, double t_f, const SimConfig& cfg,
                                       GaussianStream& g) {
    if (!(t_f > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(cfg.h_sim > 0.0)) throw std::invalid_argument("substep must be positive");
    const long long M = std::llround(t_f / cfg.h_sim);
    if (M < 1 || std::abs(static_cast<double>(M) * cfg.h_sim - t_f) > 1e-9 * std::max(1.0, t_f))
        throw std::invalid_argument("substep must divide the horizon");

    Trajectory traj;
    traj.times.resize(static_cast<std::size_t>(M) + 1);
    traj.X.resize(mdl.n, static_cast<int>(M) + 1);
    traj.Z.resize(mdl.q, static_cast<int>(M) + 1);
    traj.theta = th;
    traj.seed = cfg.seed;
    traj.scheme = scheme_name(cfg.scheme);
    traj.h_sim = cfg.h_sim;

    const double h = cfg.h_sim;
    VectorXd dW(mdl.n), dZ(mdl.n);
    for (long long k = 0; k <= M; ++k) {
        traj.times[static_cast<std::size_t>(k)] = static_cast<double>(k) * h;
        traj.X.col(static_cast<int>(k)) = x;
        if (mdl.q > 0) traj.Z.col(static_cast<int>(k)) = z;
        if (mdl.validity_box && !mdl.validity_box->contains(x, z)) traj.left_validity_box = true;
        if (k == M) break;
        const double t = static_cast<double>(k) * h;
        if (cfg.scheme == SimScheme::euler_maruyama) {
            const double sqrt_h = std::sqrt(h);
            for (int j = 0; j < mdl.n; ++j) dW(j) = sqrt_h * g.next();
            euler_maruyama_step(mdl, t, h, dW, x, z, th);
        } else {
            for (int j = 0; j < mdl.n; ++j) {
                const BrownianPair p = order15_increment(g, h);
                dW(j) = p.dW;
                dZ(j) = p.dZ;
            }
            order15_step(mdl, t, h, dW, dZ, x, z, th);
        }
    }
    return traj;
}

}  // namespace detail

inline Trajectory simulate(const DynamicsModel& mdl, const VectorXd& x0, const VectorXd& z0,
                           const VectorXd& th, double t_f, const SimConfig& cfg) {
    GaussianStream g(cfg.seed);
    return detail::simulate_with_stream(mdl, x0, z0, th, t_f, cfg, g);
}

struct Dataset {
    std::vector<double> times;  // measurement sample times
    MatrixXd y;                 // obs_dim-by-(sample count)
};

// Dense-grid indices of the measurement sample times; enforces that the
// simulation substep divides the sampling period.
inline std::vector<int> sample_indices(const std::vector<double>& sample_times, double h_sim,
                                       std::size_t grid_size) {
    std::vector<int> idx(sample_times.size());
    for (std::size_t j = 0; j < sample_times.size(); ++j) {
        const long long k = std::llround(sample_times[j] / h_sim);
        if (std::abs(static_cast<double>(k) * h_sim - sample_times[j])
            > 1e-9 * std::max(1.0, sample_times[j]))
            throw std::invalid_argument("substep does not divide the sampling period");
        if (k < 0 || k >= static_cast<long long>(grid_size))
            throw std::invalid_argument("sample time outside the simulated horizon");
        idx[j] = static_cast<int>(k);
    }
    return idx;
}

// Draw (x0, z0) from the prior, simulate at theta nominal, then sample the
// measurement model at its sample times. One stream drives everything, so a
// single seed reproduces the replicate end to end.
inline std::pair<Trajectory, Dataset> generate_dataset(const BenchmarkSpec& spec,
                                                       std::uint64_t seed,
                                                       const SimConfig& cfg_in = {}) {
    SimConfig cfg = cfg_in;
    cfg.seed = seed;
    GaussianStream g(seed);
    VectorXd x0, z0, th;
    spec.prior.sample(g, x0, z0, th);
    Trajectory traj = detail::simulate_with_stream(spec.dynamics, x0, z0, th, spec.t_f, cfg, g);

    const auto& times = spec.measurement.sample_times;
    const auto idx = sample_indices(times, cfg.h_sim, traj.times.size());
    MatrixXd Xs(spec.dynamics.n, static_cast<int>(times.size()));
    MatrixXd Zs(spec.dynamics.q, static_cast<int>(times.size()));
    for (std::size_t j = 0; j < times.size(); ++j) {
        Xs.col(static_cast<int>(j)) = traj.X.col(idx[j]);
        if (spec.dynamics.q > 0) Zs.col(static_cast<int>(j)) = traj.Z.col(idx[j]);
    }

    Dataset ds;
    ds.times = times;
    ds.y = spec.measurement.sample(Xs, Zs, th, g);
    return {std::move(traj), std::move(ds)};
}

}  // namespace sdemap
