#pragma once

// Randomized linear-Gaussian problem instances used to cross-check the
// smoother, the dense maximizer, and the general-purpose ascent pipeline
// against each other. Everything is generated from one seed so failures
// reproduce exactly.

#include <cstdint>
#include <vector>

#include "sdemap/model.hpp"
#include "sdemap/objective.hpp"
#include "sdemap/oracle.hpp"
#include "sdemap/rng.hpp"

namespace sdemap::testcases {

struct LinearCase {
    DynamicsModel model;
    PriorModel prior;
    MeasurementModel meas;
    ParameterSet params;  // empty: nothing unknown
    MatrixXd y;
    Partition partition;
    LinearGaussianSystem sys;  // discretization of `model` with blocks filled
};

inline LinearCase make_linear_case(std::uint64_t seed, int n, int q, int N, double delta) {
    SplitMix64 rng(seed);
    auto unif = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    const int D = n + q;

    MatrixXd J(D, D);
    for (int i = 0; i < D * D; ++i) J(i / D, i % D) = unif(-0.6, 0.6);
    VectorXd off(D);
    for (int i = 0; i < D; ++i) off(i) = unif(-0.5, 0.5);
    MatrixXd G = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j2 = 0; j2 < i; ++j2) G(i, j2) = unif(-0.3, 0.3);
        G(i, i) = unif(0.4, 1.2);
    }

    LinearCase lc;
    DynamicsModel& mdl = lc.model;
    mdl.n = n;
    mdl.q = q;
    mdl.m = 0;
    mdl.G = G;
    const MatrixXd Jxx = J.topLeftCorner(n, n), Jxz = J.topRightCorner(n, q);
    const MatrixXd Jhx = J.bottomLeftCorner(q, n), Jhz = J.bottomRightCorner(q, q);
    const VectorXd cx = off.head(n), cz = off.tail(q);
    mdl.drift_noisy = [Jxx, Jxz, cx](double, const VectorXd& x, const VectorXd& z,
                                     const VectorXd&) {
        return (Jxx * x + Jxz * z + cx).eval();
    };
    if (q > 0)
        mdl.drift_clean = [Jhx, Jhz, cz](double, const VectorXd& x, const VectorXd& z,
                                         const VectorXd&) {
            return (Jhx * x + Jhz * z + cz).eval();
        };
    mdl.drift_divergence = [Jxx](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return Jxx.trace();
    };
    mdl.jac_f_x = [Jxx](double, const VectorXd&, const VectorXd&, const VectorXd&) { return Jxx; };
    mdl.jac_f_z = [Jxz](double, const VectorXd&, const VectorXd&, const VectorXd&) { return Jxz; };
    mdl.jac_f_theta = [n](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Zero(n, 0).eval();
    };
    if (q > 0) {
        mdl.jac_h_x = [Jhx](double, const VectorXd&, const VectorXd&, const VectorXd&) { return Jhx; };
        mdl.jac_h_z = [Jhz](double, const VectorXd&, const VectorXd&, const VectorXd&) { return Jhz; };
        mdl.jac_h_theta = [q](double, const VectorXd&, const VectorXd&, const VectorXd&) {
            return MatrixXd::Zero(q, 0).eval();
        };
    }

    VectorXd mu0(D);
    for (int i = 0; i < D; ++i) mu0(i) = unif(-1.0, 1.0);
    MatrixXd P0L(D, D);
    for (int i = 0; i < D * D; ++i) P0L(i / D, i % D) = unif(-0.4, 0.4);
    const MatrixXd P0 = (P0L * P0L.transpose() + 0.2 * MatrixXd::Identity(D, D)).eval();
    const MatrixXd P0inv = P0.llt().solve(MatrixXd::Identity(D, D));

    PriorModel& prior = lc.prior;
    prior.log_density = [mu0, P0inv, n, q](const VectorXd& x0, const VectorXd& z0,
                                           const VectorXd&) {
        VectorXd r(n + q);
        r.head(n) = x0;
        r.tail(q) = z0;
        r -= mu0;
        return -0.5 * r.dot(P0inv * r);
    };
    prior.log_density_grad = [mu0, P0inv, n, q](const VectorXd& x0, const VectorXd& z0,
                                                const VectorXd&, VectorXd& gx, VectorXd& gz,
                                                VectorXd& gth) {
        VectorXd r(n + q);
        r.head(n) = x0;
        r.tail(q) = z0;
        r -= mu0;
        const VectorXd g = -(P0inv * r);
        gx = g.head(n);
        gz = g.tail(q);
        gth.resize(0);
    };
    prior.support_indicator = [](const VectorXd&, const VectorXd&, const VectorXd&) { return true; };

    lc.partition = Partition::uniform(N * delta, N);

    const int stride = 5;
    MatrixXd C(1, D);
    for (int i = 0; i < D; ++i) C(0, i) = unif(-1.0, 1.0);
    const double Rvar = unif(0.05, 0.3);
    std::vector<double> times;
    std::vector<int> nodes;
    for (int k = stride; k <= N; k += stride) {
        times.push_back(lc.partition.node(k));
        nodes.push_back(k);
    }
    const int m = static_cast<int>(times.size());

    MeasurementModel& meas = lc.meas;
    meas.obs_dim = 1;
    meas.sample_times = times;
    meas.loglik = [C, Rvar, n, q](const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd&,
                                  const MatrixXd& yv) {
        double s = 0.0;
        for (int j = 0; j < yv.cols(); ++j) {
            VectorXd st(n + q);
            st.head(n) = Xs.col(j);
            st.tail(q) = Zs.col(j);
            const double r = yv(0, j) - (C * st)(0);
            s -= 0.5 * r * r / Rvar;
        }
        return s;
    };
    meas.loglik_grad = [C, Rvar, n, q](const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd&,
                                       const MatrixXd& yv, MatrixXd& gX, MatrixXd& gZ,
                                       VectorXd& gth) {
        gX.setZero(n, Xs.cols());
        gZ.setZero(q, Zs.cols());
        gth.resize(0);
        double s = 0.0;
        for (int j = 0; j < yv.cols(); ++j) {
            VectorXd st(n + q);
            st.head(n) = Xs.col(j);
            st.tail(q) = Zs.col(j);
            const double r = yv(0, j) - (C * st)(0);
            s -= 0.5 * r * r / Rvar;
            const VectorXd g = (r / Rvar) * C.transpose();
            gX.col(j) += g.head(n);
            gZ.col(j) += g.tail(q);
        }
        return s;
    };

    lc.params = ParameterSet{{}, VectorXd(0), {}, VectorXd(0)};
    lc.y.resize(1, m);
    for (int j = 0; j < m; ++j) lc.y(0, j) = unif(-1.5, 1.5);

    lc.sys = discretize_linear(mdl, lc.partition, VectorXd(0));
    lc.sys.mu0 = mu0;
    lc.sys.P0 = P0;
    lc.sys.meas_nodes = nodes;
    lc.sys.C.assign(static_cast<std::size_t>(m), C);
    lc.sys.R.assign(static_cast<std::size_t>(m), MatrixXd::Constant(1, 1, Rvar));
    return lc;
}

}  // namespace sdemap::testcases
