#pragma once

// Independent reference machinery for linear-Gaussian special cases: an exact
// forward/backward smoother and a brute-force dense maximizer of the joint
// density. Two different algorithms for the same posterior, used to
// cross-check the estimation pipeline on problems with known answers.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdemap/grid.hpp"
#include "sdemap/model.hpp"

namespace sdemap {

// Discrete-time jointly Gaussian state chain. The state is the stacked
// (noisy, clean) pair of dimension n + q; only the noisy block carries
// process noise, so the per-step covariance is stored as its n x n block.
struct LinearGaussianSystem {
    int n = 0;
    int q = 0;
    Partition partition;
    std::vector<MatrixXd> A;   // joint transition per step
    std::vector<VectorXd> b;   // joint offset per step
    std::vector<MatrixXd> Qx;  // noisy-block process covariance per step, SPD
    VectorXd mu0;              // joint initial mean
    MatrixXd P0;               // joint initial covariance, SPD
    std::vector<int> meas_nodes;  // strictly increasing node indices
    std::vector<MatrixXd> C;      // observation matrix per measurement
    std::vector<MatrixXd> R;      // observation covariance per measurement, SPD

    int dim() const { return n + q; }
    int steps() const { return static_cast<int>(A.size()); }

    void validate() const {
        const int D = dim();
        if (n < 1 || q < 0) throw std::invalid_argument("state dimensions must have n >= 1, q >= 0");
        if (steps() != partition.intervals() || b.size() != A.size() || Qx.size() != A.size())
            throw std::invalid_argument("per-step matrix counts do not match the partition");
        auto check_spd = [](const MatrixXd& M, const std::string& what) {
            if (M.rows() != M.cols()) throw std::invalid_argument(what + " is not square");
            const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
            if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
                throw std::invalid_argument(what + " is not symmetric");
            if (Eigen::LLT<MatrixXd>(M).info() != Eigen::Success)
                throw std::invalid_argument(what + " is not positive definite");
        };
        for (int k = 0; k < steps(); ++k) {
            if (A[k].rows() != D || A[k].cols() != D || b[k].size() != D)
                throw std::invalid_argument("transition shapes do not match the state dimension");
            check_spd(Qx[k], "process covariance at step " + std::to_string(k));
        }
        if (mu0.size() != D) throw std::invalid_argument("initial mean has the wrong dimension");
        check_spd(P0, "initial covariance");
        if (meas_nodes.size() != C.size() || meas_nodes.size() != R.size())
            throw std::invalid_argument("measurement block counts disagree");
        for (std::size_t j = 0; j < meas_nodes.size(); ++j) {
            if (meas_nodes[j] < 0 || meas_nodes[j] > steps())
                throw std::invalid_argument("measurement node out of range");
            if (j > 0 && meas_nodes[j] <= meas_nodes[j - 1])
                throw std::invalid_argument("measurement nodes must be strictly increasing");
            if (C[j].cols() != D) throw std::invalid_argument("observation matrix has wrong width");
            check_spd(R[j], "observation covariance " + std::to_string(j));
        }
    }
};

// Builds the per-step chain A_k = I + J(t_k) d_k, b_k = F(t_k, 0, 0) d_k,
// Qx_k = G G' d_k from a drift that is affine in the states. Affinity is
// checked by probing the Jacobian at three state points per node; the prior
// and measurement blocks are left for the caller to fill.
inline LinearGaussianSystem discretize_linear(const DynamicsModel& mdl, const Partition& P,
                                              const VectorXd& th) {
    LinearGaussianSystem sys;
    sys.n = mdl.n;
    sys.q = mdl.q;
    sys.partition = P;
    const int D = mdl.n + mdl.q;
    const MatrixXd Qrate = mdl.G * mdl.G.transpose();

    auto joint_jac = [&](double t, const VectorXd& x, const VectorXd& z) {
        MatrixXd J(D, D);
        J.topLeftCorner(mdl.n, mdl.n) = eval_jac_f_x(mdl, t, x, z, th);
        if (mdl.q > 0) {
            J.topRightCorner(mdl.n, mdl.q) = eval_jac_f_z(mdl, t, x, z, th);
            J.bottomLeftCorner(mdl.q, mdl.n) = eval_jac_h_x(mdl, t, x, z, th);
            J.bottomRightCorner(mdl.q, mdl.q) = eval_jac_h_z(mdl, t, x, z, th);
        }
        return J;
    };

    for (int k = 0; k < P.intervals(); ++k) {
        const double t = P.node(k), d = P.delta(k);
        const VectorXd x0 = VectorXd::Zero(mdl.n), z0 = VectorXd::Zero(mdl.q);
        const MatrixXd J = joint_jac(t, x0, z0);
        for (int probe = 0; probe < 2; ++probe) {
            VectorXd xp(mdl.n), zp(mdl.q);
            for (int i = 0; i < mdl.n; ++i) xp(i) = probe == 0 ? 1.0 : (i % 2 ? 0.5 : -0.5);
            for (int i = 0; i < mdl.q; ++i) zp(i) = probe == 0 ? 1.0 : (i % 2 ? -0.5 : 0.5);
            const MatrixXd Jp = joint_jac(t, xp, zp);
            if ((Jp - J).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, J.cwiseAbs().maxCoeff()))
                throw std::invalid_argument("drift is not affine in the states");
        }
        VectorXd F0(D);
        F0.head(mdl.n) = mdl.drift_noisy(t, x0, z0, th);
        if (mdl.q > 0) F0.tail(mdl.q) = mdl.drift_clean(t, x0, z0, th);
        sys.A.push_back(MatrixXd::Identity(D, D) + J * d);
        sys.b.push_back(F0 * d);
        sys.Qx.push_back(Qrate * d);
    }
    return sys;
}

struct SmootherResult {
    MatrixXd means;                     // joint state per node, (n+q) x (N+1)
    std::vector<MatrixXd> covariances;  // per node
};

// Forward filter plus backward smoothing pass. The clean block carries no
// process noise; a 1e-12 diagonal jitter keeps the predicted covariance
// invertible (its effect is bounded by the dense-oracle agreement tests).
inline SmootherResult rts_smoother(const LinearGaussianSystem& sys, const MatrixXd& y) {
    sys.validate();
    if (y.cols() != static_cast<Eigen::Index>(sys.meas_nodes.size()))
        throw std::invalid_argument("dataset width does not match the measurement count");
    const int D = sys.dim(), N = sys.steps();
    const double clean_jitter = 1e-12;

    std::vector<int> meas_at(N + 1, -1);
    for (std::size_t j = 0; j < sys.meas_nodes.size(); ++j) meas_at[sys.meas_nodes[j]] = static_cast<int>(j);

    auto update = [&](int node, VectorXd& m, MatrixXd& P) {
        const int j = meas_at[node];
        if (j < 0) return;
        const MatrixXd& Cj = sys.C[j];
        const MatrixXd S = Cj * P * Cj.transpose() + sys.R[j];
        Eigen::LLT<MatrixXd> llt(S);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("innovation covariance not positive definite at node "
                                     + std::to_string(node));
        const MatrixXd K = llt.solve(Cj * P).transpose();
        m += K * (y.col(j) - Cj * m);
        const MatrixXd IKC = MatrixXd::Identity(D, D) - K * Cj;
        P = IKC * P * IKC.transpose() + K * sys.R[j] * K.transpose();  // Joseph form
        P = 0.5 * (P + P.transpose()).eval();
    };

    MatrixXd mf(D, N + 1), mp(D, N);  // filtered and predicted means
    std::vector<MatrixXd> Pf(N + 1), Pp(N);
    VectorXd m = sys.mu0;
    MatrixXd P = sys.P0;
    update(0, m, P);
    mf.col(0) = m;
    Pf[0] = P;
    for (int k = 0; k < N; ++k) {
        m = sys.A[k] * m + sys.b[k];
        P = sys.A[k] * P * sys.A[k].transpose();
        P.topLeftCorner(sys.n, sys.n) += sys.Qx[k];
        P.diagonal().tail(sys.q).array() += clean_jitter;
        P = 0.5 * (P + P.transpose()).eval();
        mp.col(k) = m;
        Pp[k] = P;
        update(k + 1, m, P);
        mf.col(k + 1) = m;
        Pf[k + 1] = P;
    }

    SmootherResult out;
    out.means.resize(D, N + 1);
    out.covariances.resize(N + 1);
    out.means.col(N) = mf.col(N);
    out.covariances[N] = Pf[N];
    for (int k = N - 1; k >= 0; --k) {
        Eigen::LDLT<MatrixXd> ldlt(Pp[k]);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("predicted covariance not factorizable at node "
                                     + std::to_string(k + 1));
        const MatrixXd G = ldlt.solve(sys.A[k] * Pf[k].transpose()).transpose();
        out.means.col(k) = mf.col(k) + G * (out.means.col(k + 1) - mp.col(k));
        MatrixXd Ps = Pf[k] + G * (out.covariances[k + 1] - Pp[k]) * G.transpose();
        out.covariances[k] = 0.5 * (Ps + Ps.transpose());
    }
    return out;
}

// Maximizes the joint log-density directly: clean states are eliminated
// through their deterministic recursion (no jitter needed), the remaining
// quadratic form over (x_0..x_N, z_0) is assembled densely and solved once.
inline MatrixXd dense_map(const LinearGaussianSystem& sys, const MatrixXd& y) {
    sys.validate();
    if (y.cols() != static_cast<Eigen::Index>(sys.meas_nodes.size()))
        throw std::invalid_argument("dataset width does not match the measurement count");
    const int n = sys.n, q = sys.q, D = sys.dim(), N = sys.steps();
    const int V = n * (N + 1) + q;
    if (V > 5000) throw std::invalid_argument("decision dimension exceeds the dense-solver bound");
    const int z0_at = n * (N + 1);

    // affine representation z_k = T[k] v + c[k]
    std::vector<MatrixXd> T(N + 1, MatrixXd::Zero(q, V));
    std::vector<VectorXd> c(N + 1, VectorXd::Zero(q));
    if (q > 0) T[0].middleCols(z0_at, q).setIdentity();
    for (int k = 0; k < N; ++k) {
        const MatrixXd Azx = sys.A[k].bottomLeftCorner(q, n);
        const MatrixXd Azz = sys.A[k].bottomRightCorner(q, q);
        T[k + 1] = Azz * T[k];
        T[k + 1].middleCols(n * k, n) += Azx;
        c[k + 1] = Azz * c[k] + sys.b[k].tail(q);
    }

    MatrixXd Lam = MatrixXd::Zero(V, V);
    VectorXd eta = VectorXd::Zero(V);
    auto add_quadratic = [&](const MatrixXd& L, const VectorXd& m, const MatrixXd& W) {
        // contribution of -1/2 (Lv + m)' W (Lv + m)
        const MatrixXd WL = W * L;
        Lam.noalias() += L.transpose() * WL;
        eta.noalias() -= WL.transpose() * m;
    };

    {  // prior on (x_0, z_0)
        MatrixXd L = MatrixXd::Zero(D, V);
        L.topLeftCorner(n, n).setIdentity();
        if (q > 0) L.bottomRightCorner(q, V - z0_at).setIdentity();
        add_quadratic(L, -sys.mu0, sys.P0.llt().solve(MatrixXd::Identity(D, D)));
    }
    for (int k = 0; k < N; ++k) {  // noisy-block transitions
        MatrixXd L = MatrixXd::Zero(n, V);
        L.middleCols(n * (k + 1), n).setIdentity();
        L.middleCols(n * k, n) -= sys.A[k].topLeftCorner(n, n);
        if (q > 0) L -= sys.A[k].topRightCorner(n, q) * T[k];
        VectorXd m = -sys.b[k].head(n);
        if (q > 0) m -= sys.A[k].topRightCorner(n, q) * c[k];
        add_quadratic(L, m, sys.Qx[k].llt().solve(MatrixXd::Identity(n, n)));
    }
    for (std::size_t j = 0; j < sys.meas_nodes.size(); ++j) {
        const int s = sys.meas_nodes[j];
        MatrixXd Ls = MatrixXd::Zero(D, V);
        Ls.middleCols(n * s, n).topRows(n).setIdentity();
        if (q > 0) Ls.bottomRows(q) = T[s];
        VectorXd cs = VectorXd::Zero(D);
        if (q > 0) cs.tail(q) = c[s];
        add_quadratic(sys.C[j] * Ls, sys.C[j] * cs - y.col(j),
                      sys.R[j].llt().solve(MatrixXd::Identity(sys.R[j].rows(), sys.R[j].rows())));
    }

    const Eigen::LDLT<MatrixXd> ldlt(Lam);
    const VectorXd v = ldlt.solve(eta);
    if (ldlt.info() != Eigen::Success
        || (Lam * v - eta).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, eta.cwiseAbs().maxCoeff()))
        throw std::runtime_error("normal equations are singular");

    MatrixXd means(D, N + 1);
    for (int k = 0; k <= N; ++k) {
        means.col(k).head(n) = v.segment(n * k, n);
        if (q > 0) means.col(k).tail(q) = T[k] * v + c[k];
    }
    return means;
}

}  // namespace sdemap
