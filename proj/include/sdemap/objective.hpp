#pragma once

// Log-posterior functionals over joint state paths and parameters.
//
// Decision variables are the noisy-state values at the partition nodes, the
// clean-state initial value, and the unknown parameters. The clean states in
// between are not free: they follow the drift recursion induced by the noisy
// path, either the explicit Euler rule or the implicit trapezoidal rule.
//
// Four functionals share one structure (prior + likelihood + path-energy +
// correction):
//   euler        explicit clean path, no correction term
//   trapezoidal  implicit clean path, log-det correction per step
//   continuous / continuous-energy: quadrature references for smooth paths,
//                used by tests and the convergence report, not by the solver
//
// Gradients of the two discrete functionals are exact (one adjoint sweep for
// the clean-state recursion, implicit-function rule at the trapezoidal fixed
// points); the log-det term differentiates the state Jacobian by central
// differences, which keeps it correct for models without analytic hooks.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdemap/grid.hpp"
#include "sdemap/model.hpp"

namespace sdemap {

enum class ObjectiveKind { euler, trapezoidal };

inline std::string objective_kind_name(ObjectiveKind k) {
    return k == ObjectiveKind::euler ? "euler" : "trapezoidal";
}

// ---------------------------------------------------------------------------
// decision vector

struct DecisionVector {
    MatrixXd x_nodes;  // n-by-(N+1), column k = noisy state at node k
    VectorXd z0;       // clean state at t = 0
    VectorXd theta;    // unknown parameters only

    int dim() const {
        return static_cast<int>(x_nodes.size() + z0.size() + theta.size());
    }

    // layout: [x_0 ... x_N, z0, theta], node components contiguous
    VectorXd flatten() const {
        VectorXd flat(dim());
        flat.head(x_nodes.size()) = Eigen::Map<const VectorXd>(x_nodes.data(), x_nodes.size());
        flat.segment(x_nodes.size(), z0.size()) = z0;
        flat.tail(theta.size()) = theta;
        return flat;
    }

    static DecisionVector unflatten(const VectorXd& flat, int n, int node_count, int q, int mu) {
        if (flat.size() != static_cast<long>(n) * node_count + q + mu)
            throw std::invalid_argument("decision vector length does not match the layout");
        DecisionVector v;
        v.x_nodes = Eigen::Map<const MatrixXd>(flat.data(), n, node_count);
        v.z0 = flat.segment(static_cast<long>(n) * node_count, q);
        v.theta = flat.tail(mu);
        return v;
    }
};

// ---------------------------------------------------------------------------
// problem bundle

// Everything a functional evaluation needs: the model pieces, the dataset,
// and the estimation partition with the dataset times resolved to nodes.
struct Problem {
    DynamicsModel dynamics;
    PriorModel prior;
    MeasurementModel measurement;
    ParameterSet params;
    MatrixXd y;  // obs_dim-by-(sample count)
    Partition partition;
    std::vector<int> sample_nodes;  // node index per measurement time

    VectorXd theta_full(const VectorXd& theta_unknown) const {
        return params.full_from_unknown(theta_unknown, params.nominal);
    }

    int n() const { return dynamics.n; }
    int q() const { return dynamics.q; }
    int unknown_dim() const { return params.unknown_dim(); }
    int node_count() const { return partition.node_count(); }
    int decision_dim() const {
        return n() * node_count() + q() + unknown_dim();
    }
};

inline Problem make_problem(DynamicsModel dynamics, PriorModel prior, MeasurementModel measurement,
                            ParameterSet params, MatrixXd y, Partition partition) {
    if (partition.node_count() < 2)
        throw std::invalid_argument("estimation grid needs at least one interval");
    if (y.cols() != static_cast<long>(measurement.sample_times.size()))
        throw std::invalid_argument("dataset width does not match the measurement times");
    Problem pb{std::move(dynamics), std::move(prior),    std::move(measurement),
               std::move(params),   std::move(y),        std::move(partition),
               {}};
    pb.sample_nodes.reserve(pb.measurement.sample_times.size());
    for (double t : pb.measurement.sample_times) {
        const int k = pb.partition.node_index_of(t, 1e-9);
        if (k < 0)
            throw std::invalid_argument("measurement time " + std::to_string(t)
                                        + " is not an estimation grid node");
        pb.sample_nodes.push_back(k);
    }
    return pb;
}

inline Problem make_problem(const BenchmarkSpec& spec, MatrixXd y, Partition partition) {
    return make_problem(spec.dynamics, spec.prior, spec.measurement, spec.params, std::move(y),
                        std::move(partition));
}

// ---------------------------------------------------------------------------
// clean-state propagation

struct PicardStats {
    int max_iterations = 0;      // worst step
    double max_residual = 0.0;   // worst final successive-iterate distance
};

inline PwlPath clean_path_euler(const DynamicsModel& mdl, const PwlPath& x_path,
                                const VectorXd& z0, const VectorXd& th) {
    const Partition& P = x_path.partition();
    const int N = P.intervals();
    MatrixXd Z(mdl.q, N + 1);
    if (mdl.q == 0) return PwlPath(P, Z);
    VectorXd z = z0;
    for (int k = 0; k <= N; ++k) {
        Z.col(k) = z;
        if (k == N) break;
        const VectorXd hk = mdl.drift_clean(P.node(k), x_path.values().col(k), z, th);
        if (!hk.allFinite())
            throw std::runtime_error("non-finite clean drift at step " + std::to_string(k));
        z += P.delta(k) * hk;
    }
    return PwlPath(P, Z);
}

inline PwlPath clean_path_trapezoidal(const DynamicsModel& mdl, const PwlPath& x_path,
                                      const VectorXd& z0, const VectorXd& th, double tol = -1.0,
                                      int max_iter = 50, PicardStats* stats = nullptr) {
    const Partition& P = x_path.partition();
    const int N = P.intervals();
    if (mdl.lipschitz_hint) {
        const double bound = (mdl.lipschitz_hint->L_f + mdl.lipschitz_hint->L_h) * P.mesh();
        if (!(bound < 2.0))
            throw std::invalid_argument("mesh too coarse for the implicit clean-state step: "
                                        "(L_f + L_h) * mesh = "
                                        + std::to_string(bound) + " >= 2");
    }
    MatrixXd Z(mdl.q, N + 1);
    if (mdl.q == 0) return PwlPath(P, Z);
    PicardStats local;
    VectorXd z = z0;
    for (int k = 0; k <= N; ++k) {
        Z.col(k) = z;
        if (k == N) break;
        const double d = P.delta(k);
        const double t0 = P.node(k), t1 = P.node(k + 1);
        const VectorXd& x0 = x_path.values().col(k);
        const VectorXd& x1 = x_path.values().col(k + 1);
        const VectorXd h0 = mdl.drift_clean(t0, x0, z, th);
        const VectorXd base = z + 0.5 * d * h0;
        const double step_tol = tol > 0.0 ? tol : 1e-12 * (1.0 + z.norm());

        VectorXd w = z;
        double dist = std::numeric_limits<double>::infinity();
        int it = 0;
        while (it < max_iter) {
            VectorXd w_next = base + 0.5 * d * mdl.drift_clean(t1, x1, w, th);
            if (!w_next.allFinite())
                throw std::runtime_error("non-finite clean drift at step " + std::to_string(k));
            dist = (w_next - w).cwiseAbs().maxCoeff();
            w = std::move(w_next);
            ++it;
            if (dist < step_tol) break;
        }
        if (!(dist < step_tol))
            throw std::runtime_error("clean-state fixed point did not converge at step "
                                     + std::to_string(k) + ", residual "
                                     + std::to_string(dist));
        local.max_iterations = std::max(local.max_iterations, it);
        local.max_residual = std::max(local.max_residual, dist);
        z = std::move(w);
    }
    if (stats) *stats = local;
    return PwlPath(P, Z);
}

// ---------------------------------------------------------------------------
// evaluation report

struct ObjectiveDecomposition {
    double prior = 0.0;
    double likelihood = 0.0;
    double energy_sum = 0.0;
    double divergence_or_logdet_sum = 0.0;

    double total() const { return prior + likelihood + energy_sum + divergence_or_logdet_sum; }
};

struct ObjectiveReport {
    double value = -std::numeric_limits<double>::infinity();
    ObjectiveDecomposition decomposition;
    PwlPath clean_path;  // on the estimation partition; empty rows when q = 0
    PicardStats picard;  // trapezoidal only
    int nonpositive_det_step = -1;

    bool finite() const { return std::isfinite(value); }
};

namespace detail {

// log|det M| with sign tracking; false when the determinant is not positive
inline bool positive_log_det(const MatrixXd& M, double& out) {
    Eigen::PartialPivLU<MatrixXd> lu(M);
    double sign = static_cast<double>(lu.permutationP().determinant());
    double logabs = 0.0;
    const auto& LU = lu.matrixLU();
    for (long i = 0; i < LU.rows(); ++i) {
        const double dii = LU(i, i);
        if (!(std::abs(dii) > 0.0) || !std::isfinite(dii)) return false;
        if (dii < 0.0) sign = -sign;
        logabs += std::log(std::abs(dii));
    }
    if (sign <= 0.0) return false;
    out = logabs;
    return true;
}

struct GradientScratch {
    MatrixXd g_x;        // n-by-(N+1)
    MatrixXd g_z_direct; // q-by-(N+1), partials before the adjoint sweep
    VectorXd g_th_full;  // full parameter dimension
};

}  // namespace detail

// ---------------------------------------------------------------------------
// discrete functionals

// Shared evaluator. When grad is non-null and the value is finite, fills it
// with the exact gradient in the flattened layout.
inline ObjectiveReport log_posterior(const Problem& pb, ObjectiveKind kind,
                                     const DecisionVector& v, VectorXd* grad = nullptr) {
    const DynamicsModel& mdl = pb.dynamics;
    const int n = pb.n(), q = pb.q(), m = pb.params.full_dim();
    const Partition& P = pb.partition;
    const int N = P.intervals();
    if (v.x_nodes.rows() != n || v.x_nodes.cols() != N + 1 || v.z0.size() != q
        || v.theta.size() != pb.unknown_dim())
        throw std::invalid_argument("decision vector shape does not match the problem");

    ObjectiveReport rep;
    const VectorXd th = pb.theta_full(v.theta);
    if (!pb.prior.support_indicator(v.x_nodes.col(0), v.z0, th)) {
        rep.decomposition.prior = -std::numeric_limits<double>::infinity();
        rep.value = -std::numeric_limits<double>::infinity();
        return rep;
    }

    const PwlPath x_path(P, v.x_nodes);
    rep.clean_path = kind == ObjectiveKind::euler
                         ? clean_path_euler(mdl, x_path, v.z0, th)
                         : clean_path_trapezoidal(mdl, x_path, v.z0, th, -1.0, 50, &rep.picard);
    const MatrixXd& Z = rep.clean_path.values();

    const MatrixXd Ginv = mdl.G.inverse();

    // path energy and, for the trapezoidal rule, the log-det correction
    double energy = 0.0, logdet = 0.0;
    std::vector<VectorXd> sigma_u(static_cast<std::size_t>(N));  // (G G')^{-1} u_k, reused by the gradient
    for (int k = 0; k < N; ++k) {
        const double d = P.delta(k);
        const VectorXd dx = (v.x_nodes.col(k + 1) - v.x_nodes.col(k)) / d;
        VectorXd u;
        if (kind == ObjectiveKind::euler) {
            u = dx - mdl.drift_noisy(P.node(k), v.x_nodes.col(k), Z.col(k), th);
        } else {
            const VectorXd f0 = mdl.drift_noisy(P.node(k), v.x_nodes.col(k), Z.col(k), th);
            const VectorXd f1 =
                mdl.drift_noisy(P.node(k + 1), v.x_nodes.col(k + 1), Z.col(k + 1), th);
            u = dx - 0.5 * (f0 + f1);
        }
        const VectorXd e = Ginv * u;
        energy -= 0.5 * d * e.squaredNorm();
        sigma_u[static_cast<std::size_t>(k)] = Ginv.transpose() * e;

        if (kind == ObjectiveKind::trapezoidal) {
            const MatrixXd Jfx =
                eval_jac_f_x(mdl, P.node(k + 1), v.x_nodes.col(k + 1), Z.col(k + 1), th);
            double ld;
            if (!detail::positive_log_det(MatrixXd::Identity(n, n) - 0.5 * d * Jfx, ld)) {
                rep.nonpositive_det_step = k;
                rep.decomposition.divergence_or_logdet_sum =
                    -std::numeric_limits<double>::infinity();
                rep.value = -std::numeric_limits<double>::infinity();
                return rep;
            }
            logdet += ld;
        }
    }

    MatrixXd Xs(n, static_cast<int>(pb.sample_nodes.size()));
    MatrixXd Zs(q, static_cast<int>(pb.sample_nodes.size()));
    for (std::size_t j = 0; j < pb.sample_nodes.size(); ++j) {
        Xs.col(static_cast<int>(j)) = v.x_nodes.col(pb.sample_nodes[j]);
        if (q > 0) Zs.col(static_cast<int>(j)) = Z.col(pb.sample_nodes[j]);
    }

    MatrixXd gXs, gZs;
    VectorXd g_th_meas;
    double lik = 0.0;
    const bool want_grad = grad != nullptr;
    if (pb.sample_nodes.empty()) {
        if (want_grad) {
            gXs.setZero(n, 0);
            gZs.setZero(q, 0);
            g_th_meas.setZero(m);
        }
    } else if (want_grad) {
        lik = pb.measurement.loglik_grad(Xs, Zs, th, pb.y, gXs, gZs, g_th_meas);
    } else {
        lik = pb.measurement.loglik(Xs, Zs, th, pb.y);
    }

    rep.decomposition.prior = pb.prior.log_density(v.x_nodes.col(0), v.z0, th);
    rep.decomposition.likelihood = lik;
    rep.decomposition.energy_sum = energy;
    rep.decomposition.divergence_or_logdet_sum = kind == ObjectiveKind::euler ? 0.0 : logdet;
    rep.value = rep.decomposition.total();
    if (!want_grad || !rep.finite()) return rep;

    // ---- gradient ----
    detail::GradientScratch s;
    s.g_x.setZero(n, N + 1);
    s.g_z_direct.setZero(q, N + 1);
    s.g_th_full.setZero(m);

    // prior
    {
        VectorXd gx0, gz0, gth;
        eval_prior_grad(pb.prior, v.x_nodes.col(0), v.z0, th, gx0, gz0, gth);
        s.g_x.col(0) += gx0;
        if (q > 0) s.g_z_direct.col(0) += gz0;
        s.g_th_full += gth;
    }
    // likelihood
    for (std::size_t j = 0; j < pb.sample_nodes.size(); ++j) {
        s.g_x.col(pb.sample_nodes[j]) += gXs.col(static_cast<int>(j));
        if (q > 0) s.g_z_direct.col(pb.sample_nodes[j]) += gZs.col(static_cast<int>(j));
    }
    if (!pb.sample_nodes.empty()) s.g_th_full += g_th_meas;

    if (kind == ObjectiveKind::euler) {
        // energy partials
        for (int k = 0; k < N; ++k) {
            const double d = P.delta(k);
            const double t = P.node(k);
            const VectorXd& su = sigma_u[static_cast<std::size_t>(k)];
            const MatrixXd Jfx = eval_jac_f_x(mdl, t, v.x_nodes.col(k), Z.col(k), th);
            s.g_x.col(k) += su + d * Jfx.transpose() * su;
            s.g_x.col(k + 1) -= su;
            if (q > 0) {
                const MatrixXd Jfz = eval_jac_f_z(mdl, t, v.x_nodes.col(k), Z.col(k), th);
                s.g_z_direct.col(k) += d * Jfz.transpose() * su;
            }
            if (m > 0) {
                const MatrixXd Jft = eval_jac_f_theta(mdl, t, v.x_nodes.col(k), Z.col(k), th);
                s.g_th_full += d * Jft.transpose() * su;
            }
        }
        // adjoint sweep through z_{k+1} = z_k + d h_k
        if (q > 0) {
            VectorXd lam = s.g_z_direct.col(N);
            for (int k = N - 1; k >= 0; --k) {
                const double d = P.delta(k);
                const double t = P.node(k);
                const MatrixXd Jhz = eval_jac_h_z(mdl, t, v.x_nodes.col(k), Z.col(k), th);
                const MatrixXd Jhx = eval_jac_h_x(mdl, t, v.x_nodes.col(k), Z.col(k), th);
                s.g_x.col(k) += d * Jhx.transpose() * lam;
                if (m > 0) {
                    const MatrixXd Jht = eval_jac_h_theta(mdl, t, v.x_nodes.col(k), Z.col(k), th);
                    s.g_th_full += d * Jht.transpose() * lam;
                }
                lam = s.g_z_direct.col(k)
                      + (MatrixXd::Identity(q, q) + d * Jhz).transpose() * lam;
            }
            // lam now carries d(objective)/d(z0)
            s.g_z_direct.col(0) = lam;
        }
    } else {
        // energy partials at both interval endpoints
        for (int k = 0; k < N; ++k) {
            const double d = P.delta(k);
            const double t0 = P.node(k), t1 = P.node(k + 1);
            const VectorXd& su = sigma_u[static_cast<std::size_t>(k)];
            const MatrixXd Jfx0 = eval_jac_f_x(mdl, t0, v.x_nodes.col(k), Z.col(k), th);
            const MatrixXd Jfx1 = eval_jac_f_x(mdl, t1, v.x_nodes.col(k + 1), Z.col(k + 1), th);
            s.g_x.col(k) += su + 0.5 * d * Jfx0.transpose() * su;
            s.g_x.col(k + 1) += -su + 0.5 * d * Jfx1.transpose() * su;
            if (q > 0) {
                const MatrixXd Jfz0 = eval_jac_f_z(mdl, t0, v.x_nodes.col(k), Z.col(k), th);
                const MatrixXd Jfz1 =
                    eval_jac_f_z(mdl, t1, v.x_nodes.col(k + 1), Z.col(k + 1), th);
                s.g_z_direct.col(k) += 0.5 * d * Jfz0.transpose() * su;
                s.g_z_direct.col(k + 1) += 0.5 * d * Jfz1.transpose() * su;
            }
            if (m > 0) {
                const MatrixXd Jft0 = eval_jac_f_theta(mdl, t0, v.x_nodes.col(k), Z.col(k), th);
                const MatrixXd Jft1 =
                    eval_jac_f_theta(mdl, t1, v.x_nodes.col(k + 1), Z.col(k + 1), th);
                s.g_th_full += 0.5 * d * (Jft0 + Jft1).transpose() * su;
            }

            // log-det partials: d logdet / dp = -d/2 tr(M^{-1} dJfx/dp),
            // with dJfx/dp by central differences in (x_{k+1}, z_{k+1}, theta)
            const MatrixXd M = MatrixXd::Identity(n, n) - 0.5 * d * Jfx1;
            const MatrixXd Minv = M.inverse();
            auto logdet_partial = [&](const MatrixXd& Jp, const MatrixXd& Jm, double step) {
                return -0.5 * d * (Minv * ((Jp - Jm) / (2.0 * step))).trace();
            };
            for (int i = 0; i < n; ++i) {
                VectorXd xp = v.x_nodes.col(k + 1), xm = xp;
                const double step = detail::fd_step(xp(i));
                xp(i) += step;
                xm(i) -= step;
                s.g_x(i, k + 1) += logdet_partial(eval_jac_f_x(mdl, t1, xp, Z.col(k + 1), th),
                                                  eval_jac_f_x(mdl, t1, xm, Z.col(k + 1), th),
                                                  step);
            }
            for (int i = 0; i < q; ++i) {
                VectorXd zp = Z.col(k + 1), zm = zp;
                const double step = detail::fd_step(zp(i));
                zp(i) += step;
                zm(i) -= step;
                s.g_z_direct(i, k + 1) +=
                    logdet_partial(eval_jac_f_x(mdl, t1, v.x_nodes.col(k + 1), zp, th),
                                   eval_jac_f_x(mdl, t1, v.x_nodes.col(k + 1), zm, th), step);
            }
            for (int i = 0; i < m; ++i) {
                VectorXd tp = th, tm = th;
                const double step = detail::fd_step(tp(i));
                tp(i) += step;
                tm(i) -= step;
                s.g_th_full(i) +=
                    logdet_partial(eval_jac_f_x(mdl, t1, v.x_nodes.col(k + 1), Z.col(k + 1), tp),
                                   eval_jac_f_x(mdl, t1, v.x_nodes.col(k + 1), Z.col(k + 1), tm),
                                   step);
            }
        }
        // implicit adjoint through z_{k+1} = z_k + d/2 (h_k + h_{k+1})
        if (q > 0) {
            const MatrixXd Iq = MatrixXd::Identity(q, q);
            VectorXd mu_next;  // multiplier of the constraint at node k+1
            for (int k = N; k >= 1; --k) {
                const double d_prev = P.delta(k - 1);
                const MatrixXd Jhz_k =
                    eval_jac_h_z(mdl, P.node(k), v.x_nodes.col(k), Z.col(k), th);
                VectorXd lam = s.g_z_direct.col(k);
                if (k < N) {
                    const double d_k = P.delta(k);
                    lam += (Iq + 0.5 * d_k * Jhz_k).transpose() * mu_next;
                }
                const MatrixXd B = Iq - 0.5 * d_prev * Jhz_k;
                const VectorXd mu = B.transpose().partialPivLu().solve(lam);

                // h at node k appears in the constraints of both adjacent intervals
                const MatrixXd Jhx_k =
                    eval_jac_h_x(mdl, P.node(k), v.x_nodes.col(k), Z.col(k), th);
                s.g_x.col(k) += 0.5 * d_prev * Jhx_k.transpose() * mu;
                if (k < N) s.g_x.col(k) += 0.5 * P.delta(k) * Jhx_k.transpose() * mu_next;
                if (m > 0) {
                    const MatrixXd Jht_k =
                        eval_jac_h_theta(mdl, P.node(k), v.x_nodes.col(k), Z.col(k), th);
                    const MatrixXd Jht_prev = eval_jac_h_theta(mdl, P.node(k - 1),
                                                               v.x_nodes.col(k - 1),
                                                               Z.col(k - 1), th);
                    s.g_th_full += 0.5 * d_prev * (Jht_prev + Jht_k).transpose() * mu;
                }
                mu_next = mu;
            }
            // node 0 terms: direct partial plus the first constraint's pullback
            const double d0 = P.delta(0);
            const MatrixXd Jhz_0 = eval_jac_h_z(mdl, P.node(0), v.x_nodes.col(0), Z.col(0), th);
            const MatrixXd Jhx_0 = eval_jac_h_x(mdl, P.node(0), v.x_nodes.col(0), Z.col(0), th);
            s.g_x.col(0) += 0.5 * d0 * Jhx_0.transpose() * mu_next;
            s.g_z_direct.col(0) += (Iq + 0.5 * d0 * Jhz_0).transpose() * mu_next;
        }
    }

    grad->resize(pb.decision_dim());
    grad->head(s.g_x.size()) = Eigen::Map<const VectorXd>(s.g_x.data(), s.g_x.size());
    grad->segment(s.g_x.size(), q) = s.g_z_direct.col(0);
    const auto idx = pb.params.unknown_indices();
    for (std::size_t j = 0; j < idx.size(); ++j)
        (*grad)(s.g_x.size() + q + static_cast<long>(j)) =
            s.g_th_full(idx[j]);
    return rep;
}

inline ObjectiveReport euler_log_posterior(const Problem& pb, const DecisionVector& v) {
    return log_posterior(pb, ObjectiveKind::euler, v);
}

inline ObjectiveReport trapezoidal_log_posterior(const Problem& pb, const DecisionVector& v) {
    return log_posterior(pb, ObjectiveKind::trapezoidal, v);
}

inline VectorXd log_posterior_gradient(const Problem& pb, ObjectiveKind kind,
                                       const DecisionVector& v) {
    VectorXd g;
    const ObjectiveReport rep = log_posterior(pb, kind, v, &g);
    if (!rep.finite())
        throw std::runtime_error("gradient requested where the objective is not finite");
    return g;
}

// ---------------------------------------------------------------------------
// continuous references (test and report harness; the solver never calls these)

// A smooth path with its derivative, both caller-supplied.
struct SmoothPath {
    int dim = 1;
    std::function<VectorXd(double)> value;
    std::function<VectorXd(double)> derivative;
};

inline PriorModel flat_prior() {
    PriorModel p;
    p.log_density = [](const VectorXd&, const VectorXd&, const VectorXd&) { return 0.0; };
    p.log_density_grad = [](const VectorXd& x0, const VectorXd& z0, const VectorXd& th,
                            VectorXd& gx, VectorXd& gz, VectorXd& gt) {
        gx.setZero(x0.size());
        gz.setZero(z0.size());
        gt.setZero(th.size());
    };
    p.support_indicator = [](const VectorXd&, const VectorXd&, const VectorXd&) { return true; };
    return p;
}

inline MeasurementModel no_measurements(int obs_dim = 1) {
    MeasurementModel m;
    m.obs_dim = obs_dim;
    m.loglik = [](const MatrixXd&, const MatrixXd&, const VectorXd&, const MatrixXd&) {
        return 0.0;
    };
    m.loglik_grad = [](const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd& th,
                       const MatrixXd&, MatrixXd& gX, MatrixXd& gZ, VectorXd& gt) {
        gX.setZero(Xs.rows(), Xs.cols());
        gZ.setZero(Zs.rows(), Zs.cols());
        gt.setZero(th.size());
        return 0.0;
    };
    return m;
}

namespace detail {

struct ContinuousEval {
    double prior = 0.0;
    double likelihood = 0.0;
    double energy_integral = 0.0;      // int |G^{-1}(f - xdot)|^2
    double divergence_integral = 0.0;  // int div_x f
};

inline ContinuousEval continuous_eval(const DynamicsModel& mdl, const PriorModel& prior,
                                      const MeasurementModel& meas, const MatrixXd& y,
                                      const SmoothPath& x, const VectorXd& z0, const VectorXd& th,
                                      double t_f, int quad_N) {
    if (quad_N < 1) throw std::invalid_argument("quadrature needs at least one panel");
    const double hq = t_f / quad_N;
    const MatrixXd Ginv = mdl.G.inverse();

    // clean path by classic fixed-step RK4 on the quadrature grid
    MatrixXd Z(mdl.q, quad_N + 1);
    VectorXd z = z0;
    auto hfun = [&](double t, const VectorXd& zz) { return mdl.drift_clean(t, x.value(t), zz, th); };
    for (int k = 0; k <= quad_N; ++k) {
        if (mdl.q > 0) Z.col(k) = z;
        if (k == quad_N) break;
        const double t = k * hq;
        if (mdl.q > 0) {
            const VectorXd k1 = hfun(t, z);
            const VectorXd k2 = hfun(t + 0.5 * hq, z + 0.5 * hq * k1);
            const VectorXd k3 = hfun(t + 0.5 * hq, z + 0.5 * hq * k2);
            const VectorXd k4 = hfun(t + hq, z + hq * k3);
            z += (hq / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }

    ContinuousEval out;
    for (int k = 0; k <= quad_N; ++k) {
        const double t = k * hq;
        const double w = (k == 0 || k == quad_N) ? 0.5 * hq : hq;
        const VectorXd xi = x.value(t);
        const VectorXd zi = mdl.q > 0 ? VectorXd(Z.col(k)) : VectorXd(0);
        const VectorXd e = Ginv * (mdl.drift_noisy(t, xi, zi, th) - x.derivative(t));
        out.energy_integral += w * e.squaredNorm();
        out.divergence_integral += w * eval_divergence(mdl, t, xi, zi, th);
    }

    out.prior = prior.log_density(x.value(0.0), z0, th);
    if (!meas.sample_times.empty()) {
        MatrixXd Xs(mdl.n, static_cast<int>(meas.sample_times.size()));
        MatrixXd Zs(mdl.q, static_cast<int>(meas.sample_times.size()));
        for (std::size_t j = 0; j < meas.sample_times.size(); ++j) {
            const double tj = meas.sample_times[j];
            const long idx = std::lround(tj / hq);
            if (std::abs(idx * hq - tj) > 1e-9 * std::max(1.0, tj))
                throw std::invalid_argument(
                    "measurement time off the quadrature grid; raise quad_N");
            Xs.col(static_cast<int>(j)) = x.value(tj);
            if (mdl.q > 0) Zs.col(static_cast<int>(j)) = Z.col(static_cast<int>(idx));
        }
        out.likelihood = meas.loglik(Xs, Zs, th, y);
    }
    return out;
}

}  // namespace detail

inline double continuous_log_posterior(const DynamicsModel& mdl, const PriorModel& prior,
                                       const MeasurementModel& meas, const MatrixXd& y,
                                       const SmoothPath& x, const VectorXd& z0,
                                       const VectorXd& th, double t_f, int quad_N) {
    const auto e = detail::continuous_eval(mdl, prior, meas, y, x, z0, th, t_f, quad_N);
    return e.prior + e.likelihood - 0.5 * e.energy_integral - 0.5 * e.divergence_integral;
}

inline double continuous_energy_log_posterior(const DynamicsModel& mdl, const PriorModel& prior,
                                              const MeasurementModel& meas, const MatrixXd& y,
                                              const SmoothPath& x, const VectorXd& z0,
                                              const VectorXd& th, double t_f, int quad_N) {
    const auto e = detail::continuous_eval(mdl, prior, meas, y, x, z0, th, t_f, quad_N);
    return e.prior + e.likelihood - 0.5 * e.energy_integral;
}

}  // namespace sdemap
