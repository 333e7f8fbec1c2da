#pragma once

// Limited-memory quasi-Newton ascent with a strong-Wolfe line search, the
// measurement-smoothing initial guess, and the end-to-end estimate driver.
//
// Support constraints (positive noise scales, prior support) are enforced by
// the line search, not by reparameterization: trial points where the
// objective is -inf, or where its evaluation throws, are stepped back over
// and never accepted. Accepted iterates always have finite objective and the
// iterate sequence is monotone ascent.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sdemap/grid.hpp"
#include "sdemap/model.hpp"
#include "sdemap/objective.hpp"

namespace sdemap {

enum class Termination { grad_tol, max_iters, line_search_failure };

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::grad_tol: return "grad_tol";
        case Termination::max_iters: return "max_iters";
        default: return "line_search_failure";
    }
}

struct SolverConfig {
    double grad_tol = 0.0;  // <= 0 resolves to 1e-6 * (1 + |objective at start|)
    int max_iters = 500;
    double sufficient_decrease = 1e-4;
    double curvature = 0.9;
    int memory = 20;
};

// Evaluates the objective and fills the gradient. The gradient is read only
// when the returned value is finite; it must be sized either way.
using AscentObjective = std::function<double(const VectorXd&, VectorXd&)>;

struct AscentResult {
    VectorXd x;
    double value = -std::numeric_limits<double>::infinity();
    VectorXd grad;
    int iterations = 0;
    Termination termination = Termination::max_iters;
    long evaluations = 0;
};

namespace detail {

struct LinePoint {
    double a = 0.0;
    double f = -std::numeric_limits<double>::infinity();
    VectorXd g;
};

// Bisection refinement of a bracketing interval for the strong Wolfe
// conditions (ascent form). Non-finite midpoints shrink the interval from the
// hi side. lo always holds the best finite value seen.
template <typename Eval>
inline bool wolfe_zoom(Eval&& eval, const VectorXd& x, const VectorXd& p, double f0, double d0,
                       LinePoint lo, double a_hi, double c1, double c2, LinePoint& out) {
    for (int i = 0; i < 30; ++i) {
        LinePoint mid;
        mid.a = 0.5 * (lo.a + a_hi);
        mid.f = eval(x + mid.a * p, mid.g);
        if (!std::isfinite(mid.f)) {
            a_hi = mid.a;
            continue;
        }
        if (mid.f < f0 + c1 * mid.a * d0 || mid.f <= lo.f) {
            a_hi = mid.a;
        } else {
            const double da = mid.g.dot(p);
            if (std::abs(da) <= c2 * std::abs(d0)) {
                out = std::move(mid);
                return true;
            }
            if (da * (a_hi - lo.a) <= 0.0) a_hi = lo.a;
            lo = std::move(mid);
        }
    }
    if (std::isfinite(lo.f) && lo.f > f0 && lo.a > 0.0) {
        out = std::move(lo);
        return true;
    }
    return false;
}

}  // namespace detail

// Maximizes a smooth objective from a point where it is finite. -inf regions
// act as barriers: the search never accepts a non-finite iterate.
inline AscentResult lbfgs_ascent(const AscentObjective& obj, VectorXd x, SolverConfig cfg = {}) {
    if (!(cfg.sufficient_decrease > 0.0 && cfg.sufficient_decrease < cfg.curvature
          && cfg.curvature < 1.0))
        throw std::invalid_argument("line-search parameters must satisfy 0 < decrease < curvature < 1");
    if (cfg.memory < 1) throw std::invalid_argument("quasi-Newton memory must be positive");
    if (cfg.max_iters < 1) throw std::invalid_argument("iteration budget must be positive");

    const double inf = std::numeric_limits<double>::infinity();
    const int D = static_cast<int>(x.size());
    VectorXd g(D);
    double f = obj(x, g);
    if (!std::isfinite(f)) throw std::invalid_argument("objective not finite at the starting point");
    long evals = 1;
    const double gtol = cfg.grad_tol > 0.0 ? cfg.grad_tol : 1e-6 * (1.0 + std::abs(f));

    // evaluation failures at trial points are rejections, not errors
    auto eval_trial = [&](const VectorXd& xt, VectorXd& gt) -> double {
        ++evals;
        try {
            const double v = obj(xt, gt);
            if (gt.size() != D) gt.setZero(D);
            return v;
        } catch (const std::exception&) {
            gt.setZero(D);
            return -inf;
        }
    };

    std::vector<VectorXd> S, Y;
    std::vector<double> rho;
    const double c1 = cfg.sufficient_decrease, c2 = cfg.curvature;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const double gn = g.lpNorm<Eigen::Infinity>();
        if (gn < gtol) return {std::move(x), f, std::move(g), it, Termination::grad_tol, evals};

        // two-loop recursion on the ascent direction
        VectorXd q = g;
        std::vector<double> alpha(S.size());
        for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
            alpha[i] = rho[i] * S[i].dot(q);
            q -= alpha[i] * Y[i];
        }
        if (!S.empty())
            q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        else
            q *= 1.0 / std::max(1.0, gn);
        for (std::size_t i = 0; i < S.size(); ++i) {
            const double b = rho[i] * Y[i].dot(q);
            q += (alpha[i] - b) * S[i];
        }
        VectorXd p = std::move(q);
        double d0 = g.dot(p);
        if (d0 <= 0.0) {  // curvature memory unusable here: restart from steepest ascent
            S.clear();
            Y.clear();
            rho.clear();
            p = g / std::max(1.0, gn);
            d0 = g.dot(p);
        }

        // bracketing phase of the strong Wolfe search
        detail::LinePoint prev{0.0, f, g};
        detail::LinePoint cur;
        cur.a = 1.0;
        cur.f = eval_trial(x + cur.a * p, cur.g);
        for (int sh = 0; !std::isfinite(cur.f) && sh < 60; ++sh) {
            cur.a *= 0.5;
            cur.f = eval_trial(x + cur.a * p, cur.g);
        }
        if (!std::isfinite(cur.f))
            return {std::move(x), f, std::move(g), it, Termination::line_search_failure, evals};

        bool have = false;
        detail::LinePoint acc;
        for (int ls = 0; ls < 25; ++ls) {
            if (cur.f < f + c1 * cur.a * d0 || (ls > 0 && cur.f <= prev.f)) {
                have = detail::wolfe_zoom(eval_trial, x, p, f, d0, prev, cur.a, c1, c2, acc);
                break;
            }
            const double da = cur.g.dot(p);
            if (std::abs(da) <= c2 * std::abs(d0)) {
                acc = std::move(cur);
                have = true;
                break;
            }
            if (da < 0.0) {
                have = detail::wolfe_zoom(eval_trial, x, p, f, d0, cur, prev.a, c1, c2, acc);
                break;
            }
            prev = std::move(cur);
            cur = detail::LinePoint{};
            cur.a = 2.0 * prev.a;
            cur.f = eval_trial(x + cur.a * p, cur.g);
            for (int sh = 0; !std::isfinite(cur.f) && sh < 60; ++sh) {
                cur.a = prev.a + 0.5 * (cur.a - prev.a);
                cur.f = eval_trial(x + cur.a * p, cur.g);
            }
        }
        if (!have)
            return {std::move(x), f, std::move(g), it, Termination::line_search_failure, evals};

        const VectorXd s = acc.a * p;
        const VectorXd yv = g - acc.g;  // ascent form: curvature of the negated objective
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            S.push_back(s);
            Y.push_back(yv);
            rho.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > cfg.memory) {
                S.erase(S.begin());
                Y.erase(Y.begin());
                rho.erase(rho.begin());
            }
        }
        x += acc.a * p;
        f = acc.f;
        g = std::move(acc.g);
    }
    return {std::move(x), f, std::move(g), cfg.max_iters, Termination::max_iters, evals};
}

struct EstimateResult {
    DecisionVector v_hat;
    ObjectiveReport objective;  // at v_hat; its clean_path carries the estimation grid
    int iterations = 0;
    double grad_norm = std::numeric_limits<double>::infinity();
    Termination termination = Termination::max_iters;
    double wall_seconds = 0.0;
};

inline EstimateResult maximize(ObjectiveKind kind, const Problem& pb, const DecisionVector& v0,
                               SolverConfig cfg = {}) {
    const auto t_start = std::chrono::steady_clock::now();
    const int n = pb.n(), nodes = pb.node_count(), q = pb.q(), ud = pb.unknown_dim();
    const AscentObjective obj = [&](const VectorXd& flat, VectorXd& grad) {
        const DecisionVector v = DecisionVector::unflatten(flat, n, nodes, q, ud);
        VectorXd g;
        const ObjectiveReport r = log_posterior(pb, kind, v, &g);
        if (r.finite())
            grad = std::move(g);
        else
            grad.setZero(flat.size());
        return r.value;
    };
    AscentResult ar = lbfgs_ascent(obj, v0.flatten(), cfg);

    EstimateResult res;
    res.v_hat = DecisionVector::unflatten(ar.x, n, nodes, q, ud);
    res.objective = log_posterior(pb, kind, res.v_hat);
    res.iterations = ar.iterations;
    res.grad_norm = ar.grad.lpNorm<Eigen::Infinity>();
    res.termination = ar.termination;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

namespace detail {

// Regularized second-difference fit of a scalar series: minimizes
// |z - y|^2 + lambda |D2 z|^2 with the penalty weight chosen by generalized
// cross-validation over a fixed log grid.
inline VectorXd gcv_smooth(const std::vector<double>& t, const VectorXd& y) {
    const int M = static_cast<int>(y.size());
    MatrixXd D2 = MatrixXd::Zero(M - 2, M);
    for (int j = 1; j + 1 < M; ++j) {
        const double ha = t[j] - t[j - 1], hb = t[j + 1] - t[j];
        D2(j - 1, j - 1) = 2.0 / (ha * (ha + hb));
        D2(j - 1, j) = -2.0 / (ha * hb);
        D2(j - 1, j + 1) = 2.0 / (hb * (ha + hb));
    }
    const MatrixXd K = D2.transpose() * D2;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(K);
    const VectorXd w = eig.eigenvalues().cwiseMax(0.0);
    const VectorXd yt = eig.eigenvectors().transpose() * y;

    double best_gcv = std::numeric_limits<double>::infinity();
    VectorXd best_c;
    for (int e = -6; e <= 3; ++e) {
        const double lam = std::pow(10.0, e);
        const VectorXd c = (1.0 + lam * w.array()).inverse().matrix();
        const double rss = ((1.0 - c.array()) * yt.array()).square().sum();
        const double tr = c.sum();
        const double denom = 1.0 - tr / M;
        const double gcv = (rss / M) / std::max(denom * denom, 1e-300);
        if (gcv < best_gcv) {
            best_gcv = gcv;
            best_c = c;
        }
    }
    return eig.eigenvectors() * best_c.cwiseProduct(yt);
}

inline double interp_linear(const std::vector<double>& t, const VectorXd& v, double tq) {
    if (tq <= t.front()) return v(0);
    if (tq >= t.back()) return v(v.size() - 1);
    const auto it = std::upper_bound(t.begin(), t.end(), tq);
    const int j = static_cast<int>(it - t.begin()) - 1;
    const double w = (tq - t[j]) / (t[j + 1] - t[j]);
    return (1.0 - w) * v(j) + w * v(j + 1);
}

}  // namespace detail

// Data-driven starting point for models where the clean state is scalar and
// directly drives the noisy state's observation chain (q = 1, observations of
// the clean state's antiderivative structure): the smoothed measurement series
// approximates z, its slope approximates x, and its curvature approximates the
// noisy drift, which pins down parameters the drift is linear in. Parameters
// without a usable regression column start at the prior mode.
inline DecisionVector initial_guess(const std::vector<double>& meas_times, const MatrixXd& y,
                                    const Partition& partition, const DynamicsModel& dynamics,
                                    const ParameterSet& params) {
    if (dynamics.q != 1 || dynamics.n != 1)
        throw std::invalid_argument(
            "initial guess supports scalar noisy/clean state pairs only; supply a custom starting point");
    const int M = static_cast<int>(meas_times.size());
    if (M < 4) throw std::invalid_argument("initial guess needs at least 4 measurements");
    if (y.rows() != 1 || y.cols() != M)
        throw std::invalid_argument("measurement matrix shape does not match the time list");

    const VectorXd fit = detail::gcv_smooth(meas_times, y.row(0).transpose());

    // slope by central differences, one-sided at the ends
    VectorXd slope(M);
    for (int j = 1; j + 1 < M; ++j)
        slope(j) = (fit(j + 1) - fit(j - 1)) / (meas_times[j + 1] - meas_times[j - 1]);
    slope(0) = (fit(1) - fit(0)) / (meas_times[1] - meas_times[0]);
    slope(M - 1) = (fit(M - 1) - fit(M - 2)) / (meas_times[M - 1] - meas_times[M - 2]);

    // curvature at interior points, matching the smoothing penalty stencil
    VectorXd curv(M - 2);
    for (int j = 1; j + 1 < M; ++j) {
        const double ha = meas_times[j] - meas_times[j - 1], hb = meas_times[j + 1] - meas_times[j];
        curv(j - 1) = 2.0 * fit(j - 1) / (ha * (ha + hb)) - 2.0 * fit(j) / (ha * hb)
                      + 2.0 * fit(j + 1) / (hb * (ha + hb));
    }

    // theta: prior mode, overridden by regression where the drift is linear
    // in theta with a non-degenerate column
    VectorXd th_full = params.nominal;
    for (int i = 0; i < params.full_dim(); ++i)
        if (params.unknown[i]) th_full(i) = params.prior_mode(i);
    if (dynamics.drift_regressors) {
        const std::vector<int> uidx = params.unknown_indices();
        MatrixXd R;
        VectorXd r0;
        MatrixXd cols(M - 2, params.full_dim());
        VectorXd target(M - 2);
        for (int j = 1; j + 1 < M; ++j) {
            dynamics.drift_regressors(meas_times[j], VectorXd::Constant(1, slope(j)),
                                      VectorXd::Constant(1, fit(j)), R, r0);
            cols.row(j - 1) = R.row(0);
            target(j - 1) = curv(j - 1) - r0(0);
        }
        std::vector<int> active;
        const double scale = std::max(1.0, cols.cwiseAbs().maxCoeff());
        for (int i : uidx)
            if (cols.col(i).cwiseAbs().maxCoeff() > 1e-12 * scale) active.push_back(i);
        for (int i = 0; i < params.full_dim(); ++i)
            if (!params.unknown[i]) target -= cols.col(i) * params.nominal(i);
        if (!active.empty() && static_cast<int>(active.size()) <= M - 2) {
            MatrixXd B(M - 2, active.size());
            for (std::size_t k = 0; k < active.size(); ++k) B.col(k) = cols.col(active[k]);
            const VectorXd sol = B.colPivHouseholderQr().solve(target);
            for (std::size_t k = 0; k < active.size(); ++k) th_full(active[k]) = sol(k);
        }
    }

    DecisionVector v;
    v.x_nodes.resize(1, partition.node_count());
    for (int k = 0; k < partition.node_count(); ++k)
        v.x_nodes(0, k) = detail::interp_linear(meas_times, slope, partition.node(k));
    v.z0 = VectorXd::Constant(1, fit(0));
    v.theta = params.unknown_from_full(th_full);
    return v;
}

enum class Estimator { map, mee };

inline const char* estimator_name(Estimator e) { return e == Estimator::map ? "map" : "mee"; }

inline ObjectiveKind objective_for(Estimator e) {
    return e == Estimator::map ? ObjectiveKind::trapezoidal : ObjectiveKind::euler;
}

// Full pipeline on one dataset: estimation grid = measurement grid refined
// grid_refinement times (each refinement halves every interval), starting
// point from initial_guess, then ascent on the matching discretization.
inline EstimateResult estimate(const Problem& pb, Estimator estimator, int grid_refinement,
                               SolverConfig cfg = {}) {
    if (grid_refinement < 0) throw std::invalid_argument("grid refinement count must be >= 0");
    const Partition grid =
        Partition::from_nodes(pb.measurement.sample_times).refined(grid_refinement);
    const Problem rp =
        make_problem(pb.dynamics, pb.prior, pb.measurement, pb.params, pb.y, grid);
    const DecisionVector v0 =
        initial_guess(pb.measurement.sample_times, pb.y, grid, pb.dynamics, pb.params);
    return maximize(objective_for(estimator), rp, v0, cfg);
}

}  // namespace sdemap
