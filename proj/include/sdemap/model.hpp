#pragma once

// Model abstractions: dynamics with a noisy/clean state split, priors over
// (x0, z0, theta), and discrete-time measurement models.
//
// State convention throughout: x is the noise-driven block (dim n), z the
// drift-only block (dim q), theta the full parameter vector (dim m) shared
// by dynamics and measurement closures. Which theta entries are estimated is
// a separate concern (ParameterSet); closures always see the full vector.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdemap/grid.hpp"
#include "sdemap/rng.hpp"

namespace sdemap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using DriftFn = std::function<VectorXd(double, const VectorXd&, const VectorXd&, const VectorXd&)>;
using StateScalarFn = std::function<double(double, const VectorXd&, const VectorXd&, const VectorXd&)>;
using StateJacobianFn = std::function<MatrixXd(double, const VectorXd&, const VectorXd&, const VectorXd&)>;

// Smooth coordinate clamp: identity on [lo, hi], cosine-eased saturation over
// a margin on each side, constant beyond. Twice continuously differentiable.
struct SmoothClamp {
    double lo;
    double hi;
    double margin;

    static SmoothClamp over(double lo, double hi, double margin_fraction = 0.1) {
        return {lo, hi, (hi - lo) * margin_fraction};
    }

    // value and first derivative of the clamped coordinate
    void eval(double v, double& s, double& ds) const {
        if (v >= lo && v <= hi) {
            s = v;
            ds = 1.0;
            return;
        }
        const bool upper = v > hi;
        const double u = upper ? (v - hi) / margin : (lo - v) / margin;
        if (u >= 1.0) {
            s = upper ? hi + 0.5 * margin : lo - 0.5 * margin;
            ds = 0.0;
            return;
        }
        const double pi = std::numbers::pi;
        const double eased = margin * (0.5 * u + std::sin(pi * u) / (2.0 * pi));
        s = upper ? hi + eased : lo - eased;
        ds = 0.5 * (1.0 + std::cos(pi * u));
    }

    double value(double v) const {
        double s, ds;
        eval(v, s, ds);
        return s;
    }
};

// Axis-aligned validity region for the joint (x, z) state.
struct StateBox {
    VectorXd x_lo, x_hi;
    VectorXd z_lo, z_hi;

    bool contains(const VectorXd& x, const VectorXd& z) const {
        for (int i = 0; i < x.size(); ++i)
            if (x(i) < x_lo(i) || x(i) > x_hi(i)) return false;
        for (int i = 0; i < z.size(); ++i)
            if (z(i) < z_lo(i) || z(i) > z_hi(i)) return false;
        return true;
    }
};

struct LipschitzHint {
    double L_f;  // joint-state Lipschitz bound for the noisy drift
    double L_h;  // same for the clean drift
};

struct DynamicsModel {
    int n = 0;  // noisy-state dimension
    int q = 0;  // clean-state dimension
    int m = 0;  // parameter dimension

    MatrixXd G;  // n-by-n constant diffusion gain, invertible

    DriftFn drift_noisy;                   // f(t, x, z, theta)
    DriftFn drift_clean;                   // h(t, x, z, theta); unused when q = 0
    StateScalarFn drift_divergence;        // trace of df/dx; empty -> finite differences

    // Optional analytic Jacobians; empty entries fall back to central
    // differences. Shapes: fx n*n, fz n*q, fth n*m, hx q*n, hz q*q, hth q*m.
    StateJacobianFn jac_f_x, jac_f_z, jac_f_theta;
    StateJacobianFn jac_h_x, jac_h_z, jac_h_theta;

    // Linear-in-theta drift decomposition f = R(t,x,z)*theta + r0(t,x,z),
    // used only by the initial-guess regression; optional.
    std::function<void(double, const VectorXd&, const VectorXd&, MatrixXd&, VectorXd&)> drift_regressors;

    std::optional<LipschitzHint> lipschitz_hint;
    std::optional<StateBox> validity_box;
};

namespace detail {

inline double fd_step(double v) { return std::max(1e-6, 1e-6 * std::abs(v)); }

template <typename Eval>
inline MatrixXd jacobian_fd(Eval&& eval, const VectorXd& v, int out_dim) {
    MatrixXd J(out_dim, v.size());
    VectorXd vp = v, vm = v;
    for (int i = 0; i < v.size(); ++i) {
        const double step = fd_step(v(i));
        vp(i) = v(i) + step;
        vm(i) = v(i) - step;
        J.col(i) = (eval(vp) - eval(vm)) / (2.0 * step);
        vp(i) = v(i);
        vm(i) = v(i);
    }
    return J;
}

}  // namespace detail

inline MatrixXd eval_jac_f_x(const DynamicsModel& mdl, double t, const VectorXd& x,
                             const VectorXd& z, const VectorXd& th) {
    if (mdl.jac_f_x) return mdl.jac_f_x(t, x, z, th);
    return detail::jacobian_fd([&](const VectorXd& v) { return mdl.drift_noisy(t, v, z, th); }, x, mdl.n);
}

inline MatrixXd eval_jac_f_z(const DynamicsModel& mdl, double t, const VectorXd& x,
                             const VectorXd& z, const VectorXd& th) {
    if (mdl.q == 0) return MatrixXd(mdl.n, 0);
    if (mdl.jac_f_z) return mdl.jac_f_z(t, x, z, th);
    return detail::jacobian_fd([&](const VectorXd& v) { return mdl.drift_noisy(t, x, v, th); }, z, mdl.n);
}

inline MatrixXd eval_jac_f_theta(const DynamicsModel& mdl, double t, const VectorXd& x,
                                 const VectorXd& z, const VectorXd& th) {
    if (mdl.m == 0) return MatrixXd(mdl.n, 0);
    if (mdl.jac_f_theta) return mdl.jac_f_theta(t, x, z, th);
    return detail::jacobian_fd([&](const VectorXd& v) { return mdl.drift_noisy(t, x, z, v); }, th, mdl.n);
}

inline MatrixXd eval_jac_h_x(const DynamicsModel& mdl, double t, const VectorXd& x,
                             const VectorXd& z, const VectorXd& th) {
    if (mdl.jac_h_x) return mdl.jac_h_x(t, x, z, th);
    return detail::jacobian_fd([&](const VectorXd& v) { return mdl.drift_clean(t, v, z, th); }, x, mdl.q);
}

inline MatrixXd eval_jac_h_z(const DynamicsModel& mdl, double t, const VectorXd& x,
                             const VectorXd& z, const VectorXd& th) {
    if (mdl.q == 0) return MatrixXd(0, 0);
    if (mdl.jac_h_z) return mdl.jac_h_z(t, x, z, th);
    return detail::jacobian_fd([&](const VectorXd& v) { return mdl.drift_clean(t, x, v, th); }, z, mdl.q);
}

inline MatrixXd eval_jac_h_theta(const DynamicsModel& mdl, double t, const VectorXd& x,
                                 const VectorXd& z, const VectorXd& th) {
    if (mdl.m == 0) return MatrixXd(mdl.q, 0);
    if (mdl.jac_h_theta) return mdl.jac_h_theta(t, x, z, th);
    return detail::jacobian_fd([&](const VectorXd& v) { return mdl.drift_clean(t, x, z, v); }, th, mdl.q);
}

inline double eval_divergence(const DynamicsModel& mdl, double t, const VectorXd& x,
                              const VectorXd& z, const VectorXd& th) {
    if (mdl.drift_divergence) return mdl.drift_divergence(t, x, z, th);
    double div = 0.0;
    VectorXd vp = x, vm = x;
    for (int i = 0; i < mdl.n; ++i) {
        const double step = detail::fd_step(x(i));
        vp(i) = x(i) + step;
        vm(i) = x(i) - step;
        div += (mdl.drift_noisy(t, vp, z, th)(i) - mdl.drift_noisy(t, vm, z, th)(i)) / (2.0 * step);
        vp(i) = x(i);
        vm(i) = x(i);
    }
    return div;
}

// Structural checks every model must pass before use: an invertible diffusion
// gain and, when an analytic divergence is supplied, agreement with central
// differences at random interior points.
inline void validate_dynamics(const DynamicsModel& mdl, const VectorXd& theta,
                              std::uint64_t seed = 1234, int points = 100) {
    if (mdl.n < 1) throw std::invalid_argument("dynamics needs at least one noisy state");
    if (mdl.G.rows() != mdl.n || mdl.G.cols() != mdl.n)
        throw std::invalid_argument("diffusion gain must be n-by-n");
    const double gnorm = mdl.G.operatorNorm();
    double det = mdl.G.determinant();
    if (!(std::abs(det) > 1e-12 * std::pow(gnorm, mdl.n)))
        throw std::invalid_argument("diffusion gain is numerically singular");
    if (!mdl.drift_divergence) return;

    SplitMix64 rng(seed);
    VectorXd x(mdl.n), z(mdl.q);
    auto interior = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    for (int p = 0; p < points; ++p) {
        for (int i = 0; i < mdl.n; ++i)
            x(i) = mdl.validity_box ? interior(mdl.validity_box->x_lo(i), mdl.validity_box->x_hi(i))
                                    : interior(-1.0, 1.0);
        for (int i = 0; i < mdl.q; ++i)
            z(i) = mdl.validity_box ? interior(mdl.validity_box->z_lo(i), mdl.validity_box->z_hi(i))
                                    : interior(-1.0, 1.0);
        const double t = interior(0.0, 10.0);
        const double analytic = mdl.drift_divergence(t, x, z, theta);
        DynamicsModel probe = mdl;
        probe.drift_divergence = nullptr;
        const double numeric = eval_divergence(probe, t, x, z, theta);
        const double scale = std::max(1.0, std::abs(analytic));
        if (std::abs(analytic - numeric) > 1e-6 * scale)
            throw std::logic_error("analytic drift divergence disagrees with finite differences");
    }
}

struct PriorModel {
    // log pi(x0, z0, theta), finite on the support
    std::function<double(const VectorXd&, const VectorXd&, const VectorXd&)> log_density;
    // optional analytic gradient; empty -> central differences
    std::function<void(const VectorXd&, const VectorXd&, const VectorXd&,
                       VectorXd&, VectorXd&, VectorXd&)>
        log_density_grad;
    std::function<bool(const VectorXd&, const VectorXd&, const VectorXd&)> support_indicator;
    // draws (x0, z0, theta); theta comes back at the benchmark's nominal truth
    std::function<void(GaussianStream&, VectorXd&, VectorXd&, VectorXd&)> sample;
};

inline void eval_prior_grad(const PriorModel& prior, const VectorXd& x0, const VectorXd& z0,
                            const VectorXd& th, VectorXd& gx0, VectorXd& gz0, VectorXd& gth) {
    if (prior.log_density_grad) {
        prior.log_density_grad(x0, z0, th, gx0, gz0, gth);
        return;
    }
    gx0.resize(x0.size());
    gz0.resize(z0.size());
    gth.resize(th.size());
    auto num = [&](VectorXd v, int i, auto&& f) {
        const double step = detail::fd_step(v(i));
        const double base = v(i);
        v(i) = base + step;
        const double up = f(v);
        v(i) = base - step;
        const double dn = f(v);
        return (up - dn) / (2.0 * step);
    };
    for (int i = 0; i < x0.size(); ++i)
        gx0(i) = num(x0, i, [&](const VectorXd& v) { return prior.log_density(v, z0, th); });
    for (int i = 0; i < z0.size(); ++i)
        gz0(i) = num(z0, i, [&](const VectorXd& v) { return prior.log_density(x0, v, th); });
    for (int i = 0; i < th.size(); ++i)
        gth(i) = num(th, i, [&](const VectorXd& v) { return prior.log_density(x0, z0, v); });
}

// Discrete-time measurement model. Sample times are k*t_s laid on [0, t_f];
// likelihood closures see the state sampled at those times (columns of Xs
// and Zs) plus the full parameter vector.
struct MeasurementModel {
    int obs_dim = 1;
    std::vector<double> sample_times;

    // log psi(y | states, theta); y is obs_dim-by-M like the state samples
    std::function<double(const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd& th,
                         const MatrixXd& y)>
        loglik;
    // value plus gradients w.r.t. the sampled states and theta
    std::function<double(const MatrixXd&, const MatrixXd&, const VectorXd&, const MatrixXd&,
                         MatrixXd& gXs, MatrixXd& gZs, VectorXd& gth)>
        loglik_grad;
    // draw a dataset given the true state samples
    std::function<MatrixXd(const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd& th,
                           GaussianStream&)>
        sample;

    MatrixXd sample_states(const PwlPath& path) const {
        MatrixXd S(path.dim(), static_cast<int>(sample_times.size()));
        for (std::size_t j = 0; j < sample_times.size(); ++j)
            S.col(static_cast<int>(j)) = path.eval(sample_times[j]);
        return S;
    }

    double log_likelihood(const PwlPath& x_path, const PwlPath& z_path, const VectorXd& th,
                          const MatrixXd& y) const {
        return loglik(sample_states(x_path), sample_states(z_path), th, y);
    }
};

inline std::vector<double> measurement_grid(double t_s, double t_f) {
    if (!(t_s > 0.0) || !(t_f > 0.0)) throw std::invalid_argument("sampling needs positive times");
    const int K = static_cast<int>(std::llround(t_f / t_s));
    if (std::abs(K * t_s - t_f) > 1e-9 * std::max(1.0, t_f))
        throw std::invalid_argument("sampling period must divide the horizon");
    std::vector<double> ts(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) ts[static_cast<std::size_t>(k)] = k * t_s;
    return ts;
}

// Full parameter bookkeeping: names, nominal truth values, and which entries
// are estimated. Decision vectors carry only the unknown entries, in order.
struct ParameterSet {
    std::vector<std::string> names;
    VectorXd nominal;
    std::vector<bool> unknown;
    VectorXd prior_mode;  // fallback initial guess per parameter

    int full_dim() const { return static_cast<int>(names.size()); }

    int unknown_dim() const {
        int c = 0;
        for (bool u : unknown) c += u ? 1 : 0;
        return c;
    }

    std::vector<int> unknown_indices() const {
        std::vector<int> idx;
        for (int i = 0; i < full_dim(); ++i)
            if (unknown[static_cast<std::size_t>(i)]) idx.push_back(i);
        return idx;
    }

    int index_of(const std::string& name) const {
        for (int i = 0; i < full_dim(); ++i)
            if (names[static_cast<std::size_t>(i)] == name) return i;
        throw std::invalid_argument("unknown parameter name: " + name);
    }

    VectorXd full_from_unknown(const VectorXd& dec, const VectorXd& known_values) const {
        VectorXd full = known_values;
        int j = 0;
        for (int i = 0; i < full_dim(); ++i)
            if (unknown[static_cast<std::size_t>(i)]) full(i) = dec(j++);
        return full;
    }

    VectorXd unknown_from_full(const VectorXd& full) const {
        VectorXd dec(unknown_dim());
        int j = 0;
        for (int i = 0; i < full_dim(); ++i)
            if (unknown[static_cast<std::size_t>(i)]) dec(j++) = full(i);
        return dec;
    }
};

// A complete benchmark problem: dynamics + prior + measurement model +
// parameter bookkeeping + the experiment's time constants.
struct BenchmarkSpec {
    std::string name;
    DynamicsModel dynamics;
    PriorModel prior;
    MeasurementModel measurement;
    ParameterSet params;
    double t_s = 0.1;
    double t_f = 50.0;
};

}  // namespace sdemap
