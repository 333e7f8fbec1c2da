#pragma once

// Benchmark problems: the forced Duffing oscillator (Gaussian, Student-t or
// outlier-mixture measurements) and the Holmes-Rand oscillator with quantized
// measurements. Both observe the clean position state z at period t_s.
//
// Outside each model's validity box the state-nonlinear drift terms are
// smoothly saturated (cosine taper over a 10% margin), which keeps the
// drifts globally Lipschitz without changing them anywhere trajectories
// actually live; linear terms are left exact, so e.g. the Duffing drift
// divergence is -d everywhere.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdemap/likelihood.hpp"
#include "sdemap/model.hpp"

namespace sdemap {

enum class MeasurementKind { gaussian, student_t, outlier_sim };

struct MixtureOptions {
    double p_o = 0.4;      // outlier probability
    double sigma_o = 1.0;  // outlier component scale
    double sigma_r = 0.2;  // regular component scale
};

inline VectorXd outlier_mixture_sample_stream(const VectorXd& z_at_samples,
                                              const MixtureOptions& mix, GaussianStream& g) {
    VectorXd y(z_at_samples.size());
    for (int k = 0; k < y.size(); ++k) {
        const double sigma = g.uniform() < mix.p_o ? mix.sigma_o : mix.sigma_r;
        y(k) = z_at_samples(k) + sigma * g.next();
    }
    return y;
}

// ---------------------------------------------------------------------------
// Duffing oscillator.
//   dX = (-a Z^3 - b Z - d X + gamma cos t) dt + sigma_D dW
//   dZ = X dt
// Parameters [a, b, d, sigma_y, gamma]; gamma is known by default.

inline BenchmarkSpec make_duffing(MeasurementKind kind, double t_f,
                                  const MixtureOptions& mix = {}) {
    if (!(t_f > 0.0)) throw std::invalid_argument("horizon must be positive");

    BenchmarkSpec spec;
    spec.name = kind == MeasurementKind::gaussian     ? "duffing-gaussian"
                : kind == MeasurementKind::student_t ? "duffing-student-t"
                                                     : "duffing-outlier-gaussian";
    spec.t_s = 0.1;
    spec.t_f = t_f;

    spec.params.names = {"a", "b", "d", "sigma_y", "gamma"};
    spec.params.nominal = (VectorXd(5) << 1.0, -1.0, 0.2, 0.1, 0.3).finished();
    spec.params.unknown = {true, true, true, true, false};
    // fallback guesses: zero-mean drift coefficients, sigma_y at its prior mode
    spec.params.prior_mode = (VectorXd(5) << 0.0, 0.0, 0.0, 1.0, 0.0).finished();

    const double sigma_D = 0.1;
    const double sigma_x = 0.4, sigma_z = 0.4, sigma_th = 10.0;
    const double gamma_r = 1.1, gamma_s = 10.0;  // shape/scale of the sigma_y prior

    DynamicsModel& dyn = spec.dynamics;
    dyn.n = 1;
    dyn.q = 1;
    dyn.m = 5;
    dyn.G = MatrixXd::Constant(1, 1, sigma_D);

    StateBox box;
    box.x_lo = VectorXd::Constant(1, -4.0);
    box.x_hi = VectorXd::Constant(1, 4.0);
    box.z_lo = VectorXd::Constant(1, -2.3);
    box.z_hi = VectorXd::Constant(1, 2.3);
    dyn.validity_box = box;
    dyn.lipschitz_hint = LipschitzHint{17.2, 1.0};

    const SmoothClamp zc = SmoothClamp::over(-2.3, 2.3);

    dyn.drift_noisy = [zc](double t, const VectorXd& x, const VectorXd& z, const VectorXd& th) {
        double s, ds;
        zc.eval(z(0), s, ds);
        VectorXd f(1);
        f(0) = -th(0) * s * s * s - th(1) * z(0) - th(2) * x(0) + th(4) * std::cos(t);
        return f;
    };
    dyn.drift_clean = [](double, const VectorXd& x, const VectorXd&, const VectorXd&) { return x; };
    dyn.drift_divergence = [](double, const VectorXd&, const VectorXd&, const VectorXd& th) {
        return -th(2);
    };
    dyn.jac_f_x = [](double, const VectorXd&, const VectorXd&, const VectorXd& th) {
        return MatrixXd::Constant(1, 1, -th(2));
    };
    dyn.jac_f_z = [zc](double, const VectorXd&, const VectorXd& z, const VectorXd& th) {
        double s, ds;
        zc.eval(z(0), s, ds);
        return MatrixXd::Constant(1, 1, -3.0 * th(0) * s * s * ds - th(1));
    };
    dyn.jac_f_theta = [zc](double t, const VectorXd& x, const VectorXd& z, const VectorXd&) {
        double s, ds;
        zc.eval(z(0), s, ds);
        MatrixXd J(1, 5);
        J << -s * s * s, -z(0), -x(0), 0.0, std::cos(t);
        return J;
    };
    dyn.jac_h_x = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Constant(1, 1, 1.0);
    };
    dyn.jac_h_z = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Zero(1, 1);
    };
    dyn.jac_h_theta = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Zero(1, 5);
    };
    dyn.drift_regressors = [zc](double t, const VectorXd& x, const VectorXd& z, MatrixXd& R,
                                VectorXd& r0) {
        double s, ds;
        zc.eval(z(0), s, ds);
        R.resize(1, 5);
        R << -s * s * s, -z(0), -x(0), 0.0, std::cos(t);
        r0 = VectorXd::Zero(1);
    };

    PriorModel& prior = spec.prior;
    prior.log_density = [=](const VectorXd& x0, const VectorXd& z0, const VectorXd& th) {
        if (!(th(3) > 0.0)) return -std::numeric_limits<double>::infinity();
        double lp = -0.5 * x0(0) * x0(0) / (sigma_x * sigma_x)
                    - 0.5 * z0(0) * z0(0) / (sigma_z * sigma_z);
        lp += -0.5 * (th(0) * th(0) + th(1) * th(1) + th(2) * th(2) + th(4) * th(4))
              / (sigma_th * sigma_th);
        lp += (gamma_r - 1.0) * std::log(th(3)) - th(3) / gamma_s;
        return lp;
    };
    prior.log_density_grad = [=](const VectorXd& x0, const VectorXd& z0, const VectorXd& th,
                                 VectorXd& gx0, VectorXd& gz0, VectorXd& gth) {
        gx0 = -x0 / (sigma_x * sigma_x);
        gz0 = -z0 / (sigma_z * sigma_z);
        gth.resize(5);
        gth << -th(0) / (sigma_th * sigma_th), -th(1) / (sigma_th * sigma_th),
            -th(2) / (sigma_th * sigma_th), (gamma_r - 1.0) / th(3) - 1.0 / gamma_s,
            -th(4) / (sigma_th * sigma_th);
    };
    prior.support_indicator = [](const VectorXd&, const VectorXd&, const VectorXd& th) {
        return th(3) > 0.0;
    };
    {
        const VectorXd nominal = spec.params.nominal;
        prior.sample = [=](GaussianStream& g, VectorXd& x0, VectorXd& z0, VectorXd& th) {
            x0 = VectorXd::Constant(1, sigma_x * g.next());
            z0 = VectorXd::Constant(1, sigma_z * g.next());
            th = nominal;
        };
    }

    MeasurementModel& meas = spec.measurement;
    meas.obs_dim = 1;
    meas.sample_times = measurement_grid(spec.t_s, spec.t_f);
    if (kind == MeasurementKind::gaussian || kind == MeasurementKind::outlier_sim) {
        meas.loglik = [](const MatrixXd&, const MatrixXd& Zs, const VectorXd& th, const MatrixXd& y) {
            return gaussian_loglik(y.row(0).transpose(), Zs.row(0).transpose(), th(3));
        };
        meas.loglik_grad = [](const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd& th,
                              const MatrixXd& y, MatrixXd& gXs, MatrixXd& gZs, VectorXd& gth) {
            VectorXd gz;
            double gs;
            const double val =
                gaussian_loglik_grad(y.row(0).transpose(), Zs.row(0).transpose(), th(3), gz, gs);
            gXs = MatrixXd::Zero(Xs.rows(), Xs.cols());
            gZs = gz.transpose();
            gth = VectorXd::Zero(5);
            gth(3) = gs;
            return val;
        };
    } else {
        meas.loglik = [](const MatrixXd&, const MatrixXd& Zs, const VectorXd& th, const MatrixXd& y) {
            return student_t4_loglik(y.row(0).transpose(), Zs.row(0).transpose(), th(3));
        };
        meas.loglik_grad = [](const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd& th,
                              const MatrixXd& y, MatrixXd& gXs, MatrixXd& gZs, VectorXd& gth) {
            VectorXd gz;
            double gs;
            const double val =
                student_t4_loglik_grad(y.row(0).transpose(), Zs.row(0).transpose(), th(3), gz, gs);
            gXs = MatrixXd::Zero(Xs.rows(), Xs.cols());
            gZs = gz.transpose();
            gth = VectorXd::Zero(5);
            gth(3) = gs;
            return val;
        };
    }
    if (kind == MeasurementKind::gaussian) {
        meas.sample = [](const MatrixXd&, const MatrixXd& Zs, const VectorXd& th, GaussianStream& g) {
            return MatrixXd(gaussian_sample(Zs.row(0).transpose(), th(3), g).transpose());
        };
    } else {
        meas.sample = [mix](const MatrixXd&, const MatrixXd& Zs, const VectorXd&, GaussianStream& g) {
            return MatrixXd(outlier_mixture_sample_stream(Zs.row(0).transpose(), mix, g).transpose());
        };
    }

    return spec;
}

// ---------------------------------------------------------------------------
// Holmes-Rand (Duffing-Van der Pol) oscillator with quantized measurements.
//   dX = (-(a + gamma Z^2) X - b Z - d Z^3 + phi cos t) dt + sigma_D dW
//   dZ = X dt
// Parameters [a, b, gamma, d, sigma_y, phi]; phi is known by default.

inline BenchmarkSpec make_holmes_rand(double t_f, double sigma_y_nominal = 0.05,
                                      double l_b = 0.05) {
    if (!(t_f > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(sigma_y_nominal > 0.0)) throw std::invalid_argument("sigma_y must be positive");

    BenchmarkSpec spec;
    spec.name = "holmes-rand";
    spec.t_s = 0.1;
    spec.t_f = t_f;

    spec.params.names = {"a", "b", "gamma", "d", "sigma_y", "phi"};
    spec.params.nominal = (VectorXd(6) << 0.2, -1.0, 0.2, 1.0, sigma_y_nominal, 0.4).finished();
    spec.params.unknown = {true, true, true, true, true, false};
    spec.params.prior_mode = (VectorXd(6) << 0.0, 0.0, 0.0, 0.0, 3.0 * (l_b / 3.0), 0.0).finished();

    const double sigma_D = 0.1;
    const double sigma_x = 0.1, sigma_z = 0.1, sigma_th = 10.0;
    const double gamma_r = 4.0;
    const double gamma_s = l_b / 3.0;

    DynamicsModel& dyn = spec.dynamics;
    dyn.n = 1;
    dyn.q = 1;
    dyn.m = 6;
    dyn.G = MatrixXd::Constant(1, 1, sigma_D);

    StateBox box;
    box.x_lo = VectorXd::Constant(1, -3.0);
    box.x_hi = VectorXd::Constant(1, 3.0);
    box.z_lo = VectorXd::Constant(1, -1.8);
    box.z_hi = VectorXd::Constant(1, 1.8);
    dyn.validity_box = box;
    dyn.lipschitz_hint = LipschitzHint{14.0, 1.0};

    const SmoothClamp xc = SmoothClamp::over(-3.0, 3.0);
    const SmoothClamp zc = SmoothClamp::over(-1.8, 1.8);

    dyn.drift_noisy = [xc, zc](double t, const VectorXd& x, const VectorXd& z, const VectorXd& th) {
        double xs, dxs, zs, dzs;
        xc.eval(x(0), xs, dxs);
        zc.eval(z(0), zs, dzs);
        VectorXd f(1);
        f(0) = -(th(0) + th(2) * zs * zs) * xs - th(1) * z(0) - th(3) * zs * zs * zs
               + th(5) * std::cos(t);
        return f;
    };
    dyn.drift_clean = [](double, const VectorXd& x, const VectorXd&, const VectorXd&) { return x; };
    dyn.drift_divergence = [xc, zc](double, const VectorXd& x, const VectorXd& z, const VectorXd& th) {
        double xs, dxs, zs, dzs;
        xc.eval(x(0), xs, dxs);
        zc.eval(z(0), zs, dzs);
        return -(th(0) + th(2) * zs * zs) * dxs;
    };
    dyn.jac_f_x = [xc, zc](double, const VectorXd& x, const VectorXd& z, const VectorXd& th) {
        double xs, dxs, zs, dzs;
        xc.eval(x(0), xs, dxs);
        zc.eval(z(0), zs, dzs);
        return MatrixXd::Constant(1, 1, -(th(0) + th(2) * zs * zs) * dxs);
    };
    dyn.jac_f_z = [xc, zc](double, const VectorXd& x, const VectorXd& z, const VectorXd& th) {
        double xs, dxs, zs, dzs;
        xc.eval(x(0), xs, dxs);
        zc.eval(z(0), zs, dzs);
        return MatrixXd::Constant(
            1, 1, -2.0 * th(2) * zs * dzs * xs - th(1) - 3.0 * th(3) * zs * zs * dzs);
    };
    dyn.jac_f_theta = [xc, zc](double t, const VectorXd& x, const VectorXd& z, const VectorXd&) {
        double xs, dxs, zs, dzs;
        xc.eval(x(0), xs, dxs);
        zc.eval(z(0), zs, dzs);
        MatrixXd J(1, 6);
        J << -xs, -z(0), -zs * zs * xs, -zs * zs * zs, 0.0, std::cos(t);
        return J;
    };
    dyn.jac_h_x = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Constant(1, 1, 1.0);
    };
    dyn.jac_h_z = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Zero(1, 1);
    };
    dyn.jac_h_theta = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Zero(1, 6);
    };
    dyn.drift_regressors = [xc, zc](double t, const VectorXd& x, const VectorXd& z, MatrixXd& R,
                                    VectorXd& r0) {
        double xs, dxs, zs, dzs;
        xc.eval(x(0), xs, dxs);
        zc.eval(z(0), zs, dzs);
        R.resize(1, 6);
        R << -xs, -z(0), -zs * zs * xs, -zs * zs * zs, 0.0, std::cos(t);
        r0 = VectorXd::Zero(1);
    };

    PriorModel& prior = spec.prior;
    prior.log_density = [=](const VectorXd& x0, const VectorXd& z0, const VectorXd& th) {
        if (!(th(4) > 0.0)) return -std::numeric_limits<double>::infinity();
        double lp = -0.5 * x0(0) * x0(0) / (sigma_x * sigma_x)
                    - 0.5 * z0(0) * z0(0) / (sigma_z * sigma_z);
        lp += -0.5 * (th(0) * th(0) + th(1) * th(1) + th(2) * th(2) + th(3) * th(3)
                      + th(5) * th(5))
              / (sigma_th * sigma_th);
        lp += (gamma_r - 1.0) * std::log(th(4)) - th(4) / gamma_s;
        return lp;
    };
    prior.log_density_grad = [=](const VectorXd& x0, const VectorXd& z0, const VectorXd& th,
                                 VectorXd& gx0, VectorXd& gz0, VectorXd& gth) {
        gx0 = -x0 / (sigma_x * sigma_x);
        gz0 = -z0 / (sigma_z * sigma_z);
        gth.resize(6);
        const double s2 = sigma_th * sigma_th;
        gth << -th(0) / s2, -th(1) / s2, -th(2) / s2, -th(3) / s2,
            (gamma_r - 1.0) / th(4) - 1.0 / gamma_s, -th(5) / s2;
    };
    prior.support_indicator = [](const VectorXd&, const VectorXd&, const VectorXd& th) {
        return th(4) > 0.0;
    };
    {
        const VectorXd nominal = spec.params.nominal;
        prior.sample = [=](GaussianStream& g, VectorXd& x0, VectorXd& z0, VectorXd& th) {
            x0 = VectorXd::Constant(1, sigma_x * g.next());
            z0 = VectorXd::Constant(1, sigma_z * g.next());
            th = nominal;
        };
    }

    MeasurementModel& meas = spec.measurement;
    meas.obs_dim = 1;
    meas.sample_times = measurement_grid(spec.t_s, spec.t_f);
    meas.loglik = [l_b](const MatrixXd&, const MatrixXd& Zs, const VectorXd& th, const MatrixXd& y) {
        return quantized_loglik(y.row(0).transpose(), Zs.row(0).transpose(), th(4), l_b);
    };
    meas.loglik_grad = [l_b](const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd& th,
                             const MatrixXd& y, MatrixXd& gXs, MatrixXd& gZs, VectorXd& gth) {
        VectorXd gz;
        double gs;
        const double val = quantized_loglik_grad(y.row(0).transpose(), Zs.row(0).transpose(),
                                                 th(4), l_b, gz, gs);
        gXs = MatrixXd::Zero(Xs.rows(), Xs.cols());
        gZs = gz.transpose();
        gth = VectorXd::Zero(6);
        gth(4) = gs;
        return val;
    };
    meas.sample = [l_b](const MatrixXd&, const MatrixXd& Zs, const VectorXd& th, GaussianStream& g) {
        return MatrixXd(quantized_sample(Zs.row(0).transpose(), th(4), l_b, g).transpose());
    };

    return spec;
}

// ---------------------------------------------------------------------------
// Damped linear oscillator with Gaussian measurements.
//   dX = (-omega2 Z - c X) dt + sigma_D dW
//   dZ = X dt
// All parameters known by default, so the posterior is exactly Gaussian in
// the state path; the smoother oracle solves the same problem in closed form,
// which makes this the end-to-end cross-check model.

inline BenchmarkSpec make_linear_gaussian(double t_f, double sigma_y = 0.1) {
    if (!(t_f > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(sigma_y > 0.0)) throw std::invalid_argument("sigma_y must be positive");

    BenchmarkSpec spec;
    spec.name = "linear-gaussian";
    spec.t_s = 0.1;
    spec.t_f = t_f;

    spec.params.names = {"omega2", "c", "sigma_y"};
    spec.params.nominal = (VectorXd(3) << 1.0, 0.4, sigma_y).finished();
    spec.params.unknown = {false, false, false};
    spec.params.prior_mode = spec.params.nominal;

    const double sigma_D = 0.1;
    const double sigma_x = 0.4, sigma_z = 0.4;

    DynamicsModel& dyn = spec.dynamics;
    dyn.n = 1;
    dyn.q = 1;
    dyn.m = 3;
    dyn.G = MatrixXd::Constant(1, 1, sigma_D);
    dyn.lipschitz_hint = LipschitzHint{1.2, 1.0};

    dyn.drift_noisy = [](double, const VectorXd& x, const VectorXd& z, const VectorXd& th) {
        VectorXd f(1);
        f(0) = -th(0) * z(0) - th(1) * x(0);
        return f;
    };
    dyn.drift_clean = [](double, const VectorXd& x, const VectorXd&, const VectorXd&) { return x; };
    dyn.drift_divergence = [](double, const VectorXd&, const VectorXd&, const VectorXd& th) {
        return -th(1);
    };
    dyn.jac_f_x = [](double, const VectorXd&, const VectorXd&, const VectorXd& th) {
        return MatrixXd::Constant(1, 1, -th(1));
    };
    dyn.jac_f_z = [](double, const VectorXd&, const VectorXd&, const VectorXd& th) {
        return MatrixXd::Constant(1, 1, -th(0));
    };
    dyn.jac_f_theta = [](double, const VectorXd& x, const VectorXd& z, const VectorXd&) {
        MatrixXd J(1, 3);
        J << -z(0), -x(0), 0.0;
        return J;
    };
    dyn.jac_h_x = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Constant(1, 1, 1.0);
    };
    dyn.jac_h_z = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Zero(1, 1);
    };
    dyn.jac_h_theta = [](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return MatrixXd::Zero(1, 3);
    };
    dyn.drift_regressors = [](double, const VectorXd& x, const VectorXd& z, MatrixXd& R,
                              VectorXd& r0) {
        R.resize(1, 3);
        R << -z(0), -x(0), 0.0;
        r0 = VectorXd::Zero(1);
    };

    PriorModel& prior = spec.prior;
    prior.log_density = [=](const VectorXd& x0, const VectorXd& z0, const VectorXd& th) {
        if (!(th(2) > 0.0)) return -std::numeric_limits<double>::infinity();
        return -0.5 * x0(0) * x0(0) / (sigma_x * sigma_x)
               - 0.5 * z0(0) * z0(0) / (sigma_z * sigma_z);
    };
    prior.log_density_grad = [=](const VectorXd& x0, const VectorXd& z0, const VectorXd&,
                                 VectorXd& gx0, VectorXd& gz0, VectorXd& gth) {
        gx0 = -x0 / (sigma_x * sigma_x);
        gz0 = -z0 / (sigma_z * sigma_z);
        gth = VectorXd::Zero(3);
    };
    prior.support_indicator = [](const VectorXd&, const VectorXd&, const VectorXd& th) {
        return th(2) > 0.0;
    };
    {
        const VectorXd nominal = spec.params.nominal;
        prior.sample = [=](GaussianStream& g, VectorXd& x0, VectorXd& z0, VectorXd& th) {
            x0 = VectorXd::Constant(1, sigma_x * g.next());
            z0 = VectorXd::Constant(1, sigma_z * g.next());
            th = nominal;
        };
    }

    MeasurementModel& meas = spec.measurement;
    meas.obs_dim = 1;
    meas.sample_times = measurement_grid(spec.t_s, spec.t_f);
    meas.loglik = [](const MatrixXd&, const MatrixXd& Zs, const VectorXd& th, const MatrixXd& y) {
        return gaussian_loglik(y.row(0).transpose(), Zs.row(0).transpose(), th(2));
    };
    meas.loglik_grad = [](const MatrixXd& Xs, const MatrixXd& Zs, const VectorXd& th,
                          const MatrixXd& y, MatrixXd& gXs, MatrixXd& gZs, VectorXd& gth) {
        VectorXd gz;
        double gs;
        const double val =
            gaussian_loglik_grad(y.row(0).transpose(), Zs.row(0).transpose(), th(2), gz, gs);
        gXs = MatrixXd::Zero(Xs.rows(), Xs.cols());
        gZs = gz.transpose();
        gth = VectorXd::Zero(3);
        gth(2) = gs;
        return val;
    };
    meas.sample = [](const MatrixXd&, const MatrixXd& Zs, const VectorXd& th, GaussianStream& g) {
        return MatrixXd(gaussian_sample(Zs.row(0).transpose(), th(2), g).transpose());
    };

    return spec;
}

// ---------------------------------------------------------------------------
// Registry.

struct BenchmarkOptions {
    MixtureOptions mixture;
    double sigma_y_nominal = 0.05;  // holmes-rand only
    double l_b = 0.05;              // holmes-rand only
};

inline BenchmarkSpec make_benchmark(const std::string& name, double t_f,
                                    const BenchmarkOptions& opt = {}) {
    if (name == "duffing-gaussian") return make_duffing(MeasurementKind::gaussian, t_f);
    if (name == "duffing-student-t")
        return make_duffing(MeasurementKind::student_t, t_f, opt.mixture);
    if (name == "duffing-outlier-gaussian")
        return make_duffing(MeasurementKind::outlier_sim, t_f, opt.mixture);
    if (name == "holmes-rand") return make_holmes_rand(t_f, opt.sigma_y_nominal, opt.l_b);
    if (name == "linear-gaussian") return make_linear_gaussian(t_f);
    throw std::invalid_argument("unknown benchmark: " + name);
}

inline std::vector<std::string> benchmark_names() {
    return {"duffing-gaussian", "duffing-student-t", "duffing-outlier-gaussian", "holmes-rand",
            "linear-gaussian"};
}

}  // namespace sdemap
