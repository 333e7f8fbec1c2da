#pragma once

// Measurement log-likelihood kernels shared by the benchmark models:
// Gaussian, Student-t (4 dof), and quantized (interval-censored Gaussian),
// plus the measurement samplers that generate datasets from true states.
//
// All kernels drop data-independent additive constants; maximizer locations
// are unaffected. Scalar observation of a scalar clean state throughout
// (the benchmarks observe z through y_k).

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sdemap/rng.hpp"

namespace sdemap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Stable normal-tail machinery.

inline double log_normal_pdf(double x) {
    return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

// ln of the upper-tail probability P(N(0,1) > x), valid across the full
// double range. Uses erfc directly until it nears underflow, then a
// continued-fraction Mills ratio.
inline double log_normal_ccdf(double x) {
    if (x < 36.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
    // Mills ratio R(x) via the Laplace continued fraction, evaluated backward
    double tail = 0.0;
    for (int k = 40; k >= 1; --k) tail = static_cast<double>(k) / (x + tail);
    const double mills = 1.0 / (x + tail);
    return log_normal_pdf(x) + std::log(mills);
}

// ln(Phi(b) - Phi(a)) for a < b, stable in both tails and across zero.
inline double log_normal_mass(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("interval must have positive width");
    if (a >= 0.0) {
        // both endpoints in the upper tail
        const double la = log_normal_ccdf(a);
        const double lb = log_normal_ccdf(b);
        return la + std::log1p(-std::exp(lb - la));
    }
    if (b <= 0.0) return log_normal_mass(-b, -a);
    // straddling zero: both complements are moderate
    const double ca = 0.5 * std::erfc(-a / std::numbers::sqrt2);  // Phi(a)
    const double cb = 0.5 * std::erfc(b / std::numbers::sqrt2);   // 1 - Phi(b)
    return std::log1p(-(ca + cb));
}

// d/da and d/db of log_normal_mass.
inline void log_normal_mass_grad(double a, double b, double& d_da, double& d_db) {
    const double lm = log_normal_mass(a, b);
    d_da = -std::exp(log_normal_pdf(a) - lm);
    d_db = std::exp(log_normal_pdf(b) - lm);
}

// ---------------------------------------------------------------------------
// Gaussian likelihood: y_k ~ N(z_k, sigma_y^2).

inline double gaussian_loglik(const VectorXd& y, const VectorXd& z_at_samples, double sigma_y) {
    if (!(sigma_y > 0.0)) throw std::domain_error("sigma_y must be positive");
    if (y.size() != z_at_samples.size())
        throw std::invalid_argument("measurement/sample count mismatch");
    const double ss = (y - z_at_samples).squaredNorm();
    return -0.5 * ss / (sigma_y * sigma_y) - static_cast<double>(y.size()) * std::log(sigma_y);
}

// Gradient w.r.t. the sampled z values and sigma_y; returns the value.
inline double gaussian_loglik_grad(const VectorXd& y, const VectorXd& z_at_samples, double sigma_y,
                                   VectorXd& g_z, double& g_sigma) {
    if (!(sigma_y > 0.0)) throw std::domain_error("sigma_y must be positive");
    const VectorXd r = y - z_at_samples;
    const double s2 = sigma_y * sigma_y;
    g_z = r / s2;
    g_sigma = r.squaredNorm() / (s2 * sigma_y) - static_cast<double>(y.size()) / sigma_y;
    return -0.5 * r.squaredNorm() / s2 - static_cast<double>(y.size()) * std::log(sigma_y);
}

// ---------------------------------------------------------------------------
// Student-t likelihood with 4 degrees of freedom and scale sigma_y; one
// -ln sigma_y per measurement so the per-measurement density is proper.

inline double student_t4_loglik(const VectorXd& y, const VectorXd& z_at_samples, double sigma_y) {
    if (!(sigma_y > 0.0)) throw std::domain_error("sigma_y must be positive");
    if (y.size() != z_at_samples.size())
        throw std::invalid_argument("measurement/sample count mismatch");
    double acc = 0.0;
    const double s2 = sigma_y * sigma_y;
    for (int k = 0; k < y.size(); ++k) {
        const double r = y(k) - z_at_samples(k);
        acc += -2.5 * std::log1p(r * r / (4.0 * s2));
    }
    return acc - static_cast<double>(y.size()) * std::log(sigma_y);
}

inline double student_t4_loglik_grad(const VectorXd& y, const VectorXd& z_at_samples,
                                     double sigma_y, VectorXd& g_z, double& g_sigma) {
    if (!(sigma_y > 0.0)) throw std::domain_error("sigma_y must be positive");
    const double s2 = sigma_y * sigma_y;
    g_z.resize(z_at_samples.size());
    g_sigma = -static_cast<double>(y.size()) / sigma_y;
    double acc = 0.0;
    for (int k = 0; k < y.size(); ++k) {
        const double r = y(k) - z_at_samples(k);
        const double denom = 4.0 * s2 + r * r;
        acc += -2.5 * std::log1p(r * r / (4.0 * s2));
        g_z(k) = 5.0 * r / denom;
        g_sigma += 5.0 * r * r / (sigma_y * denom);
    }
    return acc - static_cast<double>(y.size()) * std::log(sigma_y);
}

// ---------------------------------------------------------------------------
// Quantized likelihood: y_k is z_k + Gaussian noise rounded to the nearest
// multiple of the bit length l_b, so each measurement contributes the log
// probability mass of its bin.

inline void require_on_lattice(const VectorXd& y, double l_b) {
    for (int k = 0; k < y.size(); ++k) {
        const double q = y(k) / l_b;
        if (std::abs(q - std::round(q)) > 1e-9)
            throw std::invalid_argument("quantized measurement is not a lattice multiple");
    }
}

inline double quantized_loglik(const VectorXd& y, const VectorXd& z_at_samples, double sigma_y,
                               double l_b) {
    if (!(sigma_y > 0.0)) throw std::domain_error("sigma_y must be positive");
    if (!(l_b > 0.0)) throw std::domain_error("bit length must be positive");
    if (y.size() != z_at_samples.size())
        throw std::invalid_argument("measurement/sample count mismatch");
    require_on_lattice(y, l_b);
    double acc = 0.0;
    for (int k = 0; k < y.size(); ++k) {
        const double a = (y(k) - 0.5 * l_b - z_at_samples(k)) / sigma_y;
        const double b = (y(k) + 0.5 * l_b - z_at_samples(k)) / sigma_y;
        acc += log_normal_mass(a, b);
    }
    return acc;
}

inline double quantized_loglik_grad(const VectorXd& y, const VectorXd& z_at_samples,
                                    double sigma_y, double l_b, VectorXd& g_z, double& g_sigma) {
    if (!(sigma_y > 0.0)) throw std::domain_error("sigma_y must be positive");
    if (!(l_b > 0.0)) throw std::domain_error("bit length must be positive");
    require_on_lattice(y, l_b);
    g_z.resize(z_at_samples.size());
    g_sigma = 0.0;
    double acc = 0.0;
    for (int k = 0; k < y.size(); ++k) {
        const double a = (y(k) - 0.5 * l_b - z_at_samples(k)) / sigma_y;
        const double b = (y(k) + 0.5 * l_b - z_at_samples(k)) / sigma_y;
        acc += log_normal_mass(a, b);
        double da, db;
        log_normal_mass_grad(a, b, da, db);
        // a and b both shift by -1/sigma per unit z and by -arg/sigma per unit sigma
        g_z(k) = -(da + db) / sigma_y;
        g_sigma += -(da * a + db * b) / sigma_y;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Measurement samplers.

inline VectorXd gaussian_sample(const VectorXd& z_at_samples, double sigma_y, GaussianStream& g) {
    VectorXd y(z_at_samples.size());
    for (int k = 0; k < y.size(); ++k) y(k) = z_at_samples(k) + sigma_y * g.next();
    return y;
}

// Gaussian mixture: wide component with probability p_o, narrow otherwise.
inline VectorXd outlier_mixture_sample(const VectorXd& z_at_samples, double sigma_r,
                                       double sigma_o, double p_o, std::uint64_t seed) {
    if (!(sigma_r > 0.0) || !(sigma_o > 0.0)) throw std::domain_error("mixture scales must be positive");
    if (p_o < 0.0 || p_o > 1.0) throw std::domain_error("mixture weight must lie in [0, 1]");
    GaussianStream g(seed);
    VectorXd y(z_at_samples.size());
    for (int k = 0; k < y.size(); ++k) {
        const double sigma = g.uniform() < p_o ? sigma_o : sigma_r;
        y(k) = z_at_samples(k) + sigma * g.next();
    }
    return y;
}

inline VectorXd quantized_sample(const VectorXd& z_at_samples, double sigma_y, double l_b,
                                 GaussianStream& g) {
    VectorXd y(z_at_samples.size());
    for (int k = 0; k < y.size(); ++k)
        y(k) = std::round((z_at_samples(k) + sigma_y * g.next()) / l_b) * l_b;
    return y;
}

}  // namespace sdemap
