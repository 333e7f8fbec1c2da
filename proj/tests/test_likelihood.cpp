#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdemap/likelihood.hpp"

using namespace sdemap;
using Catch::Approx;

namespace {
VectorXd vec(std::initializer_list<double> xs) {
    VectorXd v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}
}  // namespace

TEST_CASE("normal interval masses match high-precision references") {
    // reference values computed with 60-digit arithmetic
    struct Case { double a, b, expect; };
    const Case cases[] = {
        {-5.0, 5.0, -5.733033080966979554224e-7},
        {8.0, 8.5, -35.02879250857974780981},
        {-8.5, -8.0, -35.02879250857974780981},
        {37.0, 37.5, -689.0305855849340758127},
        {-0.032, 0.017, -3.93500167111269869058},
        {12.0, 30.0, -75.41067300156879593884},
        {2.0, 2.0001, -12.12937890517866204363},
        {43.75, 46.25, -961.7292019143577864474},
    };
    for (const auto& c : cases)
        REQUIRE(log_normal_mass(c.a, c.b) == Approx(c.expect).epsilon(1e-12));
    REQUIRE_THROWS_AS(log_normal_mass(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("upper-tail branches agree where both are representable") {
    // continued-fraction Mills ratio vs direct erfc at the same points
    auto cf = [](double x) {
        double tail = 0.0;
        for (int k = 40; k >= 1; --k) tail = static_cast<double>(k) / (x + tail);
        return log_normal_pdf(x) + std::log(1.0 / (x + tail));
    };
    auto direct = [](double x) { return std::log(0.5 * std::erfc(x / std::numbers::sqrt2)); };
    for (double x : {25.0, 30.0, 34.0, 35.9, 36.5, 37.0})
        REQUIRE(cf(x) == Approx(direct(x)).epsilon(1e-12));
    REQUIRE(log_normal_ccdf(0.0) == Approx(std::log(0.5)).epsilon(1e-15));
    // the exported function stays finite far beyond erfc underflow
    REQUIRE(std::isfinite(log_normal_ccdf(500.0)));
}

TEST_CASE("gaussian log-likelihood values and gradient") {
    REQUIRE(gaussian_loglik(vec({1, 2, 3, 4, 5}), vec({1, 2, 3, 4, 5}), 1.0) == 0.0);
    REQUIRE(gaussian_loglik(vec({0.1}), vec({0.0}), 0.1)
            == Approx(-0.5 - std::log(0.1)).epsilon(1e-14));
    REQUIRE_THROWS_AS(gaussian_loglik(vec({0.0}), vec({0.0}), 0.0), std::domain_error);
    REQUIRE_THROWS_AS(gaussian_loglik(vec({0.0}), vec({0.0}), -1.0), std::domain_error);

    const VectorXd y = vec({0.3, -0.2, 0.15});
    const VectorXd z = vec({0.1, 0.1, -0.1});
    const double s = 0.17;
    VectorXd gz;
    double gs;
    const double val = gaussian_loglik_grad(y, z, s, gz, gs);
    REQUIRE(val == Approx(gaussian_loglik(y, z, s)).epsilon(1e-15));
    const double eps = 1e-6;
    for (int k = 0; k < 3; ++k) {
        VectorXd zp = z, zm = z;
        zp(k) += eps;
        zm(k) -= eps;
        const double fd = (gaussian_loglik(y, zp, s) - gaussian_loglik(y, zm, s)) / (2 * eps);
        REQUIRE(gz(k) == Approx(fd).epsilon(1e-6));
    }
    const double fd_s =
        (gaussian_loglik(y, z, s + eps) - gaussian_loglik(y, z, s - eps)) / (2 * eps);
    REQUIRE(gs == Approx(fd_s).epsilon(1e-6));
}

TEST_CASE("gaussian log-likelihood is stationary at the mean squared residual") {
    const VectorXd y = vec({0.5, -0.3, 0.8, 0.1});
    const VectorXd z = VectorXd::Zero(4);
    const double s_hat = std::sqrt((y - z).squaredNorm() / 4.0);
    VectorXd gz;
    double g_lo, g_hi;
    gaussian_loglik_grad(y, z, s_hat * 0.99, gz, g_lo);
    gaussian_loglik_grad(y, z, s_hat * 1.01, gz, g_hi);
    REQUIRE(g_lo > 0.0);
    REQUIRE(g_hi < 0.0);
}

TEST_CASE("student-t log-likelihood values and gradient") {
    REQUIRE(student_t4_loglik(vec({1, 2}), vec({1, 2}), 1.0) == 0.0);
    const double s = 0.3;
    REQUIRE(student_t4_loglik(vec({2 * s}), vec({0.0}), s)
            == Approx(-2.5 * std::log(2.0) - std::log(s)).epsilon(1e-14));
    // heavy tails dominate the gaussian for a large residual
    REQUIRE(student_t4_loglik(vec({10.0}), vec({0.0}), 0.1)
            > gaussian_loglik(vec({10.0}), vec({0.0}), 0.1));
    REQUIRE_THROWS_AS(student_t4_loglik(vec({0.0}), vec({0.0}), 0.0), std::domain_error);

    const VectorXd y = vec({0.4, -1.2, 3.0});
    const VectorXd z = vec({0.1, 0.3, -0.2});
    VectorXd gz;
    double gs;
    const double val = student_t4_loglik_grad(y, z, s, gz, gs);
    REQUIRE(val == Approx(student_t4_loglik(y, z, s)).epsilon(1e-15));
    const double eps = 1e-6;
    for (int k = 0; k < 3; ++k) {
        VectorXd zp = z, zm = z;
        zp(k) += eps;
        zm(k) -= eps;
        const double fd = (student_t4_loglik(y, zp, s) - student_t4_loglik(y, zm, s)) / (2 * eps);
        REQUIRE(gz(k) == Approx(fd).margin(1e-6));
    }
    const double fd_s =
        (student_t4_loglik(y, z, s + eps) - student_t4_loglik(y, z, s - eps)) / (2 * eps);
    REQUIRE(gs == Approx(fd_s).epsilon(1e-6));
}

TEST_CASE("quantized log-likelihood: centered bin, lattice check, monotonicity") {
    REQUIRE(quantized_loglik(vec({2.0}), vec({2.0}), 0.1, 1.0)
            == Approx(-5.733033080966979554224e-7).epsilon(1e-9));
    REQUIRE_THROWS_AS(quantized_loglik(vec({0.026}), vec({0.0}), 0.1, 0.05),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(quantized_loglik(vec({0.05}), vec({0.0}), -0.1, 0.05), std::domain_error);
    // at a centered residual the bin mass decreases as the noise grows
    const double m1 = quantized_loglik(vec({0.0}), vec({0.0}), 0.1, 0.05);
    const double m2 = quantized_loglik(vec({0.0}), vec({0.0}), 1.0, 0.05);
    const double m3 = quantized_loglik(vec({0.0}), vec({0.0}), 10.0, 0.05);
    REQUIRE(m1 > m2);
    REQUIRE(m2 > m3);
}

TEST_CASE("quantized bin masses telescope to one") {
    const double l_b = 0.05;
    for (auto [z, s] : {std::pair{0.0, 0.05}, {0.013, 0.02}, {-0.4, 0.5}, {1.0, 0.004}}) {
        const int span = static_cast<int>(std::ceil((40.0 * s + std::abs(z)) / l_b)) + 2;
        double total = 0.0;
        for (int k = -span; k <= span; ++k)
            total += std::exp(quantized_loglik(vec({k * l_b}), vec({z}), s, l_b));
        REQUIRE(total == Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("quantized gradient matches the high-precision reference and differences") {
    // z - y = 0.013, l_b = 0.05, sigma = 0.02
    VectorXd gz;
    double gs;
    const double val = quantized_loglik_grad(vec({0.0}), vec({0.013}), 0.02, 0.05, gz, gs);
    REQUIRE(val == Approx(-0.3609263649585328345645).epsilon(1e-12));
    REQUIRE(gz(0) == Approx(-19.19635197380463813346).epsilon(1e-10));
    const double eps = 1e-7;
    const double fd_s = (quantized_loglik(vec({0.0}), vec({0.013}), 0.02 + eps, 0.05)
                         - quantized_loglik(vec({0.0}), vec({0.013}), 0.02 - eps, 0.05))
                        / (2 * eps);
    REQUIRE(gs == Approx(fd_s).epsilon(1e-6));

    // far-tail gradient stays finite and matches differences of the stable form
    const double a = 43.75, b = 46.25;
    double da, db;
    log_normal_mass_grad(a, b, da, db);
    const double h = 1e-5;
    const double fd_a = (log_normal_mass(a + h, b) - log_normal_mass(a - h, b)) / (2 * h);
    REQUIRE(da == Approx(fd_a).epsilon(1e-5));
    REQUIRE(std::isfinite(db));
}

TEST_CASE("log-likelihood kernels are permutation invariant") {
    SplitMix64 rng(5);
    VectorXd y(12), z(12);
    for (int k = 0; k < 12; ++k) {
        z(k) = 2.0 * rng.uniform() - 1.0;
        y(k) = std::round((z(k) + 0.1 * rng.uniform()) / 0.05) * 0.05;
    }
    std::vector<int> perm{7, 2, 11, 0, 5, 9, 1, 3, 10, 4, 8, 6};
    VectorXd yp(12), zp(12);
    for (int k = 0; k < 12; ++k) {
        yp(k) = y(perm[static_cast<std::size_t>(k)]);
        zp(k) = z(perm[static_cast<std::size_t>(k)]);
    }
    REQUIRE(gaussian_loglik(yp, zp, 0.2) == Approx(gaussian_loglik(y, z, 0.2)).epsilon(1e-13));
    REQUIRE(student_t4_loglik(yp, zp, 0.2)
            == Approx(student_t4_loglik(y, z, 0.2)).epsilon(1e-13));
    REQUIRE(quantized_loglik(yp, zp, 0.2, 0.05)
            == Approx(quantized_loglik(y, z, 0.2, 0.05)).epsilon(1e-13));
}

TEST_CASE("outlier mixture sampler has the component variances at the extremes") {
    const int n = 10000;
    const VectorXd z = VectorXd::Zero(n);
    const auto var_of = [&](const VectorXd& y) {
        const double mean = y.mean();
        return (y.array() - mean).square().sum() / (n - 1);
    };
    const VectorXd pure_regular = outlier_mixture_sample(z, 0.2, 1.0, 0.0, 11);
    const VectorXd pure_outlier = outlier_mixture_sample(z, 0.2, 1.0, 1.0, 12);
    // variance of the sample variance ~ 2 sigma^4 / n
    REQUIRE(var_of(pure_regular) == Approx(0.04).margin(3.0 * std::sqrt(2.0 * 0.04 * 0.04 / n)));
    REQUIRE(var_of(pure_outlier) == Approx(1.0).margin(3.0 * std::sqrt(2.0 / n)));
    // determinism
    const VectorXd again = outlier_mixture_sample(z, 0.2, 1.0, 0.0, 11);
    REQUIRE((again - pure_regular).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE_THROWS_AS(outlier_mixture_sample(z, 0.2, 1.0, 1.5, 1), std::domain_error);
}

TEST_CASE("quantized sampler emits lattice multiples") {
    GaussianStream g(3);
    VectorXd z(50);
    for (int k = 0; k < 50; ++k) z(k) = std::sin(0.3 * k);
    const VectorXd y = quantized_sample(z, 0.05, 0.05, g);
    for (int k = 0; k < 50; ++k) {
        const double q = y(k) / 0.05;
        REQUIRE(std::abs(q - std::round(q)) < 1e-9);
    }
}
