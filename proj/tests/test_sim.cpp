#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sdemap/benchmarks.hpp"
#include "sdemap/sim.hpp"

using namespace sdemap;
using Catch::Approx;

namespace {

// fixed-step RK4 on the joint deterministic system, used as the oracle for
// zero-diffusion runs
struct JointRk4 {
    const DynamicsModel& mdl;
    VectorXd th;

    void step(double t, double h, VectorXd& x, VectorXd& z) const {
        const int n = mdl.n, q = mdl.q;
        VectorXd Y(n + q);
        Y.head(n) = x;
        Y.tail(q) = z;
        auto F = [&](double tt, const VectorXd& v) {
            VectorXd out(n + q);
            out.head(n) = mdl.drift_noisy(tt, v.head(n), v.tail(q), th);
            if (q > 0) out.tail(q) = mdl.drift_clean(tt, v.head(n), v.tail(q), th);
            return out;
        };
        const VectorXd k1 = F(t, Y);
        const VectorXd k2 = F(t + 0.5 * h, Y + 0.5 * h * k1);
        const VectorXd k3 = F(t + 0.5 * h, Y + 0.5 * h * k2);
        const VectorXd k4 = F(t + h, Y + h * k3);
        Y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        x = Y.head(n);
        z = Y.tail(q);
    }
};

DynamicsModel make_ou(double a, double sigma) {
    DynamicsModel m;
    m.n = 1;
    m.q = 0;
    m.m = 0;
    m.G = MatrixXd::Constant(1, 1, sigma);
    m.drift_noisy = [a](double, const VectorXd& x, const VectorXd&, const VectorXd&) {
        return VectorXd::Constant(1, -a * x(0)).eval();
    };
    m.drift_divergence = [a](double, const VectorXd&, const VectorXd&, const VectorXd&) {
        return -a;
    };
    return m;
}

}  // namespace

TEST_CASE("zero diffusion runs match a fine deterministic oracle") {
    BenchmarkSpec spec = make_duffing(MeasurementKind::gaussian, 20.0);
    DynamicsModel mdl = spec.dynamics;
    mdl.G.setZero();
    VectorXd x0 = VectorXd::Constant(1, 0.5);
    VectorXd z0 = VectorXd::Constant(1, 0.5);
    const VectorXd th = spec.params.nominal;

    auto oracle_at = [&](double t_f, double h_ref) {
        const int M = static_cast<int>(std::llround(t_f / h_ref));
        JointRk4 rk{mdl, th};
        MatrixXd out(2, M + 1);
        VectorXd x = x0, z = z0;
        for (int k = 0; k <= M; ++k) {
            out(0, k) = x(0);
            out(1, k) = z(0);
            if (k < M) rk.step(k * h_ref, h_ref, x, z);
        }
        return out;
    };

    SECTION("order-1.5 scheme, long horizon") {
        const double t_f = 20.0, h = 0.005;
        SimConfig cfg;
        cfg.h_sim = h;
        cfg.scheme = SimScheme::order15_additive;
        Trajectory tr = simulate(mdl, x0, z0, th, t_f, cfg);
        const MatrixXd ref = oracle_at(t_f, 1e-3);
        const int stride = 5;  // h / h_ref
        double sup = 0.0;
        for (int k = 0; k < tr.X.cols(); ++k) {
            sup = std::max(sup, std::abs(tr.X(0, k) - ref(0, k * stride)));
            sup = std::max(sup, std::abs(tr.Z(0, k) - ref(1, k * stride)));
        }
        REQUIRE(sup < 1e-3);
    }

    SECTION("Euler scheme, short horizon") {
        const double t_f = 0.5, h = 0.005;
        SimConfig cfg;
        cfg.h_sim = h;
        cfg.scheme = SimScheme::euler_maruyama;
        Trajectory tr = simulate(mdl, x0, z0, th, t_f, cfg);
        const MatrixXd ref = oracle_at(t_f, 1e-3);
        double sup = 0.0;
        for (int k = 0; k < tr.X.cols(); ++k) {
            sup = std::max(sup, std::abs(tr.X(0, k) - ref(0, k * 5)));
            sup = std::max(sup, std::abs(tr.Z(0, k) - ref(1, k * 5)));
        }
        REQUIRE(sup < 1e-3);
    }

    SECTION("Euler clean increments are exactly the left-endpoint sums") {
        SimConfig cfg;
        cfg.h_sim = 0.01;
        cfg.scheme = SimScheme::euler_maruyama;
        Trajectory tr = simulate(mdl, x0, z0, th, 2.0, cfg);
        double acc = 0.0;
        for (int k = 0; k + 1 < tr.X.cols(); ++k) acc += cfg.h_sim * tr.X(0, k);
        REQUIRE(tr.Z(0, tr.Z.cols() - 1) - tr.Z(0, 0) == Approx(acc).margin(1e-12));
    }
}

TEST_CASE("Ornstein-Uhlenbeck moments match the analytic values") {
    // dX = -X dt + dW, x0 = 1, t = 1
    DynamicsModel ou = make_ou(1.0, 1.0);
    const double mean_exact = std::exp(-1.0);
    const double var_exact = 0.5 * (1.0 - std::exp(-2.0));
    const int n_paths = 10000;
    const VectorXd x0 = VectorXd::Constant(1, 1.0);
    const VectorXd z0(0), th(0);

    for (SimScheme scheme : {SimScheme::euler_maruyama, SimScheme::order15_additive}) {
        SimConfig cfg;
        cfg.h_sim = 0.005;
        cfg.scheme = scheme;
        double sum = 0.0, sumsq = 0.0;
        for (int p = 0; p < n_paths; ++p) {
            cfg.seed = 777777 + static_cast<std::uint64_t>(p);
            Trajectory tr = simulate(ou, x0, z0, th, 1.0, cfg);
            const double xT = tr.X(0, tr.X.cols() - 1);
            sum += xT;
            sumsq += xT * xT;
        }
        const double mean = sum / n_paths;
        const double var = sumsq / n_paths - mean * mean;
        const double se_mean = std::sqrt(var / n_paths);
        const double se_var = var * std::sqrt(2.0 / (n_paths - 1));
        INFO(scheme_name(scheme) << ": mean " << mean << " var " << var);
        REQUIRE(std::abs(mean - mean_exact) < 3.0 * se_mean);
        REQUIRE(std::abs(var - var_exact) < 3.0 * se_var);
    }
}

TEST_CASE("simulation is deterministic in the seed") {
    BenchmarkSpec spec = make_duffing(MeasurementKind::gaussian, 5.0);
    const VectorXd x0 = VectorXd::Constant(1, 0.2);
    const VectorXd z0 = VectorXd::Constant(1, -0.1);
    SimConfig cfg;
    cfg.seed = 99;
    Trajectory a = simulate(spec.dynamics, x0, z0, spec.params.nominal, 5.0, cfg);
    Trajectory b = simulate(spec.dynamics, x0, z0, spec.params.nominal, 5.0, cfg);
    REQUIRE(a.X == b.X);
    REQUIRE(a.Z == b.Z);
    cfg.seed = 100;
    Trajectory c = simulate(spec.dynamics, x0, z0, spec.params.nominal, 5.0, cfg);
    REQUIRE((a.X - c.X).cwiseAbs().maxCoeff() > 1e-3);
    REQUIRE(a.scheme == "order15_additive");
    REQUIRE(a.h_sim == 0.005);
    REQUIRE(a.seed == 99);
}

TEST_CASE("validity box exits are flagged, not fatal") {
    BenchmarkSpec spec = make_duffing(MeasurementKind::gaussian, 5.0);
    SimConfig cfg;
    cfg.seed = 5;
    const VectorXd far = VectorXd::Constant(1, 10.0);
    const VectorXd z0 = VectorXd::Constant(1, 0.0);
    Trajectory out = simulate(spec.dynamics, far, z0, spec.params.nominal, 1.0, cfg);
    REQUIRE(out.left_validity_box);
    REQUIRE(out.X.cols() == 201);

    const VectorXd x0 = VectorXd::Constant(1, 0.3);
    Trajectory in = simulate(spec.dynamics, x0, z0, spec.params.nominal, 5.0, cfg);
    REQUIRE_FALSE(in.left_validity_box);
}

TEST_CASE("simulate rejects bad step configuration") {
    DynamicsModel ou = make_ou(1.0, 1.0);
    const VectorXd x0 = VectorXd::Constant(1, 1.0), z0(0), th(0);
    SimConfig cfg;
    cfg.h_sim = 0.3;  // does not divide t_f = 1
    REQUIRE_THROWS_AS(simulate(ou, x0, z0, th, 1.0, cfg), std::invalid_argument);
    cfg.h_sim = -0.01;
    REQUIRE_THROWS_AS(simulate(ou, x0, z0, th, 1.0, cfg), std::invalid_argument);
    cfg.h_sim = 0.01;
    REQUIRE_THROWS_AS(simulate(ou, x0, z0, th, 0.0, cfg), std::invalid_argument);
}

TEST_CASE("Euler weak errors shrink monotonically with the step") {
    // Coupled estimates: every step size consumes the same fine Brownian
    // increments, and antithetic pairs cancel the Monte Carlo noise in the
    // mean exactly (the terminal state is linear in the increments), so the
    // mean-error ordering is deterministic. Variance estimates stay coupled
    // across step sizes; the finest one is anchored to the exact value
    // within Monte Carlo resolution.
    DynamicsModel ou = make_ou(1.0, 1.0);
    const double mean_exact = std::exp(-1.0);
    const double var_exact = 0.5 * (1.0 - std::exp(-2.0));
    const double h_fine = 0.005;
    const int n_fine = 200;
    const std::vector<int> groups = {4, 2, 1};  // h = 0.02, 0.01, 0.005
    const int n_pairs = 20000;

    GaussianStream g(31415);
    std::vector<double> xi(n_fine);
    double sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0};
    VectorXd x(1), z(0), th(0), dW(1);
    for (int p = 0; p < n_pairs; ++p) {
        for (int j = 0; j < n_fine; ++j) xi[j] = g.next();
        for (double sgn : {1.0, -1.0}) {
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                const int grp = groups[gi];
                const double h = h_fine * grp;
                x(0) = 1.0;
                for (int k = 0; k < n_fine; k += grp) {
                    double dw = 0.0;
                    for (int j = 0; j < grp; ++j) dw += xi[k + j];
                    dW(0) = sgn * dw * std::sqrt(h_fine);
                    euler_maruyama_step(ou, k * h_fine, h, dW, x, z, th);
                }
                sum[gi] += x(0);
                sumsq[gi] += x(0) * x(0);
            }
        }
    }
    const double n_samples = 2.0 * n_pairs;
    double mean_err[3], var_signed[3];
    for (int i = 0; i < 3; ++i) {
        const double m = sum[i] / n_samples;
        const double v = sumsq[i] / n_samples - m * m;
        mean_err[i] = std::abs(m - mean_exact);
        var_signed[i] = v - var_exact;
        INFO("h=" << 0.005 * groups[static_cast<std::size_t>(i)] << " mean_err " << mean_err[i]
                  << " var_err " << var_signed[i]);
    }
    CHECK(mean_err[0] > mean_err[1]);
    CHECK(mean_err[1] > mean_err[2]);
    CHECK(var_signed[0] > var_signed[1]);
    CHECK(var_signed[1] > var_signed[2]);
    // finest variance consistent with exact at 3 sigma of the estimator
    REQUIRE(std::abs(var_signed[2]) < 3.0 * var_exact * std::sqrt(2.0 / n_samples));
}

TEST_CASE("order-1.5 scheme beats Euler strong error on a common path") {
    DynamicsModel ou = make_ou(1.0, 1.0);
    const double h_fine = 0.002;
    const int n_fine = 500;   // t = 1
    const int grp = 10;       // coarse h = 0.02
    const double h = h_fine * grp;
    const int n_paths = 800;

    GaussianStream g(2718);
    VectorXd th(0), z(0);
    double se_euler = 0.0, se_o15 = 0.0;
    std::vector<BrownianPair> fine(n_fine);
    VectorXd dW(1), dZ(1);
    for (int p = 0; p < n_paths; ++p) {
        for (int j = 0; j < n_fine; ++j) fine[j] = order15_increment(g, h_fine);

        VectorXd x_ref = VectorXd::Constant(1, 1.0);
        for (int j = 0; j < n_fine; ++j) {
            dW(0) = fine[j].dW;
            dZ(0) = fine[j].dZ;
            order15_step(ou, j * h_fine, h_fine, dW, dZ, x_ref, z, th);
        }

        // aggregate fine pairs into coarse (dW, int (W_s - W_t0) ds) exactly
        VectorXd x_e = VectorXd::Constant(1, 1.0);
        VectorXd x_o = VectorXd::Constant(1, 1.0);
        for (int k = 0; k < n_fine; k += grp) {
            double dw = 0.0, dz = 0.0, w_rel = 0.0;
            for (int j = 0; j < grp; ++j) {
                dz += fine[k + j].dZ + w_rel * h_fine;
                w_rel += fine[k + j].dW;
            }
            dw = w_rel;
            dW(0) = dw;
            euler_maruyama_step(ou, k * h_fine, h, dW, x_e, z, th);
            dZ(0) = dz;
            order15_step(ou, k * h_fine, h, dW, dZ, x_o, z, th);
        }
        se_euler += std::pow(x_e(0) - x_ref(0), 2);
        se_o15 += std::pow(x_o(0) - x_ref(0), 2);
    }
    const double rmse_euler = std::sqrt(se_euler / n_paths);
    const double rmse_o15 = std::sqrt(se_o15 / n_paths);
    INFO("euler rmse " << rmse_euler << " order15 rmse " << rmse_o15);
    REQUIRE(rmse_o15 < 0.7 * rmse_euler);
}

TEST_CASE("generated datasets have the right noise scale and lattice") {
    SECTION("Gaussian benchmark residuals") {
        BenchmarkSpec spec = make_duffing(MeasurementKind::gaussian, 50.0);
        double ss = 0.0;
        int count = 0;
        for (std::uint64_t seed : {11u, 12u, 13u}) {
            auto [traj, ds] = generate_dataset(spec, seed);
            REQUIRE(ds.y.rows() == 1);
            REQUIRE(ds.y.cols() == 501);
            REQUIRE(traj.theta == spec.params.nominal);
            for (int k = 0; k < ds.y.cols(); ++k) {
                const int idx = static_cast<int>(std::llround(ds.times[static_cast<std::size_t>(k)]
                                                              / traj.h_sim));
                const double r = ds.y(0, k) - traj.Z(0, idx);
                ss += r * r;
                ++count;
            }
        }
        const double sd = std::sqrt(ss / count);
        const double se = 0.1 / std::sqrt(2.0 * count);
        REQUIRE(std::abs(sd - 0.1) < 3.0 * se);
    }

    SECTION("quantized benchmark emits lattice values") {
        BenchmarkSpec spec = make_holmes_rand(50.0);
        auto [traj, ds] = generate_dataset(spec, 21);
        REQUIRE(ds.y.cols() == 501);
        for (int k = 0; k < ds.y.cols(); ++k) {
            const double m = ds.y(0, k) / 0.05;
            REQUIRE(std::abs(m - std::round(m)) < 1e-9);
        }
        (void)traj;
    }

    SECTION("same seed reproduces the dataset bit for bit") {
        BenchmarkSpec spec = make_duffing(MeasurementKind::outlier_sim, 10.0);
        auto [t1, d1] = generate_dataset(spec, 77);
        auto [t2, d2] = generate_dataset(spec, 77);
        REQUIRE(d1.y == d2.y);
        REQUIRE(t1.X == t2.X);
        auto [t3, d3] = generate_dataset(spec, 78);
        REQUIRE((d1.y - d3.y).cwiseAbs().maxCoeff() > 1e-6);
        (void)t3;
    }

    SECTION("substep must divide the sampling period") {
        BenchmarkSpec spec = make_duffing(MeasurementKind::gaussian, 50.0);
        SimConfig cfg;
        cfg.h_sim = 0.015625;  // divides 50 but not 0.1
        REQUIRE_THROWS_AS(generate_dataset(spec, 1, cfg), std::invalid_argument);
    }
}
