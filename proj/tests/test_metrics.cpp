#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "sdemap/metrics.hpp"

using namespace sdemap;
using Catch::Approx;

namespace {

Trajectory dense_truth(double t_f, double h, int n, int q) {
    Trajectory tr;
    const int M = static_cast<int>(std::llround(t_f / h));
    tr.times.resize(M + 1);
    for (int i = 0; i <= M; ++i) tr.times[static_cast<std::size_t>(i)] = t_f * i / M;
    tr.X = MatrixXd::Zero(n, M + 1);
    tr.Z = MatrixXd::Zero(q, M + 1);
    tr.h_sim = h;
    return tr;
}

}  // namespace

TEST_CASE("integrated square error reproduces closed forms") {
    SECTION("exact match scores zero") {
        Trajectory tr = dense_truth(1.0, 0.005, 1, 1);
        for (int i = 0; i < tr.X.cols(); ++i) {
            tr.X(0, i) = std::sin(tr.times[static_cast<std::size_t>(i)]);
            tr.Z(0, i) = std::cos(tr.times[static_cast<std::size_t>(i)]);
        }
        const Partition P = Partition::from_nodes(tr.times);
        const PwlPath x_hat(P, tr.X), z_hat(P, tr.Z);
        REQUIRE(ise(tr, x_hat, z_hat) == 0.0);
    }

    SECTION("constant offset squares") {
        Trajectory tr = dense_truth(2.0, 0.005, 1, 1);
        tr.X.setConstant(0.1);  // estimate stays at zero
        const Partition P = Partition::uniform(2.0, 1);
        const PwlPath x_hat(P, MatrixXd::Zero(1, 2)), z_hat(P, MatrixXd::Zero(1, 2));
        REQUIRE(ise(tr, x_hat, z_hat) == Approx(0.01).margin(1e-12));
    }

    SECTION("linear error ramp integrates to one third") {
        Trajectory tr = dense_truth(1.0, 0.005, 1, 0);
        const Partition P = Partition::uniform(1.0, 1);
        MatrixXd ramp(1, 2);
        ramp << 0.0, 1.0;
        const PwlPath x_hat(P, ramp);
        const PwlPath z_hat(P, MatrixXd::Zero(0, 2));
        REQUIRE(ise(tr, x_hat, z_hat) == Approx(1.0 / 3.0).margin(1e-4));
    }

    SECTION("horizon and shape mismatches are rejected") {
        Trajectory tr = dense_truth(1.0, 0.005, 1, 1);
        const Partition Pshort = Partition::uniform(0.5, 1);
        const Partition P = Partition::uniform(1.0, 1);
        REQUIRE_THROWS_AS(ise(tr, PwlPath(Pshort, MatrixXd::Zero(1, 2)),
                              PwlPath(P, MatrixXd::Zero(1, 2))),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(ise(tr, PwlPath(P, MatrixXd::Zero(2, 2)),
                              PwlPath(P, MatrixXd::Zero(1, 2))),
                          std::invalid_argument);
    }

    SECTION("strictly positive for any real discrepancy") {
        Trajectory tr = dense_truth(1.0, 0.01, 1, 1);
        tr.X.setConstant(1e-6);
        const Partition P = Partition::uniform(1.0, 1);
        REQUIRE(ise(tr, PwlPath(P, MatrixXd::Zero(1, 2)), PwlPath(P, MatrixXd::Zero(1, 2))) > 0.0);
    }
}

TEST_CASE("sample summaries follow the documented quartile convention") {
    SECTION("five values") {
        const StatSummary s = summarize({5.0, 3.0, 1.0, 4.0, 2.0});
        REQUIRE(s.median == 3.0);
        REQUIRE(s.lower_quartile == 2.0);
        REQUIRE(s.upper_quartile == 4.0);
        REQUIRE(s.min == 1.0);
        REQUIRE(s.max == 5.0);
    }
    SECTION("four values split into clean halves") {
        const StatSummary s = summarize({4.0, 1.0, 3.0, 2.0});
        REQUIRE(s.median == 2.5);
        REQUIRE(s.lower_quartile == 1.5);
        REQUIRE(s.upper_quartile == 3.5);
    }
    SECTION("single value everywhere") {
        const StatSummary s = summarize({7.25});
        REQUIRE(s.median == 7.25);
        REQUIRE(s.lower_quartile == 7.25);
        REQUIRE(s.upper_quartile == 7.25);
        REQUIRE(s.min == 7.25);
        REQUIRE(s.max == 7.25);
    }
    SECTION("empty samples are rejected") {
        REQUIRE_THROWS_AS(summarize({}), std::invalid_argument);
    }
}

TEST_CASE("replicate aggregation is order independent and failure aware") {
    auto record = [](double v) {
        EstimatorRecord r;
        r.solved = true;
        r.theta_hat = VectorXd::Constant(2, v);
        r.ise = v;
        r.objective = -v;
        return r;
    };
    std::vector<RunSummary> runs;
    for (int i = 0; i < 5; ++i) {
        RunSummary r;
        r.replicate = i;
        r.seed = 100 + static_cast<std::uint64_t>(i);
        r.map = record(i + 1.0);
        r.mee = record(2.0 * (i + 1.0));
        runs.push_back(r);
    }
    runs[3].mee.solved = false;  // failures are data, not errors

    const std::vector<std::string> names{"b", "d"};
    const AggregateTable t = aggregate(runs, names);
    REQUIRE(t.total_runs == 5);
    REQUIRE(t.solved.at("map") == 5);
    REQUIRE(t.solved.at("mee") == 4);
    REQUIRE(t.stats.at("map.ise").median == 3.0);
    REQUIRE(t.stats.at("map.ise").lower_quartile == 2.0);
    REQUIRE(t.stats.at("map.theta.b").median == 3.0);
    REQUIRE(t.stats.at("mee.ise").median == 5.0);  // {2,4,6,10}
    REQUIRE(t.stats.at("mee.objective").median == -5.0);

    std::vector<RunSummary> shuffled = runs;
    std::mt19937 gen(7);
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const AggregateTable t2 = aggregate(shuffled, names);
    REQUIRE(t2.stats.at("map.ise").median == t.stats.at("map.ise").median);
    REQUIRE(t2.stats.at("mee.ise").upper_quartile == t.stats.at("mee.ise").upper_quartile);
    REQUIRE(t2.solved.at("mee") == 4);

    REQUIRE_THROWS_AS(aggregate({}, names), std::invalid_argument);
}
