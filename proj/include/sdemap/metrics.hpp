#pragma once

// Estimate quality metrics: time-normalized integrated square error against a
// simulated truth, and order-independent batch summaries for Monte Carlo
// replicates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdemap/grid.hpp"
#include "sdemap/sim.hpp"

namespace sdemap {

// (1/t_f) integral of |X - xhat|^2 + |Z - zhat|^2, composite trapezoid on the
// truth's dense grid with the estimates evaluated by linear interpolation.
inline double ise(const Trajectory& truth, const PwlPath& x_hat, const PwlPath& z_hat) {
    const double t_f = truth.t_f();
    const double tol = 1e-9 * std::max(1.0, t_f);
    if (std::abs(x_hat.partition().t_f() - t_f) > tol
        || std::abs(z_hat.partition().t_f() - t_f) > tol)
        throw std::invalid_argument("estimate horizon does not match the truth horizon");
    if (x_hat.dim() != truth.X.rows() || z_hat.dim() != truth.Z.rows())
        throw std::invalid_argument("estimate dimensions do not match the truth");

    const int M = static_cast<int>(truth.times.size());
    double acc = 0.0, prev = 0.0;
    for (int i = 0; i < M; ++i) {
        const double t = truth.times[static_cast<std::size_t>(i)];
        double e = (truth.X.col(i) - x_hat.eval(t)).squaredNorm();
        if (truth.Z.rows() > 0) e += (truth.Z.col(i) - z_hat.eval(t)).squaredNorm();
        if (i > 0) acc += 0.5 * (t - truth.times[static_cast<std::size_t>(i - 1)]) * (prev + e);
        prev = e;
    }
    return acc / t_f;
}

// Per-replicate record of one estimator's outcome. A failed replicate is
// still a record: solved stays false and the numeric fields are unset.
struct EstimatorRecord {
    bool solved = false;
    VectorXd theta_hat;
    double ise = std::numeric_limits<double>::quiet_NaN();
    double objective = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    std::string termination;
    double wall_seconds = 0.0;
};

struct RunSummary {
    int replicate = 0;
    std::uint64_t seed = 0;
    EstimatorRecord map;
    EstimatorRecord mee;
};

struct StatSummary {
    double median = 0.0;
    double lower_quartile = 0.0;
    double upper_quartile = 0.0;
    double min = 0.0;
    double max = 0.0;
};

namespace detail {

inline double median_sorted(const double* v, int n) {
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Median-of-halves quartiles: each half includes the middle element when the
// count is odd, so {1,2,3,4,5} summarizes to quartiles 2 and 4.
inline StatSummary summarize(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("cannot summarize an empty sample");
    std::sort(values.begin(), values.end());
    const int n = static_cast<int>(values.size());
    const int half = (n + 1) / 2;
    StatSummary s;
    s.median = detail::median_sorted(values.data(), n);
    s.lower_quartile = detail::median_sorted(values.data(), half);
    s.upper_quartile = detail::median_sorted(values.data() + (n - half), half);
    s.min = values.front();
    s.max = values.back();
    return s;
}

struct AggregateTable {
    int total_runs = 0;
    std::map<std::string, int> solved;            // per estimator
    std::map<std::string, StatSummary> stats;     // "<estimator>.<quantity>"
};

// Summary statistics per estimator and quantity over a replicate batch. Only
// solved records contribute; the order of the input never matters.
inline AggregateTable aggregate(const std::vector<RunSummary>& runs,
                                const std::vector<std::string>& theta_names) {
    if (runs.empty()) throw std::invalid_argument("aggregate needs at least one run");
    AggregateTable table;
    table.total_runs = static_cast<int>(runs.size());
    const std::pair<const char*, const EstimatorRecord RunSummary::*> kinds[] = {
        {"map", &RunSummary::map}, {"mee", &RunSummary::mee}};
    for (const auto& [name, member] : kinds) {
        std::vector<double> ises, objectives;
        std::vector<std::vector<double>> thetas(theta_names.size());
        int solved = 0;
        for (const RunSummary& r : runs) {
            const EstimatorRecord& rec = r.*member;
            if (!rec.solved) continue;
            ++solved;
            ises.push_back(rec.ise);
            objectives.push_back(rec.objective);
            if (rec.theta_hat.size() != static_cast<Eigen::Index>(theta_names.size()))
                throw std::invalid_argument("record parameter count does not match the name list");
            for (std::size_t i = 0; i < theta_names.size(); ++i)
                thetas[i].push_back(rec.theta_hat(static_cast<Eigen::Index>(i)));
        }
        table.solved[name] = solved;
        if (solved == 0) continue;
        const std::string prefix(name);
        table.stats[prefix + ".ise"] = summarize(ises);
        table.stats[prefix + ".objective"] = summarize(objectives);
        for (std::size_t i = 0; i < theta_names.size(); ++i)
            table.stats[prefix + ".theta." + theta_names[i]] = summarize(thetas[i]);
    }
    return table;
}

}  // namespace sdemap
