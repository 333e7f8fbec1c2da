#pragma once

// The experiment harness behind the command-line tool: simulate datasets,
// run the estimators on them, batch Monte Carlo replicates across worker
// threads, and emit mesh-refinement diagnostics. Outputs are CSV/JSON files;
// the JSON documents embed the tool version, the resolved configuration and
// its hash, so a run is reconstructible from its own metadata.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sdemap/config.hpp"
#include "sdemap/io.hpp"
#include "sdemap/metrics.hpp"

namespace sdemap {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int bad_config = 2;
inline constexpr int io_failure = 3;
inline constexpr int incomplete_batch = 4;
}  // namespace exit_code

// ---------------------------------------------------------------------------
// table builders

inline CsvTable trajectory_table(const Trajectory& traj) {
    const long n = traj.X.rows(), q = traj.Z.rows();
    const long M = static_cast<long>(traj.times.size());
    CsvTable t;
    t.columns.push_back("t");
    for (long i = 0; i < n; ++i) t.columns.push_back("x" + std::to_string(i + 1));
    for (long i = 0; i < q; ++i) t.columns.push_back("z" + std::to_string(i + 1));
    t.values.resize(M, 1 + n + q);
    for (long k = 0; k < M; ++k) {
        t.values(k, 0) = traj.times[static_cast<std::size_t>(k)];
        for (long i = 0; i < n; ++i) t.values(k, 1 + i) = traj.X(i, k);
        for (long i = 0; i < q; ++i) t.values(k, 1 + n + i) = traj.Z(i, k);
    }
    return t;
}

inline CsvTable dataset_table(const Dataset& ds) {
    const long p = ds.y.rows();
    const long M = static_cast<long>(ds.times.size());
    CsvTable t;
    t.columns.push_back("t");
    for (long i = 0; i < p; ++i) t.columns.push_back("y" + std::to_string(i + 1));
    t.values.resize(M, 1 + p);
    for (long k = 0; k < M; ++k) {
        t.values(k, 0) = ds.times[static_cast<std::size_t>(k)];
        for (long i = 0; i < p; ++i) t.values(k, 1 + i) = ds.y(i, k);
    }
    return t;
}

// x and z estimates on a shared partition
inline CsvTable path_table(const PwlPath& x_path, const PwlPath& z_path) {
    const long n = x_path.values().rows(), q = z_path.values().rows();
    const Partition& P = x_path.partition();
    CsvTable t;
    t.columns.push_back("t");
    for (long i = 0; i < n; ++i) t.columns.push_back("x" + std::to_string(i + 1));
    for (long i = 0; i < q; ++i) t.columns.push_back("z" + std::to_string(i + 1));
    t.values.resize(P.node_count(), 1 + n + q);
    for (int k = 0; k < P.node_count(); ++k) {
        t.values(k, 0) = P.node(k);
        for (long i = 0; i < n; ++i) t.values(k, 1 + i) = x_path.values()(i, k);
        for (long i = 0; i < q; ++i) t.values(k, 1 + n + i) = z_path.values()(i, k);
    }
    return t;
}

inline Trajectory trajectory_from_table(const CsvTable& t, int n, int q) {
    Trajectory traj;
    const long M = t.rows();
    if (M < 2) throw IoError("trajectory table needs at least two rows");
    const long tc = t.column_index("t");
    traj.times.resize(static_cast<std::size_t>(M));
    traj.X.resize(n, M);
    traj.Z.resize(q, M);
    for (long k = 0; k < M; ++k) traj.times[static_cast<std::size_t>(k)] = t.values(k, tc);
    for (int i = 0; i < n; ++i)
        traj.X.row(i) = t.column("x" + std::to_string(i + 1)).transpose();
    for (int i = 0; i < q; ++i)
        traj.Z.row(i) = t.column("z" + std::to_string(i + 1)).transpose();
    return traj;
}

inline Dataset dataset_from_table(const CsvTable& t, int obs_dim) {
    Dataset ds;
    const long M = t.rows();
    if (M < 1) throw IoError("dataset table has no rows");
    const long tc = t.column_index("t");
    ds.times.resize(static_cast<std::size_t>(M));
    ds.y.resize(obs_dim, M);
    for (long k = 0; k < M; ++k) ds.times[static_cast<std::size_t>(k)] = t.values(k, tc);
    for (int i = 0; i < obs_dim; ++i)
        ds.y.row(i) = t.column("y" + std::to_string(i + 1)).transpose();
    return ds;
}

// ---------------------------------------------------------------------------
// shared plumbing

inline void ensure_dir(const std::filesystem::path& p) {
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

inline nlohmann::json base_metadata(const ExperimentConfig& cfg, const char* command) {
    nlohmann::json m;
    m["tool"] = "sdemap";
    m["version"] = tool_version;
    m["command"] = command;
    m["config_hash"] = config_hash(cfg);
    m["config"] = config_json(cfg);
    return m;
}

inline std::string json_document(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json named_theta(const ParameterSet& params, const VectorXd& theta_full) {
    nlohmann::json th;
    for (int i = 0; i < params.full_dim(); ++i)
        th[params.names[static_cast<std::size_t>(i)]] = theta_full(i);
    return th;
}

struct LoadedDataset {
    Dataset ds;
    std::optional<Trajectory> truth;
    std::string source;
};

// Accepts either a bare dataset CSV or a directory produced by the simulate
// command (dataset.csv plus optional truth.csv for error metrics).
inline LoadedDataset load_dataset(const std::filesystem::path& path, const BenchmarkSpec& spec) {
    LoadedDataset out;
    std::filesystem::path csv = path;
    if (std::filesystem::is_directory(path)) {
        csv = path / "dataset.csv";
        const std::filesystem::path truth_path = path / "truth.csv";
        if (std::filesystem::exists(truth_path))
            out.truth =
                trajectory_from_table(read_csv(truth_path), spec.dynamics.n, spec.dynamics.q);
    }
    out.ds = dataset_from_table(read_csv(csv), spec.measurement.obs_dim);
    out.source = csv.string();
    return out;
}

// ---------------------------------------------------------------------------
// simulate: one dataset with its generating trajectory and metadata

inline int cmd_simulate(const ExperimentConfig& cfg, const BenchmarkSpec& spec,
                        const std::filesystem::path& out) {
    SimConfig sim = cfg.sim;
    sim.seed = cfg.seed;
    const auto [traj, ds] = generate_dataset(spec, cfg.seed, sim);

    ensure_dir(out);
    write_csv(out / "truth.csv", trajectory_table(traj));
    write_csv(out / "dataset.csv", dataset_table(ds));

    nlohmann::json m = base_metadata(cfg, "simulate");
    m["seed"] = cfg.seed;
    m["scheme"] = traj.scheme;
    m["h_sim"] = traj.h_sim;
    m["model"] = spec.name;
    m["theta_truth"] = named_theta(spec.params, traj.theta);
    m["x0"] = std::vector<double>(traj.X.col(0).data(), traj.X.col(0).data() + traj.X.rows());
    m["z0"] = std::vector<double>(traj.Z.col(0).data(), traj.Z.col(0).data() + traj.Z.rows());
    m["left_validity_box"] = traj.left_validity_box;
    write_text_file(out / "metadata.json", json_document(m));
    return exit_code::ok;
}

// ---------------------------------------------------------------------------
// estimate: every requested estimator on one dataset

inline nlohmann::json estimate_result_json(const EstimateResult& r, const ParameterSet& params,
                                           const std::optional<double>& ise_value) {
    nlohmann::json o;
    o["solved"] = true;
    o["theta_hat"] = named_theta(params, params.full_from_unknown(r.v_hat.theta, params.nominal));
    o["objective"] = {{"value", r.objective.value},
                      {"prior", r.objective.decomposition.prior},
                      {"likelihood", r.objective.decomposition.likelihood},
                      {"energy_sum", r.objective.decomposition.energy_sum},
                      {"correction_sum", r.objective.decomposition.divergence_or_logdet_sum}};
    o["picard"] = {{"max_iterations", r.objective.picard.max_iterations},
                   {"max_residual", r.objective.picard.max_residual}};
    o["iterations"] = r.iterations;
    o["grad_norm"] = r.grad_norm;
    o["termination"] = termination_name(r.termination);
    o["wall_seconds"] = r.wall_seconds;
    if (ise_value) o["ise"] = *ise_value;
    return o;
}

inline int cmd_estimate(const ExperimentConfig& cfg, const BenchmarkSpec& spec,
                        const std::filesystem::path& dataset_path,
                        const std::filesystem::path& out) {
    const LoadedDataset data = load_dataset(dataset_path, spec);

    const auto& times = spec.measurement.sample_times;
    if (data.ds.times.size() != times.size())
        throw ConfigError("dataset does not match the config: " + std::to_string(data.ds.times.size())
                          + " samples in " + data.source + ", config expects "
                          + std::to_string(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(data.ds.times[k] - times[k]) > 1e-9 * std::max(1.0, times[k]))
            throw ConfigError("dataset does not match the config: sample time "
                              + format_g17(data.ds.times[k]) + " at row " + std::to_string(k)
                              + ", config expects " + format_g17(times[k]));

    const Problem pb = make_problem(spec, data.ds.y, Partition::from_nodes(times));
    ensure_dir(out);

    nlohmann::json results;
    for (Estimator est : cfg.estimators) {
        nlohmann::json rec;
        std::optional<EstimateResult> r;
        try {
            r = estimate(pb, est, cfg.grid_refinement, cfg.solver);
        } catch (const std::exception& e) {
            rec["solved"] = false;
            rec["error"] = e.what();
        }
        if (r) {
            const PwlPath x_hat(r->objective.clean_path.partition(), r->v_hat.x_nodes);
            write_csv(out / ("path_" + std::string(estimator_name(est)) + ".csv"),
                      path_table(x_hat, r->objective.clean_path));
            std::optional<double> ise_value;
            if (data.truth) ise_value = ise(*data.truth, x_hat, r->objective.clean_path);
            rec = estimate_result_json(*r, pb.params, ise_value);
        }
        results[estimator_name(est)] = rec;
    }

    nlohmann::json m = base_metadata(cfg, "estimate");
    m["dataset"] = data.source;
    m["results"] = results;
    write_text_file(out / "estimate.json", json_document(m));
    return exit_code::ok;
}

// ---------------------------------------------------------------------------
// montecarlo: R independent replicates, optionally across worker threads

inline nlohmann::json run_summary_json(const RunSummary& rs, const ExperimentConfig& cfg,
                                       const ParameterSet& params) {
    nlohmann::json o;
    o["replicate"] = rs.replicate;
    o["seed"] = rs.seed;
    for (Estimator est : cfg.estimators) {
        const EstimatorRecord& rec = est == Estimator::map ? rs.map : rs.mee;
        nlohmann::json e;
        e["solved"] = rec.solved;
        if (rec.solved) {
            e["theta_hat"] = named_theta(params, rec.theta_hat);
            e["ise"] = rec.ise;
            e["objective"] = rec.objective;
            e["iterations"] = rec.iterations;
            e["grad_norm"] = rec.grad_norm;
        }
        e["termination"] = rec.termination;
        e["wall_seconds"] = rec.wall_seconds;
        o[estimator_name(est)] = e;
    }
    return o;
}

inline nlohmann::json aggregate_json(const AggregateTable& table) {
    nlohmann::json o;
    o["total_runs"] = table.total_runs;
    o["solved"] = table.solved;
    nlohmann::json stats;
    for (const auto& [key, s] : table.stats)
        stats[key] = {{"median", s.median},
                      {"lower_quartile", s.lower_quartile},
                      {"upper_quartile", s.upper_quartile},
                      {"min", s.min},
                      {"max", s.max}};
    o["stats"] = stats;
    return o;
}

// One replicate end to end: simulate at seed, then run every requested
// estimator. Returns false when any requested estimator failed.
inline bool run_replicate(const ExperimentConfig& cfg, const BenchmarkSpec& spec, int index,
                          RunSummary& rs) {
    rs.replicate = index;
    rs.seed = cfg.seed + static_cast<std::uint64_t>(index);
    bool all_ok = true;
    try {
        SimConfig sim = cfg.sim;
        sim.seed = rs.seed;
        const auto [traj, ds] = generate_dataset(spec, rs.seed, sim);
        const Problem pb = make_problem(spec, ds.y, Partition::from_nodes(ds.times));
        for (Estimator est : cfg.estimators) {
            EstimatorRecord& rec = est == Estimator::map ? rs.map : rs.mee;
            try {
                const EstimateResult r = estimate(pb, est, cfg.grid_refinement, cfg.solver);
                const PwlPath x_hat(r.objective.clean_path.partition(), r.v_hat.x_nodes);
                rec.solved = true;
                rec.theta_hat = pb.params.full_from_unknown(r.v_hat.theta, pb.params.nominal);
                rec.ise = ise(traj, x_hat, r.objective.clean_path);
                rec.objective = r.objective.value;
                rec.iterations = r.iterations;
                rec.grad_norm = r.grad_norm;
                rec.termination = termination_name(r.termination);
                rec.wall_seconds = r.wall_seconds;
            } catch (const std::exception& e) {
                rec.solved = false;
                rec.termination = std::string("error: ") + e.what();
                all_ok = false;
            }
        }
    } catch (const std::exception& e) {
        for (Estimator est : cfg.estimators) {
            EstimatorRecord& rec = est == Estimator::map ? rs.map : rs.mee;
            rec.solved = false;
            rec.termination = std::string("error: ") + e.what();
        }
        all_ok = false;
    }
    return all_ok;
}

inline int cmd_montecarlo(const ExperimentConfig& cfg, const BenchmarkSpec& spec,
                          const std::filesystem::path& out, int workers) {
    const int R = cfg.replicates;
    const int W = std::clamp(workers, 1, R);

    std::vector<RunSummary> runs(static_cast<std::size_t>(R));
    std::vector<char> completed(static_cast<std::size_t>(R), 0);
    std::atomic<int> next{0};
    auto work = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= R) return;
            completed[static_cast<std::size_t>(i)] =
                run_replicate(cfg, spec, i, runs[static_cast<std::size_t>(i)]) ? 1 : 0;
        }
    };
    if (W == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(W));
        for (int w = 0; w < W; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    ensure_dir(out);
    std::string jsonl;
    for (const RunSummary& rs : runs) jsonl += run_summary_json(rs, cfg, spec.params).dump() + "\n";
    write_text_file(out / "runs.jsonl", jsonl);

    nlohmann::json agg = aggregate_json(aggregate(runs, spec.params.names));
    agg["version"] = tool_version;
    agg["config_hash"] = config_hash(cfg);
    write_text_file(out / "aggregate.json", json_document(agg));

    nlohmann::json m = base_metadata(cfg, "montecarlo");
    m["seed"] = cfg.seed;
    m["replicates"] = R;
    write_text_file(out / "metadata.json", json_document(m));

    int done = 0;
    for (char c : completed) done += c;
    return 10 * done >= 9 * R ? exit_code::ok : exit_code::incomplete_batch;
}

// ---------------------------------------------------------------------------
// convergence: mesh-refinement study on one fixed dataset, plus the
// fixed-path functional-convergence table

// Discrete objective values along x(t) = sin t (clean state integrates it,
// starting at 0) against dense-quadrature references of their continuous
// limits, over four mesh halvings. Flat prior, no measurements: the table
// isolates the dynamics terms.
inline CsvTable functional_gap_table(const BenchmarkSpec& spec) {
    const double t_f = 2.0 * M_PI;
    const int quad_N = static_cast<int>(std::llround(t_f / 0.001));

    SmoothPath x;
    x.value = [](double t) { return VectorXd::Constant(1, std::sin(t)).eval(); };
    x.derivative = [](double t) { return VectorXd::Constant(1, std::cos(t)).eval(); };
    const VectorXd z0 = VectorXd::Zero(1);
    const VectorXd th = spec.params.nominal;

    const double l_ref = continuous_log_posterior(spec.dynamics, flat_prior(), no_measurements(),
                                                  MatrixXd(1, 0), x, z0, th, t_f, quad_N);
    const double le_ref = continuous_energy_log_posterior(
        spec.dynamics, flat_prior(), no_measurements(), MatrixXd(1, 0), x, z0, th, t_f, quad_N);

    ParameterSet all_known = spec.params;
    for (std::size_t i = 0; i < all_known.unknown.size(); ++i) all_known.unknown[i] = false;

    CsvTable t;
    t.columns = {"delta",       "euler_value",   "energy_ref",    "euler_gap",
                 "trap_value",  "posterior_ref", "trap_gap"};
    const int levels = 4;
    t.values.resize(levels, 7);
    const int N0 = static_cast<int>(std::llround(t_f / spec.t_s));
    for (int level = 0; level < levels; ++level) {
        const int N = N0 << level;
        const Partition P = Partition::uniform(t_f, N);
        MatrixXd x_nodes(1, N + 1);
        for (int k = 0; k <= N; ++k) x_nodes(0, k) = std::sin(P.node(k));
        const Problem pb = make_problem(spec.dynamics, flat_prior(), no_measurements(), all_known,
                                        MatrixXd(1, 0), P);
        DecisionVector v;
        v.x_nodes = x_nodes;
        v.z0 = z0;
        v.theta = VectorXd(0);
        const double lt = euler_log_posterior(pb, v).value;
        const double lh = trapezoidal_log_posterior(pb, v).value;
        t.values(level, 0) = P.mesh();
        t.values(level, 1) = lt;
        t.values(level, 2) = le_ref;
        t.values(level, 3) = std::abs(lt - le_ref);
        t.values(level, 4) = lh;
        t.values(level, 5) = l_ref;
        t.values(level, 6) = std::abs(lh - l_ref);
    }
    return t;
}

inline int cmd_convergence(const ExperimentConfig& cfg, const BenchmarkSpec& spec,
                           const std::filesystem::path& out) {
    SimConfig sim = cfg.sim;
    sim.seed = cfg.seed;
    const auto [traj, ds] = generate_dataset(spec, cfg.seed, sim);
    const Problem pb = make_problem(spec, ds.y, Partition::from_nodes(ds.times));
    ensure_dir(out);

    std::string conv = "estimator,refinement";
    for (const std::string& name : spec.params.names) conv += ",theta_" + name;
    conv += ",sup_dx_prev,objective\n";
    for (Estimator est : cfg.estimators) {
        std::optional<PwlPath> prev;
        for (int refinement = 0; refinement <= 3; ++refinement) {
            const EstimateResult r = estimate(pb, est, refinement, cfg.solver);
            const PwlPath x_hat(r.objective.clean_path.partition(), r.v_hat.x_nodes);
            const double dist = prev ? sup_norm_distance(x_hat, *prev)
                                     : std::numeric_limits<double>::quiet_NaN();
            const VectorXd th = pb.params.full_from_unknown(r.v_hat.theta, pb.params.nominal);
            conv += estimator_name(est);
            conv += ',' + std::to_string(refinement);
            for (int i = 0; i < th.size(); ++i) conv += ',' + format_g17(th(i));
            conv += ',' + format_g17(dist);
            conv += ',' + format_g17(r.objective.value);
            conv += '\n';
            prev = x_hat;
        }
    }
    write_text_file(out / "convergence.csv", conv);
    write_csv(out / "functional_gaps.csv", functional_gap_table(spec));

    nlohmann::json m = base_metadata(cfg, "convergence");
    m["seed"] = cfg.seed;
    write_text_file(out / "metadata.json", json_document(m));
    return exit_code::ok;
}

}  // namespace sdemap
