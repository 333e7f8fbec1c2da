#pragma once

// Time partitions and piecewise-linear vector paths on them.
//
// Uniform partitions store (t_f, N) and compute node k as t_f*k/N, so node
// times carry no accumulation error and refinement-by-doubling reproduces
// parent nodes bit-exactly. Non-uniform partitions keep an explicit node
// array; only nestedness is ever relied on.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sdemap {

class Partition {
public:
    static Partition uniform(double t_f, int N) {
        if (N < 1) throw std::invalid_argument("partition needs at least one interval");
        if (!(t_f > 0.0)) throw std::invalid_argument("partition horizon must be positive");
        Partition p;
        p.uniform_ = true;
        p.t_f_ = t_f;
        p.N_ = N;
        return p;
    }

    static Partition from_nodes(std::vector<double> nodes) {
        if (nodes.size() < 2) throw std::invalid_argument("partition needs at least two nodes");
        if (nodes.front() != 0.0) throw std::invalid_argument("partition must start at t = 0");
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
            if (!(nodes[k] < nodes[k + 1]))
                throw std::invalid_argument("partition nodes must be strictly increasing");
        Partition p;
        p.uniform_ = false;
        p.t_f_ = nodes.back();
        p.N_ = static_cast<int>(nodes.size()) - 1;
        p.nodes_ = std::move(nodes);
        return p;
    }

    int intervals() const { return N_; }
    int node_count() const { return N_ + 1; }
    double t_f() const { return t_f_; }
    bool is_uniform() const { return uniform_; }

    double node(int k) const {
        return uniform_ ? t_f_ * static_cast<double>(k) / static_cast<double>(N_)
                        : nodes_[static_cast<std::size_t>(k)];
    }

    double delta(int k) const { return node(k + 1) - node(k); }

    double mesh() const {
        if (uniform_) return t_f_ / static_cast<double>(N_);
        double m = 0.0;
        for (int k = 0; k < N_; ++k) m = std::max(m, delta(k));
        return m;
    }

    // Halve every interval; the parent's nodes are a subset of the result.
    Partition refined() const {
        if (uniform_) return uniform(t_f_, 2 * N_);
        std::vector<double> nodes;
        nodes.reserve(static_cast<std::size_t>(2 * N_ + 1));
        for (int k = 0; k < N_; ++k) {
            nodes.push_back(node(k));
            nodes.push_back(0.5 * (node(k) + node(k + 1)));
        }
        nodes.push_back(node(N_));
        return from_nodes(std::move(nodes));
    }

    Partition refined(int times) const {
        Partition p = *this;
        for (int i = 0; i < times; ++i) p = p.refined();
        return p;
    }

    // Index of the interval [t_k, t_{k+1}) containing t, with the final node
    // mapped to the last interval.
    int interval_of(double t) const {
        if (t < 0.0 || t > t_f_) throw std::domain_error("time outside partition horizon");
        if (uniform_) {
            int k = static_cast<int>(std::floor(t / t_f_ * static_cast<double>(N_)));
            k = std::clamp(k, 0, N_ - 1);
            // floor on the scaled value can land one off at node boundaries
            while (k > 0 && t < node(k)) --k;
            while (k < N_ - 1 && t >= node(k + 1)) ++k;
            return k;
        }
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
        int k = static_cast<int>(it - nodes_.begin()) - 1;
        return std::clamp(k, 0, N_ - 1);
    }

    // Nearest node index to time t, or -1 if no node lies within tol.
    int node_index_of(double t, double tol) const {
        int k = interval_of(std::clamp(t, 0.0, t_f_));
        int best = k;
        double best_gap = std::abs(node(k) - t);
        if (std::abs(node(k + 1) - t) < best_gap) {
            best = k + 1;
            best_gap = std::abs(node(k + 1) - t);
        }
        return best_gap <= tol ? best : -1;
    }

    std::vector<double> node_times() const {
        std::vector<double> ts(static_cast<std::size_t>(N_ + 1));
        for (int k = 0; k <= N_; ++k) ts[static_cast<std::size_t>(k)] = node(k);
        return ts;
    }

    friend bool operator==(const Partition& a, const Partition& b) {
        if (a.N_ != b.N_ || a.t_f_ != b.t_f_) return false;
        for (int k = 0; k <= a.N_; ++k)
            if (a.node(k) != b.node(k)) return false;
        return true;
    }

    // default state is the single-interval unit partition; useful as a
    // placeholder in value types that get assigned before use
    Partition() = default;

private:
    bool uniform_ = true;
    double t_f_ = 1.0;
    int N_ = 1;
    std::vector<double> nodes_;
};

inline Partition uniform_partition(double t_f, int N) { return Partition::uniform(t_f, N); }

// Piecewise-linear path: values at partition nodes, affine in between.
// Evaluation at a node returns the stored value exactly.
class PwlPath {
public:
    PwlPath() = default;
    PwlPath(Partition partition, Eigen::MatrixXd values)
        : partition_(std::move(partition)), values_(std::move(values)) {
        if (values_.cols() != partition_.node_count())
            throw std::invalid_argument("path needs one value column per partition node");
    }

    const Partition& partition() const { return partition_; }
    int dim() const { return static_cast<int>(values_.rows()); }
    const Eigen::MatrixXd& values() const { return values_; }
    Eigen::MatrixXd& values() { return values_; }

    Eigen::VectorXd eval(double t) const {
        const int k = partition_.interval_of(t);
        const double tk = partition_.node(k);
        const double tk1 = partition_.node(k + 1);
        if (t == tk) return values_.col(k);
        if (t == tk1) return values_.col(k + 1);
        const double w1 = (tk1 - t) / (tk1 - tk);
        const double w2 = (t - tk) / (tk1 - tk);
        return w1 * values_.col(k) + w2 * values_.col(k + 1);
    }

    // Values at the nodes of a (typically nested) partition.
    PwlPath resampled(const Partition& onto) const {
        Eigen::MatrixXd v(values_.rows(), onto.node_count());
        for (int k = 0; k < onto.node_count(); ++k) v.col(k) = eval(onto.node(k));
        return PwlPath(onto, std::move(v));
    }

private:
    Partition partition_ = Partition::uniform(1.0, 1);
    Eigen::MatrixXd values_ = Eigen::MatrixXd::Zero(1, 2);
};

// Exact sup-norm distance between two piecewise-linear paths on the same
// horizon: the difference is again piecewise linear on the union of nodes,
// so its maximum is attained at a union node.
inline double sup_norm_distance(const PwlPath& a, const PwlPath& b) {
    if (a.partition().t_f() != b.partition().t_f())
        throw std::invalid_argument("paths live on different horizons");
    if (a.dim() != b.dim())
        throw std::invalid_argument("paths have different dimensions");
    double best = 0.0;
    auto visit = [&](double t) {
        const double d = (a.eval(t) - b.eval(t)).cwiseAbs().maxCoeff();
        best = std::max(best, d);
    };
    for (int k = 0; k < a.partition().node_count(); ++k) visit(a.partition().node(k));
    for (int k = 0; k < b.partition().node_count(); ++k) visit(b.partition().node(k));
    return best;
}

}  // namespace sdemap
