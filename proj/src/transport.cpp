#include "wlbound/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wlbound/error.hpp"
#include "wlbound/kernels.hpp"
#include "wlbound/rng.hpp"

namespace wlbound {

DiscreteDistribution::DiscreteDistribution(Matrix points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.rows() == 0) throw DataError("distribution has no points");
    if (weights_.size() != points_.rows()) throw DataError("distribution has " + std::to_string(points_.rows()) +
                                                           " points but " + std::to_string(weights_.size()) + " weights");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) throw DataError("distribution weights must be positive and finite");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DataError("distribution weights sum to " + std::to_string(total));
    for (double& w : weights_) w /= total;
    for (double x : points_.data()) {
        if (!std::isfinite(x)) throw DataError("distribution has a non-finite coordinate");
    }
}

DiscreteDistribution DiscreteDistribution::uniform(Matrix points) {
    const std::size_t n = points.rows();
    if (n == 0) throw DataError("distribution has no points");
    return DiscreteDistribution(std::move(points), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteDistribution DiscreteDistribution::dirac(std::span<const double> point) {
    Matrix m(0, point.size());
    m.append_row(point);
    return DiscreteDistribution(std::move(m), {1.0});
}

namespace {

// Network simplex for the uncapacitated bipartite transportation problem.
// Nodes: sources [0, n), sinks [n, n + m), artificial root n + m. Real arc
// k = i * m + j goes from source i to sink j; every node also owns one
// artificial arc to or from the root. Only tree arcs carry flow, so flow is
// stored per node (the flow on its parent arc). Potentials follow
// reduced_cost(arc) = cost + pi[source] - pi[target].
template <typename CostFn>
class NetworkSimplex {
public:
    NetworkSimplex(std::size_t n, std::size_t m, CostFn cost, std::span<const double> supply,
                   std::span<const double> demand, double max_cost)
        : n_(n), m_(m), nodes_(n + m + 1), root_(n + m), cost_(std::move(cost)), arc_count_(n * m) {
        art_cost_ = (max_cost + 1.0) * static_cast<double>(nodes_);
        epsilon_ = 1e-13 * art_cost_;
        parent_.assign(nodes_, none);
        pred_.assign(nodes_, none);
        up_.assign(nodes_, 0);
        flow_.assign(nodes_, 0.0);
        pi_.assign(nodes_, 0.0);
        stamp_.assign(nodes_, 0);
        artificial_up_.assign(root_, 0);
        for (std::size_t v = 0; v < root_; ++v) {
            const double s = v < n_ ? supply[v] : -demand[v - n_];
            parent_[v] = root_;
            pred_[v] = artificial_arc(v);
            if (s >= 0.0) {
                up_[v] = 1;
                artificial_up_[v] = 1;
                flow_[v] = s;
                pi_[v] = 0.0;
            } else {
                up_[v] = 0;
                flow_[v] = -s;
                pi_[v] = art_cost_;
            }
        }
        block_ = std::max<std::size_t>(std::size_t(std::sqrt(static_cast<double>(arc_count_))), 10);
    }

    void run() {
        const std::size_t pivot_limit = 1000 * nodes_ * nodes_ + 100000;
        std::size_t pivots = 0;
        while (find_entering()) {
            pivot();
            if (++pivots > pivot_limit) throw NumericalError("network simplex exceeded its pivot limit");
        }
        for (std::size_t v = 0; v < root_; ++v) {
            if (pred_[v] >= arc_count_ && flow_[v] > 1e-9) {
                throw NumericalError("transport problem is infeasible (unbalanced marginals)");
            }
        }
    }

    TransportPlan plan() const {
        TransportPlan out;
        double total = 0.0;
        for (std::size_t v = 0; v < root_; ++v) {
            const std::size_t e = pred_[v];
            if (e >= arc_count_ || flow_[v] <= 0.0) continue;
            const std::size_t i = e / m_;
            const std::size_t j = e % m_;
            out.entries.push_back({i, j, flow_[v]});
            total += flow_[v] * cost_(i, j);
        }
        std::sort(out.entries.begin(), out.entries.end(), [](const TransportEntry& a, const TransportEntry& b) {
            return a.source != b.source ? a.source < b.source : a.target < b.target;
        });
        out.cost = total;
        out.source_potential.resize(n_);
        out.target_potential.resize(m_);
        // c - u_i - v_j = c + pi_i - pi_j  =>  u_i = -pi_i, v_j = pi_j; shift so min u is 0.
        double shift = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_; ++i) shift = std::min(shift, -pi_[i]);
        for (std::size_t i = 0; i < n_; ++i) out.source_potential[i] = -pi_[i] - shift;
        for (std::size_t j = 0; j < m_; ++j) out.target_potential[j] = pi_[n_ + j] + shift;
        return out;
    }

private:
    static constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

    std::size_t artificial_arc(std::size_t v) const { return arc_count_ + v; }

    std::size_t arc_source(std::size_t e) const {
        if (e < arc_count_) return e / m_;
        const std::size_t v = e - arc_count_;
        return up_of_artificial(v) ? v : root_;
    }
    std::size_t arc_target(std::size_t e) const {
        if (e < arc_count_) return n_ + e % m_;
        const std::size_t v = e - arc_count_;
        return up_of_artificial(v) ? root_ : v;
    }
    double arc_cost(std::size_t e) const {
        if (e < arc_count_) return cost_(e / m_, e % m_);
        return up_of_artificial(e - arc_count_) ? 0.0 : art_cost_;
    }
    // Artificial arcs keep the orientation chosen at initialization.
    bool up_of_artificial(std::size_t v) const { return artificial_up_[v]; }

    double reduced_cost(std::size_t e) const {
        const std::size_t i = e / m_;
        const std::size_t j = e % m_;
        return cost_(i, j) + pi_[i] - pi_[n_ + j];
    }

    bool find_entering() {
        double best = -epsilon_;
        std::size_t candidate = none;
        std::size_t scanned_in_block = 0;
        for (std::size_t count = 0; count < arc_count_; ++count) {
            const std::size_t e = next_arc_;
            next_arc_ = next_arc_ + 1 == arc_count_ ? 0 : next_arc_ + 1;
            const double rc = reduced_cost(e);
            if (rc < best) {
                best = rc;
                candidate = e;
            }
            if (++scanned_in_block == block_) {
                if (candidate != none) break;
                scanned_in_block = 0;
            }
        }
        entering_ = candidate;
        return candidate != none;
    }

    std::size_t find_join(std::size_t a, std::size_t b) {
        ++epoch_;
        for (std::size_t u = a; u != none; u = parent_[u]) stamp_[u] = epoch_;
        std::size_t u = b;
        while (stamp_[u] != epoch_) u = parent_[u];
        return u;
    }

    void pivot() {
        const std::size_t first = entering_ / m_;
        const std::size_t second = n_ + entering_ % m_;
        const std::size_t join = find_join(first, second);

        // Strongly feasible leaving rule: strict on the first side, non-strict on
        // the second, so ties resolve to the last blocking arc of the cycle.
        const double inf = std::numeric_limits<double>::infinity();
        double delta = inf;
        std::size_t u_out = none;
        int side = 0;
        for (std::size_t u = first; u != join; u = parent_[u]) {
            const double d = up_[u] ? flow_[u] : inf;
            if (d < delta) {
                delta = d;
                u_out = u;
                side = 1;
            }
        }
        for (std::size_t u = second; u != join; u = parent_[u]) {
            const double d = up_[u] ? inf : flow_[u];
            if (d <= delta) {
                delta = d;
                u_out = u;
                side = 2;
            }
        }
        if (u_out == none || delta == inf) throw NumericalError("network simplex found an unbounded cycle");

        if (delta > 0.0) {
            for (std::size_t u = first; u != join; u = parent_[u]) flow_[u] += up_[u] ? -delta : delta;
            for (std::size_t u = second; u != join; u = parent_[u]) flow_[u] += up_[u] ? delta : -delta;
        }

        const std::size_t u_in = side == 1 ? first : second;
        const std::size_t v_in = side == 1 ? second : first;

        // Re-hang the subtree cut at u_out from u_in, reversing the path between them.
        std::size_t v = u_in;
        std::size_t new_parent = v_in;
        std::size_t new_pred = entering_;
        double new_flow = delta;
        while (true) {
            const std::size_t old_parent = parent_[v];
            const std::size_t old_pred = pred_[v];
            const double old_flow = flow_[v];
            parent_[v] = new_parent;
            pred_[v] = new_pred;
            flow_[v] = new_flow;
            up_[v] = arc_source(new_pred) == v ? 1 : 0;
            if (v == u_out) break;
            new_parent = v;
            new_pred = old_pred;
            new_flow = old_flow;
            v = old_parent;
        }
        update_potentials();
    }

    void update_potentials() {
        ++epoch_;
        stamp_[root_] = epoch_;
        pi_[root_] = 0.0;
        for (std::size_t v = 0; v < nodes_; ++v) {
            if (stamp_[v] == epoch_) continue;
            path_.clear();
            std::size_t u = v;
            while (stamp_[u] != epoch_) {
                path_.push_back(u);
                u = parent_[u];
            }
            for (auto it = path_.rbegin(); it != path_.rend(); ++it) {
                const std::size_t w = *it;
                const double c = arc_cost(pred_[w]);
                pi_[w] = up_[w] ? pi_[parent_[w]] - c : pi_[parent_[w]] + c;
                stamp_[w] = epoch_;
            }
        }
    }

    std::size_t n_;
    std::size_t m_;
    std::size_t nodes_;
    std::size_t root_;
    CostFn cost_;
    std::size_t arc_count_;
    double art_cost_ = 0.0;
    double epsilon_ = 0.0;
    std::size_t block_ = 0;
    std::size_t next_arc_ = 0;
    std::size_t entering_ = none;
    std::uint64_t epoch_ = 0;

    std::vector<std::size_t> parent_;
    std::vector<std::size_t> pred_;
    std::vector<char> up_;
    std::vector<char> artificial_up_;
    std::vector<double> flow_;
    std::vector<double> pi_;
    std::vector<std::uint64_t> stamp_;
    std::vector<std::size_t> path_;
};

template <typename CostFn>
TransportPlan run_simplex(std::size_t n, std::size_t m, CostFn cost, std::span<const double> supply,
                          std::span<const double> demand, double max_cost) {
    NetworkSimplex<CostFn> solver(n, m, std::move(cost), supply, demand, max_cost);
    solver.run();
    return solver.plan();
}

}  // namespace

TransportPlan solve_transport(const Matrix& cost, std::span<const double> supply, std::span<const double> demand) {
    if (cost.rows() != supply.size() || cost.cols() != demand.size()) throw DataError("cost matrix shape mismatch");
    if (supply.empty() || demand.empty()) throw DataError("empty transport problem");
    double max_cost = 0.0;
    for (double c : cost.data()) {
        if (!std::isfinite(c)) throw DataError("non-finite transport cost");
        max_cost = std::max(max_cost, std::abs(c));
    }
    auto fn = [&cost](std::size_t i, std::size_t j) { return cost(i, j); };
    return run_simplex(cost.rows(), cost.cols(), fn, supply, demand, max_cost);
}

std::vector<std::size_t> solve_assignment(const Matrix& cost, std::vector<double>* row_potential,
                                          std::vector<double>* col_potential) {
    const std::size_t n = cost.rows();
    if (cost.cols() != n) throw DataError("assignment needs a square cost matrix");
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based shortest augmenting path formulation; column 0 is a sentinel.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    if (row_potential) row_potential->assign(u.begin() + 1, u.end());
    if (col_potential) col_potential->assign(v.begin() + 1, v.end());
    return assignment;
}

TransportPlan w1_exact(const DiscreteDistribution& mu, const DiscreteDistribution& nu, const TransportOptions& options) {
    if (mu.dimension() != nu.dimension()) {
        throw DataError("distributions live in different dimensions (" + std::to_string(mu.dimension()) + " vs " +
                        std::to_string(nu.dimension()) + ")");
    }
    if (mu.size() > options.max_points || nu.size() > options.max_points) {
        throw DataError("transport problem exceeds the size guard of " + std::to_string(options.max_points) + " points");
    }
    const std::size_t n = mu.size();
    const std::size_t m = nu.size();
    if (n * m <= options.max_cached_costs) {
        Matrix cost;
        kernels::pairwise_distances(mu.points(), nu.points(), cost);
        double max_cost = 0.0;
        for (double c : cost.data()) max_cost = std::max(max_cost, c);
        auto fn = [&cost](std::size_t i, std::size_t j) { return cost(i, j); };
        return run_simplex(n, m, fn, mu.weights(), nu.weights(), max_cost);
    }
    const Matrix& x = mu.points();
    const Matrix& y = nu.points();
    double max_cost = 0.0;
    // Diameter bound of the union: twice the largest distance from x_0.
    for (std::size_t i = 0; i < n; ++i) max_cost = std::max(max_cost, kernels::distance(x.row(0), x.row(i)));
    for (std::size_t j = 0; j < m; ++j) max_cost = std::max(max_cost, kernels::distance(x.row(0), y.row(j)));
    auto fn = [&x, &y](std::size_t i, std::size_t j) { return kernels::distance(x.row(i), y.row(j)); };
    return run_simplex(n, m, fn, mu.weights(), nu.weights(), 2.0 * max_cost);
}

double w1_pointclouds(const Matrix& x, const Matrix& y) {
    if (x.rows() == 0 || y.rows() == 0) throw DataError("point clouds must be nonempty");
    if (x.cols() != y.cols()) throw DataError("point clouds live in different dimensions");
    if (x.rows() == y.rows()) {
        Matrix cost;
        kernels::pairwise_distances(x, y, cost);
        const auto assignment = solve_assignment(cost);
        double total = 0.0;
        for (std::size_t i = 0; i < assignment.size(); ++i) total += cost(i, assignment[i]);
        return total / static_cast<double>(x.rows());
    }
    return w1_exact(DiscreteDistribution::uniform(x), DiscreteDistribution::uniform(y)).cost;
}

SplitEstimate expected_w1_split(const Matrix& class_embeddings, std::size_t pairs, std::size_t subset_size,
                                std::uint64_t seed) {
    if (pairs == 0) throw UsageError("number of sample pairs must be positive");
    const std::size_t m = class_embeddings.rows();
    const std::size_t cap = m / (2 * pairs);
    if (cap == 0) {
        throw DataError("class too small: " + std::to_string(m) + " samples cannot form " + std::to_string(pairs) +
                        " disjoint pairs of subsets");
    }
    SplitEstimate out;
    out.subset_size = subset_size == 0 ? cap : std::min(subset_size, cap);
    out.shrunk = subset_size > cap;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const std::size_t s = out.subset_size;
    for (std::size_t k = 0; k < 2 * pairs; ++k) {
        out.subsets.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(k * s),
                                 order.begin() + static_cast<std::ptrdiff_t>((k + 1) * s));
    }
    auto gather = [&](const std::vector<std::size_t>& rows) {
        Matrix sub(0, class_embeddings.cols());
        for (std::size_t r : rows) sub.append_row(class_embeddings.row(r));
        return sub;
    };
    double total = 0.0;
    for (std::size_t j = 0; j < pairs; ++j) {
        const double w = w1_pointclouds(gather(out.subsets[2 * j]), gather(out.subsets[2 * j + 1]));
        out.per_pair.push_back(w);
        total += w;
    }
    out.mean = total / static_cast<double>(pairs);
    return out;
}

}  // namespace wlbound
