#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wlbound/matrix.hpp"

namespace wlbound {

// Finite weighted point cloud. Weights are positive and sum to 1.
class DiscreteDistribution {
public:
    // Weights summing to 1 within 1e-9 are rescaled to sum to 1; anything
    // further off, non-positive weights or non-finite coordinates throw DataError.
    DiscreteDistribution(Matrix points, std::vector<double> weights);

    static DiscreteDistribution uniform(Matrix points);
    static DiscreteDistribution dirac(std::span<const double> point);

    const Matrix& points() const noexcept { return points_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dimension() const noexcept { return points_.cols(); }

private:
    Matrix points_;
    std::vector<double> weights_;
};

struct TransportEntry {
    std::size_t source = 0;
    std::size_t target = 0;
    double mass = 0.0;
};

// Optimal coupling with its cost and the dual potentials certifying it:
// cost(i, j) - source_potential[i] - target_potential[j] >= 0 everywhere,
// with equality on every entry carrying mass.
struct TransportPlan {
    std::vector<TransportEntry> entries;
    double cost = 0.0;
    std::vector<double> source_potential;
    std::vector<double> target_potential;
};

struct TransportOptions {
    std::size_t max_points = 10000;
    // Cost matrices larger than this are evaluated on the fly.
    std::size_t max_cached_costs = std::size_t{1} << 24;
};

// Balanced transportation problem with an explicit cost matrix, solved with a
// network simplex (block pivot search, strongly feasible spanning trees).
TransportPlan solve_transport(const Matrix& cost, std::span<const double> supply, std::span<const double> demand);

// Min-cost perfect matching on a square cost matrix (shortest augmenting
// paths). Returns assignment[row] = column.
std::vector<std::size_t> solve_assignment(const Matrix& cost, std::vector<double>* row_potential = nullptr,
                                          std::vector<double>* col_potential = nullptr);

// Exact W1 with Euclidean ground cost. Throws DataError on dimension mismatch
// or when either side exceeds options.max_points.
TransportPlan w1_exact(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                       const TransportOptions& options = {});

// W1 between uniform clouds; equal sizes go through the assignment solver.
double w1_pointclouds(const Matrix& x, const Matrix& y);

struct SplitEstimate {
    double mean = 0.0;
    std::vector<double> per_pair;
    std::size_t subset_size = 0;
    bool shrunk = false;
    // Row indices of the 2n disjoint subsets; pair j is (subsets[2j], subsets[2j + 1]).
    std::vector<std::vector<std::size_t>> subsets;
};

// Shuffles the rows with `seed`, cuts 2n disjoint subsets of size s and
// averages W1 over the n consecutive pairs. s shrinks to floor(m/2n) when the
// class is too small for the request; floor(m/2n) = 0 throws DataError.
SplitEstimate expected_w1_split(const Matrix& class_embeddings, std::size_t pairs, std::size_t subset_size,
                                std::uint64_t seed);

}  // namespace wlbound
