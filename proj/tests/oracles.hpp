#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wlbound/graph.hpp"
#include "wlbound/matrix.hpp"

// Slow, obviously-correct reference implementations the library is checked
// against. None of them call into the code under test beyond the Graph and
// Matrix containers.
namespace oracle {

using wlbound::Graph;
using wlbound::Matrix;
using wlbound::Vertex;

// Walks all |V_G|^|V_F| maps.
std::uint64_t hom_enumerate(const Graph& pattern, const Graph& host);
std::uint64_t hom_enumerate_rooted(const Graph& pattern, Vertex root, const Graph& host, Vertex image);

// min c.x  s.t.  A x = b, x >= 0, by two-phase dense tableau simplex with
// Bland's rule. Returns the optimum; throws if infeasible or unbounded.
double lp_minimize(const Matrix& A, std::span<const double> b, std::span<const double> c);

// Transportation LP built from explicit weights and a ground cost matrix.
double transport_lp(const Matrix& cost, std::span<const double> supply, std::span<const double> demand);

// Euclidean W1 between weighted point sets via transport_lp.
double w1_lp(const Matrix& x, std::span<const double> wx, const Matrix& y, std::span<const double> wy);

// Minimum over all n! permutations.
double assignment_bruteforce(const Matrix& cost);

// One-dimensional W1 as the integral of |F_mu - F_nu|.
double w1_line(std::span<const double> x, std::span<const double> wx, std::span<const double> y,
               std::span<const double> wy);

// Rooted isomorphism by trying every vertex permutation.
bool rooted_isomorphic(const Graph& a, Vertex root_a, const Graph& b, Vertex root_b);

// Euclidean distance written out directly.
double euclid(std::span<const double> a, std::span<const double> b);

}  // namespace oracle
