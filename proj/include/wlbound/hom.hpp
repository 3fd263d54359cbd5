#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wlbound/graph.hpp"

// Exact homomorphism counts from small connected patterns into host graphs.
// Vertex features are ignored. Counts are 64-bit and every addition and
// multiplication is overflow-checked; overflow raises NumericalError.
namespace wlbound {

using HomCount = std::uint64_t;

inline constexpr std::size_t max_pattern_vertices = 10;

// Number of edge-preserving maps V(pattern) -> V(host). The pattern must be
// connected with at most max_pattern_vertices vertices.
HomCount hom_count(const Graph& pattern, const Graph& host);

// Maps with pattern.root() sent to `image`.
HomCount hom_count_rooted(const RootedPattern& pattern, const Graph& host, Vertex image);

// All rooted counts at once, indexed by host vertex.
std::vector<HomCount> hom_count_rooted_all(const RootedPattern& pattern, const Graph& host);

// Tree fast path, O(|V_F| * |E_G|). Throws DataError if the pattern is not a tree.
HomCount hom_count_tree(const Graph& tree, const Graph& host);

struct HomVector {
    std::vector<std::string> pattern_ids;
    std::vector<HomCount> counts;
};

HomVector hom_vector(std::span<const RootedPattern> patterns, const Graph& host, Vertex image);

}  // namespace wlbound
