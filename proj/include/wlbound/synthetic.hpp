#pragma once

#include <cstdint>

#include "wlbound/graph.hpp"
#include "wlbound/rng.hpp"

// Seeded graph generators for fixtures, property tests and demos.
namespace wlbound::synthetic {

// Erdos-Renyi G(n, p), featureless.
Graph random_graph(std::size_t n, double p, Rng& rng);

// Random labelled tree on n vertices (random attachment).
Graph random_tree(std::size_t n, Rng& rng);

// Two classes of featureless graphs: class 1 is built around odd cycles
// (C3/C5), class 2 around even cycles (C4/C6); both get random pendant trees.
LabeledDataset cycle_families(std::size_t per_class, std::uint64_t seed, std::size_t min_vertices = 8,
                              std::size_t max_vertices = 14);

}  // namespace wlbound::synthetic
