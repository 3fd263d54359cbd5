#include "wlbound/synthetic.hpp"

#include <vector>

namespace wlbound::synthetic {

Graph random_graph(std::size_t n, double p, Rng& rng) {
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (rng.uniform() < p) edges.emplace_back(u, v);
        }
    }
    return Graph(n, edges);
}

Graph random_tree(std::size_t n, Rng& rng) {
    std::vector<Edge> edges;
    for (std::size_t v = 1; v < n; ++v) edges.emplace_back(static_cast<Vertex>(rng.below(v)), v);
    return Graph(n, edges);
}

namespace {

Graph cycle_core_graph(bool odd, std::size_t target, Rng& rng) {
    std::vector<Edge> edges;
    std::size_t next = 0;
    const std::size_t cycles = 1 + static_cast<std::size_t>(rng.below(2));
    Vertex previous_anchor = 0;
    for (std::size_t c = 0; c < cycles; ++c) {
        const std::size_t length = odd ? (rng.below(2) ? 5 : 3) : (rng.below(2) ? 6 : 4);
        const auto start = static_cast<Vertex>(next);
        for (std::size_t i = 0; i < length; ++i) {
            edges.emplace_back(start + i, start + (i + 1) % length);
        }
        if (c > 0) edges.emplace_back(previous_anchor, start);
        previous_anchor = start + static_cast<Vertex>(length / 2);
        next += length;
    }
    // Pendant trees hang off random existing vertices.
    while (next < target) {
        edges.emplace_back(static_cast<Vertex>(rng.below(next)), static_cast<Vertex>(next));
        ++next;
    }
    return Graph(next, edges);
}

}  // namespace

LabeledDataset cycle_families(std::size_t per_class, std::uint64_t seed, std::size_t min_vertices,
                              std::size_t max_vertices) {
    Rng rng(seed);
    LabeledDataset ds;
    ds.class_count = 2;
    ds.original_labels = {1, 2};
    for (std::size_t i = 0; i < per_class; ++i) {
        for (int label : {1, 2}) {
            const std::size_t target = min_vertices + static_cast<std::size_t>(rng.below(max_vertices - min_vertices + 1));
            ds.graphs.push_back(cycle_core_graph(label == 1, target, rng));
            ds.labels.push_back(label);
        }
    }
    ds.validate();
    return ds;
}

}  // namespace wlbound::synthetic
