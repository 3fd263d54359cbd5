#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wlbound/matrix.hpp"

namespace wlbound {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

// Simple undirected graph with dense 0-based vertices and one feature row per
// vertex. Immutable after construction. Graphs built without features get the
// constant one-dimensional feature 1.0.
class Graph {
public:
    Graph() = default;

    // Throws DataError on self-loops or endpoints >= vertex_count. Duplicate
    // edges (in either orientation) collapse to one.
    Graph(std::size_t vertex_count, std::span<const Edge> edges);
    Graph(std::size_t vertex_count, std::span<const Edge> edges, Matrix features);

    std::size_t vertex_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    // Edges with u < v, sorted lexicographically.
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    // Sorted neighbor list.
    std::span<const Vertex> neighbors(Vertex v) const {
        return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
    bool adjacent(Vertex u, Vertex v) const;

    const Matrix& features() const noexcept { return features_; }
    std::size_t feature_dim() const noexcept { return features_.cols(); }

    bool is_connected() const;
    bool is_tree() const { return is_connected() && edge_count() + 1 == vertex_count(); }

    // New graph where old vertex v becomes perm[v]; features move with it.
    Graph permuted(std::span<const Vertex> perm) const;

    // Vertices of `other` are appended after this graph's vertices.
    Graph disjoint_union(const Graph& other) const;

    bool operator==(const Graph&) const = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<Vertex> adjacency_;
    std::vector<Edge> edges_;
    Matrix features_;
};

// Connected pattern graph with a distinguished root, input to rooted
// homomorphism counting and to WL_F initial colors.
class RootedPattern {
public:
    // Throws DataError if the graph is empty, disconnected or root is out of range.
    RootedPattern(Graph graph, Vertex root, std::string name);

    const Graph& graph() const noexcept { return graph_; }
    Vertex root() const noexcept { return root_; }
    const std::string& name() const noexcept { return name_; }

private:
    Graph graph_;
    Vertex root_;
    std::string name_;
};

RootedPattern make_path(std::size_t n);    // n >= 1 vertices
RootedPattern make_cycle(std::size_t n);   // n >= 3
RootedPattern make_clique(std::size_t n);  // n >= 1

// "P4", "C3", "K4" or "file:<path>" for a pattern file.
RootedPattern pattern_from_spec(std::string_view spec);
std::vector<RootedPattern> patterns_from_specs(std::span<const std::string> specs);

// Edge-list text: "#" comments, optional "root <v>", optional
// "vertices <n>", optional "feature <v> <x...>", and "<u> <v>" edges.
struct EdgeListDocument {
    Graph graph;
    Vertex root = 0;
};
EdgeListDocument parse_edge_list(std::string_view text);
std::string format_edge_list(const Graph& graph);

// Root defaults to the first vertex mentioned; a "root" line overrides it.
RootedPattern parse_pattern(std::string_view text, std::string name = "pattern");
RootedPattern read_pattern_file(const std::filesystem::path& path);

struct LabeledDataset {
    std::vector<Graph> graphs;
    std::vector<int> labels;  // dense in 1..class_count
    int class_count = 0;
    // original_labels[k - 1] is the source label of dense class k.
    std::vector<long long> original_labels;

    std::size_t size() const noexcept { return graphs.size(); }
    std::vector<std::size_t> class_sizes() const;
    // Throws DataError if any invariant is broken.
    void validate() const;
};

}  // namespace wlbound
