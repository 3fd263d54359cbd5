#include "wlbound/wl.hpp"

#include <algorithm>
#include <cmath>

#include "wlbound/error.hpp"

namespace wlbound {

namespace {

// Sorts the distinct signatures and maps each vertex to the rank of its own.
template <typename Signature>
ColorAssignment canonicalize(std::size_t iteration, const std::vector<std::vector<Signature>>& per_vertex) {
    std::vector<Signature> distinct;
    for (const auto& g : per_vertex) distinct.insert(distinct.end(), g.begin(), g.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    ColorAssignment out;
    out.iteration = iteration;
    out.colors.resize(per_vertex.size());
    for (std::size_t g = 0; g < per_vertex.size(); ++g) {
        out.colors[g].reserve(per_vertex[g].size());
        for (const auto& sig : per_vertex[g]) {
            const auto it = std::lower_bound(distinct.begin(), distinct.end(), sig);
            out.colors[g].push_back(static_cast<Color>(it - distinct.begin()));
        }
    }
    out.color_table.reserve(distinct.size());
    for (auto& sig : distinct) out.color_table.emplace_back(std::move(sig));
    return out;
}

}  // namespace

Refinement wl_refine(std::span<const Graph> graphs, std::size_t iterations, std::span<const RootedPattern> patterns) {
    if (!graphs.empty()) {
        const std::size_t dim = graphs.front().feature_dim();
        for (const auto& g : graphs) {
            if (g.feature_dim() != dim) throw DataError("graphs have inconsistent feature dimensions");
        }
    }

    std::vector<std::vector<InitialSignature>> initial(graphs.size());
    for (std::size_t g = 0; g < graphs.size(); ++g) {
        const Graph& graph = graphs[g];
        initial[g].resize(graph.vertex_count());
        for (Vertex v = 0; v < graph.vertex_count(); ++v) {
            const auto row = graph.features().row(v);
            initial[g][v].feature.assign(row.begin(), row.end());
            initial[g][v].hom.reserve(patterns.size());
        }
        for (const auto& p : patterns) {
            const auto counts = hom_count_rooted_all(p, graph);
            for (Vertex v = 0; v < graph.vertex_count(); ++v) initial[g][v].hom.push_back(counts[v]);
        }
    }

    Refinement out;
    out.iterations.push_back(canonicalize(0, initial));

    for (std::size_t it = 1; it <= iterations; ++it) {
        const ColorAssignment& prev = out.iterations.back();
        std::vector<std::vector<RefinedSignature>> refined(graphs.size());
        for (std::size_t g = 0; g < graphs.size(); ++g) {
            const Graph& graph = graphs[g];
            refined[g].resize(graph.vertex_count());
            for (Vertex v = 0; v < graph.vertex_count(); ++v) {
                RefinedSignature& sig = refined[g][v];
                sig.previous = prev.colors[g][v];
                for (Vertex u : graph.neighbors(v)) sig.neighbors.push_back(prev.colors[g][u]);
                std::sort(sig.neighbors.begin(), sig.neighbors.end());
            }
        }
        out.iterations.push_back(canonicalize(it, refined));
        // Refinement never merges classes, so equal counts mean equal partitions.
        if (!out.stable_iteration && out.iterations[it].color_count() == prev.color_count()) {
            out.stable_iteration = it - 1;
        }
    }
    return out;
}

std::vector<Histogram> histograms(const ColorAssignment& assignment) {
    std::vector<Histogram> out(assignment.colors.size());
    for (std::size_t g = 0; g < assignment.colors.size(); ++g) {
        out[g].graph_id = g;
        out[g].counts.assign(assignment.color_count(), 0);
        for (Color c : assignment.colors[g]) ++out[g].counts[c];
    }
    return out;
}

bool distinguishes(const Histogram& a, const Histogram& b) {
    if (a.counts.size() != b.counts.size()) throw UsageError("histogram dimensions differ");
    return a.counts != b.counts;
}

bool distinguishes(std::span<const double> a, std::span<const double> b, double tolerance) {
    if (a.size() != b.size()) throw UsageError("embedding dimensions differ");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > tolerance) return true;
    }
    return false;
}

std::vector<DistinguishedPair> check_power_order(const Matrix& low, const Matrix& high, double tolerance) {
    if (low.rows() != high.rows()) throw UsageError("encoders were evaluated on different graph counts");
    std::vector<DistinguishedPair> out;
    for (std::size_t i = 0; i < low.rows(); ++i) {
        for (std::size_t j = i + 1; j < low.rows(); ++j) {
            if (distinguishes(high.row(i), high.row(j), tolerance) && !distinguishes(low.row(i), low.row(j), tolerance)) {
                out.push_back({i, j});
            }
        }
    }
    return out;
}

}  // namespace wlbound
