#include "wlbound/hom.hpp"

#include <algorithm>

#include "wlbound/error.hpp"

namespace wlbound {

namespace {

HomCount checked_add(HomCount a, HomCount b) {
    HomCount r = 0;
    if (__builtin_add_overflow(a, b, &r)) throw NumericalError("homomorphism count overflows 64 bits");
    return r;
}

HomCount checked_mul(HomCount a, HomCount b) {
    HomCount r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw NumericalError("homomorphism count overflows 64 bits");
    return r;
}

void check_pattern(const Graph& pattern) {
    if (pattern.vertex_count() == 0) throw DataError("empty pattern");
    if (pattern.vertex_count() > max_pattern_vertices) {
        throw UsageError("pattern has " + std::to_string(pattern.vertex_count()) + " vertices; the limit is " +
                         std::to_string(max_pattern_vertices));
    }
    if (!pattern.is_connected()) throw DataError("pattern is disconnected");
}

// Backtracking counter. Pattern vertices are visited in BFS order from the
// root so every vertex after the first has an already-mapped neighbor; its
// candidates are the host neighbors of that neighbor's image, filtered by
// adjacency to the images of all other mapped pattern neighbors.
class Backtracker {
public:
    Backtracker(const Graph& pattern, Vertex root, const Graph& host) : pattern_(pattern), host_(host) {
        const std::size_t k = pattern.vertex_count();
        order_.reserve(k);
        std::vector<int> position(k, -1);
        order_.push_back(root);
        position[root] = 0;
        for (std::size_t i = 0; i < order_.size(); ++i) {
            for (Vertex u : pattern.neighbors(order_[i])) {
                if (position[u] < 0) {
                    position[u] = static_cast<int>(order_.size());
                    order_.push_back(u);
                }
            }
        }
        anchor_.assign(k, 0);
        back_.resize(k);
        for (std::size_t i = 1; i < k; ++i) {
            const Vertex u = order_[i];
            int best = -1;
            for (Vertex w : pattern.neighbors(u)) {
                const int p = position[w];
                if (p < static_cast<int>(i)) {
                    if (best < 0) best = p;
                    else back_[i].push_back(static_cast<std::size_t>(p));
                }
            }
            anchor_[i] = static_cast<std::size_t>(best);
        }
        image_.assign(k, 0);
    }

    HomCount count_from(Vertex root_image) {
        image_[0] = root_image;
        return extend(1);
    }

private:
    bool consistent(std::size_t i, Vertex candidate) const {
        for (std::size_t p : back_[i]) {
            if (!host_.adjacent(image_[p], candidate)) return false;
        }
        return true;
    }

    HomCount extend(std::size_t i) {
        if (i == order_.size()) return 1;
        HomCount total = 0;
        const auto candidates = host_.neighbors(image_[anchor_[i]]);
        if (i + 1 == order_.size()) {
            for (Vertex c : candidates) {
                if (consistent(i, c)) ++total;
            }
            return total;
        }
        for (Vertex c : candidates) {
            if (!consistent(i, c)) continue;
            image_[i] = c;
            total = checked_add(total, extend(i + 1));
        }
        return total;
    }

    const Graph& pattern_;
    const Graph& host_;
    std::vector<Vertex> order_;
    std::vector<std::size_t> anchor_;
    std::vector<std::vector<std::size_t>> back_;
    std::vector<Vertex> image_;
};

}  // namespace

HomCount hom_count(const Graph& pattern, const Graph& host) {
    check_pattern(pattern);
    Backtracker bt(pattern, 0, host);
    HomCount total = 0;
    for (Vertex v = 0; v < host.vertex_count(); ++v) total = checked_add(total, bt.count_from(v));
    return total;
}

HomCount hom_count_rooted(const RootedPattern& pattern, const Graph& host, Vertex image) {
    check_pattern(pattern.graph());
    if (image >= host.vertex_count()) throw DataError("host vertex " + std::to_string(image) + " out of range");
    Backtracker bt(pattern.graph(), pattern.root(), host);
    return bt.count_from(image);
}

std::vector<HomCount> hom_count_rooted_all(const RootedPattern& pattern, const Graph& host) {
    check_pattern(pattern.graph());
    Backtracker bt(pattern.graph(), pattern.root(), host);
    std::vector<HomCount> out(host.vertex_count());
    for (Vertex v = 0; v < host.vertex_count(); ++v) out[v] = bt.count_from(v);
    return out;
}

HomCount hom_count_tree(const Graph& tree, const Graph& host) {
    if (!tree.is_tree()) throw DataError("pattern is not a tree");
    if (tree.vertex_count() > max_pattern_vertices) throw UsageError("tree pattern too large");
    const std::size_t k = tree.vertex_count();
    const std::size_t n = host.vertex_count();

    // Root at 0; process vertices children-first.
    std::vector<Vertex> order{0};
    std::vector<int> parent(k, -1);
    parent[0] = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (Vertex u : tree.neighbors(order[i])) {
            if (parent[u] < 0) {
                parent[u] = static_cast<int>(order[i]);
                order.push_back(u);
            }
        }
    }

    // table[u][x]: homs of the subtree at u with u -> x.
    std::vector<std::vector<HomCount>> table(k, std::vector<HomCount>(n, 1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Vertex u = *it;
        if (u == 0) break;
        const auto p = static_cast<Vertex>(parent[u]);
        // factor[x] = sum over host neighbors y of x of table[u][y]
        for (Vertex x = 0; x < n; ++x) {
            HomCount factor = 0;
            for (Vertex y : host.neighbors(x)) factor = checked_add(factor, table[u][y]);
            table[p][x] = checked_mul(table[p][x], factor);
        }
    }
    HomCount total = 0;
    for (Vertex x = 0; x < n; ++x) total = checked_add(total, table[0][x]);
    return total;
}

HomVector hom_vector(std::span<const RootedPattern> patterns, const Graph& host, Vertex image) {
    HomVector out;
    out.pattern_ids.reserve(patterns.size());
    out.counts.reserve(patterns.size());
    for (const auto& p : patterns) {
        out.pattern_ids.push_back(p.name());
        out.counts.push_back(hom_count_rooted(p, host, image));
    }
    return out;
}

}  // namespace wlbound
