#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "wlbound/graph.hpp"
#include "wlbound/hom.hpp"
#include "wlbound/matrix.hpp"

namespace wlbound {

using Color = std::uint32_t;

// Iteration-0 color: vertex feature followed by rooted hom counts.
struct InitialSignature {
    std::vector<double> feature;
    std::vector<HomCount> hom;
    auto operator<=>(const InitialSignature&) const = default;
    bool operator==(const InitialSignature&) const = default;
};

// Later colors: previous color and the sorted multiset of neighbor colors.
struct RefinedSignature {
    Color previous = 0;
    std::vector<Color> neighbors;
    auto operator<=>(const RefinedSignature&) const = default;
    bool operator==(const RefinedSignature&) const = default;
};

using ColorSignature = std::variant<InitialSignature, RefinedSignature>;

// Colors of every vertex of every jointly refined graph at one iteration.
// Ids are dense and assigned in ascending signature order, so they do not
// depend on graph or vertex traversal order.
struct ColorAssignment {
    std::size_t iteration = 0;
    std::vector<std::vector<Color>> colors;  // [graph][vertex]
    std::vector<ColorSignature> color_table;  // color id -> signature
    std::size_t color_count() const noexcept { return color_table.size(); }
};

struct Refinement {
    std::vector<ColorAssignment> iterations;  // 0..L inclusive
    // Smallest l < L whose partition equals the one at l + 1, if any.
    std::optional<std::size_t> stable_iteration;
};

// Joint WL_F refinement; an empty pattern list gives plain 1-WL. Throws
// DataError when feature dimensions differ across graphs.
Refinement wl_refine(std::span<const Graph> graphs, std::size_t iterations, std::span<const RootedPattern> patterns);

struct Histogram {
    std::size_t graph_id = 0;
    std::vector<std::uint64_t> counts;  // indexed by color id
};

std::vector<Histogram> histograms(const ColorAssignment& assignment);

// Exact comparison; throws UsageError on dimension mismatch.
bool distinguishes(const Histogram& a, const Histogram& b);
// Any coordinate differs by more than `tolerance`.
bool distinguishes(std::span<const double> a, std::span<const double> b, double tolerance = equality_tolerance);

struct DistinguishedPair {
    std::size_t first = 0;
    std::size_t second = 0;
    bool operator==(const DistinguishedPair&) const = default;
};

// Pairs (i < j) that `high` distinguishes and `low` does not. An empty result
// is consistent with low bounding high in distinguishing power.
std::vector<DistinguishedPair> check_power_order(const Matrix& low, const Matrix& high,
                                                 double tolerance = equality_tolerance);

}  // namespace wlbound
