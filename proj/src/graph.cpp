#include "wlbound/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "wlbound/error.hpp"
#include "wlbound/text.hpp"

namespace wlbound {

Graph::Graph(std::size_t vertex_count, std::span<const Edge> edges)
    : Graph(vertex_count, edges, Matrix(vertex_count, 1, 1.0)) {}

Graph::Graph(std::size_t vertex_count, std::span<const Edge> edges, Matrix features)
    : features_(std::move(features)) {
    if (features_.rows() != vertex_count) {
        throw DataError("feature matrix has " + std::to_string(features_.rows()) + " rows for " +
                        std::to_string(vertex_count) + " vertices");
    }
    if (vertex_count > std::numeric_limits<Vertex>::max()) throw DataError("graph too large");

    edges_.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= vertex_count || v >= vertex_count) {
            throw DataError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") references a vertex outside 0.." + std::to_string(vertex_count));
        }
        if (u == v) throw DataError("self-loop at vertex " + std::to_string(u));
        edges_.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    offsets_.assign(vertex_count + 1, 0);
    for (auto [u, v] : edges_) {
        ++offsets_[u + 1];
        ++offsets_[v + 1];
    }
    for (std::size_t i = 0; i < vertex_count; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.resize(offsets_.back());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (auto [u, v] : edges_) {
        adjacency_[cursor[u]++] = v;
        adjacency_[cursor[v]++] = u;
    }
    for (std::size_t v = 0; v < vertex_count; ++v) {
        std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1]);
    }
}

bool Graph::adjacent(Vertex u, Vertex v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

bool Graph::is_connected() const {
    const std::size_t n = vertex_count();
    if (n == 0) return false;
    std::vector<char> seen(n, 0);
    std::vector<Vertex> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const Vertex v = stack.back();
        stack.pop_back();
        for (Vertex u : neighbors(v)) {
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    return reached == n;
}

Graph Graph::permuted(std::span<const Vertex> perm) const {
    const std::size_t n = vertex_count();
    if (perm.size() != n) throw DataError("permutation size mismatch");
    std::vector<Edge> mapped;
    mapped.reserve(edges_.size());
    for (auto [u, v] : edges_) mapped.emplace_back(perm[u], perm[v]);
    Matrix feats(n, feature_dim());
    for (std::size_t v = 0; v < n; ++v) {
        std::copy(features_.row(v).begin(), features_.row(v).end(), feats.row(perm[v]).begin());
    }
    return Graph(n, mapped, std::move(feats));
}

Graph Graph::disjoint_union(const Graph& other) const {
    if (other.feature_dim() != feature_dim()) throw DataError("feature dimensions differ");
    const auto shift = static_cast<Vertex>(vertex_count());
    std::vector<Edge> all(edges_);
    for (auto [u, v] : other.edges()) all.emplace_back(u + shift, v + shift);
    Matrix feats(vertex_count() + other.vertex_count(), feature_dim());
    for (std::size_t v = 0; v < vertex_count(); ++v) {
        std::copy(features_.row(v).begin(), features_.row(v).end(), feats.row(v).begin());
    }
    for (std::size_t v = 0; v < other.vertex_count(); ++v) {
        std::copy(other.features().row(v).begin(), other.features().row(v).end(),
                  feats.row(shift + v).begin());
    }
    return Graph(feats.rows(), all, std::move(feats));
}

RootedPattern::RootedPattern(Graph graph, Vertex root, std::string name)
    : graph_(std::move(graph)), root_(root), name_(std::move(name)) {
    if (graph_.vertex_count() == 0) throw DataError("pattern '" + name_ + "' is empty");
    if (root_ >= graph_.vertex_count()) throw DataError("pattern '" + name_ + "' root out of range");
    if (!graph_.is_connected()) throw DataError("pattern '" + name_ + "' is disconnected");
}

RootedPattern make_path(std::size_t n) {
    if (n < 1) throw UsageError("path needs at least 1 vertex");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return RootedPattern(Graph(n, edges), 0, "P" + std::to_string(n));
}

RootedPattern make_cycle(std::size_t n) {
    if (n < 3) throw UsageError("cycle needs at least 3 vertices");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return RootedPattern(Graph(n, edges), 0, "C" + std::to_string(n));
}

RootedPattern make_clique(std::size_t n) {
    if (n < 1) throw UsageError("clique needs at least 1 vertex");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return RootedPattern(Graph(n, edges), 0, "K" + std::to_string(n));
}

RootedPattern pattern_from_spec(std::string_view spec) {
    if (spec.starts_with("file:")) return read_pattern_file(std::string(spec.substr(5)));
    if (spec.size() >= 2) {
        std::size_t n = 0;
        const auto* first = spec.data() + 1;
        const auto* last = spec.data() + spec.size();
        auto [ptr, ec] = std::from_chars(first, last, n);
        if (ec == std::errc() && ptr == last) {
            switch (spec[0]) {
                case 'P': return make_path(n);
                case 'C': return make_cycle(n);
                case 'K': return make_clique(n);
                default: break;
            }
        }
    }
    throw UsageError("unknown pattern '" + std::string(spec) + "' (expected P<n>, C<n>, K<n> or file:<path>)");
}

std::vector<RootedPattern> patterns_from_specs(std::span<const std::string> specs) {
    std::vector<RootedPattern> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(pattern_from_spec(s));
    return out;
}

namespace {

struct ParsedEdgeList {
    std::size_t vertex_count = 0;
    std::vector<Edge> edges;
    std::vector<std::pair<Vertex, std::vector<double>>> features;
    std::optional<Vertex> root;
    std::optional<Vertex> first_vertex;
};

ParsedEdgeList scan_edge_list(std::string_view text) {
    ParsedEdgeList out;
    std::optional<std::size_t> declared;
    std::size_t max_seen = 0;
    bool any = false;
    auto note = [&](Vertex v) {
        max_seen = std::max<std::size_t>(max_seen, v);
        any = true;
        if (!out.first_vertex) out.first_vertex = v;
    };

    std::size_t line_no = 0;
    for (std::string_view line : text::lines(text)) {
        ++line_no;
        line = text::strip_comment(line, '#');
        const auto tokens = text::split_ws(line);
        if (tokens.empty()) continue;
        const auto where = [&] { return " on line " + std::to_string(line_no); };
        if (tokens[0] == "root") {
            if (tokens.size() != 2) throw DataError("malformed root line" + where());
            const auto r = text::parse_int<Vertex>(tokens[1], line_no);
            out.root = r;
            note(r);
        } else if (tokens[0] == "vertices") {
            if (tokens.size() != 2) throw DataError("malformed vertices line" + where());
            declared = text::parse_int<std::size_t>(tokens[1], line_no);
        } else if (tokens[0] == "feature") {
            if (tokens.size() < 3) throw DataError("malformed feature line" + where());
            const auto v = text::parse_int<Vertex>(tokens[1], line_no);
            std::vector<double> values;
            for (std::size_t i = 2; i < tokens.size(); ++i) values.push_back(text::parse_double(tokens[i], line_no));
            out.features.emplace_back(v, std::move(values));
            note(v);
        } else {
            if (tokens.size() != 2) throw DataError("expected '<u> <v>'" + where());
            const auto u = text::parse_int<Vertex>(tokens[0], line_no);
            const auto v = text::parse_int<Vertex>(tokens[1], line_no);
            if (u == v) throw DataError("self-loop at vertex " + std::to_string(u) + where());
            note(u);
            note(v);
            out.edges.emplace_back(u, v);
        }
    }
    out.vertex_count = declared ? *declared : (any ? max_seen + 1 : 0);
    if (any && max_seen >= out.vertex_count) throw DataError("vertex index exceeds declared vertex count");
    return out;
}

}  // namespace

EdgeListDocument parse_edge_list(std::string_view text) {
    auto parsed = scan_edge_list(text);
    Matrix features(parsed.vertex_count, 1, 1.0);
    if (!parsed.features.empty()) {
        const std::size_t dim = parsed.features.front().second.size();
        if (parsed.features.size() != parsed.vertex_count) throw DataError("features given for only some vertices");
        features = Matrix(parsed.vertex_count, dim);
        std::vector<char> seen(parsed.vertex_count, 0);
        for (const auto& [v, values] : parsed.features) {
            if (values.size() != dim) throw DataError("inconsistent feature dimension at vertex " + std::to_string(v));
            if (seen[v]) throw DataError("duplicate feature line for vertex " + std::to_string(v));
            seen[v] = 1;
            std::copy(values.begin(), values.end(), features.row(v).begin());
        }
    }
    EdgeListDocument doc{Graph(parsed.vertex_count, parsed.edges, std::move(features)),
                         parsed.root.value_or(parsed.first_vertex.value_or(0))};
    return doc;
}

std::string format_edge_list(const Graph& graph) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "vertices " << graph.vertex_count() << '\n';
    for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
        os << "feature " << v;
        for (double x : graph.features().row(v)) os << ' ' << x;
        os << '\n';
    }
    for (auto [u, v] : graph.edges()) os << u << ' ' << v << '\n';
    return os.str();
}

RootedPattern parse_pattern(std::string_view text, std::string name) {
    auto doc = parse_edge_list(text);
    if (doc.graph.vertex_count() == 0) throw DataError("pattern '" + name + "' has no vertices");
    return RootedPattern(std::move(doc.graph), doc.root, std::move(name));
}

RootedPattern read_pattern_file(const std::filesystem::path& path) {
    return parse_pattern(text::read_file(path), path.stem().string());
}

std::vector<std::size_t> LabeledDataset::class_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(class_count, 0)), 0);
    for (int y : labels) {
        if (y >= 1 && y <= class_count) ++sizes[static_cast<std::size_t>(y - 1)];
    }
    return sizes;
}

void LabeledDataset::validate() const {
    if (graphs.size() != labels.size()) throw DataError("graph and label counts differ");
    if (graphs.empty()) throw DataError("dataset is empty");
    for (int y : labels) {
        if (y < 1 || y > class_count) throw DataError("label " + std::to_string(y) + " outside 1.." + std::to_string(class_count));
    }
    const auto sizes = class_sizes();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] == 0) throw DataError("class " + std::to_string(c + 1) + " is empty");
    }
    const std::size_t dim = graphs.front().feature_dim();
    for (const auto& g : graphs) {
        if (g.feature_dim() != dim) throw DataError("graphs have inconsistent feature dimensions");
    }
}

}  // namespace wlbound
