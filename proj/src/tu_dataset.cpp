#include "wlbound/tu_dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "wlbound/error.hpp"
#include "wlbound/text.hpp"

namespace wlbound {

namespace fs = std::filesystem;

namespace {

fs::path tu_file(const fs::path& dir, const std::string& name, const char* suffix) {
    return dir / (name + suffix);
}

std::string read_required(const fs::path& path) {
    if (!fs::exists(path)) throw DataError("missing required file " + path.string());
    return text::read_file(path);
}

std::vector<long long> read_integer_column(const fs::path& path) {
    const std::string contents = read_required(path);
    std::vector<long long> values;
    std::size_t line_no = 0;
    for (std::string_view line : text::lines(contents)) {
        ++line_no;
        line = text::trim(line);
        if (line.empty()) continue;
        // node label files sometimes carry extra comma-separated columns; the first one is the label
        const auto cols = text::split(line, ',');
        try {
            values.push_back(text::parse_int<long long>(cols.front(), line_no));
        } catch (const DataError& e) {
            throw DataError(path.filename().string() + ": " + e.what());
        }
    }
    return values;
}

}  // namespace

TuDataset parse_tu_dataset(const fs::path& dir, const std::string& name) {
    const auto indicator = read_integer_column(tu_file(dir, name, "_graph_indicator.txt"));
    const auto graph_labels = read_integer_column(tu_file(dir, name, "_graph_labels.txt"));
    const std::string adjacency = read_required(tu_file(dir, name, "_A.txt"));

    const std::size_t graph_count = graph_labels.size();
    if (graph_count == 0) throw DataError("dataset " + name + " has no graphs");

    // Indicator must be non-decreasing 1..N so every graph owns a contiguous vertex range.
    std::vector<std::size_t> first_vertex(graph_count + 1, 0);
    std::vector<std::size_t> sizes(graph_count, 0);
    for (std::size_t i = 0; i < indicator.size(); ++i) {
        const long long g = indicator[i];
        if (g < 1 || static_cast<std::size_t>(g) > graph_count) {
            throw DataError(name + "_graph_indicator.txt: graph id " + std::to_string(g) + " on line " +
                            std::to_string(i + 1) + " outside 1.." + std::to_string(graph_count));
        }
        if (i > 0 && g < indicator[i - 1]) {
            throw DataError(name + "_graph_indicator.txt: graph ids decrease on line " + std::to_string(i + 1));
        }
        ++sizes[static_cast<std::size_t>(g - 1)];
    }
    for (std::size_t g = 0; g < graph_count; ++g) first_vertex[g + 1] = first_vertex[g] + sizes[g];

    TuDataset out;
    TuLoadReport& report = out.report;

    std::vector<std::set<Edge>> directed(graph_count);
    std::size_t line_no = 0;
    for (std::string_view line : text::lines(adjacency)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto cols = text::split(line, ',');
        if (cols.size() != 2) {
            throw DataError(name + "_A.txt: expected 'u, v' on line " + std::to_string(line_no));
        }
        long long u = 0;
        long long v = 0;
        try {
            u = text::parse_int<long long>(cols[0], line_no);
            v = text::parse_int<long long>(cols[1], line_no);
        } catch (const DataError& e) {
            throw DataError(name + "_A.txt: " + e.what());
        }
        const auto n_total = static_cast<long long>(indicator.size());
        if (u < 1 || v < 1 || u > n_total || v > n_total) {
            throw DataError(name + "_A.txt: vertex out of range on line " + std::to_string(line_no));
        }
        const long long gu = indicator[static_cast<std::size_t>(u - 1)];
        const long long gv = indicator[static_cast<std::size_t>(v - 1)];
        if (gu != gv) {
            throw DataError(name + "_A.txt: edge " + std::to_string(u) + ", " + std::to_string(v) + " on line " +
                            std::to_string(line_no) + " crosses graphs " + std::to_string(gu) + " and " +
                            std::to_string(gv));
        }
        if (u == v) {
            ++report.dropped_self_loops;
            continue;
        }
        const auto g = static_cast<std::size_t>(gu - 1);
        const auto base = static_cast<long long>(first_vertex[g]);
        const Edge e{static_cast<Vertex>(u - 1 - base), static_cast<Vertex>(v - 1 - base)};
        if (!directed[g].insert(e).second) ++report.duplicate_edges;
    }

    // Node labels -> one-hot over the sorted distinct values.
    const fs::path node_label_path = tu_file(dir, name, "_node_labels.txt");
    std::vector<long long> node_labels;
    if (fs::exists(node_label_path)) {
        node_labels = read_integer_column(node_label_path);
        if (node_labels.size() != indicator.size()) {
            throw DataError(name + "_node_labels.txt has " + std::to_string(node_labels.size()) + " lines for " +
                            std::to_string(indicator.size()) + " vertices");
        }
        report.has_node_labels = true;
        std::set<long long> distinct(node_labels.begin(), node_labels.end());
        report.node_label_values.assign(distinct.begin(), distinct.end());
    }

    std::set<long long> distinct_graph_labels(graph_labels.begin(), graph_labels.end());
    report.graph_label_mapping.assign(distinct_graph_labels.begin(), distinct_graph_labels.end());

    LabeledDataset& ds = out.dataset;
    ds.class_count = static_cast<int>(report.graph_label_mapping.size());
    ds.original_labels = report.graph_label_mapping;
    ds.graphs.reserve(graph_count);
    const std::size_t feature_dim = report.has_node_labels ? report.node_label_values.size() : 1;
    for (std::size_t g = 0; g < graph_count; ++g) {
        std::vector<Edge> edges;
        for (const Edge& e : directed[g]) {
            const Edge reverse{e.second, e.first};
            if (e.first < e.second || !directed[g].contains(reverse)) {
                if (!directed[g].contains(reverse)) ++report.symmetrized_edges;
                edges.push_back(e);
            }
        }
        Matrix features(sizes[g], feature_dim, report.has_node_labels ? 0.0 : 1.0);
        if (report.has_node_labels) {
            for (std::size_t v = 0; v < sizes[g]; ++v) {
                const long long label = node_labels[first_vertex[g] + v];
                const auto it = std::lower_bound(report.node_label_values.begin(), report.node_label_values.end(), label);
                features(v, static_cast<std::size_t>(it - report.node_label_values.begin())) = 1.0;
            }
        }
        ds.graphs.emplace_back(sizes[g], edges, std::move(features));
        const auto it = std::lower_bound(report.graph_label_mapping.begin(), report.graph_label_mapping.end(), graph_labels[g]);
        ds.labels.push_back(static_cast<int>(it - report.graph_label_mapping.begin()) + 1);
    }
    ds.validate();
    return out;
}

void write_tu_dataset(const fs::path& dir, const std::string& name, const LabeledDataset& dataset) {
    dataset.validate();
    fs::create_directories(dir);
    std::ostringstream a;
    std::ostringstream indicator;
    std::ostringstream graph_labels;
    std::ostringstream node_labels;

    bool one_hot = true;
    for (const auto& g : dataset.graphs) {
        for (std::size_t v = 0; v < g.vertex_count() && one_hot; ++v) {
            int ones = 0;
            for (double x : g.features().row(v)) {
                if (x == 1.0) ++ones;
                else if (x != 0.0) one_hot = false;
            }
            if (ones != 1) one_hot = false;
        }
    }
    const bool write_node_labels = one_hot && dataset.graphs.front().feature_dim() > 1;

    std::size_t offset = 0;
    for (std::size_t g = 0; g < dataset.size(); ++g) {
        const Graph& graph = dataset.graphs[g];
        for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
            indicator << (g + 1) << '\n';
            if (write_node_labels) {
                const auto row = graph.features().row(v);
                node_labels << (std::find(row.begin(), row.end(), 1.0) - row.begin()) << '\n';
            }
        }
        for (auto [u, v] : graph.edges()) {
            a << (offset + u + 1) << ", " << (offset + v + 1) << '\n';
            a << (offset + v + 1) << ", " << (offset + u + 1) << '\n';
        }
        const int y = dataset.labels[g];
        const long long original = dataset.original_labels.size() == static_cast<std::size_t>(dataset.class_count)
                                       ? dataset.original_labels[static_cast<std::size_t>(y - 1)]
                                       : y;
        graph_labels << original << '\n';
        offset += graph.vertex_count();
    }
    text::write_file(tu_file(dir, name, "_A.txt"), a.str());
    text::write_file(tu_file(dir, name, "_graph_indicator.txt"), indicator.str());
    text::write_file(tu_file(dir, name, "_graph_labels.txt"), graph_labels.str());
    if (write_node_labels) text::write_file(tu_file(dir, name, "_node_labels.txt"), node_labels.str());
}

std::uint64_t tu_dataset_hash(const fs::path& dir, const std::string& name) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (const char* suffix : {"_A.txt", "_graph_indicator.txt", "_graph_labels.txt", "_node_labels.txt"}) {
        const fs::path p = tu_file(dir, name, suffix);
        if (!fs::exists(p)) continue;
        for (unsigned char c : text::read_file(p)) {
            hash ^= c;
            hash *= 1099511628211ULL;
        }
        hash ^= 0xff;
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace wlbound
