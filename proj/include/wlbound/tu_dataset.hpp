#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wlbound/graph.hpp"

namespace wlbound {

// What the TU reader had to repair or remap while loading.
struct TuLoadReport {
    std::vector<long long> graph_label_mapping;  // dense class k -> original label [k - 1]
    std::vector<long long> node_label_values;    // one-hot column j -> original node label
    std::size_t duplicate_edges = 0;             // second listing of an undirected edge
    std::size_t symmetrized_edges = 0;           // edges listed in one direction only
    std::size_t dropped_self_loops = 0;
    bool has_node_labels = false;
};

struct TuDataset {
    LabeledDataset dataset;
    TuLoadReport report;
};

// Reads <dir>/<name>_A.txt, _graph_indicator.txt, _graph_labels.txt and the
// optional _node_labels.txt. Global 1-based vertex ids become per-graph 0-based
// ids; node labels become one-hot features; graph labels are remapped to 1..K
// in ascending order of the original values.
TuDataset parse_tu_dataset(const std::filesystem::path& dir, const std::string& name);

// Writes a dataset in the same layout (both edge directions listed). Node
// labels are written when every feature row is one-hot.
void write_tu_dataset(const std::filesystem::path& dir, const std::string& name, const LabeledDataset& dataset);

// FNV-1a over the dataset's files, in a fixed order. Used for provenance.
std::uint64_t tu_dataset_hash(const std::filesystem::path& dir, const std::string& name);

}  // namespace wlbound
