#pragma once

#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "wlbound/graph.hpp"
#include "wlbound/rng.hpp"

namespace support {

inline std::filesystem::path data_dir() { return WLBOUND_TEST_DATA; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("wlbound_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline wlbound::Graph graph(std::size_t n, std::initializer_list<wlbound::Edge> edges) {
    std::vector<wlbound::Edge> e(edges);
    return wlbound::Graph(n, e);
}

inline wlbound::Graph cycle(std::size_t n) {
    std::vector<wlbound::Edge> e;
    for (wlbound::Vertex i = 0; i < n; ++i) e.emplace_back(i, static_cast<wlbound::Vertex>((i + 1) % n));
    return wlbound::Graph(n, e);
}

inline wlbound::Graph star(std::size_t leaves) {
    std::vector<wlbound::Edge> e;
    for (wlbound::Vertex i = 1; i <= leaves; ++i) e.emplace_back(0, i);
    return wlbound::Graph(leaves + 1, e);
}

inline std::vector<wlbound::Vertex> random_permutation(std::size_t n, wlbound::Rng& rng) {
    std::vector<wlbound::Vertex> p(n);
    std::iota(p.begin(), p.end(), 0);
    rng.shuffle(std::span<wlbound::Vertex>(p));
    return p;
}

}  // namespace support
