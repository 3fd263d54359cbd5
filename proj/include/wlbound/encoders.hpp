#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wlbound/graph.hpp"
#include "wlbound/matrix.hpp"
#include "wlbound/wl.hpp"

namespace wlbound {

// One embedding vector per graph, in a shared Euclidean space.
struct EmbeddingSet {
    std::string encoder_id;
    std::vector<std::size_t> graph_ids;
    std::vector<int> labels;
    Matrix vectors;

    std::size_t size() const noexcept { return vectors.rows(); }
    std::size_t dimension() const noexcept { return vectors.cols(); }

    // Throws DataError on shape mismatch or non-finite entries.
    void validate() const;

    // Rows grouped by class label 1..class_count; entry k - 1 holds class k.
    std::vector<Matrix> by_class(int class_count) const;
};

EmbeddingSet embed_histogram(const LabeledDataset& dataset, std::size_t iterations,
                             std::span<const RootedPattern> patterns);

// Unrooted Hom(F, G) per pattern; roots are ignored. Empty pattern lists are
// rejected.
EmbeddingSet embed_hom(const LabeledDataset& dataset, std::span<const RootedPattern> patterns);

enum class Activation { relu, tanh, sigmoid };
enum class Readout { sum, mean };
enum class Normalization { none, l1, l2 };

std::string_view to_string(Activation a);
std::string_view to_string(Readout r);
std::string_view to_string(Normalization n);
Activation parse_activation(std::string_view s);
Readout parse_readout(std::string_view s);
Normalization parse_normalization(std::string_view s);

struct MpnnLayer {
    Matrix weight;  // (out, in)
    std::vector<double> bias;
};

// Layer update h' = act(W (h + sum_{u in N(v)} h_u) + b); readout then optional
// normalization. When `weights` is empty they are drawn uniformly from
// [-1/sqrt(fan_in), 1/sqrt(fan_in)] with `seed`.
struct MpnnConfig {
    std::size_t layers = 2;
    std::size_t hidden = 64;
    Activation activation = Activation::tanh;
    Readout readout = Readout::sum;
    Normalization normalization = Normalization::none;
    std::uint64_t seed = 0;
    std::vector<MpnnLayer> weights;
};

MpnnConfig mpnn_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MpnnConfig& config, bool include_weights = false);

// Explicit weights are validated against input_dim; otherwise fresh ones are
// drawn from the seed. Throws UsageError on shape mismatch.
std::vector<MpnnLayer> resolve_weights(const MpnnConfig& config, std::size_t input_dim);

// Node input is the feature row followed by rooted hom counts of `patterns`.
EmbeddingSet mpnn_forward(const LabeledDataset& dataset, const MpnnConfig& config,
                          std::span<const RootedPattern> patterns);

// Upper bound on pairwise embedding distance implied by the configuration
// alone, when one exists (bounded activation with mean readout, or l1/l2
// normalization).
std::optional<double> mpnn_distance_bound(const MpnnConfig& config);

struct NormalizedEmbeddings {
    EmbeddingSet set;
    std::size_t zero_vectors = 0;  // left unchanged
};

NormalizedEmbeddings normalize(EmbeddingSet set, Normalization mode);

// Largest pairwise Euclidean distance. Throws UsageError on an empty set.
double empirical_B(const EmbeddingSet& set);
// Smallest pairwise distance above equality_tolerance; +inf if no pair is
// separated. Throws UsageError on an empty set.
double empirical_S(const EmbeddingSet& set);

// Convenience overload for embedding sets.
std::vector<DistinguishedPair> check_power_order(const EmbeddingSet& low, const EmbeddingSet& high);

// CSV with header "graph_id,label,dim_0,...,dim_{d-1}".
std::string format_embeddings_csv(const EmbeddingSet& set);
EmbeddingSet parse_embeddings_csv(std::string_view text, std::string encoder_id);
void export_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet import_embeddings(const std::filesystem::path& path);

}  // namespace wlbound
