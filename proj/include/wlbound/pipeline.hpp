#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wlbound/bounds.hpp"
#include "wlbound/encoders.hpp"
#include "wlbound/graph.hpp"
#include "wlbound/tu_dataset.hpp"

namespace wlbound {

enum class EncoderKind { wl, hom, mpnn, import };

struct EncoderSpec {
    EncoderKind kind = EncoderKind::wl;
    std::size_t iterations = 1;           // wl
    std::vector<std::string> patterns;    // wl, hom, mpnn
    Normalization normalization = Normalization::none;
    MpnnConfig mpnn;                      // mpnn
    std::filesystem::path path;           // import
};

EncoderSpec encoder_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EncoderSpec& spec);

EmbeddingSet encode(const LabeledDataset& dataset, const EncoderSpec& spec);

struct BoundSettings {
    MarginParams params;
    std::size_t pairs = 1;
    std::uint64_t seed = 0;
    std::string variant = "sample";  // "sample" or "separation"
    std::optional<std::vector<double>> margins;
};

struct RunConfig {
    std::filesystem::path dataset_path;
    std::string dataset_name;
    EncoderSpec lambda;
    EncoderSpec phi;
    BoundSettings bound;
    std::filesystem::path output_dir;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

struct DatasetSummary {
    std::size_t graphs = 0;
    int classes = 0;
    std::vector<std::size_t> class_sizes;
    std::vector<long long> label_mapping;
    std::size_t feature_dim = 0;
    std::size_t min_vertices = 0, max_vertices = 0;
    double mean_vertices = 0.0;
    std::size_t min_edges = 0, max_edges = 0;
    double mean_edges = 0.0;
    std::size_t min_degree = 0, max_degree = 0;
    double mean_degree = 0.0;
    TuLoadReport load;
};

DatasetSummary summarize(const LabeledDataset& dataset, const TuLoadReport& load = {});
DatasetSummary cmd_dataset_inspect(const std::filesystem::path& dir, const std::string& name);
nlohmann::json to_json(const DatasetSummary& summary);

struct PipelineResult {
    BoundReport bound;
    LipschitzEstimate lip;
    EmbeddingSet lambda;
    EmbeddingSet phi;
    nlohmann::json report;  // what is written to report.json
};

// Loads the dataset, embeds with lambda and phi, estimates Lip(f) and
// evaluates the bound. Errors name the failing stage. Factorization
// violations and a non-estimable Lip(f) raise NumericalError.
PipelineResult run_pipeline(const RunConfig& config, const LabeledDataset& dataset, std::uint64_t dataset_hash);
PipelineResult cmd_pipeline(const RunConfig& config);

// Writes lambda_embeddings.csv, phi_embeddings.csv, report.json and
// bound_terms.svg into config.output_dir.
void write_pipeline_outputs(const PipelineResult& result, const std::filesystem::path& dir);

struct CaseStudyEncoder {
    std::string name;
    std::vector<std::string> patterns;
    std::size_t iterations = 1;
};

struct CaseStudyRow {
    std::string encoder_id;
    Matrix vectors;                     // rows: G, G', H, H'
    std::vector<double> difference;     // G - G'
    double intra_w1 = 0.0;              // W1(delta_G, delta_G')
    double inter_w1 = 0.0;              // W1(uniform{G, G'}, uniform{H, H'})
    double inter_w1_single = 0.0;       // W1(uniform{G, G'}, delta_H')
};

// Default encoders: 1-WL(1), WL_{C4}(1), WL_{K4}(1).
std::vector<CaseStudyEncoder> default_case_study_encoders();

// Needs exactly four graphs, two per class; the first two (in dataset order)
// of the lower class are G, G' and the other two are H, H'.
std::vector<CaseStudyRow> cmd_case_study(const LabeledDataset& dataset,
                                         const std::vector<CaseStudyEncoder>& encoders = default_case_study_encoders());
nlohmann::json to_json(const std::vector<CaseStudyRow>& rows);

// Hand-written SVG bar chart. Labels are XML-escaped.
std::string render_bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars);
std::vector<std::pair<std::string, double>> bound_terms(const nlohmann::json& bound_report);

}  // namespace wlbound
