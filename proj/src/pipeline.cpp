#include "wlbound/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "wlbound/error.hpp"
#include "wlbound/text.hpp"
#include "wlbound/transport.hpp"

namespace wlbound {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void rethrow_in_stage(const char* name, const Error& e) {
    const std::string message = std::string("stage '") + name + "': " + e.what();
    switch (e.kind()) {
        case ErrorKind::usage: throw UsageError(message);
        case ErrorKind::data: throw DataError(message);
        case ErrorKind::numerical: throw NumericalError(message);
    }
    throw Error(e.kind(), message);
}

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        rethrow_in_stage(name, e);
    } catch (const json::exception& e) {
        throw UsageError(std::string("stage '") + name + "': " + e.what());
    }
}

std::string_view kind_name(EncoderKind k) {
    switch (k) {
        case EncoderKind::wl: return "wl";
        case EncoderKind::hom: return "hom";
        case EncoderKind::mpnn: return "mpnn";
        case EncoderKind::import: return "import";
    }
    return "?";
}

EncoderKind parse_kind(std::string_view s) {
    if (s == "wl") return EncoderKind::wl;
    if (s == "hom") return EncoderKind::hom;
    if (s == "mpnn") return EncoderKind::mpnn;
    if (s == "import") return EncoderKind::import;
    throw UsageError("unknown encoder kind '" + std::string(s) + "' (expected wl, hom, mpnn or import)");
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json finite_or_label(double v, const char* label) {
    if (std::isfinite(v)) return v;
    return label;
}

}  // namespace

EncoderSpec encoder_spec_from_json(const json& j) {
    try {
        EncoderSpec s;
        s.kind = parse_kind(j.at("kind").get<std::string>());
        s.iterations = j.value("iterations", s.iterations);
        s.patterns = j.value("patterns", std::vector<std::string>{});
        if (s.kind == EncoderKind::mpnn) {
            s.mpnn = mpnn_config_from_json(j.value("mpnn", json::object()));
            s.normalization = s.mpnn.normalization;
        }
        if (j.contains("normalization")) s.normalization = parse_normalization(j.at("normalization").get<std::string>());
        s.mpnn.normalization = s.normalization;
        if (s.kind == EncoderKind::import) s.path = j.at("path").get<std::string>();
        return s;
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid encoder spec: ") + e.what());
    }
}

json to_json(const EncoderSpec& s) {
    json j{{"kind", kind_name(s.kind)}, {"normalization", to_string(s.normalization)}};
    switch (s.kind) {
        case EncoderKind::wl:
            j["iterations"] = s.iterations;
            j["patterns"] = s.patterns;
            break;
        case EncoderKind::hom: j["patterns"] = s.patterns; break;
        case EncoderKind::mpnn:
            j["patterns"] = s.patterns;
            j["mpnn"] = to_json(s.mpnn, true);
            break;
        case EncoderKind::import: j["path"] = s.path.string(); break;
    }
    return j;
}

EmbeddingSet encode(const LabeledDataset& dataset, const EncoderSpec& spec) {
    const auto patterns = patterns_from_specs(spec.patterns);
    switch (spec.kind) {
        case EncoderKind::wl:
            return normalize(embed_histogram(dataset, spec.iterations, patterns), spec.normalization).set;
        case EncoderKind::hom: return normalize(embed_hom(dataset, patterns), spec.normalization).set;
        case EncoderKind::mpnn: {
            MpnnConfig config = spec.mpnn;
            config.normalization = spec.normalization;
            return mpnn_forward(dataset, config, patterns);
        }
        case EncoderKind::import: {
            EmbeddingSet set = import_embeddings(spec.path);
            for (std::size_t r = 0; r < set.size(); ++r) {
                const std::size_t g = set.graph_ids[r];
                if (g >= dataset.size()) throw DataError("imported graph id " + std::to_string(g) + " not in dataset");
                if (set.labels[r] != dataset.labels[g]) {
                    throw DataError("imported label for graph " + std::to_string(g) + " disagrees with the dataset");
                }
            }
            return normalize(std::move(set), spec.normalization).set;
        }
    }
    throw UsageError("unsupported encoder");
}

RunConfig run_config_from_json(const json& j) {
    try {
        RunConfig c;
        const auto& ds = j.at("dataset");
        c.dataset_path = ds.at("path").get<std::string>();
        c.dataset_name = ds.at("name").get<std::string>();
        c.lambda = encoder_spec_from_json(j.at("lambda"));
        c.phi = encoder_spec_from_json(j.at("phi"));
        const json b = j.value("bound", json::object());
        c.bound.params.gamma = b.value("gamma", 1.0);
        c.bound.params.delta = b.value("delta", 0.1);
        c.bound.params.lip_rho = b.value("lip_rho", std::vector<double>{});
        c.bound.params.lip_psi = b.value("lip_psi", std::vector<double>{});
        c.bound.pairs = b.value("pairs", std::size_t{1});
        c.bound.seed = b.value("seed", std::uint64_t{0});
        c.bound.variant = b.value("variant", std::string("sample"));
        if (c.bound.variant != "sample" && c.bound.variant != "separation") {
            throw UsageError("bound variant must be 'sample' or 'separation'");
        }
        if (b.contains("margins")) c.bound.margins = b.at("margins").get<std::vector<double>>();
        c.output_dir = j.value("output", std::string("."));
        return c;
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid run config: ") + e.what());
    }
}

json to_json(const RunConfig& c) {
    json bound{{"gamma", c.bound.params.gamma},
               {"delta", c.bound.params.delta},
               {"lip_rho", c.bound.params.lip_rho},
               {"lip_psi", c.bound.params.lip_psi},
               {"pairs", c.bound.pairs},
               {"seed", c.bound.seed},
               {"variant", c.bound.variant}};
    if (c.bound.margins) bound["margins"] = *c.bound.margins;
    return json{{"dataset", {{"path", c.dataset_path.string()}, {"name", c.dataset_name}}},
                {"lambda", to_json(c.lambda)},
                {"phi", to_json(c.phi)},
                {"bound", bound},
                {"output", c.output_dir.string()}};
}

DatasetSummary summarize(const LabeledDataset& dataset, const TuLoadReport& load) {
    dataset.validate();
    DatasetSummary s;
    s.graphs = dataset.size();
    s.classes = dataset.class_count;
    s.class_sizes = dataset.class_sizes();
    s.label_mapping = dataset.original_labels;
    s.feature_dim = dataset.graphs.front().feature_dim();
    s.load = load;
    s.min_vertices = s.min_edges = s.min_degree = std::numeric_limits<std::size_t>::max();
    std::size_t total_vertices = 0, total_edges = 0, total_degree = 0;
    for (const auto& g : dataset.graphs) {
        s.min_vertices = std::min(s.min_vertices, g.vertex_count());
        s.max_vertices = std::max(s.max_vertices, g.vertex_count());
        s.min_edges = std::min(s.min_edges, g.edge_count());
        s.max_edges = std::max(s.max_edges, g.edge_count());
        total_vertices += g.vertex_count();
        total_edges += g.edge_count();
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            s.min_degree = std::min(s.min_degree, g.degree(v));
            s.max_degree = std::max(s.max_degree, g.degree(v));
            total_degree += g.degree(v);
        }
    }
    if (total_vertices == 0) s.min_degree = 0;
    s.mean_vertices = static_cast<double>(total_vertices) / static_cast<double>(s.graphs);
    s.mean_edges = static_cast<double>(total_edges) / static_cast<double>(s.graphs);
    s.mean_degree = total_vertices ? static_cast<double>(total_degree) / static_cast<double>(total_vertices) : 0.0;
    return s;
}

DatasetSummary cmd_dataset_inspect(const fs::path& dir, const std::string& name) {
    auto loaded = parse_tu_dataset(dir, name);
    return summarize(loaded.dataset, loaded.report);
}

json to_json(const DatasetSummary& s) {
    return json{{"graphs", s.graphs},
                {"classes", s.classes},
                {"class_sizes", s.class_sizes},
                {"label_mapping", s.label_mapping},
                {"feature_dim", s.feature_dim},
                {"vertices", {{"min", s.min_vertices}, {"max", s.max_vertices}, {"mean", s.mean_vertices}}},
                {"edges", {{"min", s.min_edges}, {"max", s.max_edges}, {"mean", s.mean_edges}}},
                {"degree", {{"min", s.min_degree}, {"max", s.max_degree}, {"mean", s.mean_degree}}},
                {"load",
                 {{"duplicate_edges", s.load.duplicate_edges},
                  {"symmetrized_edges", s.load.symmetrized_edges},
                  {"dropped_self_loops", s.load.dropped_self_loops},
                  {"has_node_labels", s.load.has_node_labels},
                  {"node_label_values", s.load.node_label_values}}}};
}

PipelineResult run_pipeline(const RunConfig& config, const LabeledDataset& dataset, std::uint64_t dataset_hash) {
    PipelineResult r;
    r.lambda = stage("embed lambda", [&] { return encode(dataset, config.lambda); });
    r.phi = stage("embed phi", [&] { return encode(dataset, config.phi); });
    r.lip = stage("estimate Lip(f)", [&] {
        auto lip = lip_f_estimate(r.phi, r.lambda);
        if (!lip.violations.empty()) {
            const auto& v = lip.violations.front();
            throw NumericalError(std::to_string(lip.violations.size()) +
                                 " factorization violation(s): lambda cannot tell graphs " + std::to_string(v.first) +
                                 " and " + std::to_string(v.second) + " apart but phi can");
        }
        if (!lip.estimable) throw NumericalError("Lip(f) not estimable: lambda maps every graph to the same point");
        return lip;
    });
    r.bound = stage("bound", [&] {
        const auto classes = r.lambda.by_class(dataset.class_count);
        BoundReport b = config.bound.variant == "separation"
                            ? separation_bound(classes, config.bound.params, r.lip.estimate, config.bound.pairs,
                                               config.bound.seed, config.bound.margins)
                            : sample_bound(classes, config.bound.params, r.lip.estimate, config.bound.pairs,
                                           config.bound.seed);
        b.provenance = {{"seed", config.bound.seed},
                        {"lambda", r.lambda.encoder_id},
                        {"phi", r.phi.encoder_id},
                        {"dataset_hash", hex64(dataset_hash)}};
        return b;
    });

    const auto sizes = dataset.class_sizes();
    r.report = json{
        {"config", to_json(config)},
        {"dataset",
         {{"name", config.dataset_name}, {"hash", hex64(dataset_hash)}, {"graphs", dataset.size()}, {"class_sizes", sizes}}},
        {"lambda",
         {{"encoder_id", r.lambda.encoder_id},
          {"dimension", r.lambda.dimension()},
          {"empirical_S", finite_or_label(empirical_S(r.lambda), "unseparated")}}},
        {"phi",
         {{"encoder_id", r.phi.encoder_id},
          {"dimension", r.phi.dimension()},
          {"empirical_B", empirical_B(r.phi)}}},
        {"lip_f",
         {{"estimate", r.lip.estimate},
          {"pairs_used", r.lip.pairs_used},
          {"skipped_pairs", r.lip.skipped_pairs},
          {"violations", r.lip.violations.size()}}},
        {"seeds", {{"bound", config.bound.seed}, {"mpnn", config.phi.mpnn.seed}}},
        {"bound", to_json(r.bound)}};
    if (r.bound.separation && r.bound.separation->large_margin == "satisfied" && !r.bound.separation->dominance_holds) {
        throw NumericalError("stage 'bound': large-margin precondition holds but the separation bound exceeds the "
                             "theorem-style bound");
    }
    return r;
}

PipelineResult cmd_pipeline(const RunConfig& config) {
    auto loaded = stage("dataset", [&] { return parse_tu_dataset(config.dataset_path, config.dataset_name); });
    const auto hash = tu_dataset_hash(config.dataset_path, config.dataset_name);
    auto result = run_pipeline(config, loaded.dataset, hash);
    stage("write outputs", [&] {
        write_pipeline_outputs(result, config.output_dir);
        return 0;
    });
    return result;
}

void write_pipeline_outputs(const PipelineResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    export_embeddings(result.lambda, dir / "lambda_embeddings.csv");
    export_embeddings(result.phi, dir / "phi_embeddings.csv");
    text::write_file(dir / "report.json", result.report.dump(2) + "\n");
    text::write_file(dir / "bound_terms.svg",
                     render_bar_chart("Bound terms: " + result.phi.encoder_id + " vs " + result.lambda.encoder_id,
                                      bound_terms(result.report.at("bound"))));
}

std::vector<CaseStudyEncoder> default_case_study_encoders() {
    return {{"1-WL", {}, 1}, {"WL_C4", {"C4"}, 1}, {"WL_K4", {"K4"}, 1}};
}

std::vector<CaseStudyRow> cmd_case_study(const LabeledDataset& dataset, const std::vector<CaseStudyEncoder>& encoders) {
    dataset.validate();
    if (dataset.size() != 4 || dataset.class_count != 2) {
        throw UsageError("case study needs exactly four graphs in two classes");
    }
    std::vector<std::size_t> order;
    for (int label : {1, 2}) {
        for (std::size_t g = 0; g < dataset.size(); ++g) {
            if (dataset.labels[g] == label) order.push_back(g);
        }
    }
    const auto sizes = dataset.class_sizes();
    if (sizes[0] != 2 || sizes[1] != 2) throw UsageError("case study needs two graphs per class");

    LabeledDataset ordered;
    ordered.class_count = 2;
    ordered.original_labels = dataset.original_labels;
    for (std::size_t g : order) {
        ordered.graphs.push_back(dataset.graphs[g]);
        ordered.labels.push_back(dataset.labels[g]);
    }

    std::vector<CaseStudyRow> rows;
    for (const auto& enc : encoders) {
        const auto patterns = patterns_from_specs(enc.patterns);
        const EmbeddingSet set = embed_histogram(ordered, enc.iterations, patterns);
        CaseStudyRow row;
        row.encoder_id = enc.name + " " + set.encoder_id;
        row.vectors = set.vectors;
        const auto g = set.vectors.row(0);
        const auto g2 = set.vectors.row(1);
        row.difference.resize(set.dimension());
        for (std::size_t d = 0; d < set.dimension(); ++d) row.difference[d] = g[d] - g2[d];
        row.intra_w1 = w1_exact(DiscreteDistribution::dirac(g), DiscreteDistribution::dirac(g2)).cost;

        Matrix first(0, set.dimension()), second(0, set.dimension());
        first.append_row(g);
        first.append_row(g2);
        second.append_row(set.vectors.row(2));
        second.append_row(set.vectors.row(3));
        row.inter_w1 = w1_exact(DiscreteDistribution::uniform(first), DiscreteDistribution::uniform(second)).cost;
        row.inter_w1_single =
            w1_exact(DiscreteDistribution::uniform(first), DiscreteDistribution::dirac(set.vectors.row(3))).cost;
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const std::vector<CaseStudyRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json vectors = json::array();
        for (std::size_t i = 0; i < r.vectors.rows(); ++i) {
            vectors.push_back(std::vector<double>(r.vectors.row(i).begin(), r.vectors.row(i).end()));
        }
        out.push_back({{"encoder", r.encoder_id},
                       {"embeddings", {{"G", vectors[0]}, {"G'", vectors[1]}, {"H", vectors[2]}, {"H'", vectors[3]}}},
                       {"difference", r.difference},
                       {"intra_w1", r.intra_w1},
                       {"inter_w1", r.inter_w1},
                       {"inter_w1_single", r.inter_w1_single}});
    }
    return out;
}

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string render_bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars) {
    constexpr int label_width = 260;
    constexpr int plot_width = 360;
    constexpr int row_height = 26;
    constexpr int top = 40;
    const int height = top + row_height * static_cast<int>(bars.size()) + 20;
    const int width = label_width + plot_width + 100;
    double max_value = 0.0;
    for (const auto& [_, v] : bars) max_value = std::max(max_value, std::abs(v));
    if (max_value == 0.0) max_value = 1.0;

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "  <text x=\"10\" y=\"22\" font-size=\"14\" font-weight=\"bold\">" << xml_escape(title) << "</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& [label, value] = bars[i];
        const int y = top + static_cast<int>(i) * row_height;
        const double w = plot_width * std::abs(value) / max_value;
        os << "  <g class=\"bar\">\n";
        os << "    <text x=\"" << label_width - 8 << "\" y=\"" << y + 15 << "\" text-anchor=\"end\">"
           << xml_escape(label) << "</text>\n";
        os << "    <rect x=\"" << label_width << "\" y=\"" << y + 3 << "\" width=\"" << fixed(w, 2)
           << "\" height=\"" << row_height - 8 << "\" fill=\"" << (value < 0 ? "#c0504d" : "#4f81bd") << "\"/>\n";
        os << "    <text x=\"" << fixed(label_width + w + 6, 2) << "\" y=\"" << y + 15 << "\">" << fixed(value, 4)
           << "</text>\n";
        os << "  </g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<std::pair<std::string, double>> bound_terms(const json& r) {
    std::vector<std::pair<std::string, double>> bars;
    const std::string kind = r.at("kind").get<std::string>();
    const double scale = r.at("lip_f").get<double>() / r.at("gamma").get<double>();
    for (const auto& t : r.at("classes")) {
        const std::string c = "class " + std::to_string(t.at("label").get<int>());
        const double w = t.at("weight").get<double>() * t.at("lip_rho").get<double>();
        if (kind == "sample") {
            bars.emplace_back(c + " split W1 term", w * scale * t.at("mean_split_w1").get<double>());
            bars.emplace_back(c + " diameter term", w * scale * t.at("deviation_term").get<double>());
        } else {
            bars.emplace_back(c + " split W1 term", t.at("class_term").get<double>());
        }
    }
    if (kind == "separation") {
        const auto& s = r.at("separation");
        bars.emplace_back("separation numerator", s.at("numerator").get<double>());
        bars.emplace_back("separation denominator", s.at("denominator").get<double>());
        bars.emplace_back("theorem-style bound", s.at("theorem_bound").get<double>());
    }
    bars.emplace_back("expectation term", r.at("expectation_term").get<double>());
    bars.emplace_back("confidence term", r.at("confidence_term").get<double>());
    bars.emplace_back("bound", r.at("bound").get<double>());
    return bars;
}

}  // namespace wlbound
