#include "wlbound/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wlbound/error.hpp"
#include "wlbound/hom.hpp"
#include "wlbound/kernels.hpp"
#include "wlbound/rng.hpp"
#include "wlbound/text.hpp"

namespace wlbound {

void EmbeddingSet::validate() const {
    if (graph_ids.size() != vectors.rows() || labels.size() != vectors.rows()) {
        throw DataError("embedding set '" + encoder_id + "' has mismatched row counts");
    }
    for (std::size_t r = 0; r < vectors.rows(); ++r) {
        for (double x : vectors.row(r)) {
            if (!std::isfinite(x)) {
                throw DataError("embedding set '" + encoder_id + "' has a non-finite value in row " + std::to_string(r));
            }
        }
    }
}

std::vector<Matrix> EmbeddingSet::by_class(int class_count) const {
    std::vector<Matrix> out(static_cast<std::size_t>(std::max(class_count, 0)));
    for (auto& m : out) m = Matrix(0, dimension());
    for (std::size_t r = 0; r < size(); ++r) {
        const int y = labels[r];
        if (y < 1 || y > class_count) throw DataError("label " + std::to_string(y) + " outside 1.." + std::to_string(class_count));
        out[static_cast<std::size_t>(y - 1)].append_row(vectors.row(r));
    }
    return out;
}

namespace {

std::string join_names(std::span<const RootedPattern> patterns) {
    std::string out;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        if (i) out += ',';
        out += patterns[i].name();
    }
    return out;
}

EmbeddingSet empty_set_for(const LabeledDataset& dataset, std::string id, std::size_t dim) {
    EmbeddingSet set;
    set.encoder_id = std::move(id);
    set.vectors = Matrix(dataset.size(), dim);
    set.labels = dataset.labels;
    set.graph_ids.resize(dataset.size());
    for (std::size_t g = 0; g < dataset.size(); ++g) set.graph_ids[g] = g;
    return set;
}

}  // namespace

EmbeddingSet embed_histogram(const LabeledDataset& dataset, std::size_t iterations,
                             std::span<const RootedPattern> patterns) {
    const auto refinement = wl_refine(dataset.graphs, iterations, patterns);
    const auto hist = histograms(refinement.iterations.back());
    std::string id = "wl(L=" + std::to_string(iterations);
    if (!patterns.empty()) id += ";F=" + join_names(patterns);
    id += ")";
    EmbeddingSet set = empty_set_for(dataset, id, refinement.iterations.back().color_count());
    for (std::size_t g = 0; g < hist.size(); ++g) {
        for (std::size_t c = 0; c < hist[g].counts.size(); ++c) set.vectors(g, c) = static_cast<double>(hist[g].counts[c]);
    }
    return set;
}

EmbeddingSet embed_hom(const LabeledDataset& dataset, std::span<const RootedPattern> patterns) {
    if (patterns.empty()) throw UsageError("hom encoder needs at least one pattern");
    EmbeddingSet set = empty_set_for(dataset, "hom(" + join_names(patterns) + ")", patterns.size());
    for (std::size_t g = 0; g < dataset.size(); ++g) {
        for (std::size_t p = 0; p < patterns.size(); ++p) {
            set.vectors(g, p) = static_cast<double>(hom_count(patterns[p].graph(), dataset.graphs[g]));
        }
    }
    return set;
}

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

std::string_view to_string(Readout r) { return r == Readout::sum ? "sum" : "mean"; }

std::string_view to_string(Normalization n) {
    switch (n) {
        case Normalization::none: return "none";
        case Normalization::l1: return "l1";
        case Normalization::l2: return "l2";
    }
    return "?";
}

Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    throw UsageError("unknown activation '" + std::string(s) + "'");
}

Readout parse_readout(std::string_view s) {
    if (s == "sum") return Readout::sum;
    if (s == "mean") return Readout::mean;
    throw UsageError("unknown readout '" + std::string(s) + "'");
}

Normalization parse_normalization(std::string_view s) {
    if (s == "none") return Normalization::none;
    if (s == "l1") return Normalization::l1;
    if (s == "l2") return Normalization::l2;
    throw UsageError("unknown normalization '" + std::string(s) + "'");
}

MpnnConfig mpnn_config_from_json(const nlohmann::json& j) {
    MpnnConfig c;
    try {
        c.layers = j.value("layers", c.layers);
        c.hidden = j.value("hidden", c.hidden);
        c.activation = parse_activation(j.value("activation", std::string(to_string(c.activation))));
        c.readout = parse_readout(j.value("readout", std::string(to_string(c.readout))));
        c.normalization = parse_normalization(j.value("normalization", std::string(to_string(c.normalization))));
        c.seed = j.value("seed", c.seed);
        if (j.contains("weights")) {
            for (const auto& lj : j.at("weights")) {
                MpnnLayer layer;
                const auto& rows = lj.at("W");
                const std::size_t out = rows.size();
                const std::size_t in = out ? rows.at(0).size() : 0;
                layer.weight = Matrix(out, in);
                for (std::size_t r = 0; r < out; ++r) {
                    if (rows.at(r).size() != in) throw UsageError("ragged weight matrix in MPNN config");
                    for (std::size_t k = 0; k < in; ++k) layer.weight(r, k) = rows.at(r).at(k).get<double>();
                }
                layer.bias = lj.value("b", std::vector<double>(out, 0.0));
                c.weights.push_back(std::move(layer));
            }
            c.layers = c.weights.size();
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("invalid MPNN config: ") + e.what());
    }
    return c;
}

nlohmann::json to_json(const MpnnConfig& c, bool include_weights) {
    nlohmann::json j{{"layers", c.layers},
                     {"hidden", c.hidden},
                     {"activation", to_string(c.activation)},
                     {"readout", to_string(c.readout)},
                     {"normalization", to_string(c.normalization)},
                     {"seed", c.seed}};
    if (include_weights && !c.weights.empty()) {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& l : c.weights) {
            nlohmann::json rows = nlohmann::json::array();
            for (std::size_t r = 0; r < l.weight.rows(); ++r) {
                rows.push_back(std::vector<double>(l.weight.row(r).begin(), l.weight.row(r).end()));
            }
            layers.push_back({{"W", rows}, {"b", l.bias}});
        }
        j["weights"] = layers;
    }
    return j;
}

std::vector<MpnnLayer> resolve_weights(const MpnnConfig& config, std::size_t input_dim) {
    if (!config.weights.empty()) {
        std::size_t in = input_dim;
        for (std::size_t l = 0; l < config.weights.size(); ++l) {
            const auto& layer = config.weights[l];
            if (layer.weight.cols() != in || layer.bias.size() != layer.weight.rows()) {
                throw UsageError("MPNN layer " + std::to_string(l) + " has shape (" +
                                 std::to_string(layer.weight.rows()) + ", " + std::to_string(layer.weight.cols()) +
                                 ") with " + std::to_string(layer.bias.size()) + " biases; expected input width " +
                                 std::to_string(in));
            }
            in = layer.weight.rows();
        }
        return config.weights;
    }
    if (config.layers > 0 && config.hidden == 0) throw UsageError("MPNN hidden dimension must be positive");
    Rng rng(config.seed);
    std::vector<MpnnLayer> layers;
    std::size_t in = input_dim;
    for (std::size_t l = 0; l < config.layers; ++l) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        MpnnLayer layer{Matrix(config.hidden, in), std::vector<double>(config.hidden)};
        for (double& w : layer.weight.data()) w = rng.uniform(-scale, scale);
        for (double& b : layer.bias) b = rng.uniform(-scale, scale);
        layers.push_back(std::move(layer));
        in = config.hidden;
    }
    return layers;
}

namespace {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

Matrix node_inputs(const Graph& graph, std::span<const RootedPattern> patterns) {
    const std::size_t d0 = graph.feature_dim();
    Matrix h(graph.vertex_count(), d0 + patterns.size());
    for (Vertex v = 0; v < graph.vertex_count(); ++v) {
        std::copy(graph.features().row(v).begin(), graph.features().row(v).end(), h.row(v).begin());
    }
    for (std::size_t p = 0; p < patterns.size(); ++p) {
        const auto counts = hom_count_rooted_all(patterns[p], graph);
        for (Vertex v = 0; v < graph.vertex_count(); ++v) h(v, d0 + p) = static_cast<double>(counts[v]);
    }
    return h;
}

}  // namespace

EmbeddingSet mpnn_forward(const LabeledDataset& dataset, const MpnnConfig& config,
                          std::span<const RootedPattern> patterns) {
    dataset.validate();
    const std::size_t input_dim = dataset.graphs.front().feature_dim() + patterns.size();
    const auto layers = resolve_weights(config, input_dim);
    const std::size_t out_dim = layers.empty() ? input_dim : layers.back().weight.rows();

    std::ostringstream id;
    id << "mpnn(L=" << layers.size() << ";h=" << out_dim << ';' << to_string(config.activation) << ';'
       << to_string(config.readout) << ';' << to_string(config.normalization) << ";seed=" << config.seed;
    if (!patterns.empty()) id << ";F=" << join_names(patterns);
    id << ')';
    EmbeddingSet set = empty_set_for(dataset, id.str(), out_dim);

    for (std::size_t g = 0; g < dataset.size(); ++g) {
        const Graph& graph = dataset.graphs[g];
        Matrix h = node_inputs(graph, patterns);
        for (const auto& layer : layers) {
            Matrix aggregated = h;
            for (Vertex v = 0; v < graph.vertex_count(); ++v) {
                for (Vertex u : graph.neighbors(v)) kernels::axpy(1.0, h.row(u), aggregated.row(v));
            }
            Matrix next(graph.vertex_count(), layer.weight.rows());
            for (Vertex v = 0; v < graph.vertex_count(); ++v) {
                auto out = next.row(v);
                kernels::gemv(layer.weight, aggregated.row(v), out);
                for (std::size_t k = 0; k < out.size(); ++k) out[k] = activate(config.activation, out[k] + layer.bias[k]);
            }
            h = std::move(next);
        }
        auto pooled = set.vectors.row(g);
        for (Vertex v = 0; v < graph.vertex_count(); ++v) kernels::axpy(1.0, h.row(v), pooled);
        if (config.readout == Readout::mean && graph.vertex_count() > 0) {
            for (double& x : pooled) x /= static_cast<double>(graph.vertex_count());
        }
    }
    auto normalized = normalize(std::move(set), config.normalization);
    normalized.set.encoder_id = id.str();
    normalized.set.validate();
    return std::move(normalized.set);
}

std::optional<double> mpnn_distance_bound(const MpnnConfig& config) {
    if (config.normalization != Normalization::none) return 2.0;
    if (config.readout != Readout::mean || config.layers == 0) return std::nullopt;
    const std::size_t width = config.weights.empty() ? config.hidden : config.weights.back().weight.rows();
    const double root = std::sqrt(static_cast<double>(width));
    switch (config.activation) {
        case Activation::tanh: return 2.0 * root;
        case Activation::sigmoid: return root;
        case Activation::relu: return std::nullopt;
    }
    return std::nullopt;
}

NormalizedEmbeddings normalize(EmbeddingSet set, Normalization mode) {
    NormalizedEmbeddings out{std::move(set), 0};
    if (mode == Normalization::none) return out;
    for (std::size_t r = 0; r < out.set.size(); ++r) {
        auto row = out.set.vectors.row(r);
        double norm = 0.0;
        if (mode == Normalization::l1) {
            for (double x : row) norm += std::abs(x);
        } else {
            norm = std::sqrt(kernels::dot(row, row));
        }
        if (norm == 0.0) {
            ++out.zero_vectors;
            continue;
        }
        for (double& x : row) x /= norm;
    }
    out.set.encoder_id += "+" + std::string(to_string(mode));
    return out;
}

double empirical_B(const EmbeddingSet& set) {
    if (set.size() == 0) throw UsageError("empirical B of an empty embedding set");
    double best = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            best = std::max(best, kernels::distance(set.vectors.row(i), set.vectors.row(j)));
        }
    }
    return best;
}

double empirical_S(const EmbeddingSet& set) {
    if (set.size() == 0) throw UsageError("empirical S of an empty embedding set");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            if (!distinguishes(set.vectors.row(i), set.vectors.row(j))) continue;
            best = std::min(best, kernels::distance(set.vectors.row(i), set.vectors.row(j)));
        }
    }
    return best;
}

std::vector<DistinguishedPair> check_power_order(const EmbeddingSet& low, const EmbeddingSet& high) {
    if (low.graph_ids != high.graph_ids) throw UsageError("encoders were evaluated on different graphs");
    return check_power_order(low.vectors, high.vectors);
}

std::string format_embeddings_csv(const EmbeddingSet& set) {
    std::string out = "graph_id,label";
    for (std::size_t d = 0; d < set.dimension(); ++d) out += ",dim_" + std::to_string(d);
    out += '\n';
    for (std::size_t r = 0; r < set.size(); ++r) {
        out += std::to_string(set.graph_ids[r]);
        out += ',';
        out += std::to_string(set.labels[r]);
        for (double x : set.vectors.row(r)) {
            out += ',';
            out += text::format_double(x);
        }
        out += '\n';
    }
    return out;
}

EmbeddingSet parse_embeddings_csv(std::string_view contents, std::string encoder_id) {
    EmbeddingSet set;
    set.encoder_id = std::move(encoder_id);
    const auto rows = text::lines(contents);
    std::size_t line_no = 0;
    std::size_t dim = 0;
    bool header_seen = false;
    for (std::string_view line : rows) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto cols = text::split(line, ',');
        if (!header_seen) {
            if (cols.size() < 2 || cols[0] != "graph_id" || cols[1] != "label") {
                throw DataError("embedding CSV must start with header 'graph_id,label,dim_0,...'");
            }
            for (std::size_t d = 2; d < cols.size(); ++d) {
                if (cols[d] != "dim_" + std::to_string(d - 2)) {
                    throw DataError("embedding CSV header column " + std::to_string(d) + " should be dim_" +
                                    std::to_string(d - 2));
                }
            }
            dim = cols.size() - 2;
            set.vectors = Matrix(0, dim);
            header_seen = true;
            continue;
        }
        if (cols.size() != dim + 2) {
            throw DataError("embedding CSV row on line " + std::to_string(line_no) + " has " +
                            std::to_string(cols.size() - 2) + " dimensions, header declares " + std::to_string(dim));
        }
        set.graph_ids.push_back(text::parse_int<std::size_t>(cols[0], line_no));
        set.labels.push_back(text::parse_int<int>(cols[1], line_no));
        std::vector<double> values(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            values[d] = text::parse_double(cols[d + 2], line_no);
            if (!std::isfinite(values[d])) {
                throw DataError("embedding CSV row on line " + std::to_string(line_no) + " has a non-finite value");
            }
        }
        set.vectors.append_row(values);
    }
    if (!header_seen) throw DataError("embedding CSV is empty");
    if (dim == 0) throw DataError("embedding CSV has zero dimensions");
    return set;
}

void export_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
    text::write_file(path, format_embeddings_csv(set));
}

EmbeddingSet import_embeddings(const std::filesystem::path& path) {
    return parse_embeddings_csv(text::read_file(path), path.stem().string());
}

}  // namespace wlbound
