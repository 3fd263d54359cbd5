#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wlbound/bounds.hpp"
#include "wlbound/encoders.hpp"
#include "wlbound/error.hpp"
#include "wlbound/graph.hpp"
#include "wlbound/hom.hpp"
#include "wlbound/pipeline.hpp"
#include "wlbound/synthetic.hpp"
#include "wlbound/text.hpp"
#include "wlbound/transport.hpp"
#include "wlbound/tu_dataset.hpp"
#include "wlbound/wl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wlbound;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
};

struct GraphSource {
    std::string dataset;
    std::string name;
    std::vector<std::string> graphs;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dataset", dataset, "TU dataset directory");
        cmd->add_option("--name", name, "TU dataset name (file prefix)");
        cmd->add_option("--graph", graphs, "Edge-list graph file (repeatable)");
    }

    LabeledDataset load() const {
        if (!dataset.empty()) {
            if (name.empty()) throw UsageError("--dataset needs --name");
            return parse_tu_dataset(dataset, name).dataset;
        }
        if (graphs.empty()) throw UsageError("give --dataset/--name or at least one --graph");
        LabeledDataset ds;
        for (const auto& path : graphs) {
            ds.graphs.push_back(parse_edge_list(text::read_file(path)).graph);
            ds.labels.push_back(1);
        }
        ds.class_count = 1;
        ds.original_labels = {1};
        return ds;
    }
};

json read_json_file(const std::string& path) {
    try {
        return json::parse(text::read_file(path));
    } catch (const json::parse_error& e) {
        throw UsageError("cannot parse JSON in " + path + ": " + e.what());
    }
}

json load_config(const Globals& g) { return g.config.empty() ? json::object() : read_json_file(g.config); }

// Writes to <out>/<file> when --out is set, otherwise to stdout.
void emit(const Globals& g, const std::string& file, const std::string& content) {
    if (g.out.empty()) {
        std::cout << content;
        return;
    }
    fs::create_directories(g.out);
    text::write_file(fs::path(g.out) / file, content);
    if (!g.quiet) std::cerr << "wrote " << (fs::path(g.out) / file).string() << "\n";
}

std::string fmt(double v) { return text::format_double(v); }

void print_bound_table(std::ostream& os, const BoundReport& r) {
    os << "bound (" << r.kind << "): " << fmt(r.bound) << "\n";
    os << "  gamma " << fmt(r.gamma) << ", delta " << fmt(r.delta) << ", Lip(f) " << fmt(r.lip_f) << ", pairs "
       << r.pairs << ", m " << r.m << "\n";
    os << "  " << std::left << std::setw(7) << "class" << std::setw(9) << "samples" << std::setw(8) << "subset"
       << std::setw(22) << "mean W1" << std::setw(22) << "diameter" << "term\n";
    for (const auto& t : r.classes) {
        os << "  " << std::setw(7) << t.label << std::setw(9) << t.sample_count << std::setw(8) << t.subset_size
           << std::setw(22) << fmt(t.mean_split_w1) << std::setw(22) << fmt(t.diameter) << fmt(t.class_term) << "\n";
    }
    os << "  confidence " << fmt(r.confidence_term) << ", expectation " << fmt(r.expectation_term) << "\n";
    if (r.separation) {
        os << "  theorem-style " << fmt(r.separation->theorem_bound) << ", large margin "
           << r.separation->large_margin << ", dominance " << (r.separation->dominance_holds ? "holds" : "fails")
           << "\n";
    }
}

MarginParams params_from_json(const json& b) {
    MarginParams p;
    p.gamma = b.value("gamma", p.gamma);
    p.delta = b.value("delta", p.delta);
    p.lip_rho = b.value("lip_rho", std::vector<double>{});
    p.lip_psi = b.value("lip_psi", std::vector<double>{});
    return p;
}

int run(int argc, char** argv) {
    CLI::App app{"Expressivity-aware generalization bounds for graph encoders"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--seed", g.seed, "Seed overriding the configured one");
    app.add_option("--out", g.out, "Output directory");
    app.add_flag("--quiet", g.quiet, "Suppress informational output");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Dataset utilities");
    dataset->require_subcommand(1);
    auto* inspect = dataset->add_subcommand("inspect", "Summarize a TU dataset");
    std::string ds_dir, ds_name;
    inspect->add_option("--dataset", ds_dir, "TU dataset directory")->required();
    inspect->add_option("--name", ds_name, "TU dataset name")->required();
    inspect->callback([&] { emit(g, "summary.json", to_json(cmd_dataset_inspect(ds_dir, ds_name)).dump(2) + "\n"); });

    auto* synth = dataset->add_subcommand("synth", "Write the seeded two-family cycle dataset in TU format");
    std::size_t per_class = 50;
    std::string synth_name = "CYCLES";
    synth->add_option("--per-class", per_class, "Graphs per class");
    synth->add_option("--name", synth_name, "Dataset name");
    synth->callback([&] {
        if (g.out.empty()) throw UsageError("dataset synth needs --out");
        write_tu_dataset(g.out, synth_name, synthetic::cycle_families(per_class, g.seed.value_or(0)));
    });

    // hom
    auto* hom = app.add_subcommand("hom", "Rooted homomorphism counts per vertex");
    GraphSource hom_src;
    hom_src.attach(hom);
    std::vector<std::string> hom_patterns;
    hom->add_option("--patterns", hom_patterns, "Patterns such as P3, C4, K4 or file:<path>")
        ->required()
        ->delimiter(',');
    hom->callback([&] {
        const auto ds = hom_src.load();
        const auto patterns = patterns_from_specs(hom_patterns);
        std::ostringstream os;
        os << "graph_id,vertex_id,pattern_id,count\n";
        for (std::size_t gi = 0; gi < ds.size(); ++gi) {
            std::vector<std::vector<HomCount>> counts;
            for (const auto& p : patterns) counts.push_back(hom_count_rooted_all(p, ds.graphs[gi]));
            for (Vertex v = 0; v < ds.graphs[gi].vertex_count(); ++v) {
                for (std::size_t p = 0; p < patterns.size(); ++p) {
                    os << gi << ',' << v << ',' << patterns[p].name() << ',' << counts[p][v] << '\n';
                }
            }
        }
        emit(g, "hom.csv", os.str());
    });

    // wl
    auto* wl = app.add_subcommand("wl", "WL_F color refinement histograms");
    GraphSource wl_src;
    wl_src.attach(wl);
    std::size_t wl_iterations = 1;
    std::vector<std::string> wl_patterns;
    wl->add_option("-L,--iterations", wl_iterations, "Refinement iterations");
    wl->add_option("--patterns", wl_patterns, "Pattern family F (empty for 1-WL)")->delimiter(',');
    wl->callback([&] {
        const auto ds = wl_src.load();
        const auto patterns = patterns_from_specs(wl_patterns);
        const auto ref = wl_refine(ds.graphs, wl_iterations, patterns);
        std::ostringstream colors;
        colors << "iteration,color_count\n";
        for (const auto& a : ref.iterations) colors << a.iteration << ',' << a.color_count() << '\n';
        std::ostringstream hist;
        hist << "graph_id,color_id,count\n";
        for (const auto& h : histograms(ref.iterations.back())) {
            for (std::size_t c = 0; c < h.counts.size(); ++c) {
                if (h.counts[c] != 0) hist << h.graph_id << ',' << c << ',' << h.counts[c] << '\n';
            }
        }
        if (g.out.empty()) {
            std::cout << colors.str() << '\n' << hist.str();
        } else {
            emit(g, "wl_colors.csv", colors.str());
            emit(g, "wl_histograms.csv", hist.str());
        }
        if (!g.quiet && ref.stable_iteration) std::cerr << "partition stable from iteration " << *ref.stable_iteration << "\n";
    });

    // embed
    auto* embed = app.add_subcommand("embed", "Embed a dataset with one encoder");
    GraphSource embed_src;
    embed_src.attach(embed);
    std::string embed_spec_file, embed_kind = "wl", embed_norm = "none", embed_mpnn;
    std::size_t embed_iterations = 1;
    std::vector<std::string> embed_patterns;
    embed->add_option("--spec", embed_spec_file, "Encoder spec JSON file (overrides the flags below)");
    embed->add_option("--kind", embed_kind, "wl, hom or mpnn");
    embed->add_option("-L,--iterations", embed_iterations, "WL iterations");
    embed->add_option("--patterns", embed_patterns, "Pattern family")->delimiter(',');
    embed->add_option("--normalization", embed_norm, "none, l1 or l2");
    embed->add_option("--mpnn", embed_mpnn, "MPNN config JSON file");
    embed->callback([&] {
        EncoderSpec spec;
        if (!embed_spec_file.empty()) {
            spec = encoder_spec_from_json(read_json_file(embed_spec_file));
        } else {
            json j{{"kind", embed_kind},
                   {"iterations", embed_iterations},
                   {"patterns", embed_patterns},
                   {"normalization", embed_norm}};
            if (!embed_mpnn.empty()) j["mpnn"] = read_json_file(embed_mpnn);
            spec = encoder_spec_from_json(j);
        }
        if (g.seed) spec.mpnn.seed = *g.seed;
        emit(g, "embeddings.csv", format_embeddings_csv(encode(embed_src.load(), spec)));
    });

    // w1
    auto* w1 = app.add_subcommand("w1", "Exact W1 between two uniform embedding clouds");
    std::string w1_a, w1_b, w1_plan;
    w1->add_option("first", w1_a, "Embedding CSV")->required();
    w1->add_option("second", w1_b, "Embedding CSV")->required();
    w1->add_option("--plan", w1_plan, "Write the optimal plan CSV here");
    w1->callback([&] {
        const auto a = import_embeddings(w1_a);
        const auto b = import_embeddings(w1_b);
        const auto plan = w1_exact(DiscreteDistribution::uniform(a.vectors), DiscreteDistribution::uniform(b.vectors));
        std::cout << fmt(plan.cost) << "\n";
        if (!w1_plan.empty()) {
            std::ostringstream os;
            os << "source_graph_id,target_graph_id,mass\n";
            for (const auto& e : plan.entries) {
                os << a.graph_ids[e.source] << ',' << b.graph_ids[e.target] << ',' << fmt(e.mass) << '\n';
            }
            text::write_file(w1_plan, os.str());
        }
    });

    // bound
    auto* bound = app.add_subcommand("bound", "Evaluate the margin generalization bound");
    std::string b_lambda, b_phi, b_params, b_variant = "sample", b_margins;
    std::optional<double> b_lip;
    std::size_t b_pairs = 1;
    bound->add_option("--lambda", b_lambda, "Lambda embedding CSV")->required();
    bound->add_option("--phi", b_phi, "Phi embedding CSV (Lip(f) is estimated from it)");
    bound->add_option("--lip-f", b_lip, "Lipschitz constant of f, instead of --phi");
    bound->add_option("--params", b_params, "Bound parameter JSON (gamma, delta, lip_rho, lip_psi)");
    bound->add_option("--variant", b_variant, "sample or separation")->check(CLI::IsMember({"sample", "separation"}));
    bound->add_option("-n,--pairs", b_pairs, "Number of split pairs per class");
    bound->add_option("--margins", b_margins, "CSV column of training margins (separation variant)");
    bound->callback([&] {
        if (b_phi.empty() == !b_lip.has_value()) throw UsageError("give exactly one of --phi and --lip-f");
        const json cfg = load_config(g);
        const json pj = !b_params.empty() ? read_json_file(b_params) : cfg.value("bound", json::object());
        const MarginParams params = params_from_json(pj);
        const std::uint64_t seed = g.seed.value_or(pj.value("seed", std::uint64_t{0}));
        const auto lambda = import_embeddings(b_lambda);
        double lip_f = 0.0;
        if (b_lip) {
            lip_f = *b_lip;
        } else {
            const auto lip = lip_f_estimate(import_embeddings(b_phi), lambda);
            if (!lip.violations.empty()) {
                throw NumericalError(std::to_string(lip.violations.size()) + " factorization violation(s)");
            }
            if (!lip.estimable) throw NumericalError("Lip(f) not estimable");
            lip_f = lip.estimate;
        }
        int classes = 0;
        for (int l : lambda.labels) classes = std::max(classes, l);
        const auto by_class = lambda.by_class(classes);
        BoundReport r;
        if (b_variant == "separation") {
            std::optional<std::vector<double>> margins;
            if (!b_margins.empty()) {
                std::vector<double> values;
                std::size_t line_no = 0;
                for (auto line : text::lines(text::read_file(b_margins))) {
                    ++line_no;
                    line = text::trim(text::strip_comment(line, '#'));
                    if (!line.empty()) values.push_back(text::parse_double(line, line_no));
                }
                margins = std::move(values);
            }
            r = separation_bound(by_class, params, lip_f, b_pairs, seed, margins);
        } else {
            r = sample_bound(by_class, params, lip_f, b_pairs, seed);
        }
        r.provenance = {{"seed", seed}, {"lambda", lambda.encoder_id}, {"phi", b_phi.empty() ? "" : fs::path(b_phi).stem().string()}};
        const std::string report = to_json(r).dump(2) + "\n";
        if (g.out.empty()) {
            std::cout << report;
            if (!g.quiet) print_bound_table(std::cerr, r);
        } else {
            emit(g, "bound_report.json", report);
            if (!g.quiet) print_bound_table(std::cout, r);
        }
        if (r.separation && r.separation->large_margin == "satisfied" && !r.separation->dominance_holds) {
            throw NumericalError("separation bound exceeds the theorem-style bound under the large-margin condition");
        }
    });

    // lipf
    auto* lipf = app.add_subcommand("lipf", "Estimate Lip(f) for phi = f o lambda");
    std::string l_phi, l_lambda;
    lipf->add_option("--phi", l_phi, "Phi embedding CSV")->required();
    lipf->add_option("--lambda", l_lambda, "Lambda embedding CSV")->required();
    lipf->callback([&] {
        const auto lip = lip_f_estimate(import_embeddings(l_phi), import_embeddings(l_lambda));
        json violations = json::array();
        for (const auto& v : lip.violations) violations.push_back({v.first, v.second});
        json j{{"estimate", lip.estimate},
               {"estimable", lip.estimable},
               {"pairs_used", lip.pairs_used},
               {"skipped_pairs", lip.skipped_pairs},
               {"violations", violations}};
        emit(g, "lipf.json", j.dump(2) + "\n");
        if (!lip.violations.empty()) throw NumericalError("factorization violations found");
    });

    // power-check
    auto* power = app.add_subcommand("power-check", "List pairs the higher encoder separates but the lower does not");
    std::string p_low, p_high;
    power->add_option("--low", p_low, "Embedding CSV of the encoder expected to be at least as expressive")->required();
    power->add_option("--high", p_high, "Embedding CSV of the other encoder")->required();
    power->callback([&] {
        const auto pairs = check_power_order(import_embeddings(p_low), import_embeddings(p_high));
        std::ostringstream os;
        os << "graph_a,graph_b\n";
        for (const auto& p : pairs) os << p.first << ',' << p.second << '\n';
        emit(g, "power_check.csv", os.str());
        if (!g.quiet) std::cerr << pairs.size() << " inconsistent pair(s)\n";
    });

    // case-study
    auto* case_study = app.add_subcommand("case-study", "Histogram embeddings and W1 for G, G', H, H'");
    std::vector<std::string> cs_graphs;
    std::string cs_dataset, cs_name;
    case_study->add_option("--graphs", cs_graphs, "Four edge-list files: G G' H H'")->expected(4);
    case_study->add_option("--dataset", cs_dataset, "TU dataset with four graphs");
    case_study->add_option("--name", cs_name, "TU dataset name");
    case_study->callback([&] {
        LabeledDataset ds;
        if (!cs_dataset.empty()) {
            ds = parse_tu_dataset(cs_dataset, cs_name).dataset;
        } else {
            if (cs_graphs.size() != 4) throw UsageError("case-study needs four --graphs or a --dataset");
            for (std::size_t i = 0; i < 4; ++i) {
                ds.graphs.push_back(parse_edge_list(text::read_file(cs_graphs[i])).graph);
                ds.labels.push_back(i < 2 ? 1 : 2);
            }
            ds.class_count = 2;
            ds.original_labels = {1, 2};
        }
        const auto rows = cmd_case_study(ds);
        emit(g, "case_study.json", to_json(rows).dump(2) + "\n");
        if (!g.quiet) {
            auto& os = g.out.empty() ? std::cerr : std::cout;
            for (const auto& r : rows) {
                os << r.encoder_id << ": W1(G,G') " << fmt(r.intra_w1) << ", W1(G+G', H+H') " << fmt(r.inter_w1)
                   << ", W1(G+G', H') " << fmt(r.inter_w1_single) << "\n";
            }
        }
    });

    // plot
    auto* plot = app.add_subcommand("plot", "SVG bar chart of the terms of a bound report");
    std::string plot_report, plot_title = "Bound terms";
    plot->add_option("report", plot_report, "Bound report JSON (or a pipeline report)")->required();
    plot->add_option("--title", plot_title, "Chart title");
    plot->callback([&] {
        json j = read_json_file(plot_report);
        if (j.contains("bound") && j.at("bound").is_object()) j = j.at("bound");
        emit(g, "bound_terms.svg", render_bar_chart(plot_title, bound_terms(j)));
    });

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Embed, estimate Lip(f) and bound, writing all artifacts");
    pipeline->callback([&] {
        if (g.config.empty()) throw UsageError("pipeline needs --config");
        RunConfig config = run_config_from_json(read_json_file(g.config));
        const fs::path base = fs::path(g.config).parent_path();
        if (config.dataset_path.is_relative()) config.dataset_path = base / config.dataset_path;
        if (!g.out.empty()) config.output_dir = g.out;
        if (g.seed) {
            config.bound.seed = *g.seed;
            config.lambda.mpnn.seed = *g.seed;
            config.phi.mpnn.seed = *g.seed;
        }
        const auto result = cmd_pipeline(config);
        if (!g.quiet) print_bound_table(std::cout, result.bound);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : static_cast<int>(ErrorKind::usage);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::usage);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::data);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::numerical);
    }
}
