#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "wlbound/error.hpp"
#include "wlbound/pipeline.hpp"
#include "wlbound/synthetic.hpp"
#include "wlbound/text.hpp"

using namespace wlbound;
using nlohmann::json;

namespace {

RunConfig tiny_config(const std::filesystem::path& out) {
    return run_config_from_json(json{{"dataset", {{"path", support::data_dir().string()}, {"name", "TINY"}}},
                                     {"lambda", {{"kind", "wl"}, {"iterations", 1}}},
                                     {"phi", {{"kind", "wl"}, {"iterations", 1}}},
                                     {"bound", {{"pairs", 1}, {"seed", 3}}},
                                     {"output", out.string()}});
}

RunConfig synthetic_config(const std::filesystem::path& dir, std::uint64_t seed) {
    write_tu_dataset(dir, "CYC", synthetic::cycle_families(30, seed));
    return run_config_from_json(json{
        {"dataset", {{"path", dir.string()}, {"name", "CYC"}}},
        {"lambda", {{"kind", "wl"}, {"iterations", 2}, {"patterns", {"C3", "C4"}}}},
        {"phi",
         {{"kind", "mpnn"},
          {"patterns", {"C3", "C4"}},
          {"normalization", "l1"},
          {"mpnn", {{"layers", 2}, {"hidden", 16}, {"activation", "tanh"}, {"seed", seed}}}}},
        {"bound", {{"pairs", 2}, {"seed", seed}}},
        {"output", (dir / "out").string()}});
}

}  // namespace

TEST_CASE("dataset inspect") {
    const auto s = cmd_dataset_inspect(support::data_dir(), "TINY");
    CHECK(s.graphs == 2);
    CHECK(s.classes == 2);
    CHECK(s.class_sizes == std::vector<std::size_t>{1, 1});
    CHECK(s.min_vertices == 2);
    CHECK(s.max_vertices == 3);
    CHECK(s.min_degree == 1);
    CHECK(s.max_degree == 2);
    CHECK(s.mean_degree == doctest::Approx(8.0 / 5.0));
    CHECK(to_json(s)["edges"]["max"] == 3);
    CHECK_THROWS_AS(cmd_dataset_inspect(support::data_dir(), "MISSING"), DataError);
    CHECK_THROWS_AS(cmd_dataset_inspect(support::data_dir(), "EMPTY"), DataError);
}

TEST_CASE("config round trip") {
    const auto dir = support::scratch_dir("cfg");
    const auto c = synthetic_config(dir, 5);
    const auto j = to_json(c);
    CHECK(to_json(run_config_from_json(j)) == j);
    CHECK(j["phi"]["mpnn"]["seed"] == 5);
    CHECK(j["bound"]["seed"] == 5);
    CHECK_THROWS_AS(run_config_from_json(json{{"dataset", {{"path", "x"}}}}), UsageError);
    auto bad = j;
    bad["lambda"]["kind"] = "gnn";
    CHECK_THROWS_AS(run_config_from_json(bad), UsageError);
    bad = j;
    bad["bound"]["variant"] = "other";
    CHECK_THROWS_AS(run_config_from_json(bad), UsageError);
}

TEST_CASE("pipeline on the fixture with identical encoders") {
    const auto out = support::scratch_dir("tiny_pipeline");
    const auto cfg = tiny_config(out);
    // Two graphs in two classes: one per class is too small for a split.
    CHECK_THROWS_WITH_AS(cmd_pipeline(cfg), doctest::Contains("class too small"), DataError);

    auto ds = parse_tu_dataset(support::data_dir(), "TINY").dataset;
    ds.graphs.push_back(ds.graphs[1]);
    ds.graphs.push_back(support::graph(3, {{0, 1}, {1, 2}}));
    ds.labels = {1, 2, 1, 2};
    const auto r = run_pipeline(cfg, ds, 0);
    CHECK(r.lip.estimate == doctest::Approx(1.0));
    CHECK(r.lip.violations.empty());
    write_pipeline_outputs(r, out);
    for (const char* f : {"lambda_embeddings.csv", "phi_embeddings.csv", "report.json", "bound_terms.svg"}) {
        CHECK(std::filesystem::exists(out / f));
    }
    const auto report = json::parse(text::read_file(out / "report.json"));
    CHECK(report["config"] == to_json(cfg));
    CHECK(report["lip_f"]["estimate"] == 1.0);
    CHECK(std::abs(reassemble_bound(report["bound"]) - report["bound"]["bound"].get<double>()) <= 1e-12);
}

TEST_CASE("pipeline errors name the stage") {
    const auto dir = support::scratch_dir("stage_errors");
    auto cfg = synthetic_config(dir, 1);
    cfg.bound.pairs = 100;
    CHECK_THROWS_WITH_AS(cmd_pipeline(cfg), doctest::Contains("stage 'bound'"), DataError);
    CHECK_THROWS_WITH_AS(cmd_pipeline(cfg), doctest::Contains("class too small: class 1"), DataError);

    cfg = synthetic_config(dir, 1);
    cfg.lambda.patterns = {"Q9"};
    CHECK_THROWS_WITH_AS(cmd_pipeline(cfg), doctest::Contains("stage 'embed lambda'"), UsageError);

    // Plain 1-WL at L = 0 cannot tell the graphs apart while phi can.
    cfg = synthetic_config(dir, 1);
    cfg.lambda.iterations = 0;
    cfg.lambda.patterns.clear();
    CHECK_THROWS_WITH_AS(cmd_pipeline(cfg), doctest::Contains("factorization violation"), NumericalError);

    cfg = synthetic_config(dir, 1);
    cfg.dataset_name = "NOPE";
    CHECK_THROWS_WITH_AS(cmd_pipeline(cfg), doctest::Contains("stage 'dataset'"), DataError);
}

TEST_CASE("pipeline is reproducible") {
    const auto dir = support::scratch_dir("repro");
    auto cfg = synthetic_config(dir, 9);
    cmd_pipeline(cfg);
    const auto first = text::read_file(dir / "out" / "report.json");
    const auto first_svg = text::read_file(dir / "out" / "bound_terms.svg");
    const auto first_csv = text::read_file(dir / "out" / "phi_embeddings.csv");
    cmd_pipeline(cfg);
    CHECK(text::read_file(dir / "out" / "report.json") == first);
    CHECK(text::read_file(dir / "out" / "bound_terms.svg") == first_svg);
    CHECK(text::read_file(dir / "out" / "phi_embeddings.csv") == first_csv);

    const auto report = json::parse(first);
    CHECK(report["seeds"]["bound"] == 9);
    CHECK(report["seeds"]["mpnn"] == 9);
    CHECK(report["bound"]["provenance"]["phi"].get<std::string>().find("seed=9") != std::string::npos);
}

TEST_CASE("import encoder") {
    const auto dir = support::scratch_dir("import");
    auto cfg = synthetic_config(dir, 2);
    const auto ds = parse_tu_dataset(cfg.dataset_path, cfg.dataset_name).dataset;
    export_embeddings(encode(ds, cfg.phi), dir / "external.csv");
    EncoderSpec imported;
    imported.kind = EncoderKind::import;
    imported.path = dir / "external.csv";
    const auto a = encode(ds, cfg.phi);
    const auto b = encode(ds, imported);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK_FALSE(distinguishes(a.vectors.row(i), b.vectors.row(i)));
    CHECK(encoder_spec_from_json(to_json(imported)).path == imported.path);

    auto mislabeled = ds;
    mislabeled.labels[0] = mislabeled.labels[0] == 1 ? 2 : 1;
    CHECK_THROWS_AS(encode(mislabeled, imported), DataError);
}

TEST_CASE("case study") {
    auto four = [](Graph g, Graph g2, Graph h, Graph h2) {
        LabeledDataset ds;
        ds.graphs = {g, g2, h, h2};
        ds.labels = {1, 1, 2, 2};
        ds.class_count = 2;
        ds.original_labels = {1, 2};
        return ds;
    };
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ds = four(synthetic::random_graph(7, 0.4, rng), synthetic::random_graph(8, 0.4, rng),
                             synthetic::random_graph(6, 0.5, rng), synthetic::random_graph(7, 0.3, rng));
        for (const auto& row : cmd_case_study(ds)) {
            double sq = 0.0;
            for (double d : row.difference) {
                CHECK(d == std::round(d));
                sq += d * d;
            }
            CHECK(std::abs(row.intra_w1 * row.intra_w1 - std::round(sq)) <= 1e-9);
            CHECK(row.intra_w1 == doctest::Approx(oracle::euclid(row.vectors.row(0), row.vectors.row(1))));
            const std::vector<double> half{0.5, 0.5};
            Matrix a, b;
            a.append_row(row.vectors.row(0));
            a.append_row(row.vectors.row(1));
            b.append_row(row.vectors.row(2));
            b.append_row(row.vectors.row(3));
            CHECK(row.inter_w1 == doctest::Approx(oracle::w1_lp(a, half, b, half)).epsilon(1e-9));
        }
    }

    // Isomorphic G and G'.
    const Graph g = synthetic::random_graph(7, 0.5, rng);
    const auto iso = cmd_case_study(four(g, g.permuted(support::random_permutation(7, rng)), support::cycle(5),
                                         support::cycle(6)));
    for (const auto& row : iso) {
        CHECK(row.intra_w1 == 0.0);
        for (double d : row.difference) CHECK(d == 0.0);
    }

    // Triangle-free graphs: K4 counts add nothing.
    const auto tf = cmd_case_study(four(support::cycle(6), support::star(4), support::cycle(8), support::cycle(4)));
    CHECK(tf[0].vectors == tf[2].vectors);
    CHECK(tf[0].intra_w1 == tf[2].intra_w1);
    CHECK(tf[0].inter_w1 == tf[2].inter_w1);

    auto bad = four(g, g, g, g);
    bad.labels = {1, 2, 2, 2};
    CHECK_THROWS_AS(cmd_case_study(bad), UsageError);
}

TEST_CASE("bar chart svg") {
    const std::vector<std::pair<std::string, double>> bars{{"a < b & c", 1.0}, {"second", 0.25}, {"\"third\"", 0.5}};
    const auto svg = render_bar_chart("T & T", bars);
    CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
    CHECK(svg.find("&quot;third&quot;") != std::string::npos);
    CHECK(svg.find("T &amp; T") != std::string::npos);
    std::size_t count = 0;
    for (std::size_t pos = svg.find("<rect"); pos != std::string::npos; pos = svg.find("<rect", pos + 1)) ++count;
    CHECK(count == 3);
    // Every opened group is closed.
    std::size_t open = 0, close = 0;
    for (std::size_t p = svg.find("<g "); p != std::string::npos; p = svg.find("<g ", p + 1)) ++open;
    for (std::size_t p = svg.find("</g>"); p != std::string::npos; p = svg.find("</g>", p + 1)) ++close;
    CHECK(open == close);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}
