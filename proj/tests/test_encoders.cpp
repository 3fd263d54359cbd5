#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "wlbound/encoders.hpp"
#include "wlbound/error.hpp"
#include "wlbound/hom.hpp"
#include "wlbound/synthetic.hpp"

using namespace wlbound;

namespace {

LabeledDataset make_dataset(std::vector<Graph> graphs, std::vector<int> labels = {}) {
    LabeledDataset ds;
    if (labels.empty()) labels.assign(graphs.size(), 1);
    ds.graphs = std::move(graphs);
    ds.labels = std::move(labels);
    ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end());
    for (int k = 1; k <= ds.class_count; ++k) ds.original_labels.push_back(k);
    return ds;
}

LabeledDataset random_dataset(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Graph> graphs;
    std::vector<int> labels;
    for (std::size_t i = 0; i < count; ++i) {
        graphs.push_back(synthetic::random_graph(3 + rng.below(7), 0.4, rng));
        labels.push_back(1 + static_cast<int>(i % 2));
    }
    return make_dataset(std::move(graphs), std::move(labels));
}

std::vector<double> row(const EmbeddingSet& s, std::size_t r) {
    return {s.vectors.row(r).begin(), s.vectors.row(r).end()};
}

}  // namespace

TEST_CASE("histogram embeddings") {
    const auto single = embed_histogram(make_dataset({support::cycle(7)}), 0, {});
    CHECK(row(single, 0) == std::vector<double>{7});

    const auto ds = make_dataset({support::cycle(6), support::cycle(3).disjoint_union(support::cycle(3))});
    const std::vector<RootedPattern> f{make_cycle(3)};
    const auto e = embed_histogram(ds, 0, f);
    CHECK(row(e, 0) == std::vector<double>{6, 0});
    CHECK(row(e, 1) == std::vector<double>{0, 6});
    CHECK(e.encoder_id == "wl(L=0;F=C3)");

    const auto dup = embed_histogram(make_dataset({support::cycle(5), support::cycle(5)}), 2, {});
    CHECK(row(dup, 0) == row(dup, 1));
}

TEST_CASE("hom embeddings") {
    const std::vector<RootedPattern> k1{make_path(1)};
    const auto ds = make_dataset({make_clique(4).graph(), support::cycle(6)});
    CHECK(row(embed_hom(ds, k1), 1) == std::vector<double>{6});
    const std::vector<RootedPattern> c3{make_cycle(3)};
    const auto e = embed_hom(ds, c3);
    CHECK(row(e, 0) == std::vector<double>{24});
    CHECK(row(e, 1) == std::vector<double>{0});
    CHECK_THROWS_AS(embed_hom(ds, {}), UsageError);
}

TEST_CASE("mpnn with zero weights") {
    MpnnConfig cfg;
    cfg.activation = Activation::relu;
    cfg.weights = {MpnnLayer{Matrix(4, 1), std::vector<double>(4, 0.0)}};
    const auto e = mpnn_forward(random_dataset(6, 1), cfg, {});
    for (double x : e.vectors.data()) CHECK(x == 0.0);
}

TEST_CASE("mpnn identity layer counts vertices plus degrees") {
    MpnnConfig cfg;
    cfg.activation = Activation::relu;
    cfg.weights = {MpnnLayer{Matrix(1, 1, 1.0), {0.0}}};
    const auto ds = random_dataset(8, 2);
    const auto e = mpnn_forward(ds, cfg, {});
    for (std::size_t g = 0; g < ds.size(); ++g) {
        // Scalar trace of the same forward pass.
        double expected = 0.0;
        for (Vertex v = 0; v < ds.graphs[g].vertex_count(); ++v) expected += 1.0 + ds.graphs[g].degree(v);
        CHECK(e.vectors(g, 0) == expected);
    }
    CHECK(mpnn_forward(make_dataset({support::cycle(3)}), cfg, {}).vectors(0, 0) == 9.0);
}

TEST_CASE("mpnn is deterministic and invariant under relabeling") {
    Rng rng(6);
    auto ds = random_dataset(10, 3);
    const auto n0 = ds.graphs[0].vertex_count();
    ds.graphs.push_back(ds.graphs[0].permuted(support::random_permutation(n0, rng)));
    ds.labels.push_back(1);
    const std::vector<RootedPattern> f{make_cycle(3), make_path(3)};
    for (auto act : {Activation::relu, Activation::tanh, Activation::sigmoid}) {
        for (auto readout : {Readout::sum, Readout::mean}) {
            MpnnConfig cfg;
            cfg.hidden = 8;
            cfg.activation = act;
            cfg.readout = readout;
            cfg.seed = 42;
            const auto a = mpnn_forward(ds, cfg, f);
            const auto b = mpnn_forward(ds, cfg, f);
            CHECK(a.vectors == b.vectors);
            CHECK_FALSE(distinguishes(a.vectors.row(0), a.vectors.row(ds.size() - 1)));
        }
    }
}

TEST_CASE("mpnn sum readout is additive over components") {
    MpnnConfig cfg;
    cfg.hidden = 6;
    cfg.layers = 3;
    cfg.seed = 9;
    const Graph a = support::cycle(5);
    const Graph b = support::star(3);
    const auto ds = make_dataset({a, b, a.disjoint_union(b)});
    const auto e = mpnn_forward(ds, cfg, std::vector<RootedPattern>{make_cycle(3)});
    for (std::size_t k = 0; k < e.dimension(); ++k) CHECK(e.vectors(2, k) == doctest::Approx(e.vectors(0, k) + e.vectors(1, k)).epsilon(1e-12));
}

TEST_CASE("mpnn config json and shapes") {
    const auto cfg = mpnn_config_from_json(nlohmann::json::parse(
        R"({"layers": 3, "hidden": 5, "activation": "sigmoid", "readout": "mean", "normalization": "l2", "seed": 12})"));
    CHECK(cfg.layers == 3);
    CHECK(cfg.activation == Activation::sigmoid);
    CHECK(cfg.readout == Readout::mean);
    CHECK(cfg.normalization == Normalization::l2);
    CHECK(mpnn_config_from_json(to_json(cfg)).seed == 12);
    CHECK_THROWS_AS(mpnn_config_from_json(nlohmann::json::parse(R"({"activation": "gelu"})")), UsageError);

    MpnnConfig explicit_cfg;
    explicit_cfg.weights = {MpnnLayer{Matrix(2, 3), {0.0, 0.0}}};
    CHECK_THROWS_AS(resolve_weights(explicit_cfg, 2), UsageError);
    explicit_cfg.weights[0].weight(1, 2) = 0.25;
    const auto round = mpnn_config_from_json(to_json(explicit_cfg, true));
    CHECK(round.weights.size() == 1);
    CHECK(round.weights[0].weight == explicit_cfg.weights[0].weight);

    const auto drawn = resolve_weights(cfg, 4);
    REQUIRE(drawn.size() == 3);
    CHECK(drawn[0].weight.cols() == 4);
    for (double w : drawn[0].weight.data()) CHECK(std::abs(w) <= 0.5);
    for (double w : drawn[1].weight.data()) CHECK(std::abs(w) <= 1.0 / std::sqrt(5.0));
}

TEST_CASE("mpnn distance bounds hold") {
    const auto ds = random_dataset(30, 12);
    for (auto act : {Activation::tanh, Activation::sigmoid}) {
        MpnnConfig cfg;
        cfg.hidden = 7;
        cfg.activation = act;
        cfg.readout = Readout::mean;
        cfg.seed = 3;
        const auto bound = mpnn_distance_bound(cfg);
        REQUIRE(bound.has_value());
        CHECK(empirical_B(mpnn_forward(ds, cfg, {})) <= *bound);
    }
    MpnnConfig unbounded;
    unbounded.activation = Activation::relu;
    CHECK_FALSE(mpnn_distance_bound(unbounded).has_value());
    unbounded.normalization = Normalization::l1;
    CHECK(mpnn_distance_bound(unbounded) == 2.0);
    CHECK(empirical_B(mpnn_forward(ds, unbounded, {})) <= 2.0 + 1e-12);
}

TEST_CASE("normalization") {
    EmbeddingSet s{"x", {0, 1, 2}, {1, 1, 1}, Matrix(3, 2)};
    s.vectors(0, 0) = 2;
    s.vectors(0, 1) = 2;
    s.vectors(1, 0) = 3;
    s.vectors(1, 1) = 4;
    const auto l1 = normalize(s, Normalization::l1);
    CHECK(row(l1.set, 0) == std::vector<double>{0.5, 0.5});
    CHECK(row(l1.set, 2) == std::vector<double>{0.0, 0.0});
    CHECK(l1.zero_vectors == 1);
    const auto l2 = normalize(s, Normalization::l2);
    CHECK(l2.set.vectors(1, 0) == doctest::Approx(0.6));
    CHECK(l2.set.vectors(1, 1) == doctest::Approx(0.8));
    CHECK(normalize(s, Normalization::none).set.vectors == s.vectors);
    CHECK(l1.set.encoder_id == "x+l1");
}

TEST_CASE("empirical B and S") {
    EmbeddingSet same{"s", {0, 1}, {1, 1}, Matrix(2, 2, 1.5)};
    CHECK(empirical_B(same) == 0.0);
    CHECK(std::isinf(empirical_S(same)));
    EmbeddingSet empty{"e", {}, {}, Matrix(0, 2)};
    CHECK_THROWS_AS(empirical_B(empty), UsageError);
    CHECK_THROWS_AS(empirical_S(empty), UsageError);

    const std::vector<RootedPattern> f{make_cycle(3), make_cycle(4), make_clique(3)};
    const auto hom = embed_hom(random_dataset(40, 5), f);
    const double S = empirical_S(hom);
    if (std::isfinite(S)) CHECK(S >= 1.0);

    const auto normalized = normalize(hom, Normalization::l1);
    CHECK(empirical_B(normalized.set) <= 2.0);
}

TEST_CASE("1-WL-bounded MPNN factors through 1-WL histograms") {
    const auto ds = random_dataset(60, 21);
    for (std::size_t L = 0; L <= 3; ++L) {
        const auto lambda = embed_histogram(ds, L, {});
        MpnnConfig cfg;
        cfg.layers = L;
        cfg.hidden = 5;
        cfg.seed = L;
        const auto phi = mpnn_forward(ds, cfg, {});
        for (std::size_t i = 0; i < ds.size(); ++i) {
            for (std::size_t j = i + 1; j < ds.size(); ++j) {
                if (!distinguishes(lambda.vectors.row(i), lambda.vectors.row(j))) {
                    CHECK_FALSE(distinguishes(phi.vectors.row(i), phi.vectors.row(j)));
                }
            }
        }
        CHECK(check_power_order(lambda, phi).empty());
    }
}

TEST_CASE("embedding CSV round trip and errors") {
    MpnnConfig cfg;
    cfg.hidden = 4;
    cfg.seed = 8;
    const auto e = mpnn_forward(random_dataset(9, 4), cfg, {});
    const auto dir = support::scratch_dir("csv");
    export_embeddings(e, dir / "phi.csv");
    const auto back = import_embeddings(dir / "phi.csv");
    CHECK(back.encoder_id == "phi");
    CHECK(back.graph_ids == e.graph_ids);
    CHECK(back.labels == e.labels);
    REQUIRE(back.vectors.rows() == e.vectors.rows());
    for (std::size_t i = 0; i < e.size(); ++i) CHECK_FALSE(distinguishes(back.vectors.row(i), e.vectors.row(i)));

    CHECK_THROWS_WITH_AS(parse_embeddings_csv("graph_id,label,dim_0\n0,1,1.0\n1,1,nan\n", "x"),
                         doctest::Contains("line 3"), DataError);
    CHECK_THROWS_AS(parse_embeddings_csv("graph_id,label,dim_0,dim_1\n0,1,1.0,2.0\n1,1,3.0\n", "x"), DataError);
    CHECK_THROWS_AS(parse_embeddings_csv("id,label,dim_0\n0,1,1\n", "x"), DataError);
    CHECK_THROWS_AS(parse_embeddings_csv("", "x"), DataError);
}

TEST_CASE("embedding set helpers") {
    EmbeddingSet s{"x", {0, 1, 2}, {2, 1, 2}, Matrix(3, 1)};
    s.vectors(0, 0) = 1;
    s.vectors(1, 0) = 2;
    s.vectors(2, 0) = 3;
    const auto classes = s.by_class(2);
    CHECK(classes[0].rows() == 1);
    CHECK(classes[1].rows() == 2);
    CHECK(classes[1](1, 0) == 3);
    s.vectors(1, 0) = std::nan("");
    CHECK_THROWS_AS(s.validate(), DataError);
}
