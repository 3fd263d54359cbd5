#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "wlbound/bounds.hpp"
#include "wlbound/error.hpp"
#include "wlbound/synthetic.hpp"

using namespace wlbound;

namespace {

Matrix cloud(std::size_t n, std::size_t d, Rng& rng, double spread, double offset) {
    Matrix m(n, d);
    for (double& x : m.data()) x = offset + spread * rng.normal();
    return m;
}

EmbeddingSet as_set(const Matrix& m, std::string id = "x") {
    EmbeddingSet s{std::move(id), {}, {}, m};
    for (std::size_t r = 0; r < m.rows(); ++r) {
        s.graph_ids.push_back(r);
        s.labels.push_back(1);
    }
    return s;
}

}  // namespace

TEST_CASE("margins") {
    CHECK(margin(std::vector<double>{1, 0}, 1) == 1.0);
    CHECK(margin(std::vector<double>{0.2, 0.9, 0.1}, 2) == doctest::Approx(0.7));
    CHECK(margin(std::vector<double>{0.3, 0.3, 0.3}, 3) == 0.0);
    CHECK_THROWS_AS(margin(std::vector<double>{1.0}, 1), UsageError);

    Matrix scores(2, 2);
    scores(0, 0) = 0.0;
    scores(0, 1) = 1.0;  // margin -1 for label 1
    scores(1, 0) = 2.0;
    scores(1, 1) = 0.0;  // margin 2
    CHECK(empirical_margin_loss(scores, std::vector<int>{1, 1}, 1.0) == 0.5);
    Matrix tied(3, 2);
    for (std::size_t r = 0; r < 3; ++r) tied(r, 0) = 1.0;
    CHECK(empirical_margin_loss(tied, std::vector<int>{1, 1, 1}, 1.0) == 1.0);
    CHECK(empirical_margin_loss(tied, std::vector<int>{1, 1, 1}, 0.5) == 0.0);
    CHECK_THROWS_AS(empirical_margin_loss(Matrix(0, 2), std::vector<int>{}, 1.0), UsageError);

    // Positive margin exactly when the label is the unique argmax.
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> s(2 + rng.below(4));
        for (double& x : s) x = static_cast<double>(rng.below(4));
        const int y = 1 + static_cast<int>(rng.below(s.size()));
        const double top = *std::max_element(s.begin(), s.end());
        const bool unique = s[y - 1] == top && std::count(s.begin(), s.end(), top) == 1;
        CHECK((margin(s, y) > 0.0) == unique);
    }
}

TEST_CASE("parameter validation") {
    MarginParams p;
    CHECK_NOTHROW(p.validate(2));
    p.gamma = 0.0;
    CHECK_THROWS_AS(p.validate(2), UsageError);
    p.gamma = 1.0;
    p.delta = 1.0;
    CHECK_THROWS_AS(p.validate(2), UsageError);
    p.delta = 0.1;
    p.lip_rho = {1.0};
    CHECK_THROWS_AS(p.validate(2), UsageError);
    p.lip_rho = {1.0, -1.0};
    CHECK_THROWS_AS(p.validate(2), UsageError);
}

TEST_CASE("Lipschitz estimate") {
    Rng rng(12);
    const Matrix lambda = cloud(12, 3, rng, 1.0, 0.0);
    const auto same = lip_f_estimate(as_set(lambda), as_set(lambda));
    CHECK(same.estimate == doctest::Approx(1.0));
    CHECK(same.violations.empty());

    Matrix doubled = lambda;
    for (double& x : doubled.data()) x *= 2.0;
    CHECK(lip_f_estimate(as_set(doubled), as_set(lambda)).estimate == doctest::Approx(2.0));

    // Duplicates are skipped, never divide by zero.
    Matrix dup = lambda;
    dup.append_row(lambda.row(0));
    Matrix dup_phi = doubled;
    dup_phi.append_row(doubled.row(0));
    const auto with_dup = lip_f_estimate(as_set(dup_phi), as_set(dup));
    CHECK(with_dup.estimate == doctest::Approx(2.0));
    CHECK(with_dup.skipped_pairs == 1);
    CHECK(with_dup.violations.empty());

    // phi separating what lambda merges is a violation.
    Matrix bad_phi = dup_phi;
    bad_phi(12, 0) += 1.0;
    const auto bad = lip_f_estimate(as_set(bad_phi), as_set(dup));
    CHECK(bad.violations.size() == 1);
    CHECK(bad.violations[0] == DistinguishedPair{0, 12});

    // Rows are matched by graph id, not position.
    auto shuffled = as_set(doubled);
    std::reverse(shuffled.graph_ids.begin(), shuffled.graph_ids.end());
    Matrix reversed(lambda.rows(), lambda.cols());
    for (std::size_t r = 0; r < lambda.rows(); ++r)
        for (std::size_t k = 0; k < 3; ++k) reversed(r, k) = doubled(lambda.rows() - 1 - r, k);
    shuffled.vectors = reversed;
    CHECK(lip_f_estimate(shuffled, as_set(lambda)).estimate == doctest::Approx(2.0));
    auto missing = as_set(lambda);
    missing.graph_ids[0] = 99;
    CHECK_THROWS_AS(lip_f_estimate(missing, as_set(lambda)), UsageError);

    const auto constant = lip_f_estimate(as_set(Matrix(4, 2, 1.0)), as_set(Matrix(4, 2, 1.0)));
    CHECK_FALSE(constant.estimable);
}

TEST_CASE("degenerate classes leave only the confidence term") {
    const std::vector<Matrix> classes{Matrix(8, 3, 1.0), Matrix(6, 3, -2.0)};
    MarginParams p;
    const auto r = sample_bound(classes, p, 1.7, 2, 3);
    CHECK(r.m == 2 + 1);
    CHECK(std::abs(r.bound - std::sqrt(std::log(2.0 / 0.1) / (2.0 * 3.0))) <= 1e-12);
    CHECK(r.expectation_term == 0.0);
}

TEST_CASE("two-class hand assembly") {
    Matrix a, b;
    a.append_row(std::vector<double>{0, 0});
    a.append_row(std::vector<double>{2, 0});
    b.append_row(std::vector<double>{5, 5});
    b.append_row(std::vector<double>{5, 7});
    const std::vector<Matrix> classes{a, b};
    MarginParams p;
    const auto r = sample_bound(classes, p, 1.0, 1, 9);
    const double per_class = 2.0 + 2.0 * 2.0 * std::sqrt(std::log(40.0) / 1.0);
    const double expected = per_class + std::sqrt(std::log(20.0) / 4.0);
    CHECK(std::abs(r.bound - expected) <= 1e-12);
    CHECK(std::abs(reassemble_bound(to_json(r)) - r.bound) <= 1e-12);
}

TEST_CASE("bound scales with Lip(f) and m") {
    Rng rng(6);
    const std::vector<Matrix> classes{cloud(20, 2, rng, 1.0, 0.0), cloud(24, 2, rng, 1.0, 3.0)};
    MarginParams p;
    const auto one = sample_bound(classes, p, 1.0, 2, 4);
    const auto two = sample_bound(classes, p, 2.0, 2, 4);
    CHECK(two.expectation_term == doctest::Approx(2.0 * one.expectation_term));
    CHECK(two.confidence_term == one.confidence_term);
    CHECK(std::abs(reassemble_bound(to_json(one)) - one.bound) <= 1e-12);

    MarginParams tighter = p;
    tighter.delta = 0.01;
    CHECK(sample_bound(classes, tighter, 1.0, 2, 4).confidence_term > one.confidence_term);
    const std::vector<Matrix> more{cloud(40, 2, rng, 1.0, 0.0), cloud(48, 2, rng, 1.0, 3.0)};
    CHECK(sample_bound(more, p, 1.0, 2, 4).confidence_term < one.confidence_term);
}

TEST_CASE("bound errors") {
    Rng rng(2);
    const std::vector<Matrix> classes{cloud(3, 2, rng, 1.0, 0.0), cloud(30, 2, rng, 1.0, 1.0)};
    MarginParams p;
    CHECK_THROWS_WITH_AS(sample_bound(classes, p, 1.0, 2, 1), doctest::Contains("class 1"), DataError);
    CHECK_THROWS_AS(sample_bound(classes, p, -1.0, 1, 1), UsageError);
    const std::vector<Matrix> one_class{cloud(10, 2, rng, 1.0, 0.0)};
    CHECK_THROWS_AS(separation_bound(one_class, p, 1.0, 1, 1), UsageError);
    const std::vector<Matrix> identical{Matrix(4, 2, 1.0), Matrix(4, 2, 1.0)};
    CHECK_THROWS_AS(separation_bound(identical, p, 1.0, 1, 1), NumericalError);
}

TEST_CASE("separation bound") {
    Rng rng(8);
    const std::vector<Matrix> tight{Matrix(6, 2, 0.0), Matrix(6, 2, 4.0)};
    MarginParams p;
    const auto r = separation_bound(tight, p, 1.0, 1, 1);
    CHECK(std::abs(r.bound - std::sqrt(std::log(10.0) / (2.0 * 6.0))) <= 1e-12);
    CHECK(r.separation->large_margin == "assumed");
    CHECK(std::abs(reassemble_bound(to_json(r)) - r.bound) <= 1e-12);

    // Halving the within-class spread halves the numerator.
    const Matrix a = cloud(20, 2, rng, 1.0, 0.0), b = cloud(20, 2, rng, 1.0, 0.0);
    auto shifted = [](Matrix m, double scale, double offset) {
        for (double& x : m.data()) x = x * scale + offset;
        return m;
    };
    const std::vector<Matrix> wide{shifted(a, 1.0, 0.0), shifted(b, 1.0, 10.0)};
    const std::vector<Matrix> narrow{shifted(a, 0.5, 0.0), shifted(b, 0.5, 10.0)};
    const auto rw = separation_bound(wide, p, 1.0, 2, 5);
    const auto rn = separation_bound(narrow, p, 1.0, 2, 5);
    CHECK(rn.separation->numerator == doctest::Approx(0.5 * rw.separation->numerator).epsilon(1e-9));

    // Inter-class matrix against the LP oracle.
    const auto inter = inter_class_separation(wide);
    const std::vector<double> w(20, 0.05);
    CHECK(inter(0, 1) == doctest::Approx(oracle::w1_lp(wide[0], w, wide[1], w)).epsilon(1e-9));
    CHECK(inter(1, 0) == inter(0, 1));
    CHECK(inter(0, 0) == 0.0);
    const std::vector<Matrix> same{a, a};
    CHECK(inter_class_separation(same)(0, 1) <= 1e-12);
}

TEST_CASE("separation bound under a genuine large margin") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<Matrix> classes{cloud(16, 2, rng, 0.7, -2.0), cloud(18, 2, rng, 0.7, 2.0)};
        // Linear scores psi_1 = z.w, psi_2 = -z.w, both with Lipschitz constant |w|.
        const std::vector<double> w{0.6, 0.8};
        std::vector<double> margins;
        for (int c = 0; c < 2; ++c) {
            for (std::size_t r = 0; r < classes[c].rows(); ++r) {
                const double s = w[0] * classes[c](r, 0) + w[1] * classes[c](r, 1);
                const std::vector<double> scores{s, -s};
                margins.push_back(margin(scores, c + 1));
            }
        }
        const double gamma = *std::min_element(margins.begin(), margins.end());
        if (!(gamma > 0.0)) continue;
        MarginParams p;
        p.gamma = gamma;
        const auto r = separation_bound(classes, p, 1.3, 2, 7, margins);
        CHECK(r.separation->large_margin == "satisfied");
        CHECK(r.separation->denominator >= gamma - 1e-9);
        CHECK(r.separation->dominance_holds);
        CHECK(r.bound <= r.separation->theorem_bound + 1e-9);
    }
    MarginParams p;
    const std::vector<Matrix> classes{Matrix(2, 1, 0.0), Matrix(2, 1, 1.0)};
    const auto r = separation_bound(classes, p, 1.0, 1, 0, std::vector<double>{0.5, 2.0, 2.0, 2.0});
    CHECK(r.separation->large_margin == "violated");
}

TEST_CASE("corollary checker") {
    Rng rng(77);
    const Matrix lambda = cloud(30, 3, rng, 1.0, 0.0);
    const auto same = verify_corollary(as_set(lambda), as_set(lambda), 1.0, 1.0, 25, 4);
    CHECK(same.violations == 0);
    CHECK(same.max_violation <= 1e-8);

    const auto constant = verify_corollary(as_set(Matrix(30, 2, 0.5)), as_set(lambda), 0.0, 1.0, 25, 4);
    CHECK(constant.violations == 0);
    for (const auto& t : constant.samples) CHECK(t.phi_w1 <= 1e-12);

    // phi = 3 lambda needs ratio 3; claiming 1 must be caught.
    Matrix tripled = lambda;
    for (double& x : tripled.data()) x *= 3.0;
    CHECK(verify_corollary(as_set(tripled), as_set(lambda), 1.0, 1.0, 25, 4).violations > 0);
    CHECK(verify_corollary(as_set(tripled), as_set(lambda), 3.0, 1.0, 25, 4).violations == 0);
    CHECK_THROWS_AS(verify_corollary(as_set(lambda), as_set(lambda), 1.0, 0.0, 5, 4), UsageError);

    // Re-evaluate a few trials with the LP oracle.
    for (std::size_t t = 0; t < 5; ++t) {
        Matrix a, b;
        for (auto r : same.first_support[t]) a.append_row(lambda.row(r));
        for (auto r : same.second_support[t]) b.append_row(lambda.row(r));
        CHECK(same.samples[t].lambda_w1 ==
              doctest::Approx(oracle::w1_lp(a, same.first_weights[t], b, same.second_weights[t])).epsilon(1e-9));
    }
}

TEST_CASE("report json carries every term") {
    Rng rng(1);
    const std::vector<Matrix> classes{cloud(10, 2, rng, 1.0, 0.0), cloud(10, 2, rng, 1.0, 2.0)};
    const auto r = separation_bound(classes, MarginParams{}, 1.0, 1, 3);
    const auto j = to_json(r);
    for (const char* key : {"kind", "gamma", "delta", "pairs", "seed", "lip_f", "m", "total_samples", "classes",
                            "confidence_term", "expectation_term", "bound", "separation", "provenance"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["classes"][0].contains("split_w1"));
    CHECK(j["separation"]["large_margin"] == "assumed");
}
