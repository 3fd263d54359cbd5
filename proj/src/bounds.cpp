#include "wlbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "wlbound/error.hpp"
#include "wlbound/kernels.hpp"
#include "wlbound/rng.hpp"
#include "wlbound/transport.hpp"

namespace wlbound {

double MarginParams::lip_rho_of(int label) const {
    return lip_rho.empty() ? 1.0 : lip_rho.at(static_cast<std::size_t>(label - 1));
}

double MarginParams::lip_psi_of(int label) const {
    return lip_psi.empty() ? 1.0 : lip_psi.at(static_cast<std::size_t>(label - 1));
}

void MarginParams::validate(int class_count) const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw UsageError("margin gamma must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw UsageError("confidence delta must lie in (0, 1)");
    for (const auto* v : {&lip_rho, &lip_psi}) {
        if (!v->empty() && v->size() != static_cast<std::size_t>(class_count)) {
            throw UsageError("per-class Lipschitz constants need one value per class (" + std::to_string(class_count) + ")");
        }
        for (double x : *v) {
            if (!(x > 0.0) || !std::isfinite(x)) throw UsageError("Lipschitz constants must be positive");
        }
    }
}

double margin(std::span<const double> scores, int label) {
    if (scores.size() < 2) throw UsageError("margin needs at least two class scores");
    if (label < 1 || static_cast<std::size_t>(label) > scores.size()) throw UsageError("label outside 1..K");
    const auto y = static_cast<std::size_t>(label - 1);
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < scores.size(); ++k) {
        if (k != y) best_other = std::max(best_other, scores[k]);
    }
    return scores[y] - best_other;
}

double empirical_margin_loss(const Matrix& scores, std::span<const int> labels, double gamma) {
    if (scores.rows() == 0) throw UsageError("empirical margin loss of an empty sample");
    if (labels.size() != scores.rows()) throw UsageError("one label per score row is required");
    if (gamma < 0.0) throw UsageError("gamma must be non-negative");
    std::size_t hits = 0;
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        if (margin(scores.row(r), labels[r]) <= gamma) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(scores.rows());
}

LipschitzEstimate lip_f_estimate(const EmbeddingSet& phi, const EmbeddingSet& lambda) {
    if (phi.size() != lambda.size()) throw UsageError("phi and lambda embed different numbers of graphs");
    std::map<std::size_t, std::size_t> lambda_row;
    for (std::size_t r = 0; r < lambda.size(); ++r) lambda_row[lambda.graph_ids[r]] = r;
    std::vector<std::size_t> match(phi.size());
    for (std::size_t r = 0; r < phi.size(); ++r) {
        const auto it = lambda_row.find(phi.graph_ids[r]);
        if (it == lambda_row.end()) throw UsageError("graph id " + std::to_string(phi.graph_ids[r]) + " missing from lambda");
        match[r] = it->second;
    }

    LipschitzEstimate out;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        for (std::size_t j = i + 1; j < phi.size(); ++j) {
            const auto li = lambda.vectors.row(match[i]);
            const auto lj = lambda.vectors.row(match[j]);
            if (!distinguishes(li, lj)) {
                ++out.skipped_pairs;
                if (distinguishes(phi.vectors.row(i), phi.vectors.row(j))) {
                    out.violations.push_back({phi.graph_ids[i], phi.graph_ids[j]});
                }
                continue;
            }
            const double ratio = kernels::distance(phi.vectors.row(i), phi.vectors.row(j)) / kernels::distance(li, lj);
            out.estimate = std::max(out.estimate, ratio);
            out.estimable = true;
            ++out.pairs_used;
        }
    }
    return out;
}

namespace {

double max_pairwise_distance(const Matrix& points) {
    double best = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        for (std::size_t j = i + 1; j < points.rows(); ++j) {
            best = std::max(best, kernels::distance(points.row(i), points.row(j)));
        }
    }
    return best;
}

void check_classes(std::span<const Matrix> classes) {
    if (classes.empty()) throw UsageError("no classes given");
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (classes[c].rows() == 0) throw DataError("class " + std::to_string(c + 1) + " is empty");
    }
}

// Split-W1 statistics and diameter per class; shared by both bounds.
BoundReport class_statistics(std::span<const Matrix> classes, const MarginParams& params, double lip_f,
                             std::size_t pairs, std::uint64_t seed) {
    check_classes(classes);
    const int K = static_cast<int>(classes.size());
    params.validate(K);
    if (!(lip_f >= 0.0) || !std::isfinite(lip_f)) throw UsageError("Lip(f) must be non-negative and finite");
    if (pairs == 0) throw UsageError("number of sample pairs must be positive");

    BoundReport report;
    report.gamma = params.gamma;
    report.delta = params.delta;
    report.pairs = pairs;
    report.seed = seed;
    report.lip_f = lip_f;
    report.class_count = K;
    for (const auto& c : classes) report.total_samples += c.rows();

    for (int k = 1; k <= K; ++k) {
        const Matrix& points = classes[static_cast<std::size_t>(k - 1)];
        if (points.rows() / (2 * pairs) == 0) {
            throw DataError("class too small: class " + std::to_string(k) + " has " + std::to_string(points.rows()) +
                            " samples, fewer than 2n = " + std::to_string(2 * pairs));
        }
        ClassTerms t;
        t.label = k;
        t.sample_count = points.rows();
        t.weight = static_cast<double>(t.sample_count) / static_cast<double>(report.total_samples);
        const auto split = expected_w1_split(points, pairs, 0, Rng::derive(seed, static_cast<std::uint64_t>(k)));
        t.subset_size = split.subset_size;
        t.split_w1 = split.per_pair;
        t.mean_split_w1 = split.mean;
        t.diameter = max_pairwise_distance(points);
        t.lip_rho = params.lip_rho_of(k);
        report.m += t.subset_size;
        report.classes.push_back(std::move(t));
    }
    return report;
}

}  // namespace

BoundReport sample_bound(std::span<const Matrix> class_embeddings, const MarginParams& params, double lip_f,
                         std::size_t pairs, std::uint64_t seed) {
    BoundReport report = class_statistics(class_embeddings, params, lip_f, pairs, seed);
    report.kind = "sample";
    const double K = static_cast<double>(report.class_count);
    const double n = static_cast<double>(pairs);
    report.expectation_term = 0.0;
    for (auto& t : report.classes) {
        t.deviation_term = 2.0 * t.diameter *
                           std::sqrt(std::log(2.0 * K / params.delta) / (n * static_cast<double>(t.subset_size)));
        t.class_term = t.weight * t.lip_rho * lip_f / params.gamma * (t.mean_split_w1 + t.deviation_term);
        report.expectation_term += t.class_term;
    }
    report.confidence_term = std::sqrt(std::log(2.0 / params.delta) / (2.0 * static_cast<double>(report.m)));
    report.bound = report.confidence_term + report.expectation_term;
    return report;
}

Matrix inter_class_separation(std::span<const Matrix> class_embeddings) {
    check_classes(class_embeddings);
    const std::size_t K = class_embeddings.size();
    if (K < 2) throw UsageError("inter-class separation needs at least two classes");
    Matrix out(K, K, 0.0);
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = a + 1; b < K; ++b) {
            const double w = w1_exact(DiscreteDistribution::uniform(class_embeddings[a]),
                                      DiscreteDistribution::uniform(class_embeddings[b]))
                                 .cost;
            out(a, b) = w;
            out(b, a) = w;
        }
    }
    return out;
}

BoundReport separation_bound(std::span<const Matrix> class_embeddings, const MarginParams& params, double lip_f,
                             std::size_t pairs, std::uint64_t seed, std::optional<std::vector<double>> margins) {
    if (class_embeddings.size() < 2) throw UsageError("separation bound needs at least two classes");
    BoundReport report = class_statistics(class_embeddings, params, lip_f, pairs, seed);
    report.kind = "separation";

    SeparationTerms sep;
    sep.inter_class_w1 = inter_class_separation(class_embeddings);
    for (double w : sep.inter_class_w1.data()) sep.max_inter_class_w1 = std::max(sep.max_inter_class_w1, w);
    sep.max_lip_psi = 0.0;
    for (int k = 1; k <= report.class_count; ++k) sep.max_lip_psi = std::max(sep.max_lip_psi, params.lip_psi_of(k));

    double weighted = 0.0;
    for (auto& t : report.classes) {
        t.class_term = t.weight * t.lip_rho * t.mean_split_w1;
        weighted += t.class_term;
    }
    sep.numerator = lip_f * weighted;
    sep.denominator = sep.max_lip_psi * sep.max_inter_class_w1;
    if (!(sep.denominator > 0.0)) {
        throw NumericalError("separation bound not estimable: all classes have identical embedding distributions");
    }
    report.expectation_term = sep.numerator / sep.denominator;
    report.confidence_term = std::sqrt(std::log(1.0 / params.delta) / (2.0 * static_cast<double>(report.m)));
    report.bound = report.expectation_term + report.confidence_term;
    sep.theorem_bound = sep.numerator / params.gamma + report.confidence_term;

    if (!margins) {
        sep.large_margin = "assumed";
    } else {
        const bool all = std::all_of(margins->begin(), margins->end(), [&](double r) { return r >= params.gamma; });
        sep.large_margin = all ? "satisfied" : "violated";
    }
    sep.dominance_holds = report.bound <= sep.theorem_bound + 1e-9;
    report.separation = std::move(sep);
    return report;
}

nlohmann::json to_json(const BoundReport& r) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& t : r.classes) {
        classes.push_back({{"label", t.label},
                           {"sample_count", t.sample_count},
                           {"weight", t.weight},
                           {"subset_size", t.subset_size},
                           {"split_w1", t.split_w1},
                           {"mean_split_w1", t.mean_split_w1},
                           {"diameter", t.diameter},
                           {"lip_rho", t.lip_rho},
                           {"deviation_term", t.deviation_term},
                           {"class_term", t.class_term}});
    }
    nlohmann::json j{{"kind", r.kind},
                     {"gamma", r.gamma},
                     {"delta", r.delta},
                     {"pairs", r.pairs},
                     {"seed", r.seed},
                     {"lip_f", r.lip_f},
                     {"class_count", r.class_count},
                     {"m", r.m},
                     {"total_samples", r.total_samples},
                     {"classes", classes},
                     {"confidence_term", r.confidence_term},
                     {"expectation_term", r.expectation_term},
                     {"bound", r.bound},
                     {"provenance", r.provenance}};
    if (r.separation) {
        const auto& s = *r.separation;
        nlohmann::json matrix = nlohmann::json::array();
        for (std::size_t a = 0; a < s.inter_class_w1.rows(); ++a) {
            matrix.push_back(std::vector<double>(s.inter_class_w1.row(a).begin(), s.inter_class_w1.row(a).end()));
        }
        j["separation"] = {{"inter_class_w1", matrix},
                           {"max_inter_class_w1", s.max_inter_class_w1},
                           {"max_lip_psi", s.max_lip_psi},
                           {"numerator", s.numerator},
                           {"denominator", s.denominator},
                           {"theorem_bound", s.theorem_bound},
                           {"large_margin", s.large_margin},
                           {"dominance_holds", s.dominance_holds}};
    }
    return j;
}

double reassemble_bound(const nlohmann::json& r) {
    const double delta = r.at("delta").get<double>();
    const double gamma = r.at("gamma").get<double>();
    const double lip_f = r.at("lip_f").get<double>();
    const auto m = r.at("m").get<double>();
    const auto n = r.at("pairs").get<double>();
    const auto K = r.at("class_count").get<double>();
    const std::string kind = r.at("kind").get<std::string>();
    if (kind == "sample") {
        double expectation = 0.0;
        for (const auto& t : r.at("classes")) {
            const double deviation = 2.0 * t.at("diameter").get<double>() *
                                     std::sqrt(std::log(2.0 * K / delta) / (n * t.at("subset_size").get<double>()));
            expectation += t.at("weight").get<double>() * t.at("lip_rho").get<double>() * lip_f / gamma *
                           (t.at("mean_split_w1").get<double>() + deviation);
        }
        return std::sqrt(std::log(2.0 / delta) / (2.0 * m)) + expectation;
    }
    if (kind == "separation") {
        double weighted = 0.0;
        for (const auto& t : r.at("classes")) {
            weighted += t.at("weight").get<double>() * t.at("lip_rho").get<double>() * t.at("mean_split_w1").get<double>();
        }
        const auto& s = r.at("separation");
        const double denominator = s.at("max_lip_psi").get<double>() * s.at("max_inter_class_w1").get<double>();
        return lip_f * weighted / denominator + std::sqrt(std::log(1.0 / delta) / (2.0 * m));
    }
    throw DataError("unknown bound report kind '" + kind + "'");
}

CorollaryReport verify_corollary(const EmbeddingSet& phi, const EmbeddingSet& lambda, double B, double S,
                                 std::size_t trials, std::uint64_t seed, std::size_t max_support) {
    if (!(S > 0.0)) throw UsageError("separation constant S must be positive");
    if (!(B >= 0.0)) throw UsageError("bound constant B must be non-negative");
    if (phi.graph_ids != lambda.graph_ids) throw UsageError("phi and lambda embed different graphs");

    CorollaryReport report;
    report.ratio = std::isinf(S) ? 0.0 : B / S;

    const auto lip = lip_f_estimate(phi, lambda);
    report.factorization_violations = lip.violations.size();
    std::vector<char> excluded(phi.size(), 0);
    std::map<std::size_t, std::size_t> row_of;
    for (std::size_t r = 0; r < phi.size(); ++r) row_of[phi.graph_ids[r]] = r;
    for (const auto& v : lip.violations) {
        excluded[row_of[v.first]] = 1;
        excluded[row_of[v.second]] = 1;
    }
    std::vector<std::size_t> pool;
    for (std::size_t r = 0; r < phi.size(); ++r) {
        if (!excluded[r]) pool.push_back(r);
    }
    report.excluded_graphs = phi.size() - pool.size();
    if (pool.empty()) throw DataError("no graphs left after excluding factorization violations");

    Rng rng(seed);
    auto draw = [&](std::vector<std::size_t>& support, std::vector<double>& weights) {
        const std::size_t limit = std::min(max_support, pool.size());
        const std::size_t k = 1 + static_cast<std::size_t>(rng.below(limit));
        std::vector<std::size_t> shuffled = pool;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(shuffled.size() - i));
            std::swap(shuffled[i], shuffled[j]);
        }
        support.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(k));
        weights.resize(k);
        double total = 0.0;
        for (double& w : weights) {
            w = rng.uniform(0.05, 1.0);
            total += w;
        }
        for (double& w : weights) w /= total;
    };
    auto pushforward = [](const Matrix& vectors, const std::vector<std::size_t>& support, const std::vector<double>& w) {
        Matrix points(0, vectors.cols());
        for (std::size_t r : support) points.append_row(vectors.row(r));
        return DiscreteDistribution(std::move(points), w);
    };

    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<std::size_t> s1, s2;
        std::vector<double> w1, w2;
        draw(s1, w1);
        draw(s2, w2);
        CorollaryTrial trial;
        trial.phi_w1 = w1_exact(pushforward(phi.vectors, s1, w1), pushforward(phi.vectors, s2, w2)).cost;
        trial.lambda_w1 = w1_exact(pushforward(lambda.vectors, s1, w1), pushforward(lambda.vectors, s2, w2)).cost;
        const double excess = trial.phi_w1 - report.ratio * trial.lambda_w1;
        report.max_violation = t == 0 ? excess : std::max(report.max_violation, excess);
        if (excess > 1e-8) ++report.violations;
        report.samples.push_back(trial);
        report.first_support.push_back(std::move(s1));
        report.second_support.push_back(std::move(s2));
        report.first_weights.push_back(std::move(w1));
        report.second_weights.push_back(std::move(w2));
        ++report.trials;
    }
    return report;
}

}  // namespace wlbound
