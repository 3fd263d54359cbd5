#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlbound/encoders.hpp"
#include "wlbound/matrix.hpp"

namespace wlbound {

// gamma > 0, 0 < delta < 1. Per-class Lipschitz constants of the margin
// rho(., c) and of the predictor psi_c; empty vectors mean 1 for every class.
struct MarginParams {
    double gamma = 1.0;
    double delta = 0.1;
    std::vector<double> lip_rho;
    std::vector<double> lip_psi;

    double lip_rho_of(int label) const;
    double lip_psi_of(int label) const;
    // Throws UsageError on invalid values or per-class vectors of the wrong length.
    void validate(int class_count) const;
};

// scores[y - 1] - max over other classes. Needs at least two scores.
double margin(std::span<const double> scores, int label);

// Fraction of rows whose margin is <= gamma (inclusive).
double empirical_margin_loss(const Matrix& scores, std::span<const int> labels, double gamma);

struct LipschitzEstimate {
    // Max over pairs of d(phi) / d(lambda) among pairs with lambda-distance
    // above equality_tolerance. Zero when every ratio is zero.
    double estimate = 0.0;
    bool estimable = false;  // at least one pair had lambda-distance > tolerance
    std::size_t pairs_used = 0;
    std::size_t skipped_pairs = 0;
    // Skipped pairs whose phi-distance exceeds the tolerance: lambda does
    // not bound phi on them.
    std::vector<DistinguishedPair> violations;
};

// Rows are matched by graph id; throws UsageError when the id sets differ.
LipschitzEstimate lip_f_estimate(const EmbeddingSet& phi, const EmbeddingSet& lambda);

struct ClassTerms {
    int label = 0;
    std::size_t sample_count = 0;   // m_c
    double weight = 0.0;            // m_c / sum of m_c
    std::size_t subset_size = 0;    // floor(m_c / 2n)
    std::vector<double> split_w1;   // one per sample pair
    double mean_split_w1 = 0.0;
    double diameter = 0.0;          // largest within-class distance
    double lip_rho = 1.0;
    double deviation_term = 0.0;    // 2 * diameter * sqrt(log(2K/delta) / (n * subset_size))
    double class_term = 0.0;        // weighted contribution to the expectation
};

struct SeparationTerms {
    Matrix inter_class_w1;
    double max_inter_class_w1 = 0.0;
    double max_lip_psi = 1.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double theorem_bound = 0.0;     // same inputs without the separation denominator
    std::string large_margin;       // "satisfied", "violated" or "assumed"
    bool dominance_holds = true;
};

struct BoundReport {
    std::string kind;               // "sample" or "separation"
    double gamma = 1.0;
    double delta = 0.1;
    std::size_t pairs = 1;
    std::uint64_t seed = 0;
    double lip_f = 1.0;
    int class_count = 0;
    std::size_t m = 0;              // sum over classes of floor(m_c / 2n)
    std::size_t total_samples = 0;  // sum over classes of m_c
    std::vector<ClassTerms> classes;
    double confidence_term = 0.0;
    double expectation_term = 0.0;
    double bound = 0.0;
    std::optional<SeparationTerms> separation;
    nlohmann::json provenance = nlohmann::json::object();
};

// Sampled margin bound:
//   sqrt(log(2/delta) / 2m)
//   + sum_c w_c * lip_rho_c * lip_f / gamma
//       * (mean split W1_c + 2 diam_c sqrt(log(2K/delta) / (n floor(m_c/2n))))
// class_embeddings[k] holds the lambda-embeddings of class k + 1.
BoundReport sample_bound(std::span<const Matrix> class_embeddings, const MarginParams& params, double lip_f,
                         std::size_t pairs, std::uint64_t seed);

// Separation-aware variant:
//   lip_f * sum_c w_c lip_rho_c mean split W1_c / (max_c lip_psi_c * max_{c != c'} W1(c, c'))
//   + sqrt(log(1/delta) / 2m)
// `margins` (one per training sample) decides the large-margin flag.
BoundReport separation_bound(std::span<const Matrix> class_embeddings, const MarginParams& params, double lip_f,
                             std::size_t pairs, std::uint64_t seed,
                             std::optional<std::vector<double>> margins = std::nullopt);

// Symmetric K x K matrix of W1 between uniform class distributions.
Matrix inter_class_separation(std::span<const Matrix> class_embeddings);

// Recomputes the final value from the stored terms only.
double reassemble_bound(const nlohmann::json& report);

nlohmann::json to_json(const BoundReport& report);

struct CorollaryTrial {
    double phi_w1 = 0.0;
    double lambda_w1 = 0.0;
};

struct CorollaryReport {
    double ratio = 0.0;  // B / S
    std::size_t trials = 0;
    std::size_t violations = 0;
    double max_violation = 0.0;  // max of phi_w1 - ratio * lambda_w1
    std::size_t factorization_violations = 0;
    std::size_t excluded_graphs = 0;
    std::vector<CorollaryTrial> samples;
    // Supports and weights of each trial, for independent re-evaluation.
    std::vector<std::vector<std::size_t>> first_support, second_support;
    std::vector<std::vector<double>> first_weights, second_weights;
};

// Samples random pairs of weighted empirical distributions over the graphs
// and checks W1(phi#nu, phi#nu') <= (B/S) W1(lambda#nu, lambda#nu') + 1e-8.
// Graphs taking part in a factorization violation are left out of the pool.
CorollaryReport verify_corollary(const EmbeddingSet& phi, const EmbeddingSet& lambda, double B, double S,
                                 std::size_t trials, std::uint64_t seed, std::size_t max_support = 20);

}  // namespace wlbound
