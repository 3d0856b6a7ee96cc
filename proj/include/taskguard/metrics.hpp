#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taskguard/corpus.hpp"
#include "taskguard/guards.hpp"

namespace taskguard {

struct PredictionPair {
    double score = 0.0;  // predicted, in [0, 1]
    bool label = false;  // ground truth
};

struct Confusion {
    int tp = 0;
    int fp = 0;
    int tn = 0;
    int fn = 0;

    bool operator==(const Confusion&) const = default;
};

struct MetricsReport {
    int n = 0;
    double accuracy = 0.0;
    // Undefined without at least one positive label; precision falls back to 0
    // when positives exist but nothing was predicted positive, so f1 stays
    // defined whenever recall is.
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> average_precision;
    Confusion confusion;
    int backend_failures = 0;  // corpus evaluation only
};

// Scores threshold at 0.5 (>= is positive). Average precision is the mean,
// over positive-label samples, of precision at that sample's rank with scores
// sorted descending and ties kept in input order. Throws ValidationError on
// empty input or out-of-range scores.
MetricsReport compute_metrics(const std::vector<PredictionPair>& pairs);

Json metrics_report_to_json(const MetricsReport& report);

// Which guard judges which sample kind. A corpus containing a kind whose
// backend is null is a configuration error.
struct EvalBackend {
    FeasibilityGuard* feasibility = nullptr;
    CompletenessGuard* completeness = nullptr;
};

struct EvalOptions {
    std::optional<int> sample_k;  // evaluate a seeded subsample of this size
    std::uint64_t seed = 0;
    int jobs = 1;  // backends must be safe for concurrent assess() when > 1
};

// Runs every (sampled) sample through its backend and scores the predictions
// against the labels. A GuardUnavailableError counts as a negative prediction
// and bumps backend_failures. Subsampling preserves input order so tie
// handling stays deterministic.
MetricsReport evaluate_corpus(const std::vector<CorpusSample>& samples,
                              const EvalBackend& backend, const EvalOptions& options = {});

MetricsReport evaluate_predictor(const std::string& corpus_path, const EvalBackend& backend,
                                 const EvalOptions& options = {});

}  // namespace taskguard
