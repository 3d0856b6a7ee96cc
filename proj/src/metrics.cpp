#include "taskguard/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "taskguard/errors.hpp"
#include "taskguard/rng.hpp"

namespace taskguard {

MetricsReport compute_metrics(const std::vector<PredictionPair>& pairs) {
    if (pairs.empty()) throw ValidationError("cannot compute metrics over zero predictions");
    for (const PredictionPair& pair : pairs)
        if (!(pair.score >= 0.0 && pair.score <= 1.0))
            throw ValidationError("prediction score must be in [0, 1]");

    MetricsReport report;
    report.n = static_cast<int>(pairs.size());

    for (const PredictionPair& pair : pairs) {
        const bool predicted = pair.score >= 0.5;
        if (predicted && pair.label) ++report.confusion.tp;
        else if (predicted && !pair.label) ++report.confusion.fp;
        else if (!predicted && !pair.label) ++report.confusion.tn;
        else ++report.confusion.fn;
    }
    report.accuracy =
        static_cast<double>(report.confusion.tp + report.confusion.tn) / report.n;

    const int positives = report.confusion.tp + report.confusion.fn;
    if (positives > 0) {
        const int predicted_pos = report.confusion.tp + report.confusion.fp;
        const double precision =
            predicted_pos > 0 ? static_cast<double>(report.confusion.tp) / predicted_pos : 0.0;
        const double recall = static_cast<double>(report.confusion.tp) / positives;
        report.precision = precision;
        report.recall = recall;
        report.f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;

        // Rank by descending score; stable sort keeps ties in input order.
        std::vector<std::size_t> order(pairs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pairs[a].score > pairs[b].score;
        });
        double ap_sum = 0.0;
        int hits = 0;
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            if (!pairs[order[rank]].label) continue;
            ++hits;
            ap_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
        report.average_precision = ap_sum / positives;
    }
    return report;
}

Json metrics_report_to_json(const MetricsReport& report) {
    auto or_null = [](const std::optional<double>& v) {
        return v ? Json(*v) : Json(nullptr);
    };
    Json j;
    j["n"] = report.n;
    j["threshold"] = 0.5;
    j["accuracy"] = report.accuracy;
    j["precision"] = or_null(report.precision);
    j["recall"] = or_null(report.recall);
    j["f1"] = or_null(report.f1);
    j["average_precision"] = or_null(report.average_precision);
    j["confusion"] = Json{{"tp", report.confusion.tp},
                          {"fp", report.confusion.fp},
                          {"tn", report.confusion.tn},
                          {"fn", report.confusion.fn}};
    j["backend_failures"] = report.backend_failures;
    return j;
}

namespace {

struct ChunkResult {
    std::vector<PredictionPair> pairs;
    int failures = 0;
};

ChunkResult score_chunk(const CorpusSample* samples, std::size_t count,
                        const EvalBackend& backend) {
    ChunkResult result;
    result.pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const CorpusSample& sample = samples[i];
        double score = 0.0;
        try {
            if (sample.kind == CorpusSample::Kind::feasibility) {
                score = backend.feasibility->assess(*sample.screen, sample.command).score;
            } else {
                score = backend.completeness
                            ->assess({*sample.screen_before, sample.command,
                                      *sample.screen_after})
                            .score;
            }
        } catch (const GuardUnavailableError&) {
            score = 0.0;  // unanswerable counts against the predictor
            ++result.failures;
        }
        result.pairs.push_back({score, sample.label});
    }
    return result;
}

}  // namespace

MetricsReport evaluate_corpus(const std::vector<CorpusSample>& samples,
                              const EvalBackend& backend, const EvalOptions& options) {
    if (samples.empty()) throw ValidationError("cannot evaluate an empty corpus");
    if (options.jobs < 1) throw ValidationError("jobs must be >= 1");
    if (options.sample_k && *options.sample_k < 1)
        throw ValidationError("subsample size must be >= 1");

    for (const CorpusSample& sample : samples) {
        if (sample.kind == CorpusSample::Kind::feasibility && !backend.feasibility)
            throw ValidationError(
                "corpus contains feasibility samples but no feasibility backend is configured");
        if (sample.kind == CorpusSample::Kind::completeness && !backend.completeness)
            throw ValidationError(
                "corpus contains completeness samples but no completeness backend is configured");
    }

    // Subsample, keeping the survivors in their original order.
    std::vector<CorpusSample> picked;
    const std::vector<CorpusSample>* subject = &samples;
    if (options.sample_k && static_cast<std::size_t>(*options.sample_k) < samples.size()) {
        SeededRng rng(options.seed);
        auto indices = rng.sample_indices(samples.size(),
                                          static_cast<std::size_t>(*options.sample_k));
        std::sort(indices.begin(), indices.end());
        picked.reserve(indices.size());
        for (std::size_t index : indices) picked.push_back(samples[index]);
        subject = &picked;
    }

    const std::size_t n = subject->size();
    const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(options.jobs), n);

    std::vector<ChunkResult> results;
    if (jobs <= 1) {
        results.push_back(score_chunk(subject->data(), n, backend));
    } else {
        results.resize(jobs);
        std::vector<std::thread> workers;
        const std::size_t chunk = (n + jobs - 1) / jobs;
        for (std::size_t w = 0; w < jobs; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            workers.emplace_back([&, w, begin, end] {
                results[w] = score_chunk(subject->data() + begin, end - begin, backend);
            });
        }
        for (std::thread& worker : workers) worker.join();
    }

    std::vector<PredictionPair> pairs;
    pairs.reserve(n);
    int failures = 0;
    for (const ChunkResult& result : results) {
        pairs.insert(pairs.end(), result.pairs.begin(), result.pairs.end());
        failures += result.failures;
    }

    MetricsReport report = compute_metrics(pairs);
    report.backend_failures = failures;
    return report;
}

MetricsReport evaluate_predictor(const std::string& corpus_path, const EvalBackend& backend,
                                 const EvalOptions& options) {
    return evaluate_corpus(read_corpus(corpus_path), backend, options);
}

}  // namespace taskguard
