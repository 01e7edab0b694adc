#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus_io.hpp"
#include "errors.hpp"
#include "log.hpp"
#include "rng.hpp"
#include "selector.hpp"
#include "triples.hpp"

namespace sclrank {

/// Training batch after augmentation. `summaries[i]` holds the extracted
/// positive for augmented triples and is empty for originals.
struct AugmentedBatch {
    std::vector<TrainingTriple> triples;
    std::vector<std::optional<Document>> summaries;
    std::size_t skipped_triples = 0;       ///< empty positives; original and copy both dropped
    std::size_t skipped_augmentations = 0; ///< no negative available; original kept

    /// Positive document of triple i.
    [[nodiscard]] Document const& positive(std::size_t i, Corpus const& corpus) const
    {
        return summaries[i] ? *summaries[i] : corpus.at(triples[i].positive_doc_id);
    }
};

namespace augmentation {

/// Number of augment_batch calls made by this process. Evaluation code paths
/// must leave it untouched.
inline std::atomic<std::size_t>& call_count()
{
    static std::atomic<std::size_t> n{0};
    return n;
}

} // namespace augmentation

/// Extractive query-biased version of a positive. Empty positives give nullopt.
inline std::optional<Document> augment_positive(Query const& q, Document const& positive,
                                                Selector const& selector, Rng& rng)
{
    if (positive.sentences.empty()) {
        log::warn("positive '" + positive.doc_id + "' for query '" + q.query_id +
                  "' is empty; skipping its augmentation");
        return std::nullopt;
    }
    return selector.summarize(q, positive, rng);
}

inline std::string const& sample_negative(Query const& q, NegativePool const& pool, Rng& rng)
{
    return pool.sample(q.query_id, rng);
}

/// Each original triple followed by its augmented counterpart (summary positive,
/// corpus-wide irrelevant negative). A triple with an empty positive is dropped
/// entirely; a triple whose query has no available negative keeps its original.
inline AugmentedBatch augment_batch(std::span<TrainingTriple const> batch, Corpus const& corpus,
                                    QuerySet const& queries, NegativePool const& pool,
                                    Selector const& selector, Rng& rng)
{
    augmentation::call_count().fetch_add(1, std::memory_order_relaxed);
    AugmentedBatch out;
    out.triples.reserve(2 * batch.size());
    out.summaries.reserve(2 * batch.size());
    for (auto const& t : batch) {
        auto const* pos = corpus.find(t.positive_doc_id);
        if (pos == nullptr || !corpus.contains(t.negative_doc_id)) {
            throw ValidationError("triple (" + t.query_id + ", " + t.positive_doc_id + ", " +
                                  t.negative_doc_id + ") references a document missing from "
                                  "the corpus");
        }
        auto qit = queries.find(t.query_id);
        if (qit == queries.end()) {
            throw ValidationError("triple references unknown query '" + t.query_id + "'");
        }
        auto summary = augment_positive(qit->second, *pos, selector, rng);
        if (!summary) {
            ++out.skipped_triples;
            continue;
        }
        out.triples.push_back(t);
        out.summaries.emplace_back();

        std::string negative;
        try {
            negative = sample_negative(qit->second, pool, rng);
        } catch (SkipAugmentation const& e) {
            log::warn(e.what());
            ++out.skipped_augmentations;
            continue;
        }
        out.triples.push_back({t.query_id, summary->doc_id, std::move(negative), true});
        out.summaries.push_back(std::move(summary));
    }
    return out;
}

} // namespace sclrank
