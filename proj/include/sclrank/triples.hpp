#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "corpus_io.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace sclrank {

struct TrainingTriple {
    std::string query_id;
    std::string positive_doc_id;
    std::string negative_doc_id;
    bool augmented = false;

    friend bool operator==(TrainingTriple const&, TrainingTriple const&) = default;
};

/// Corpus-wide negatives for a query: every document not judged relevant to it.
/// Unjudged documents count as irrelevant.
class NegativePool {
public:
    NegativePool(Corpus const& corpus, Qrels const& qrels) : corpus_(&corpus), qrels_(&qrels) {}

    /// Number of candidates for the query.
    [[nodiscard]] std::size_t size(std::string const& query_id) const
    {
        std::size_t relevant_in_corpus = 0;
        if (auto const* judged = qrels_->judged(query_id)) {
            for (auto const& [doc, grade] : *judged) {
                if (grade >= 1 && corpus_->contains(doc)) {
                    ++relevant_in_corpus;
                }
            }
        }
        return corpus_->size() - relevant_in_corpus;
    }

    /// Uniform draw from the candidates by rejection over the corpus.
    /// Throws SkipAugmentation when the pool is empty.
    [[nodiscard]] std::string const& sample(std::string const& query_id, Rng& rng) const
    {
        if (size(query_id) == 0) {
            throw SkipAugmentation("no irrelevant document available for query '" + query_id +
                                   "'; skip augmentation for this triple");
        }
        auto docs = corpus_->documents();
        for (;;) {
            auto const& doc = docs[rng.uniform_index(docs.size())];
            if (!qrels_->is_relevant(query_id, doc.doc_id)) {
                return doc.doc_id;
            }
        }
    }

private:
    Corpus const* corpus_;
    Qrels const* qrels_;
};

} // namespace sclrank
