#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "corpus_io.hpp"
#include "errors.hpp"
#include "log.hpp"
#include "rng.hpp"
#include "triples.hpp"

namespace sclrank {

struct QueryProvenance {
    std::size_t positives = 0;
    std::size_t negatives = 0;

    friend bool operator==(QueryProvenance const&, QueryProvenance const&) = default;
};

struct TrainingSet {
    std::vector<TrainingTriple> triples;
    std::uint64_t seed = 0;
    std::map<std::string, QueryProvenance> provenance;
};

struct PointwiseInstance {
    std::string query_id;
    std::string doc_id;
    int label = 0;

    friend bool operator==(PointwiseInstance const&, PointwiseInstance const&) = default;
};

using Batch = std::vector<TrainingTriple>;

/// Triples from the top-k of each run list: every judged-relevant document is
/// paired with one grade-0 document drawn from the same top-k. Queries without
/// in-list negatives fall back to `fallback` when given. The result is shuffled.
///
/// Run entries absent from `corpus` (when given) are ignored.
inline TrainingSet build_training_set(Run const& runs, Qrels const& qrels, std::size_t top_k,
                                      std::uint64_t seed, Corpus const* corpus = nullptr,
                                      NegativePool const* fallback = nullptr)
{
    if (top_k < 1) {
        throw ConfigError("top-k cutoff must be >= 1");
    }
    TrainingSet ts;
    ts.seed = seed;
    Rng rng(seed);
    for (auto const& [qid, list] : runs) {
        std::vector<std::string const*> positives;
        std::vector<std::string const*> negatives;
        auto const n = std::min(top_k, list.entries.size());
        for (std::size_t i = 0; i < n; ++i) {
            auto const& id = list.entries[i].doc_id;
            if (corpus && !corpus->contains(id)) {
                continue;
            }
            (qrels.is_relevant(qid, id) ? positives : negatives).push_back(&id);
        }
        if (positives.empty()) {
            continue;
        }
        NegativePool const* pool = nullptr;
        if (negatives.empty()) {
            pool = fallback;
            if (pool == nullptr) {
                log::warn("query '" + qid + "' has no irrelevant document in its top-" +
                          std::to_string(top_k) + " and no fallback pool; skipping it");
                continue;
            }
            log::warn("query '" + qid + "' has no irrelevant document in its top-" +
                      std::to_string(top_k) + "; sampling negatives corpus-wide");
        }
        auto& prov = ts.provenance[qid];
        for (auto const* pos : positives) {
            std::string neg;
            if (pool != nullptr) {
                try {
                    neg = pool->sample(qid, rng);
                } catch (SkipAugmentation const&) {
                    log::warn("no negative available for query '" + qid + "'");
                    continue;
                }
            } else {
                neg = *negatives[rng.uniform_index(negatives.size())];
            }
            ts.triples.push_back({qid, *pos, std::move(neg), false});
            ++prov.positives;
            ++prov.negatives;
        }
    }
    rng.shuffle(std::span(ts.triples));
    return ts;
}

/// Keeps the first n_instances / 2 triples (each triple counts as one positive
/// and one negative instance).
inline TrainingSet subsample(TrainingSet const& ts, std::size_t n_instances)
{
    if (n_instances % 2 != 0) {
        throw ValidationError("n_instances must be even, got " + std::to_string(n_instances));
    }
    auto const want = n_instances / 2;
    if (want > ts.triples.size()) {
        throw ValidationError("requested " + std::to_string(want) + " triples but only " +
                              std::to_string(ts.triples.size()) + " are available");
    }
    TrainingSet out;
    out.seed = ts.seed;
    out.triples.assign(ts.triples.begin(), ts.triples.begin() + static_cast<std::ptrdiff_t>(want));
    for (auto const& t : out.triples) {
        auto& p = out.provenance[t.query_id];
        ++p.positives;
        ++p.negatives;
    }
    return out;
}

/// Consecutive slices of batch_size triples. A trailing batch with fewer than
/// two triples is dropped.
inline std::vector<Batch> make_batches(std::span<TrainingTriple const> triples,
                                       std::size_t batch_size)
{
    if (batch_size < 2) {
        throw ConfigError("batch_size must be >= 2");
    }
    std::vector<Batch> batches;
    for (std::size_t start = 0; start < triples.size(); start += batch_size) {
        auto const end = std::min(start + batch_size, triples.size());
        if (end - start < 2) {
            log::warn("dropping trailing batch of " + std::to_string(end - start) + " triple(s)");
            break;
        }
        batches.emplace_back(triples.begin() + static_cast<std::ptrdiff_t>(start),
                             triples.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

inline std::vector<Batch> make_batches(TrainingSet const& ts, std::size_t batch_size)
{
    return make_batches(std::span<TrainingTriple const>(ts.triples), batch_size);
}

/// (q, d+, 1) then (q, d-, 0) for every triple, in order.
inline std::vector<PointwiseInstance> to_pointwise(std::span<TrainingTriple const> batch)
{
    std::vector<PointwiseInstance> out;
    out.reserve(2 * batch.size());
    for (auto const& t : batch) {
        out.push_back({t.query_id, t.positive_doc_id, 1});
        out.push_back({t.query_id, t.negative_doc_id, 0});
    }
    return out;
}

// TSV: query_id, pos_doc_id, neg_doc_id, augmented flag (0/1).

inline void write_triples(std::ostream& out, std::span<TrainingTriple const> triples)
{
    for (auto const& t : triples) {
        out << t.query_id << '\t' << t.positive_doc_id << '\t' << t.negative_doc_id << '\t'
            << (t.augmented ? 1 : 0) << '\n';
    }
}

inline std::vector<TrainingTriple> read_triples(std::istream& in,
                                                std::string const& source = "<triples>")
{
    std::vector<TrainingTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (detail::blank(line)) {
            continue;
        }
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            auto tab = line.find('\t', start);
            f.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (f.size() != 4 || (f[3] != "0" && f[3] != "1")) {
            throw ParseError(source, lineno, "expected query_id, pos, neg, flag(0/1)");
        }
        out.push_back({f[0], f[1], f[2], f[3] == "1"});
    }
    return out;
}

} // namespace sclrank
