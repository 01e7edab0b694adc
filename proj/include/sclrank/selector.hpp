#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus_io.hpp"
#include "errors.hpp"
#include "log.hpp"
#include "rng.hpp"

namespace sclrank {

enum class SelectorStrategy { term_matching, embedding, sampling };

inline std::string to_string(SelectorStrategy s)
{
    switch (s) {
    case SelectorStrategy::term_matching: return "term_matching";
    case SelectorStrategy::embedding: return "embedding";
    case SelectorStrategy::sampling: return "sampling";
    }
    return "?";
}

inline SelectorStrategy parse_selector_strategy(std::string const& name)
{
    if (name == "term_matching" || name == "bm25") return SelectorStrategy::term_matching;
    if (name == "embedding" || name == "glove") return SelectorStrategy::embedding;
    if (name == "sampling") return SelectorStrategy::sampling;
    throw ConfigError("unknown selector strategy '" + name + "'");
}

struct SelectorConfig {
    SelectorStrategy strategy = SelectorStrategy::term_matching;
    std::size_t summary_size = 20;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (summary_size < 1) throw ConfigError("summary_size must be >= 1");
        if (!(bm25_k1 >= 0.0)) throw ConfigError("bm25_k1 must be >= 0");
        if (!(bm25_b >= 0.0 && bm25_b <= 1.0)) throw ConfigError("bm25_b must be in [0, 1]");
    }
};

/// Corpus-level statistics for sentence scoring: token idf and mean sentence length.
class IdfTable {
public:
    IdfTable() = default;

    /// idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1), always positive.
    [[nodiscard]] double idf(std::string const& token) const
    {
        auto it = df_.find(token);
        return formula(n_docs_, it == df_.end() ? 0 : it->second);
    }

    [[nodiscard]] static double formula(std::size_t n_docs, std::size_t df)
    {
        auto const n = static_cast<double>(n_docs);
        auto const f = static_cast<double>(df);
        return std::log((n - f + 0.5) / (f + 0.5) + 1.0);
    }

    [[nodiscard]] std::size_t n_docs() const { return n_docs_; }
    [[nodiscard]] double avg_sentence_length() const { return avg_sentence_length_; }
    [[nodiscard]] std::size_t document_frequency(std::string const& token) const
    {
        auto it = df_.find(token);
        return it == df_.end() ? 0 : it->second;
    }

    friend IdfTable build_idf(Corpus const& corpus);

private:
    std::size_t n_docs_ = 0;
    double avg_sentence_length_ = 0.0;
    std::unordered_map<std::string, std::size_t> df_;
};

inline IdfTable build_idf(Corpus const& corpus)
{
    if (corpus.empty()) {
        throw ValidationError("cannot build idf over an empty corpus");
    }
    IdfTable table;
    table.n_docs_ = corpus.size();
    std::size_t sentences = 0;
    std::size_t tokens = 0;
    std::unordered_set<std::string> present;
    for (auto const& doc : corpus.documents()) {
        present.clear();
        for (auto const& s : doc.sentences) {
            ++sentences;
            tokens += s.tokens.size();
            present.insert(s.tokens.begin(), s.tokens.end());
        }
        for (auto const& t : present) {
            ++table.df_[t];
        }
    }
    table.avg_sentence_length_ =
        sentences == 0 ? 0.0 : static_cast<double>(tokens) / static_cast<double>(sentences);
    return table;
}

/// Per-sentence relevance of a document to a query.
struct SentenceScores {
    std::string doc_id;
    std::vector<double> scores;        ///< raw score per sentence index; ranking key
    std::vector<double> probabilities; ///< p(s | q, d); uniform when all weights are 0
};

namespace detail {

inline std::vector<double> normalize_weights(std::vector<double> const& weights)
{
    std::vector<double> p(weights.size(), 0.0);
    if (weights.empty()) {
        return p;
    }
    double const total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total > 0.0) {
        for (std::size_t i = 0; i < weights.size(); ++i) {
            p[i] = weights[i] / total;
        }
    } else {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(weights.size()));
    }
    return p;
}

} // namespace detail

/// Okapi BM25 of each sentence against the query's distinct tokens.
inline SentenceScores score_term_matching(Query const& q, Document const& d, IdfTable const& idf,
                                          SelectorConfig const& cfg)
{
    std::vector<std::string> terms = q.tokens;
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    double const avg_len = idf.avg_sentence_length() > 0.0 ? idf.avg_sentence_length() : 1.0;
    SentenceScores out{d.doc_id, {}, {}};
    out.scores.reserve(d.sentences.size());
    std::unordered_map<std::string_view, int> tf;
    for (auto const& s : d.sentences) {
        tf.clear();
        for (auto const& t : s.tokens) {
            ++tf[t];
        }
        double score = 0.0;
        double const len_norm =
            1.0 - cfg.bm25_b + cfg.bm25_b * static_cast<double>(s.tokens.size()) / avg_len;
        for (auto const& t : terms) {
            auto it = tf.find(t);
            if (it == tf.end()) {
                continue;
            }
            auto const f = static_cast<double>(it->second);
            score += idf.idf(t) * f * (cfg.bm25_k1 + 1.0) / (f + cfg.bm25_k1 * len_norm);
        }
        out.scores.push_back(score);
    }
    out.probabilities = detail::normalize_weights(out.scores);
    return out;
}

/// Mean of the in-vocabulary token vectors; empty when no token is in vocabulary.
inline std::vector<double> mean_embedding(std::span<std::string const> tokens,
                                          EmbeddingTable const& emb)
{
    std::vector<double> sum(emb.dimension(), 0.0);
    std::size_t hits = 0;
    for (auto const& t : tokens) {
        if (auto v = emb.lookup(t)) {
            for (std::size_t i = 0; i < sum.size(); ++i) {
                sum[i] += (*v)[i];
            }
            ++hits;
        }
    }
    if (hits == 0) {
        return {};
    }
    for (auto& x : sum) {
        x /= static_cast<double>(hits);
    }
    return sum;
}

inline double cosine(std::span<double const> a, std::span<double const> b)
{
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

/// Cosine between mean query and mean sentence embeddings. Probabilities use
/// (cos + 1) / 2; a sentence or query with no in-vocabulary token scores 0.
inline SentenceScores score_embedding(Query const& q, Document const& d, EmbeddingTable const& emb)
{
    SentenceScores out{d.doc_id, {}, {}};
    auto const qvec = mean_embedding(q.tokens, emb);
    std::vector<double> weights;
    for (auto const& s : d.sentences) {
        auto const svec = mean_embedding(s.tokens, emb);
        if (qvec.empty() || svec.empty()) {
            out.scores.push_back(0.0);
            weights.push_back(0.0);
            continue;
        }
        double const c = cosine(qvec, svec);
        out.scores.push_back(c);
        weights.push_back((c + 1.0) / 2.0);
    }
    out.probabilities = detail::normalize_weights(weights);
    return out;
}

/// Document made of the given source sentences (ascending indices).
inline Document extract_sentences(Document const& d, std::span<std::size_t const> indices)
{
    Document out{d.doc_id + "#aug", {}, {}};
    for (auto idx : indices) {
        Sentence s = d.sentences[idx];
        s.source_index = d.sentences[idx].source_index;
        s.index = out.sentences.size();
        if (!out.text.empty()) {
            out.text.push_back(' ');
        }
        out.text += s.text;
        out.sentences.push_back(std::move(s));
    }
    return out;
}

/// The min(summary_size, |d|) highest-scoring sentences in document order.
/// Ties go to the smaller sentence index.
inline Document select_summary(SentenceScores const& scores, Document const& d,
                               SelectorConfig const& cfg)
{
    if (scores.scores.size() != d.sentences.size()) {
        throw ValidationError("sentence scores for '" + scores.doc_id + "' do not match document '" +
                              d.doc_id + "'");
    }
    if (d.sentences.empty()) {
        log::warn("document '" + d.doc_id + "' is empty; summary is empty");
        return extract_sentences(d, {});
    }
    std::vector<std::size_t> order(d.sentences.size());
    std::iota(order.begin(), order.end(), 0);
    auto const k = std::min(cfg.summary_size, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores.scores[a] != scores.scores[b]) {
                              return scores.scores[a] > scores.scores[b];
                          }
                          return a < b;
                      });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return extract_sentences(d, order);
}

/// Uniform sample without replacement of min(summary_size, |d|) sentences.
inline Document select_sampling(Document const& d, SelectorConfig const& cfg, Rng& rng)
{
    if (d.sentences.empty()) {
        log::warn("document '" + d.doc_id + "' is empty; summary is empty");
        return extract_sentences(d, {});
    }
    std::vector<std::size_t> idx(d.sentences.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto const k = std::min(cfg.summary_size, idx.size());
    // partial Fisher-Yates: the first k slots become the sample
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return extract_sentences(d, idx);
}

/// Strategy dispatch over the three selectors.
class Selector {
public:
    Selector(SelectorConfig cfg, IdfTable const* idf, EmbeddingTable const* emb)
        : cfg_(cfg), idf_(idf), emb_(emb)
    {
        cfg_.validate();
        if (cfg_.strategy == SelectorStrategy::term_matching && idf_ == nullptr) {
            throw ConfigError("term_matching selector requires an idf table");
        }
        if (cfg_.strategy == SelectorStrategy::embedding && (emb_ == nullptr || emb_->size() == 0)) {
            throw ConfigError("embedding selector requires an embeddings table");
        }
    }

    [[nodiscard]] SelectorConfig const& config() const { return cfg_; }

    /// Query-biased summary of `d`. `rng` is only consumed by the sampling strategy.
    [[nodiscard]] Document summarize(Query const& q, Document const& d, Rng& rng) const
    {
        switch (cfg_.strategy) {
        case SelectorStrategy::term_matching:
            return select_summary(score_term_matching(q, d, *idf_, cfg_), d, cfg_);
        case SelectorStrategy::embedding:
            return select_summary(score_embedding(q, d, *emb_), d, cfg_);
        case SelectorStrategy::sampling:
            return select_sampling(d, cfg_, rng);
        }
        return select_sampling(d, cfg_, rng);
    }

private:
    SelectorConfig cfg_;
    IdfTable const* idf_;
    EmbeddingTable const* emb_;
};

} // namespace sclrank
