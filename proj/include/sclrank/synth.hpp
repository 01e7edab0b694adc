#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpus_io.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace sclrank::synth {

struct SynthConfig {
    std::size_t train_queries = 200; ///< includes the validation queries
    std::size_t validation_queries = 40;
    std::size_t test_queries = 50;
    std::size_t corpus_size = 5000;
    std::size_t top_k = 100;
    std::size_t background_vocab = 3000;
    std::size_t embedding_dim = 16;
    /// Mean score advantage of relevant documents in the first-stage run, in
    /// units of the noise standard deviation.
    double first_stage_signal = 0.8;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (train_queries < 1 || test_queries < 1 || corpus_size < 1 || top_k < 1) {
            throw ConfigError("synthetic dataset parameters must be positive");
        }
        if (validation_queries >= train_queries) {
            throw ConfigError("validation queries must be fewer than training queries");
        }
        if (corpus_size < 8 * (train_queries + test_queries)) {
            throw ConfigError("corpus_size too small for the number of queries");
        }
    }
};

struct Dataset {
    QuerySet queries;
    std::vector<Document> documents; ///< corpus order
    Qrels qrels;
    Run run;
    std::vector<std::pair<std::string, std::vector<double>>> embeddings;
    std::vector<std::string> train_ids;
    std::vector<std::string> validation_ids;
    std::vector<std::string> test_ids;
    /// planted tokens per query
    std::map<std::string, std::vector<std::string>> planted;
};

namespace detail {

inline std::string pad(std::size_t v, int width)
{
    std::ostringstream ss;
    ss << std::setw(width) << std::setfill('0') << v;
    return ss.str();
}

inline double normal(Rng& rng)
{
    // Box-Muller on the portable uniform draw
    double u1 = 0.0;
    do {
        u1 = rng.uniform_real();
    } while (u1 <= 0.0);
    double const u2 = rng.uniform_real();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline std::size_t between(Rng& rng, std::size_t lo, std::size_t hi)
{
    return lo + rng.uniform_index(hi - lo + 1);
}

/// Sentence of background words, optionally with planted words inserted.
inline std::string sentence(Rng& rng, std::vector<std::string> const& background,
                            std::vector<std::string> const& planted)
{
    std::vector<std::string> words;
    auto const n = between(rng, 6, 12);
    for (std::size_t i = 0; i < n; ++i) {
        words.push_back(background[rng.uniform_index(background.size())]);
    }
    for (auto const& p : planted) {
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)),
                     p);
    }
    std::string out;
    for (auto const& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    out.push_back('.');
    return out;
}

/// Document text with `topical` sentences each carrying 1-2 of `planted`.
inline std::string document_text(Rng& rng, std::vector<std::string> const& background,
                                 std::vector<std::string> const& planted, std::size_t topical)
{
    auto const n = between(rng, 25, 45);
    std::vector<char> carries(n, 0);
    for (std::size_t i = 0; i < std::min(topical, n); ++i) carries[i] = 1;
    rng.shuffle(std::span<char>(carries));
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> inserted;
        if (carries[i] && !planted.empty()) {
            auto const k = between(rng, 1, std::min<std::size_t>(2, planted.size()));
            for (std::size_t j = 0; j < k; ++j) {
                inserted.push_back(planted[rng.uniform_index(planted.size())]);
            }
        }
        if (!text.empty()) text.push_back(' ');
        text += sentence(rng, background, inserted);
    }
    return text;
}

} // namespace detail

/// Seed-deterministic corpus with planted relevance signals.
///
/// Each query holds three tokens unique to it plus one common background word.
/// Its 1-4 relevant documents embed the unique tokens in a few sentences among
/// background sentences (grade 2 documents carry more of them). Distractor
/// documents share no unique token with the query; some carry tokens of
/// unrelated topics. The first-stage run lists the relevant documents among
/// top_k candidates with noisy scores.
inline Dataset generate(SynthConfig const& cfg)
{
    cfg.validate();
    Rng rng(cfg.seed);
    Dataset ds;

    std::vector<std::string> background;
    for (std::size_t i = 0; i < cfg.background_vocab; ++i) {
        background.push_back("w" + detail::pad(i, 4));
    }
    auto const n_queries = cfg.train_queries + cfg.test_queries;
    std::size_t const phantom_topics = n_queries;

    struct Topic {
        std::vector<std::string> tokens;
        std::vector<double> direction;
    };
    auto make_topic = [&](std::string const& prefix, std::size_t id) {
        Topic t;
        for (std::size_t j = 0; j < 3; ++j) {
            t.tokens.push_back(prefix + detail::pad(id, 4) + "x" + std::to_string(j));
        }
        for (std::size_t d = 0; d < cfg.embedding_dim; ++d) {
            t.direction.push_back(detail::normal(rng));
        }
        return t;
    };
    std::vector<Topic> topics;
    std::vector<Topic> phantoms;
    for (std::size_t q = 0; q < n_queries; ++q) topics.push_back(make_topic("z", q));
    for (std::size_t p = 0; p < phantom_topics; ++p) phantoms.push_back(make_topic("y", p));

    // documents are generated first, then shuffled into corpus order
    struct Pending {
        std::string text;
        std::size_t query = SIZE_MAX; ///< relevant for this query
        int grade = 0;
    };
    std::vector<Pending> pending;
    std::vector<std::string> common(n_queries);
    for (std::size_t q = 0; q < n_queries; ++q) {
        common[q] = background[rng.uniform_index(background.size())];
        auto const n_rel = detail::between(rng, 1, 4);
        for (std::size_t r = 0; r < n_rel; ++r) {
            int const grade = rng.uniform_real() < 0.4 ? 2 : 1;
            auto const topical = grade == 2 ? detail::between(rng, 5, 7) : detail::between(rng, 2, 4);
            auto planted = topics[q].tokens;
            planted.push_back(common[q]);
            pending.push_back({detail::document_text(rng, background, planted, topical), q, grade});
        }
    }
    if (pending.size() >= cfg.corpus_size) {
        throw ConfigError("corpus_size too small for the relevant documents");
    }
    while (pending.size() < cfg.corpus_size) {
        if (rng.uniform_real() < 0.3) {
            auto const& t = phantoms[rng.uniform_index(phantoms.size())];
            pending.push_back({detail::document_text(rng, background, t.tokens,
                                                     detail::between(rng, 2, 6)),
                               SIZE_MAX, 0});
        } else {
            pending.push_back({detail::document_text(rng, background, {}, 0), SIZE_MAX, 0});
        }
    }
    rng.shuffle(std::span(pending));

    std::vector<std::vector<std::size_t>> relevant(n_queries);
    for (std::size_t i = 0; i < pending.size(); ++i) {
        auto id = "D" + detail::pad(i, 5);
        ds.documents.push_back(make_document(id, pending[i].text));
        if (pending[i].query != SIZE_MAX) {
            relevant[pending[i].query].push_back(i);
        }
    }

    // queries, judgments and splits
    std::vector<std::string> qids;
    for (std::size_t q = 0; q < n_queries; ++q) {
        auto qid = "Q" + detail::pad(q, 4);
        auto tokens = topics[q].tokens;
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(4)), common[q]);
        std::string text;
        for (auto const& t : tokens) text += (text.empty() ? "" : " ") + t;
        ds.queries.emplace(qid, make_query(qid, text));
        ds.planted[qid] = topics[q].tokens;
        for (auto d : relevant[q]) {
            ds.qrels.set(qid, ds.documents[d].doc_id, pending[d].grade);
        }
        qids.push_back(qid);
    }
    auto const n_train_only = cfg.train_queries - cfg.validation_queries;
    for (std::size_t q = 0; q < n_queries; ++q) {
        if (q < n_train_only) {
            ds.train_ids.push_back(qids[q]);
        } else if (q < cfg.train_queries) {
            ds.validation_ids.push_back(qids[q]);
        } else {
            ds.test_ids.push_back(qids[q]);
        }
    }

    // first-stage run: relevant documents plus distractors, noisy scores
    auto const k = std::min(cfg.top_k, ds.documents.size());
    for (std::size_t q = 0; q < n_queries; ++q) {
        std::set<std::size_t> chosen(relevant[q].begin(), relevant[q].end());
        while (chosen.size() < k) {
            chosen.insert(rng.uniform_index(ds.documents.size()));
        }
        struct Cand {
            std::size_t doc;
            double score;
        };
        std::vector<Cand> cands;
        for (auto d : chosen) {
            bool const rel = pending[d].query == q;
            double const s = detail::normal(rng) + (rel ? cfg.first_stage_signal : 0.0);
            cands.push_back({d, s});
        }
        std::sort(cands.begin(), cands.end(), [](Cand const& a, Cand const& b) {
            return a.score != b.score ? a.score > b.score : a.doc < b.doc;
        });
        RunList list{qids[q], {}};
        for (std::size_t i = 0; i < cands.size(); ++i) {
            // fixed precision so written runs round-trip exactly
            double const s = std::round((10.0 + cands[i].score) * 1e6) / 1e6;
            list.entries.push_back({ds.documents[cands[i].doc].doc_id, static_cast<int>(i + 1), s});
        }
        ds.run.emplace(qids[q], std::move(list));
    }

    // embeddings: topic tokens cluster around their topic direction
    auto noisy = [&](std::vector<double> const* center, double spread) {
        std::vector<double> v(cfg.embedding_dim);
        for (std::size_t d = 0; d < v.size(); ++d) {
            double const c = center ? (*center)[d] : 0.0;
            v[d] = std::round((c + spread * detail::normal(rng)) * 1e4) / 1e4;
        }
        return v;
    };
    for (auto const& w : background) ds.embeddings.emplace_back(w, noisy(nullptr, 1.0));
    for (auto const* group : {&topics, &phantoms}) {
        for (auto const& t : *group) {
            for (auto const& tok : t.tokens) {
                ds.embeddings.emplace_back(tok, noisy(&t.direction, 0.3));
            }
        }
    }
    return ds;
}

inline void write_ids(std::filesystem::path const& path, std::vector<std::string> const& ids)
{
    std::ofstream out(path);
    for (auto const& id : ids) out << id << '\n';
}

/// Writes queries.tsv, corpus.jsonl, qrels.txt, run.txt, embeddings.txt,
/// {train,valid,test}.qids and a pipeline config.json into `dir`.
inline void write_dataset(Dataset const& ds, std::filesystem::path const& dir, std::size_t top_k)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "queries.tsv");
        write_queries(out, ds.queries);
    }
    {
        std::ofstream out(dir / "corpus.jsonl");
        for (auto const& d : ds.documents) write_document_jsonl(out, d);
    }
    {
        std::ofstream out(dir / "qrels.txt");
        write_qrels(out, ds.qrels);
    }
    {
        std::ofstream out(dir / "run.txt");
        out << std::fixed << std::setprecision(6);
        for (auto const& [qid, list] : ds.run) {
            for (auto const& e : list.entries) {
                out << qid << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << e.score
                    << " firststage\n";
            }
        }
    }
    {
        std::ofstream out(dir / "embeddings.txt");
        out << std::fixed << std::setprecision(4);
        for (auto const& [tok, vec] : ds.embeddings) {
            out << tok;
            for (double v : vec) out << ' ' << v;
            out << '\n';
        }
    }
    write_ids(dir / "train.qids", ds.train_ids);
    write_ids(dir / "valid.qids", ds.validation_ids);
    write_ids(dir / "test.qids", ds.test_ids);
    nlohmann::json cfg{{"queries", "queries.tsv"}, {"corpus", "corpus.jsonl"},
                       {"qrels", "qrels.txt"},     {"run", "run.txt"},
                       {"embeddings", "embeddings.txt"}, {"train_qids", "train.qids"},
                       {"valid_qids", "valid.qids"},     {"test_qids", "test.qids"},
                       {"top_k", top_k}};
    std::ofstream(dir / "config.json") << cfg.dump(2) << '\n';
}

} // namespace sclrank::synth
