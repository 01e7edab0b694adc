#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "corpus_io.hpp"
#include "encoder.hpp"
#include "errors.hpp"
#include "log.hpp"

namespace sclrank {

// ---------------------------------------------------------------------------
// Re-ranking

/// Orders each run list by `score(query, document)` descending; ties keep the
/// first-stage rank, then doc_id. Documents missing from the corpus are dropped.
template <typename ScoreFn>
Run rerank_with(Run const& runs, Corpus const& corpus, QuerySet const& queries, ScoreFn&& score)
{
    Run out;
    for (auto const& [qid, list] : runs) {
        auto qit = queries.find(qid);
        if (qit == queries.end()) {
            throw ValidationError("no query text for query_id '" + qid + "'");
        }
        struct Scored {
            RunEntry const* entry;
            double score;
        };
        std::vector<Scored> scored;
        scored.reserve(list.entries.size());
        for (auto const& e : list.entries) {
            auto const* doc = corpus.find(e.doc_id);
            if (doc == nullptr) {
                log::warn("rerank: dropping unknown doc_id '" + e.doc_id + "' for query '" + qid +
                          "'");
                continue;
            }
            scored.push_back({&e, static_cast<double>(score(qit->second, *doc))});
        }
        std::stable_sort(scored.begin(), scored.end(), [](Scored const& a, Scored const& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.entry->rank != b.entry->rank) return a.entry->rank < b.entry->rank;
            return a.entry->doc_id < b.entry->doc_id;
        });
        RunList ranked{qid, {}};
        ranked.entries.reserve(scored.size());
        for (std::size_t i = 0; i < scored.size(); ++i) {
            ranked.entries.push_back({scored[i].entry->doc_id, static_cast<int>(i + 1),
                                      scored[i].score});
        }
        out.emplace(qid, std::move(ranked));
    }
    return out;
}

/// Re-ranks with the encoder's relevance score.
inline Run rerank(ModelParams const& params, EncoderConfig const& cfg, Run const& runs,
                  Corpus const& corpus, QuerySet const& queries)
{
    return rerank_with(runs, corpus, queries, [&](Query const& q, Document const& d) {
        auto const x = featurize(q, d, cfg);
        return forward(params, x, cfg).score;
    });
}

// ---------------------------------------------------------------------------
// Metrics

enum class Gain { exponential, linear };

/// Mean of precision@r over relevant ranks, divided by all relevant documents
/// of the query. Empty when the query has no relevant judgment.
inline std::optional<double> average_precision(RunList const& ranking, Qrels const& qrels)
{
    auto const total_relevant = qrels.relevant_count(ranking.query_id);
    if (total_relevant == 0) {
        return std::nullopt;
    }
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        if (qrels.is_relevant(ranking.query_id, ranking.entries[i].doc_id)) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

/// 1 / rank of the first relevant document, 0 when none is retrieved.
inline double reciprocal_rank(RunList const& ranking, Qrels const& qrels)
{
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        if (qrels.is_relevant(ranking.query_id, ranking.entries[i].doc_id)) {
            return 1.0 / static_cast<double>(i + 1);
        }
    }
    return 0.0;
}

inline double gain_of(int grade, Gain gain)
{
    if (grade <= 0) return 0.0;
    return gain == Gain::exponential ? std::exp2(static_cast<double>(grade)) - 1.0
                                     : static_cast<double>(grade);
}

/// DCG@k / ideal DCG@k with discount log2(r + 1). Empty when the query has no
/// relevant judgment.
inline std::optional<double> ndcg_at_k(RunList const& ranking, Qrels const& qrels,
                                       std::size_t k = 10, Gain gain = Gain::exponential)
{
    if (qrels.relevant_count(ranking.query_id) == 0) {
        return std::nullopt;
    }
    double dcg = 0.0;
    auto const depth = std::min(k, ranking.entries.size());
    for (std::size_t i = 0; i < depth; ++i) {
        auto const g = qrels.grade(ranking.query_id, ranking.entries[i].doc_id);
        dcg += gain_of(g, gain) / std::log2(static_cast<double>(i + 2));
    }
    auto grades = qrels.grades(ranking.query_id);
    std::sort(grades.begin(), grades.end(), std::greater<>());
    double ideal = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
        ideal += gain_of(grades[i], gain) / std::log2(static_cast<double>(i + 2));
    }
    return dcg / ideal;
}

enum class Metric { map, rr, ndcg10 };

inline Metric parse_metric(std::string const& name)
{
    if (name == "map" || name == "ap") return Metric::map;
    if (name == "rr" || name == "mrr") return Metric::rr;
    if (name == "ndcg10" || name == "ndcg@10" || name == "ndcg") return Metric::ndcg10;
    throw ConfigError("unknown metric '" + name + "'");
}

inline std::string to_string(Metric m)
{
    switch (m) {
    case Metric::map: return "map";
    case Metric::rr: return "rr";
    case Metric::ndcg10: return "ndcg10";
    }
    return "?";
}

struct QueryMetrics {
    double ap = 0.0;
    double rr = 0.0;
    double ndcg10 = 0.0;

    [[nodiscard]] double get(Metric m) const
    {
        switch (m) {
        case Metric::map: return ap;
        case Metric::rr: return rr;
        case Metric::ndcg10: return ndcg10;
        }
        return 0.0;
    }
};

struct MetricReport {
    std::string system;
    std::map<std::string, QueryMetrics> per_query;
    QueryMetrics mean;
    std::size_t skipped = 0; ///< queries without relevant judgments

    [[nodiscard]] std::size_t query_count() const { return per_query.size(); }
};

/// Per-query and mean AP, RR and nDCG@10. Queries with no relevant judgment are
/// excluded and counted in `skipped`.
inline MetricReport evaluate(Run const& run, Qrels const& qrels, std::string system = "system",
                             Gain gain = Gain::exponential)
{
    MetricReport report;
    report.system = std::move(system);
    for (auto const& [qid, list] : run) {
        auto ap = average_precision(list, qrels);
        if (!ap) {
            ++report.skipped;
            continue;
        }
        QueryMetrics m;
        m.ap = *ap;
        m.rr = reciprocal_rank(list, qrels);
        m.ndcg10 = ndcg_at_k(list, qrels, 10, gain).value_or(0.0);
        report.per_query.emplace(qid, m);
    }
    if (report.skipped > 0) {
        log::warn(std::to_string(report.skipped) +
                  " quer(ies) without relevant judgments excluded from evaluation");
    }
    if (!report.per_query.empty()) {
        for (auto const& [qid, m] : report.per_query) {
            report.mean.ap += m.ap;
            report.mean.rr += m.rr;
            report.mean.ndcg10 += m.ndcg10;
        }
        auto const n = static_cast<double>(report.per_query.size());
        report.mean.ap /= n;
        report.mean.rr /= n;
        report.mean.ndcg10 /= n;
    }
    return report;
}

inline nlohmann::json to_json(MetricReport const& r)
{
    nlohmann::json per_query = nlohmann::json::object();
    for (auto const& [qid, m] : r.per_query) {
        per_query[qid] = {{"ap", m.ap}, {"rr", m.rr}, {"ndcg10", m.ndcg10}};
    }
    return {{"system", r.system},
            {"queries", r.query_count()},
            {"skipped", r.skipped},
            {"mean", {{"ap", r.mean.ap}, {"rr", r.mean.rr}, {"ndcg10", r.mean.ndcg10}}},
            {"per_query", per_query}};
}

inline void write_table(std::ostream& out, std::vector<MetricReport> const& reports)
{
    std::size_t width = 6;
    for (auto const& r : reports) width = std::max(width, r.system.size());
    out << std::left << std::setw(static_cast<int>(width)) << "system" << std::right
        << std::setw(8) << "n" << std::setw(10) << "AP" << std::setw(10) << "RR" << std::setw(10)
        << "nDCG@10" << '\n';
    for (auto const& r : reports) {
        out << std::left << std::setw(static_cast<int>(width)) << r.system << std::right
            << std::setw(8) << r.query_count() << std::fixed << std::setprecision(4)
            << std::setw(10) << r.mean.ap << std::setw(10) << r.mean.rr << std::setw(10)
            << r.mean.ndcg10 << '\n';
        out.unsetf(std::ios::fixed);
    }
}

/// CSV: query_id,ap,rr,ndcg10
inline void write_per_query_csv(std::ostream& out, MetricReport const& r)
{
    auto old = out.precision(17);
    out << "query_id,ap,rr,ndcg10\n";
    for (auto const& [qid, m] : r.per_query) {
        out << qid << ',' << m.ap << ',' << m.rr << ',' << m.ndcg10 << '\n';
    }
    out.precision(old);
}

inline std::map<std::string, QueryMetrics> read_per_query_csv(std::istream& in,
                                                              std::string const& source = "<csv>")
{
    std::map<std::string, QueryMetrics> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (detail::blank(line) || (lineno == 1 && line.rfind("query_id", 0) == 0)) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 4) throw ParseError(source, lineno, "expected query_id,ap,rr,ndcg10");
        QueryMetrics m;
        double* slots[] = {&m.ap, &m.rr, &m.ndcg10};
        for (std::size_t i = 0; i < 3; ++i) {
            auto v = detail::parse_double(f[i + 1]);
            if (!v) throw ParseError(source, lineno, "'" + f[i + 1] + "' is not a number");
            *slots[i] = *v;
        }
        if (!out.emplace(f[0], m).second) {
            throw ValidationError(source + ": duplicate query_id '" + f[0] + "'");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Significance

struct SignificanceResult {
    std::size_t n = 0;
    double mean_difference = 0.0;
    double t = 0.0;
    double p = std::numeric_limits<double>::quiet_NaN(); ///< two-sided; NaN when degenerate
    bool degenerate = false;
    bool significant_05 = false;
    bool significant_10 = false;
};

/// Two-sided paired Student t-test on differences a_i - b_i. All-zero
/// differences give t = 0, p = 1; constant non-zero differences are degenerate.
inline SignificanceResult paired_test(std::span<double const> a, std::span<double const> b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("paired test needs equally many values per system");
    }
    if (a.size() < 2) {
        throw std::invalid_argument("paired test needs at least two queries");
    }
    SignificanceResult r;
    r.n = a.size();
    auto const n = static_cast<double>(r.n);
    std::vector<double> diff(r.n);
    for (std::size_t i = 0; i < r.n; ++i) diff[i] = a[i] - b[i];
    double sum = 0.0;
    for (double d : diff) sum += d;
    r.mean_difference = sum / n;
    double ss = 0.0;
    for (double d : diff) ss += (d - r.mean_difference) * (d - r.mean_difference);
    double const sd = std::sqrt(ss / (n - 1.0));

    bool const all_zero = std::all_of(diff.begin(), diff.end(), [](double d) { return d == 0.0; });
    if (all_zero) {
        r.t = 0.0;
        r.p = 1.0;
        return r;
    }
    // relative guard: floating noise on constant differences is not variance
    if (sd <= 1e-12 * std::max(1.0, std::abs(r.mean_difference))) {
        r.degenerate = true;
        return r;
    }
    r.t = r.mean_difference / (sd / std::sqrt(n));
    boost::math::students_t dist(n - 1.0);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    r.p = std::min(1.0, r.p);
    r.significant_05 = r.p < 0.05;
    r.significant_10 = r.p < 0.10;
    return r;
}

inline nlohmann::json to_json(SignificanceResult const& r)
{
    nlohmann::json j{{"n", r.n},
                     {"mean_difference", r.mean_difference},
                     {"t", r.t},
                     {"degenerate", r.degenerate},
                     {"significant_05", r.significant_05},
                     {"significant_10", r.significant_10}};
    j["p"] = std::isnan(r.p) ? nlohmann::json(nullptr) : nlohmann::json(r.p);
    return j;
}

} // namespace sclrank
