#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "log.hpp"
#include "text.hpp"

namespace sclrank {

struct Query {
    std::string query_id;
    std::string text;
    std::vector<std::string> tokens;

    friend bool operator==(Query const&, Query const&) = default;
};

struct Document {
    std::string doc_id;
    std::string text;
    std::vector<Sentence> sentences;

    [[nodiscard]] std::size_t token_count() const
    {
        std::size_t n = 0;
        for (auto const& s : sentences) {
            n += s.tokens.size();
        }
        return n;
    }

    friend bool operator==(Document const&, Document const&) = default;
};

inline Query make_query(std::string id, std::string text)
{
    Query q{std::move(id), std::move(text), {}};
    q.tokens = tokenize(q.text);
    return q;
}

inline Document make_document(std::string id, std::string text)
{
    Document d{std::move(id), std::move(text), {}};
    d.sentences = split_sentences(d.text);
    return d;
}

/// Queries keyed by id; ordered so iteration is deterministic.
using QuerySet = std::map<std::string, Query>;

/// Documents in file order with an id index.
class Corpus {
public:
    Corpus() = default;

    /// Throws ValidationError on a duplicate id.
    void add(Document doc)
    {
        auto [it, inserted] = index_.emplace(doc.doc_id, docs_.size());
        if (!inserted) {
            throw ValidationError("duplicate doc_id '" + doc.doc_id + "'");
        }
        docs_.push_back(std::move(doc));
    }

    [[nodiscard]] Document const* find(std::string const& doc_id) const
    {
        auto it = index_.find(doc_id);
        return it == index_.end() ? nullptr : &docs_[it->second];
    }

    [[nodiscard]] Document const& at(std::string const& doc_id) const
    {
        if (auto const* d = find(doc_id)) {
            return *d;
        }
        throw ValidationError("unknown doc_id '" + doc_id + "'");
    }

    [[nodiscard]] bool contains(std::string const& doc_id) const { return index_.contains(doc_id); }
    [[nodiscard]] std::span<Document const> documents() const { return docs_; }
    [[nodiscard]] std::size_t size() const { return docs_.size(); }
    [[nodiscard]] bool empty() const { return docs_.empty(); }

    friend bool operator==(Corpus const& a, Corpus const& b) { return a.docs_ == b.docs_; }

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Graded judgments. Unjudged pairs have grade 0.
class Qrels {
public:
    /// Later assignments for the same pair override earlier ones.
    void set(std::string const& query_id, std::string const& doc_id, int grade)
    {
        judgments_[query_id][doc_id] = grade;
    }

    [[nodiscard]] int grade(std::string const& query_id, std::string const& doc_id) const
    {
        auto q = judgments_.find(query_id);
        if (q == judgments_.end()) {
            return 0;
        }
        auto d = q->second.find(doc_id);
        return d == q->second.end() ? 0 : d->second;
    }

    [[nodiscard]] bool is_relevant(std::string const& query_id, std::string const& doc_id) const
    {
        return grade(query_id, doc_id) >= 1;
    }

    /// Number of documents judged relevant (grade >= 1) for the query.
    [[nodiscard]] std::size_t relevant_count(std::string const& query_id) const
    {
        std::size_t n = 0;
        for (int g : grades(query_id)) {
            n += g >= 1 ? 1 : 0;
        }
        return n;
    }

    /// All judged grades for the query, in no particular order.
    [[nodiscard]] std::vector<int> grades(std::string const& query_id) const
    {
        std::vector<int> out;
        if (auto q = judgments_.find(query_id); q != judgments_.end()) {
            for (auto const& [doc, g] : q->second) {
                out.push_back(g);
            }
        }
        return out;
    }

    /// Judgments of one query, or nullptr when the query has none.
    [[nodiscard]] std::map<std::string, int> const* judged(std::string const& query_id) const
    {
        auto q = judgments_.find(query_id);
        return q == judgments_.end() ? nullptr : &q->second;
    }

    [[nodiscard]] std::map<std::string, std::map<std::string, int>> const& all() const
    {
        return judgments_;
    }

    [[nodiscard]] std::size_t query_count() const { return judgments_.size(); }

    friend bool operator==(Qrels const&, Qrels const&) = default;

private:
    std::map<std::string, std::map<std::string, int>> judgments_;
};

struct RunEntry {
    std::string doc_id;
    int rank = 0;
    double score = 0.0;

    friend bool operator==(RunEntry const&, RunEntry const&) = default;
};

struct RunList {
    std::string query_id;
    std::vector<RunEntry> entries;

    friend bool operator==(RunList const&, RunList const&) = default;
};

/// Run lists keyed by query id.
using Run = std::map<std::string, RunList>;

/// Fixed-dimension word vectors. Immutable once loaded.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

    void add(std::string token, std::vector<double> vec)
    {
        if (vec.size() != dimension_) {
            throw ValidationError("embedding for '" + token + "' has dimension " +
                                  std::to_string(vec.size()) + ", expected " +
                                  std::to_string(dimension_));
        }
        table_.insert_or_assign(std::move(token), std::move(vec));
    }

    /// Empty optional when the token has no vector.
    [[nodiscard]] std::optional<std::span<double const>> lookup(std::string const& token) const
    {
        auto it = table_.find(token);
        if (it == table_.end()) {
            return std::nullopt;
        }
        return std::span<double const>(it->second);
    }

    [[nodiscard]] std::size_t dimension() const { return dimension_; }
    [[nodiscard]] std::size_t size() const { return table_.size(); }

private:
    std::size_t dimension_ = 0;
    std::unordered_map<std::string, std::vector<double>> table_;
};

// ---------------------------------------------------------------------------
// Readers

namespace detail {

inline std::ifstream open_input(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open file");
    }
    return in;
}

inline std::vector<std::string> split_ws(std::string const& line)
{
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (ss >> f) {
        fields.push_back(std::move(f));
    }
    return fields;
}

inline bool blank(std::string const& line)
{
    return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

inline void chomp(std::string& line)
{
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

inline std::optional<int> parse_int(std::string const& s)
{
    std::size_t pos = 0;
    try {
        int v = std::stoi(s, &pos);
        return pos == s.size() ? std::optional<int>(v) : std::nullopt;
    } catch (std::exception const&) {
        return std::nullopt;
    }
}

inline std::optional<double> parse_double(std::string const& s)
{
    std::size_t pos = 0;
    try {
        double v = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
    } catch (std::exception const&) {
        return std::nullopt;
    }
}

} // namespace detail

/// TSV, `query_id<TAB>text` per line; blank lines are ignored.
inline QuerySet read_queries(std::istream& in, std::string const& source = "<queries>")
{
    QuerySet queries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (detail::blank(line)) {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(source, lineno, "expected query_id<TAB>text");
        }
        auto id = line.substr(0, tab);
        if (id.empty()) {
            throw ParseError(source, lineno, "empty query_id");
        }
        auto q = make_query(id, line.substr(tab + 1));
        if (!queries.emplace(id, std::move(q)).second) {
            throw ValidationError(source + ": duplicate query_id '" + id + "'");
        }
    }
    return queries;
}

inline QuerySet load_queries(std::filesystem::path const& path)
{
    auto in = detail::open_input(path);
    return read_queries(in, path.string());
}

/// JSONL with string fields `doc_id` and `text`.
inline Corpus read_corpus(std::istream& in, std::string const& source = "<corpus>")
{
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (nlohmann::json::parse_error const& e) {
            throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object() || !obj.contains("doc_id") || !obj["doc_id"].is_string() ||
            !obj.contains("text") || !obj["text"].is_string()) {
            throw ParseError(source, lineno, "expected object with string fields doc_id and text");
        }
        auto doc = make_document(obj["doc_id"].get<std::string>(), obj["text"].get<std::string>());
        if (doc.sentences.empty()) {
            log::warn(source + ":" + std::to_string(lineno) + ": document '" + doc.doc_id +
                      "' has no sentences");
        }
        try {
            corpus.add(std::move(doc));
        } catch (ValidationError const& e) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return corpus;
}

inline Corpus load_corpus(std::filesystem::path const& path)
{
    auto in = detail::open_input(path);
    return read_corpus(in, path.string());
}

/// TREC qrels: `qid iter docid grade`.
inline Qrels read_qrels(std::istream& in, std::string const& source = "<qrels>")
{
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) {
            continue;
        }
        auto f = detail::split_ws(line);
        if (f.size() != 4) {
            throw ParseError(source, lineno, "expected 4 columns, got " + std::to_string(f.size()));
        }
        auto grade = detail::parse_int(f[3]);
        if (!grade) {
            throw ParseError(source, lineno, "grade '" + f[3] + "' is not an integer");
        }
        if (*grade < 0) {
            throw ParseError(source, lineno, "negative grade");
        }
        if (auto const* j = qrels.judged(f[0]); j && j->contains(f[2])) {
            log::warn(source + ":" + std::to_string(lineno) + ": duplicate judgment (" + f[0] +
                      ", " + f[2] + "), keeping the later one");
        }
        qrels.set(f[0], f[2], *grade);
    }
    return qrels;
}

inline Qrels load_qrels(std::filesystem::path const& path)
{
    auto in = detail::open_input(path);
    return read_qrels(in, path.string());
}

/// TREC run: `qid Q0 docid rank score tag`. A positive top_k truncates each list.
inline Run read_run(std::istream& in, std::size_t top_k = 0, std::string const& source = "<run>")
{
    Run run;
    std::map<std::string, std::map<std::string, std::size_t>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) {
            continue;
        }
        auto f = detail::split_ws(line);
        if (f.size() != 6) {
            throw ParseError(source, lineno, "expected 6 columns, got " + std::to_string(f.size()));
        }
        auto rank = detail::parse_int(f[3]);
        auto score = detail::parse_double(f[4]);
        if (!rank || *rank < 1) {
            throw ParseError(source, lineno, "rank '" + f[3] + "' is not a positive integer");
        }
        if (!score) {
            throw ParseError(source, lineno, "score '" + f[4] + "' is not a finite number");
        }
        auto& list = run[f[0]];
        list.query_id = f[0];
        if (!list.entries.empty()) {
            auto const& prev = list.entries.back();
            if (*rank <= prev.rank) {
                throw ValidationError(source + ":" + std::to_string(lineno) + ": rank " +
                                      f[3] + " for query '" + f[0] +
                                      "' does not increase (previous " +
                                      std::to_string(prev.rank) + ")");
            }
            if (*score > prev.score) {
                throw ValidationError(source + ":" + std::to_string(lineno) +
                                      ": score increases with rank for query '" + f[0] + "'");
            }
        }
        if (!seen[f[0]].emplace(f[2], lineno).second) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": doc_id '" + f[2] +
                                  "' repeated for query '" + f[0] + "'");
        }
        list.entries.push_back({f[2], *rank, *score});
    }
    if (top_k > 0) {
        for (auto& [qid, list] : run) {
            if (list.entries.size() > top_k) {
                list.entries.resize(top_k);
            }
        }
    }
    return run;
}

inline Run load_run(std::filesystem::path const& path, std::size_t top_k = 0)
{
    auto in = detail::open_input(path);
    return read_run(in, top_k, path.string());
}

/// Space-separated `token v1 ... vd`; d is inferred from the first line.
inline EmbeddingTable read_embeddings(std::istream& in, std::string const& source = "<embeddings>")
{
    std::optional<EmbeddingTable> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) {
            continue;
        }
        auto f = detail::split_ws(line);
        if (f.size() < 2) {
            throw ParseError(source, lineno, "expected a token followed by values");
        }
        std::vector<double> vec;
        vec.reserve(f.size() - 1);
        for (std::size_t i = 1; i < f.size(); ++i) {
            auto v = detail::parse_double(f[i]);
            if (!v) {
                throw ParseError(source, lineno, "value '" + f[i] + "' is not a finite number");
            }
            vec.push_back(*v);
        }
        if (!table) {
            table.emplace(vec.size());
        } else if (vec.size() != table->dimension()) {
            throw ParseError(source, lineno,
                             "dimension " + std::to_string(vec.size()) + " differs from " +
                                 std::to_string(table->dimension()));
        }
        table->add(f[0], std::move(vec));
    }
    return table ? std::move(*table) : EmbeddingTable{};
}

inline EmbeddingTable load_embeddings(std::filesystem::path const& path)
{
    auto in = detail::open_input(path);
    return read_embeddings(in, path.string());
}

// ---------------------------------------------------------------------------
// Writers

inline void write_run(std::ostream& out, Run const& run, std::string const& tag)
{
    auto old = out.precision(17);
    for (auto const& [qid, list] : run) {
        for (auto const& e : list.entries) {
            out << qid << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << e.score << ' ' << tag
                << '\n';
        }
    }
    out.precision(old);
}

inline void write_queries(std::ostream& out, QuerySet const& queries)
{
    for (auto const& [id, q] : queries) {
        out << id << '\t' << q.text << '\n';
    }
}

inline void write_qrels(std::ostream& out, Qrels const& qrels)
{
    for (auto const& [qid, docs] : qrels.all()) {
        for (auto const& [doc, grade] : docs) {
            out << qid << " 0 " << doc << ' ' << grade << '\n';
        }
    }
}

inline void write_document_jsonl(std::ostream& out, Document const& doc)
{
    nlohmann::json obj{{"doc_id", doc.doc_id}, {"text", doc.text}};
    out << obj.dump() << '\n';
}

/// Keep only the run lists whose query id is in `ids`.
inline Run filter_run(Run const& run, std::span<std::string const> ids)
{
    Run out;
    for (auto const& id : ids) {
        if (auto it = run.find(id); it != run.end()) {
            out.emplace(id, it->second);
        }
    }
    return out;
}

/// One identifier per non-blank line.
inline std::vector<std::string> load_id_list(std::filesystem::path const& path)
{
    auto in = detail::open_input(path);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        detail::chomp(line);
        if (!detail::blank(line)) {
            ids.push_back(normalize_whitespace(line));
        }
    }
    return ids;
}

} // namespace sclrank
