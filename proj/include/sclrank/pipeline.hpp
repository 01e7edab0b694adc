#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "augmentation.hpp"
#include "batching.hpp"
#include "checkpoint.hpp"
#include "config.hpp"
#include "corpus_io.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "log.hpp"
#include "selector.hpp"
#include "synth.hpp"
#include "trainer.hpp"

namespace sclrank {

namespace fs = std::filesystem;

/// File locations and settings shared by the command-line subcommands.
struct PipelineConfig {
    std::optional<fs::path> queries;
    std::optional<fs::path> corpus;
    std::optional<fs::path> qrels;
    std::optional<fs::path> run;
    std::optional<fs::path> embeddings;
    std::optional<fs::path> train_qids;
    std::optional<fs::path> valid_qids;
    std::optional<fs::path> test_qids;
    std::size_t top_k = 100;
    TrainConfig train;
    fs::path output = "out";
    std::size_t jobs = 1;
};

/// Paths in the file are resolved relative to the directory holding it.
inline PipelineConfig load_pipeline_config(fs::path const& path)
{
    auto const j = load_json(path);
    auto const base = path.parent_path();
    PipelineConfig cfg;
    static const std::set<std::string> known{"queries", "corpus",     "qrels",     "run",
                                             "embeddings", "train_qids", "valid_qids",
                                             "test_qids", "top_k",    "train",     "output",
                                             "jobs"};
    for (auto const& [k, v] : j.items()) {
        if (!known.contains(k)) throw ConfigError("unknown config key '" + k + "'");
    }
    auto path_field = [&](char const* key, std::optional<fs::path>& out) {
        if (j.contains(key)) out = base / j[key].get<std::string>();
    };
    path_field("queries", cfg.queries);
    path_field("corpus", cfg.corpus);
    path_field("qrels", cfg.qrels);
    path_field("run", cfg.run);
    path_field("embeddings", cfg.embeddings);
    path_field("train_qids", cfg.train_qids);
    path_field("valid_qids", cfg.valid_qids);
    path_field("test_qids", cfg.test_qids);
    detail::read_field(j, "top_k", cfg.top_k);
    detail::read_field(j, "jobs", cfg.jobs);
    if (j.contains("output")) cfg.output = base / j["output"].get<std::string>();
    if (j.contains("train")) apply_train_config(j["train"], cfg.train);
    return cfg;
}

/// Everything loaded from a PipelineConfig.
struct Workspace {
    QuerySet queries;
    Corpus corpus;
    Qrels qrels;
    Run run;
    std::optional<EmbeddingTable> embeddings;
    std::optional<IdfTable> idf;
    std::vector<std::string> train_ids;
    std::vector<std::string> valid_ids;
    std::vector<std::string> test_ids;
};

namespace detail {

inline fs::path require_path(std::optional<fs::path> const& p, char const* what)
{
    if (!p) throw ConfigError(std::string("no ") + what + " path configured");
    if (!fs::exists(*p)) throw ConfigError(std::string(what) + " file not found: " + p->string());
    return *p;
}

} // namespace detail

struct LoadOptions {
    bool run = true;
    bool qrels = true;
    bool embeddings = false;
    bool idf = false;
};

inline Workspace load_workspace(PipelineConfig const& cfg, LoadOptions opts)
{
    Workspace ws;
    ws.queries = load_queries(detail::require_path(cfg.queries, "queries"));
    ws.corpus = load_corpus(detail::require_path(cfg.corpus, "corpus"));
    if (opts.qrels) ws.qrels = load_qrels(detail::require_path(cfg.qrels, "qrels"));
    if (opts.run) ws.run = load_run(detail::require_path(cfg.run, "run"), cfg.top_k);
    if (opts.embeddings) {
        ws.embeddings = load_embeddings(detail::require_path(cfg.embeddings, "embeddings"));
    }
    if (opts.idf) ws.idf = build_idf(ws.corpus);
    if (cfg.train_qids) ws.train_ids = load_id_list(detail::require_path(cfg.train_qids, "train_qids"));
    if (cfg.valid_qids) ws.valid_ids = load_id_list(detail::require_path(cfg.valid_qids, "valid_qids"));
    if (cfg.test_qids) ws.test_ids = load_id_list(detail::require_path(cfg.test_qids, "test_qids"));
    return ws;
}

inline LoadOptions selector_needs(SelectorConfig const& s, bool augment)
{
    LoadOptions o;
    o.idf = augment && s.strategy == SelectorStrategy::term_matching;
    o.embeddings = augment && s.strategy == SelectorStrategy::embedding;
    return o;
}

/// Training queries: the configured list, or every run query when none is given.
inline Run training_run(Workspace const& ws)
{
    if (ws.train_ids.empty()) return ws.run;
    return filter_run(ws.run, ws.train_ids);
}

inline TrainingSet training_set(Workspace const& ws, PipelineConfig const& cfg)
{
    NegativePool pool(ws.corpus, ws.qrels);
    return build_training_set(training_run(ws), ws.qrels, cfg.top_k, cfg.train.seed, &ws.corpus,
                              &pool);
}

inline void ensure_output(PipelineConfig const& cfg) { fs::create_directories(cfg.output); }

// ---------------------------------------------------------------------------
// Subcommands. Each returns a process exit code; data goes to files or `out`,
// diagnostics to the log.

/// Referential integrity of the configured files.
inline int cmd_validate(PipelineConfig const& cfg, std::ostream& out)
{
    for (auto const* p : {&cfg.queries, &cfg.corpus, &cfg.qrels, &cfg.run, &cfg.embeddings,
                          &cfg.train_qids, &cfg.valid_qids, &cfg.test_qids}) {
        if (*p && !fs::exists(**p)) {
            log::warn("missing file: " + (*p)->string());
            return 1;
        }
    }
    LoadOptions opts;
    opts.embeddings = cfg.embeddings.has_value();
    opts.run = cfg.run.has_value();
    opts.qrels = cfg.qrels.has_value();
    auto full = cfg;
    full.top_k = 0; // check every run line, not only the re-ranked prefix
    auto ws = load_workspace(full, opts);

    std::size_t problems = 0;
    auto problem = [&](std::string const& msg) {
        ++problems;
        log::warn(msg);
    };
    for (auto const& [qid, list] : ws.run) {
        if (!ws.queries.contains(qid)) problem("run query '" + qid + "' has no query text");
        for (auto const& e : list.entries) {
            if (!ws.corpus.contains(e.doc_id)) {
                problem("run for query '" + qid + "' references missing doc_id '" + e.doc_id + "'");
            }
        }
    }
    std::size_t judgments = 0;
    for (auto const& [qid, docs] : ws.qrels.all()) {
        judgments += docs.size();
        if (!ws.queries.contains(qid)) problem("qrels query '" + qid + "' has no query text");
    }
    for (auto const* ids : {&ws.train_ids, &ws.valid_ids, &ws.test_ids}) {
        for (auto const& id : *ids) {
            if (!ws.queries.contains(id)) problem("split lists unknown query '" + id + "'");
        }
    }
    std::size_t run_entries = 0;
    for (auto const& [qid, list] : ws.run) run_entries += list.entries.size();

    out << "queries\t" << ws.queries.size() << '\n'
        << "documents\t" << ws.corpus.size() << '\n'
        << "judged_queries\t" << ws.qrels.query_count() << '\n'
        << "judgments\t" << judgments << '\n'
        << "run_queries\t" << ws.run.size() << '\n'
        << "run_entries\t" << run_entries << '\n';
    if (ws.embeddings) {
        out << "embeddings\t" << ws.embeddings->size() << " x " << ws.embeddings->dimension()
            << '\n';
    }
    out << "problems\t" << problems << '\n';
    return problems == 0 ? 0 : 1;
}

/// Writes augmented.tsv (originals interleaved with flagged augmented triples),
/// augmented.stats.json and, when `summaries` is set, the extracted summaries
/// as JSONL.
inline int cmd_augment(PipelineConfig const& cfg, std::optional<fs::path> const& summaries = {})
{
    auto const& sel = cfg.train.selector;
    if (sel.strategy == SelectorStrategy::embedding && !cfg.embeddings) {
        throw ConfigError("the embedding selector needs an embeddings path");
    }
    auto ws = load_workspace(cfg, selector_needs(sel, true));
    auto const ts = training_set(ws, cfg);
    ensure_output(cfg);

    Selector selector(sel, ws.idf ? &*ws.idf : nullptr, ws.embeddings ? &*ws.embeddings : nullptr);
    NegativePool pool(ws.corpus, ws.qrels);
    Rng rng(Rng::derive(cfg.train.seed, 1));
    std::ofstream tsv(cfg.output / "augmented.tsv");
    std::optional<std::ofstream> summary_out;
    if (summaries) summary_out.emplace(*summaries);

    std::size_t originals = 0, augmented = 0, skipped_triples = 0, skipped_aug = 0;
    std::size_t summary_sentences = 0;
    for (auto const& batch : make_batches(ts, cfg.train.batch_size)) {
        auto ab = augment_batch(batch, ws.corpus, ws.queries, pool, selector, rng);
        write_triples(tsv, ab.triples);
        skipped_triples += ab.skipped_triples;
        skipped_aug += ab.skipped_augmentations;
        for (std::size_t i = 0; i < ab.triples.size(); ++i) {
            if (!ab.summaries[i]) {
                ++originals;
                continue;
            }
            ++augmented;
            summary_sentences += ab.summaries[i]->sentences.size();
            if (summary_out) {
                std::vector<std::size_t> src;
                for (auto const& s : ab.summaries[i]->sentences) src.push_back(s.source_index);
                nlohmann::json j{{"query_id", ab.triples[i].query_id},
                                 {"doc_id", ab.summaries[i]->doc_id},
                                 {"source_sentences", src},
                                 {"text", ab.summaries[i]->text}};
                *summary_out << j.dump() << '\n';
            }
        }
    }
    nlohmann::json stats{{"training_triples", ts.triples.size()},
                         {"original_triples", originals},
                         {"augmented_triples", augmented},
                         {"skipped_triples", skipped_triples},
                         {"skipped_augmentations", skipped_aug},
                         {"mean_summary_sentences",
                          augmented == 0 ? 0.0
                                         : static_cast<double>(summary_sentences) /
                                               static_cast<double>(augmented)},
                         {"selector", to_string(sel.strategy)},
                         {"summary_size", sel.summary_size}};
    std::ofstream(cfg.output / "augmented.stats.json") << stats.dump(2) << '\n';
    return 0;
}

inline TrainingData training_data(Workspace const& ws, Run const& validation)
{
    TrainingData d;
    d.corpus = &ws.corpus;
    d.queries = &ws.queries;
    d.qrels = &ws.qrels;
    d.idf = ws.idf ? &*ws.idf : nullptr;
    d.embeddings = ws.embeddings ? &*ws.embeddings : nullptr;
    d.validation_run = &validation;
    d.validation_qrels = &ws.qrels;
    return d;
}

inline Run validation_run(Workspace const& ws)
{
    if (ws.valid_ids.empty()) throw ValidationError("no validation queries configured");
    return filter_run(ws.run, ws.valid_ids);
}

inline void write_json(fs::path const& path, nlohmann::json const& j)
{
    std::ofstream(path) << j.dump(2) << '\n';
}

/// model.bin + train_report.json, or per-seed files when seeds > 1.
inline int cmd_train(PipelineConfig const& cfg, std::size_t seeds = 1)
{
    auto ws = load_workspace(cfg, selector_needs(cfg.train.selector, cfg.train.augment));
    auto const ts = training_set(ws, cfg);
    auto const valid = validation_run(ws);
    auto const data = training_data(ws, valid);
    ensure_output(cfg);
    write_json(cfg.output / "train_config.json", to_json(cfg.train));

    if (seeds <= 1) {
        auto r = train(ts, data, cfg.train);
        save_checkpoint(cfg.output / "model.bin", {cfg.train.encoder, r.params});
        write_json(cfg.output / "train_report.json", to_json(r.report, cfg.train));
        log::info("trained in " + std::to_string(r.report.wall_seconds) + " s");
        return 0;
    }
    auto results = train_seeds(ts, data, cfg.train, seeds, cfg.jobs);
    nlohmann::json summary{{"seeds", nlohmann::json::array()}};
    double mean = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto c = cfg.train;
        c.seed += i;
        c.encoder.init_seed += i;
        auto const stem = "seed" + std::to_string(c.seed);
        save_checkpoint(cfg.output / ("model_" + stem + ".bin"), {c.encoder, results[i].params});
        write_json(cfg.output / ("train_report_" + stem + ".json"), to_json(results[i].report, c));
        summary["seeds"].push_back(c.seed);
        mean += results[i].report.best_metric();
    }
    summary["mean_best_validation_metric"] = mean / static_cast<double>(results.size());
    write_json(cfg.output / "train_summary.json", summary);
    return 0;
}

inline int cmd_grid(PipelineConfig const& cfg, std::vector<double> taus, std::vector<double> lambdas)
{
    if (taus.empty()) taus = default_tau_grid();
    if (lambdas.empty()) lambdas = default_lambda_grid();
    auto ws = load_workspace(cfg, selector_needs(cfg.train.selector, cfg.train.augment));
    auto const ts = training_set(ws, cfg);
    auto const valid = validation_run(ws);
    auto const g = grid_search(taus, lambdas, ts, training_data(ws, valid), cfg.train, cfg.jobs);
    ensure_output(cfg);
    write_json(cfg.output / "grid.json", to_json(g, cfg.train.validation_metric));
    return 0;
}

/// Re-ranks the test queries (or every run query without a test list) and
/// writes a TREC run.
inline int cmd_rerank(PipelineConfig const& cfg, fs::path const& model, fs::path const& out_path,
                      std::string const& tag)
{
    auto ws = load_workspace(cfg, {.run = true, .qrels = false});
    auto const ck = load_checkpoint(model);
    auto const input = ws.test_ids.empty() ? ws.run : filter_run(ws.run, ws.test_ids);
    auto const ranked = rerank(ck.params, ck.encoder, input, ws.corpus, ws.queries);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    std::ofstream out(out_path);
    write_run(out, ranked, tag);
    return 0;
}

/// Metrics of a run file: JSON and per-query CSV next to `prefix`, table to `out`.
/// Without a test list every judged query of the run is evaluated.
inline int cmd_eval(PipelineConfig const& cfg, fs::path const& run_path, std::string const& tag,
                    fs::path const& prefix, std::ostream& out, Gain gain = Gain::exponential)
{
    auto qrels = load_qrels(detail::require_path(cfg.qrels, "qrels"));
    auto run = load_run(run_path, cfg.top_k);
    if (cfg.test_qids) run = filter_run(run, load_id_list(*cfg.test_qids));
    auto report = evaluate(run, qrels, tag, gain);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
    write_json(fs::path(prefix.string() + ".metrics.json"), to_json(report));
    std::ofstream csv(prefix.string() + ".per_query.csv");
    write_per_query_csv(csv, report);
    write_table(out, {report});
    return 0;
}

/// Paired t-test between two per-query CSVs on one metric.
inline int cmd_compare(fs::path const& a_path, fs::path const& b_path, Metric metric,
                       std::ostream& out)
{
    std::ifstream a_in(a_path), b_in(b_path);
    if (!a_in) throw ParseError(a_path.string(), 0, "cannot open file");
    if (!b_in) throw ParseError(b_path.string(), 0, "cannot open file");
    auto const a = read_per_query_csv(a_in, a_path.string());
    auto const b = read_per_query_csv(b_in, b_path.string());
    if (a.size() != b.size()) {
        throw ValidationError("systems were evaluated on different query sets");
    }
    std::vector<double> va, vb;
    for (auto const& [qid, m] : a) {
        auto it = b.find(qid);
        if (it == b.end()) throw ValidationError("query '" + qid + "' missing from " + b_path.string());
        va.push_back(m.get(metric));
        vb.push_back(it->second.get(metric));
    }
    auto const r = paired_test(va, vb);
    auto j = to_json(r);
    j["metric"] = to_string(metric);
    out << j.dump(2) << '\n';
    return 0;
}

inline int cmd_synth(synth::SynthConfig const& sc, fs::path const& dir)
{
    auto const ds = synth::generate(sc);
    synth::write_dataset(ds, dir, sc.top_k);
    return 0;
}

} // namespace sclrank
