// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sclrank/pipeline.hpp"

using namespace sclrank;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(char const* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir()
{
    static fs::path const dir = [] {
        auto d = fs::temp_directory_path() / ("sclrank_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// ---------------------------------------------------------------------------
// 1. Finite-difference agreement of parameter gradients

Outcome gradient_correctness()
{
    auto const t0 = Clock::now();
    Rng rng(20240601);
    double worst = 0.0;
    std::string worst_where;
    std::size_t checks = 0, entries = 0;
    for (int config = 0; config < 20; ++config) {
        auto const p = oracle::random_params(rng, 50, 8, 4, 0.5).cast<long double>();
        bool const normalize = config % 2 == 0;
        // 2-4 triples laid out as (positive, negative) instance pairs, batch <= 8
        auto const n_triples = 2 + rng.uniform_index(3);
        std::vector<FeatureVector> xs;
        std::vector<std::string> qids;
        std::vector<int> labels;
        for (std::size_t t = 0; t < n_triples; ++t) {
            std::string const q = t < 2 ? "a" : (rng.uniform_index(2) ? "a" : "b");
            for (int label : {1, 0}) {
                xs.push_back(oracle::random_features(rng, 50, 4 + rng.uniform_index(8)));
                qids.push_back(q);
                labels.push_back(label);
            }
        }
        std::vector<LossConfig> settings;
        for (auto base : {RankingLoss::pointwise, RankingLoss::pairwise}) {
            LossConfig plain;
            plain.base = base;
            plain.lambda = 0.0;
            settings.push_back(plain);
            for (double lambda : {0.3, 0.8}) {
                for (double tau : {0.4, 1.0}) {
                    LossConfig c;
                    c.base = base;
                    c.lambda = lambda;
                    c.tau = tau;
                    settings.push_back(c);
                }
            }
        }
        for (auto const& cfg : settings) {
            auto const rep = oracle::fd_check(p, xs, qids, labels, normalize, cfg, 1e-5, 1e-8);
            ++checks;
            entries += rep.checked;
            if (rep.max_rel_error > worst) {
                worst = rep.max_rel_error;
                worst_where = fmt("config %d, %s, lambda %.1f, tau %.1f, %s", config,
                                  to_string(cfg.base).c_str(), cfg.lambda, cfg.tau,
                                  rep.worst.c_str());
            }
        }
    }
    double const elapsed = seconds_since(t0);
    bool const pass = worst <= 1e-4 && elapsed < 120.0 && entries > 0;
    return {pass, fmt("%zu loss settings, %zu gradient entries, max relative error %.2e (%s), %.1f s",
                      checks, entries, worst, worst_where.c_str(), elapsed)};
}

// ---------------------------------------------------------------------------
// 2. Contrastive loss against the double-loop transcription

Outcome scl_oracle_equivalence()
{
    auto const t0 = Clock::now();
    Rng rng(77);
    double worst = 0.0;
    std::size_t zero_batches = 0, zero_exact = 0;
    for (int trial = 0; trial < 200; ++trial) {
        auto const n = 2 + rng.uniform_index(7);
        auto const dim = 1 + rng.uniform_index(4);
        double const tau = rng.uniform_real(0.05, 2.0);
        std::vector<oracle::SclItem> items;
        std::vector<std::string> qids;
        std::vector<std::vector<double>> phis;
        int const mode = trial % 4; // 0: distinct queries, 1: no positives, else random
        for (std::size_t i = 0; i < n; ++i) {
            int const q = mode == 0 ? static_cast<int>(i) : static_cast<int>(rng.uniform_index(3));
            int const y = mode == 1 ? 0 : static_cast<int>(rng.uniform_index(2));
            std::vector<double> phi(dim);
            for (auto& v : phi) v = rng.uniform_real(-1.5, 1.5);
            items.push_back({q, y, phi});
            qids.push_back("q" + std::to_string(q));
            phis.push_back(phi);
        }
        std::vector<ScoredInstance<double>> batch;
        for (std::size_t i = 0; i < n; ++i) {
            batch.push_back({qids[i], items[i].label, 0.5, phis[i]});
        }
        LossConfig cfg;
        cfg.tau = tau;
        double const fast = scl_loss(std::span<ScoredInstance<double> const>(batch), cfg).loss;
        double const slow = oracle::scl_double_loop(items, tau);
        worst = std::max(worst, std::abs(fast - slow));
        bool any_pair = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                any_pair = any_pair || (i != j && items[i].query == items[j].query &&
                                        items[i].label == 1 && items[j].label == 1);
            }
        }
        if (!any_pair) {
            ++zero_batches;
            zero_exact += (fast == 0.0 && slow == 0.0) ? 1 : 0;
        }
    }
    double const elapsed = seconds_since(t0);
    bool const pass = worst <= 1e-10 && zero_batches > 0 && zero_exact == zero_batches &&
                      elapsed < 10.0;
    return {pass, fmt("200 batches, max |difference| %.2e, %zu/%zu pair-free batches exactly 0, %.3f s",
                      worst, zero_exact, zero_batches, elapsed)};
}

// ---------------------------------------------------------------------------
// 3. Worked contrastive value

Outcome scl_worked_value()
{
    std::vector<double> a{1, 0}, b{1, 0}, c{0, 1};
    std::vector<ScoredInstance<double>> batch{{"q1", 1, 0.5, a}, {"q1", 1, 0.5, b}, {"q2", 0, 0.5, c}};
    LossConfig cfg;
    cfg.tau = 1.0;
    double const v = scl_loss(std::span<ScoredInstance<double> const>(batch), cfg).loss;
    double const expected = std::log1p(std::exp(-1.0));
    return {std::abs(v - expected) <= 1e-9,
            fmt("value %.12f, expected log(1+e^-1) = %.12f", v, expected)};
}

// ---------------------------------------------------------------------------
// 4. Interpolation endpoints

Outcome interpolation_endpoints()
{
    auto const world = fixture::make_world(fixture::small_synth(2));
    bool trajectories = true;
    for (auto base : {RankingLoss::pointwise, RankingLoss::pairwise}) {
        TrainConfig cfg;
        cfg.encoder = fixture::small_encoder();
        cfg.epochs = 3;
        cfg.batch_size = 8;
        cfg.augment = true;
        cfg.seed = 5;
        cfg.loss.base = base;
        cfg.loss.lambda = 0.0;
        auto const a = train(world->ts, world->data(), cfg);
        cfg.loss.scl_enabled = false;
        cfg.loss.lambda = 0.8; // ignored when the term is disabled
        auto const b = train(world->ts, world->data(), cfg);
        trajectories = trajectories && a.report.epoch_loss == b.report.epoch_loss &&
                       a.params == b.params;
    }

    Rng rng(3);
    double affine_err = 0.0;
    bool endpoints = true;
    for (int trial = 0; trial < 100; ++trial) {
        auto const n = 4 + 2 * rng.uniform_index(3);
        std::vector<std::string> qids(n);
        std::vector<std::vector<double>> phis(n, std::vector<double>(4));
        BatchView<double> view;
        for (std::size_t i = 0; i < n; ++i) {
            qids[i] = i < 2 || rng.uniform_index(2) ? "a" : "b";
            for (auto& v : phis[i]) v = rng.uniform_real(-1, 1);
        }
        for (std::size_t i = 0; i < n; ++i) {
            int const y = i % 2 == 0 ? 1 : 0;
            view.instances.push_back({qids[i], y, rng.uniform_real(0.01, 0.99), phis[i]});
        }
        for (std::size_t i = 0; i + 1 < n; i += 2) view.pairs.emplace_back(i, i + 1);
        std::span<ScoredInstance<double> const> inst(view.instances);
        for (auto base : {RankingLoss::pointwise, RankingLoss::pairwise}) {
            LossConfig cfg;
            cfg.base = base;
            cfg.lambda = 0.0;
            double const l0 = ranking_scl(view, cfg).loss;
            double rank_only;
            if (base == RankingLoss::pointwise) {
                rank_only = pointwise_loss(inst, cfg).loss;
            } else {
                std::vector<ScorePair<double>> sp;
                for (auto [p, q] : view.pairs) sp.push_back({inst[p].score, inst[q].score});
                rank_only = pairwise_loss(std::span<ScorePair<double> const>(sp), cfg).loss;
            }
            cfg.lambda = 1.0;
            double const l1 = ranking_scl(view, cfg).loss;
            double const scl_only = scl_loss(inst, cfg).loss;
            cfg.lambda = 0.5;
            double const lh = ranking_scl(view, cfg).loss;
            endpoints = endpoints && l0 == rank_only && l1 == scl_only;
            affine_err = std::max(affine_err, std::abs(lh - 0.5 * (l0 + l1)));
        }
    }
    bool const pass = trajectories && endpoints && affine_err <= 1e-12;
    return {pass, fmt("lambda=0 trajectory bit-identical to ranking-only trainer: %s; endpoints exact: "
                      "%s; max |L(0.5) - (L(0)+L(1))/2| = %.2e",
                      trajectories ? "yes" : "no", endpoints ? "yes" : "no", affine_err)};
}

// ---------------------------------------------------------------------------
// 5. Metric oracles

Outcome metric_oracles()
{
    Rng rng(55);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto m = oracle::random_metric_instance(rng);
        auto const g = oracle::grades_of(m.ranking, m.qrels);
        auto const R = m.qrels.relevant_count("q");
        worst = std::max(worst, std::abs(*average_precision(m.ranking, m.qrels) - oracle::ap(g, R)));
        worst = std::max(worst, std::abs(reciprocal_rank(m.ranking, m.qrels) - oracle::rr(g)));
        worst = std::max(worst, std::abs(*ndcg_at_k(m.ranking, m.qrels, 10) -
                                         oracle::ndcg(g, oracle::judged_grades(m.qrels, "q"), 10)));
    }

    auto list = [](std::vector<std::string> ids) {
        RunList r{"q", {}};
        for (std::size_t i = 0; i < ids.size(); ++i) {
            r.entries.push_back({ids[i], static_cast<int>(i + 1), -static_cast<double>(i)});
        }
        return r;
    };
    Qrels two;
    two.set("q", "d1", 1);
    two.set("q", "d3", 1);
    Qrels one;
    one.set("q", "d", 1);
    Qrels third;
    third.set("q", "c", 1);
    std::vector<std::string> tail;
    for (int i = 0; i < 10; ++i) tail.push_back("x" + std::to_string(i));
    tail.push_back("d");
    struct Hand {
        double got, want;
    };
    std::vector<Hand> hand{
        {*average_precision(list({"d1", "d2", "d3"}), two), (1.0 + 2.0 / 3.0) / 2.0},
        {*average_precision(list({"d1", "d3"}), two), 1.0},
        {*average_precision(list({"x"}), two), 0.0},
        {reciprocal_rank(list({"a", "b", "c"}), third), 1.0 / 3.0},
        {reciprocal_rank(list({"c"}), third), 1.0},
        {reciprocal_rank(list({"a"}), third), 0.0},
        {*ndcg_at_k(list({"d"}), one), 1.0},
        {*ndcg_at_k(list({"x", "d"}), one), 1.0 / std::log2(3.0)},
        {*ndcg_at_k(list(tail), one), 0.0},
    };
    bool exact = true;
    for (auto const& h : hand) exact = exact && h.got == h.want;
    bool const rounded = std::abs(hand[0].got - 0.833333) < 5e-7 && std::abs(hand[7].got - 0.630930) < 5e-7;
    bool const pass = worst <= 1e-12 && exact && rounded;
    return {pass, fmt("100 random instances, max |difference| %.2e; %zu worked values exact: %s "
                      "(AP %.6f, nDCG %.6f)",
                      worst, hand.size(), exact ? "yes" : "no", hand[0].got, hand[7].got)};
}

// ---------------------------------------------------------------------------
// 6. Augmentation contract

Outcome augmentation_contract()
{
    auto const t0 = Clock::now();
    Rng gen(606);
    Corpus corpus;
    QuerySet queries;
    Qrels qrels;
    EmbeddingTable emb(3);
    std::vector<std::string> vocab;
    for (int i = 0; i < 60; ++i) {
        vocab.push_back("t" + std::to_string(i));
        emb.add(vocab.back(), {gen.uniform_real(-1, 1), gen.uniform_real(-1, 1), gen.uniform_real(-1, 1)});
    }
    auto text = [&](std::size_t sentences) {
        std::string s;
        for (std::size_t i = 0; i < sentences; ++i) {
            auto const words = 3 + gen.uniform_index(6);
            for (std::size_t w = 0; w < words; ++w) s += vocab[gen.uniform_index(vocab.size())] + " ";
            s += ". ";
        }
        return s;
    };
    for (int q = 0; q < 10; ++q) {
        auto const qid = "q" + std::to_string(q);
        queries.emplace(qid, make_query(qid, vocab[gen.uniform_index(60)] + " " + vocab[gen.uniform_index(60)]));
    }
    for (int d = 0; d < 200; ++d) {
        // mostly long documents, some short, a few empty
        auto const r = gen.uniform_index(20);
        auto const n = r == 0 ? 0 : (r < 6 ? 1 + gen.uniform_index(19) : 20 + gen.uniform_index(40));
        corpus.add(make_document("d" + std::to_string(d), text(n)));
    }
    std::map<std::string, std::vector<std::string>> pos, neg;
    for (int q = 0; q < 10; ++q) {
        auto const qid = "q" + std::to_string(q);
        for (int d = 0; d < 200; ++d) {
            auto const id = "d" + std::to_string(d);
            auto const r = gen.uniform_index(10);
            if (r == 0) {
                qrels.set(qid, id, 1 + static_cast<int>(gen.uniform_index(2)));
                pos[qid].push_back(id);
            } else {
                if (r == 1) qrels.set(qid, id, 0);
                neg[qid].push_back(id);
            }
        }
    }
    auto const idf = build_idf(corpus);
    NegativePool pool(corpus, qrels);

    std::size_t batches = 0, violations = 0, skips = 0, augmented_total = 0;
    std::string first_violation;
    auto violate = [&](std::string const& what) {
        if (violations++ == 0) first_violation = what;
    };
    for (int b = 0; b < 100; ++b) {
        SelectorConfig sc;
        sc.strategy = static_cast<SelectorStrategy>(b % 3);
        Selector sel(sc, &idf, &emb);
        std::vector<TrainingTriple> batch;
        auto const size = 1 + gen.uniform_index(16);
        for (std::size_t i = 0; i < size; ++i) {
            auto const qid = "q" + std::to_string(gen.uniform_index(10));
            if (pos[qid].empty()) continue;
            batch.push_back({qid, pos[qid][gen.uniform_index(pos[qid].size())],
                             neg[qid][gen.uniform_index(neg[qid].size())], false});
        }
        Rng rng(Rng::derive(9, static_cast<std::uint64_t>(b)));
        log::Capture quiet;
        auto const out = augment_batch(batch, corpus, queries, pool, sel, rng);
        ++batches;
        skips += out.skipped_triples + out.skipped_augmentations;

        auto const expected = 2 * batch.size() - 2 * out.skipped_triples - out.skipped_augmentations;
        if (out.triples.size() != expected) violate(fmt("batch %d: size %zu, expected %zu", b, out.triples.size(), expected));

        // originals as an ordered subsequence, skipping only empty positives
        std::vector<TrainingTriple> kept;
        for (auto const& t : batch) {
            if (!corpus.at(t.positive_doc_id).sentences.empty()) kept.push_back(t);
        }
        std::vector<TrainingTriple> originals;
        for (auto const& t : out.triples) {
            if (!t.augmented) originals.push_back(t);
        }
        if (originals != kept) violate(fmt("batch %d: originals not preserved in order", b));

        for (std::size_t i = 0; i < out.triples.size(); ++i) {
            auto const& t = out.triples[i];
            if (!t.augmented) continue;
            ++augmented_total;
            if (i == 0 || out.triples[i - 1].augmented) {
                violate(fmt("batch %d: augmented triple without its original", b));
                continue;
            }
            auto const& source = corpus.at(out.triples[i - 1].positive_doc_id);
            auto const& summary = *out.summaries[i];
            if (summary.sentences.size() != std::min<std::size_t>(20, source.sentences.size())) {
                violate(fmt("batch %d: summary of %zu sentences from %zu", b,
                            summary.sentences.size(), source.sentences.size()));
            }
            for (auto const& s : summary.sentences) {
                if (s.source_index >= source.sentences.size() ||
                    source.sentences[s.source_index].text != s.text) {
                    violate(fmt("batch %d: summary sentence not in source", b));
                }
            }
            if (qrels.grade(t.query_id, t.negative_doc_id) != 0) {
                violate(fmt("batch %d: augmented negative is relevant", b));
            }
        }
    }
    double const elapsed = seconds_since(t0);
    bool const pass = violations == 0 && elapsed < 10.0;
    return {pass, fmt("%zu batches, %zu augmented triples, %zu recorded skips, %zu violations%s%s, %.2f s",
                      batches, augmented_total, skips, violations,
                      violations ? ": " : "", first_violation.c_str(), elapsed)};
}

// ---------------------------------------------------------------------------
// 7. Directional reproduction on the synthetic collection

struct SystemScore {
    std::vector<double> per_seed;
    double mean = 0.0;
};

Outcome synthetic_reproduction()
{
    auto const t0 = Clock::now();
    synth::SynthConfig sc; // 200 training queries (40 held out for validation), 50 test, 5000 docs
    sc.seed = 2023;
    auto const dir = scratch_dir() / "synth";
    cmd_synth(sc, dir);
    auto cfg = load_pipeline_config(dir / "config.json");

    LoadOptions opts;
    opts.idf = true;
    auto const ws = load_workspace(cfg, opts);
    auto const ts = training_set(ws, cfg);
    auto const valid = validation_run(ws);
    auto const data = training_data(ws, valid);
    auto const test = filter_run(ws.run, ws.test_ids);
    double const first_stage = evaluate(test, ws.qrels, "first-stage").mean.ndcg10;

    auto base_config = [&](std::uint64_t seed) {
        TrainConfig tc = cfg.train;
        tc.loss.base = RankingLoss::pointwise;
        tc.seed = seed;
        tc.encoder.init_seed = seed;
        return tc;
    };
    auto test_ndcg = [&](TrainConfig const& tc) {
        auto const r = train(ts, data, tc);
        auto const ranked = rerank(r.params, tc.encoder, test, ws.corpus, ws.queries);
        return evaluate(ranked, ws.qrels, "model").mean.ndcg10;
    };

    // Baseline: pointwise loss, original triples only.
    SystemScore baseline;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto tc = base_config(seed);
        tc.augment = false;
        tc.loss.lambda = 0.0;
        baseline.per_seed.push_back(test_ndcg(tc));
    }
    // Pointwise-RankingSCL with augmentation; (tau, lambda) picked per seed on
    // the validation queries, lambda > 0 so the contrastive term is always on.
    std::vector<double> const taus{0.1, 0.4, 1.0};
    std::vector<double> const lambdas{0.2, 0.5, 0.8};
    SystemScore scl_aug;
    std::string selected;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto tc = base_config(seed);
        tc.augment = true;
        auto const grid = grid_search(taus, lambdas, ts, data, tc);
        tc.loss.tau = grid.best.tau;
        tc.loss.lambda = grid.best.lambda;
        scl_aug.per_seed.push_back(test_ndcg(tc));
        selected += fmt("%s(tau %.1f, lambda %.1f)", seed ? " " : "", grid.best.tau, grid.best.lambda);
    }
    for (auto* s : {&baseline, &scl_aug}) {
        for (double v : s->per_seed) s->mean += v / static_cast<double>(s->per_seed.size());
    }
    double const elapsed = seconds_since(t0);

    bool const non_inferior = scl_aug.mean - baseline.mean >= 0.0;
    bool const learned = baseline.mean >= 0.6 && scl_aug.mean >= 0.6;
    bool const weak_first_stage = first_stage <= 0.5;
    bool const pass = non_inferior && learned && weak_first_stage && elapsed < 900.0;
    return {pass,
            fmt("test nDCG@10: first-stage %.4f; pointwise baseline %.4f [%.4f %.4f %.4f]; "
                "pointwise-RankingSCL + augmentation %.4f [%.4f %.4f %.4f]; improvement %+.4f; "
                "selected %s; %zu training triples; %.0f s",
                first_stage, baseline.mean, baseline.per_seed[0], baseline.per_seed[1],
                baseline.per_seed[2], scl_aug.mean, scl_aug.per_seed[0], scl_aug.per_seed[1],
                scl_aug.per_seed[2], scl_aug.mean - baseline.mean, selected.c_str(), ts.triples.size(),
                elapsed)};
}

// ---------------------------------------------------------------------------
// 8. Byte-identical training artifacts

Outcome training_determinism()
{
    auto const dir = scratch_dir() / "determinism";
    auto sc = fixture::small_synth(8);
    cmd_synth(sc, dir / "data");
    auto cfg = load_pipeline_config(dir / "data" / "config.json");
    cfg.top_k = sc.top_k;
    cfg.train.augment = true;
    cfg.train.epochs = 3;
    cfg.train.seed = 42;
    std::vector<std::string> models, reports;
    for (auto name : {"a", "b"}) {
        cfg.output = dir / name;
        cmd_train(cfg);
        models.push_back(slurp(cfg.output / "model.bin"));
        reports.push_back(slurp(cfg.output / "train_report.json"));
    }
    bool const pass = !models[0].empty() && !reports[0].empty() && models[0] == models[1] &&
                      reports[0] == reports[1];
    return {pass, fmt("checkpoint %zu bytes identical: %s; report %zu bytes identical: %s",
                      models[0].size(), models[0] == models[1] ? "yes" : "no", reports[0].size(),
                      reports[0] == reports[1] ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. Significance harness

Outcome significance_harness()
{
    std::vector<double> a{0.2, 0.1, 0.3, 0.2}, zero(4, 0.0);
    auto const r = paired_test(a, zero);
    std::vector<double> s{0.31, 0.52, 0.17, 0.88, 0.45};
    auto const same = paired_test(s, s);
    bool const pass = std::abs(r.t - 4.899) <= 1e-3 && std::abs(r.p - 0.0163) <= 1e-3 &&
                      std::abs(same.p - 1.0) <= 1e-12 && !same.significant_10;
    return {pass, fmt("worked example t = %.4f, p = %.5f (n = %zu); identical systems p = %.6f",
                      r.t, r.p, r.n, same.p)};
}

} // namespace

int main(int argc, char** argv)
{
    log::set_level(log::Level::quiet);
    struct Criterion {
        int id;
        char const* name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> const criteria{
        {1, "gradient correctness", gradient_correctness},
        {2, "contrastive loss oracle equivalence", scl_oracle_equivalence},
        {3, "worked contrastive value", scl_worked_value},
        {4, "interpolation endpoints", interpolation_endpoints},
        {5, "metric oracles", metric_oracles},
        {6, "augmentation contract", augmentation_contract},
        {7, "synthetic directional reproduction", synthetic_reproduction},
        {8, "training determinism", training_determinism},
        {9, "significance harness", significance_harness},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    for (auto const& c : criteria) {
        if (!wanted.empty() && !wanted.contains(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (std::exception const& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
                  << "): " << o.detail << std::endl;
    }
    fs::remove_all(scratch_dir());
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
