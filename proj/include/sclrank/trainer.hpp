#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "augmentation.hpp"
#include "batching.hpp"
#include "corpus_io.hpp"
#include "encoder.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "log.hpp"
#include "losses.hpp"
#include "optimizer.hpp"
#include "rng.hpp"
#include "selector.hpp"

namespace sclrank {

struct TrainConfig {
    LossConfig loss;
    EncoderConfig encoder;
    AdamConfig adam;
    SelectorConfig selector;
    std::size_t batch_size = 16;
    std::size_t epochs = 5;
    std::uint64_t seed = 0;
    bool augment = false;
    Metric validation_metric = Metric::ndcg10;

    void validate() const
    {
        loss.validate();
        encoder.validate();
        adam.validate();
        selector.validate();
        if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(adam.learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
    }
};

/// Read-only data a training run needs. Validation queries must not overlap
/// the training queries.
struct TrainingData {
    Corpus const* corpus = nullptr;
    QuerySet const* queries = nullptr;
    Qrels const* qrels = nullptr;
    IdfTable const* idf = nullptr;           ///< term_matching selector
    EmbeddingTable const* embeddings = nullptr; ///< embedding selector
    Run const* validation_run = nullptr;
    Qrels const* validation_qrels = nullptr;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> validation_metric;
    std::size_t best_epoch = 0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    std::size_t skipped_triples = 0;
    std::size_t skipped_augmentations = 0;

    [[nodiscard]] double best_metric() const { return validation_metric.at(best_epoch); }
};

struct TrainResult {
    ModelParams params;
    TrainReport report;
};

/// Deterministic report content. Wall-clock time is left out so identical runs
/// produce identical files.
inline nlohmann::json to_json(TrainReport const& r, TrainConfig const& cfg)
{
    return {{"seed", r.seed},
            {"epochs", cfg.epochs},
            {"steps", r.steps},
            {"epoch_loss", r.epoch_loss},
            {"validation_metric_name", to_string(cfg.validation_metric)},
            {"validation_metric", r.validation_metric},
            {"best_epoch", r.best_epoch},
            {"best_validation_metric", r.best_metric()},
            {"skipped_triples", r.skipped_triples},
            {"skipped_augmentations", r.skipped_augmentations},
            {"loss",
             {{"base", to_string(cfg.loss.base)},
              {"tau", cfg.loss.tau},
              {"lambda", cfg.loss.lambda},
              {"margin", cfg.loss.margin},
              {"scl_enabled", cfg.loss.scl_enabled}}},
            {"augment", cfg.augment},
            {"selector", to_string(cfg.selector.strategy)},
            {"batch_size", cfg.batch_size},
            {"learning_rate", cfg.adam.learning_rate}};
}

namespace detail {

/// Feature vectors of (query, corpus document) pairs, computed on first use.
class FeatureCache {
public:
    explicit FeatureCache(EncoderConfig const& cfg) : cfg_(&cfg) {}

    FeatureVector const& get(Query const& q, Document const& d)
    {
        auto key = q.query_id;
        key.push_back('\t');
        key += d.doc_id;
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            it = cache_.emplace(std::move(key), featurize(q, d, *cfg_)).first;
        }
        return it->second;
    }

private:
    EncoderConfig const* cfg_;
    std::unordered_map<std::string, FeatureVector> cache_;
};

inline void require(TrainingData const& data)
{
    if (!data.corpus || !data.queries || !data.qrels) {
        throw ConfigError("training needs corpus, queries and qrels");
    }
    if (!data.validation_run || !data.validation_qrels || data.validation_run->empty()) {
        throw ValidationError("training needs a non-empty validation run");
    }
}

} // namespace detail

/// Loss and parameter gradient of one (possibly augmented) batch.
struct BatchStep {
    double loss = 0.0;
    double ranking_loss = 0.0;
    double scl_loss = 0.0;
};

/// Forward, loss and backward over a batch; accumulates into `grads`.
inline BatchStep compute_batch_gradient(ModelParams const& params, AugmentedBatch const& batch,
                                        TrainingData const& data, TrainConfig const& cfg,
                                        detail::FeatureCache& cache, ModelParams& grads)
{
    auto const n_triples = batch.triples.size();
    std::vector<FeatureVector> owned; // features of summaries, not cached
    owned.reserve(n_triples);
    std::vector<FeatureVector const*> inputs;
    inputs.reserve(2 * n_triples);
    for (std::size_t i = 0; i < n_triples; ++i) {
        auto const& t = batch.triples[i];
        auto const& q = data.queries->at(t.query_id);
        if (batch.summaries[i]) {
            owned.push_back(featurize(q, *batch.summaries[i], cfg.encoder));
            inputs.push_back(&owned.back());
        } else {
            inputs.push_back(&cache.get(q, data.corpus->at(t.positive_doc_id)));
        }
        inputs.push_back(&cache.get(q, data.corpus->at(t.negative_doc_id)));
    }

    std::vector<ForwardRecord> records;
    records.reserve(inputs.size());
    for (auto const* x : inputs) {
        records.push_back(forward(params, *x, cfg.encoder));
    }

    BatchView<double> view;
    view.instances.reserve(records.size());
    for (std::size_t i = 0; i < n_triples; ++i) {
        auto const& qid = batch.triples[i].query_id;
        view.instances.push_back({qid, 1, records[2 * i].score, records[2 * i].view()});
        view.instances.push_back({qid, 0, records[2 * i + 1].score, records[2 * i + 1].view()});
        view.pairs.emplace_back(2 * i, 2 * i + 1);
    }
    auto const result = ranking_scl(view, cfg.loss);
    backward<double>(params, records, result.d_score, result.d_view, grads);
    return {result.loss, result.ranking_loss, result.scl_loss};
}

/// Mean validation metric of `params` re-ranking the validation run.
inline double validation_score(ModelParams const& params, TrainingData const& data,
                               TrainConfig const& cfg, detail::FeatureCache& cache)
{
    auto ranked = rerank_with(*data.validation_run, *data.corpus, *data.queries,
                              [&](Query const& q, Document const& d) {
                                  return forward(params, cache.get(q, d), cfg.encoder).score;
                              });
    auto report = evaluate(ranked, *data.validation_qrels, "validation");
    if (report.query_count() == 0) {
        throw ValidationError("validation run has no query with relevant judgments");
    }
    return report.mean.get(cfg.validation_metric);
}

/// Mini-batch training with per-epoch reshuffling, optional augmentation of
/// every batch, one Adam step per batch and selection of the epoch with the
/// best validation metric.
inline TrainResult train(TrainingSet const& ts, TrainingData const& data, TrainConfig const& cfg)
{
    cfg.validate();
    detail::require(data);
    if (ts.triples.empty()) {
        throw ValidationError("training set is empty");
    }
    for (auto const& t : ts.triples) {
        if (data.validation_run->contains(t.query_id)) {
            throw ValidationError("query '" + t.query_id +
                                  "' appears in both training and validation data");
        }
    }
    std::optional<Selector> selector;
    std::optional<NegativePool> pool;
    if (cfg.augment) {
        selector.emplace(cfg.selector, data.idf, data.embeddings);
        pool.emplace(*data.corpus, *data.qrels);
    }

    auto const started = std::chrono::steady_clock::now();
    TrainResult result{init_params(cfg.encoder), {}};
    result.report.seed = cfg.seed;
    ModelParams params = result.params;
    ModelParams grads = ModelParams::zeros_like(params);
    AdamState state = AdamState::for_params(params);
    detail::FeatureCache cache(cfg.encoder);
    std::optional<double> best;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<TrainingTriple> order = ts.triples;
        Rng(Rng::derive(cfg.seed, 2 * epoch)).shuffle(std::span(order));
        Rng aug_rng(Rng::derive(cfg.seed, 2 * epoch + 1));
        auto const batches = make_batches(order, cfg.batch_size);

        double loss_sum = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            AugmentedBatch batch;
            if (cfg.augment) {
                batch = augment_batch(batches[b], *data.corpus, *data.queries, *pool, *selector,
                                      aug_rng);
                result.report.skipped_triples += batch.skipped_triples;
                result.report.skipped_augmentations += batch.skipped_augmentations;
            } else {
                batch.triples = batches[b];
                batch.summaries.resize(batch.triples.size());
            }
            if (batch.triples.empty()) continue;

            for (auto a : grads.arrays()) std::fill(a.begin(), a.end(), 0.0);
            BatchStep step;
            try {
                step = compute_batch_gradient(params, batch, data, cfg, cache, grads);
                if (!std::isfinite(step.loss)) throw NumericError("non-finite loss");
                adam_step(params, grads, state, cfg.adam);
            } catch (NumericError const& e) {
                throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(b));
            }
            loss_sum += step.loss;
            ++result.report.steps;
        }
        result.report.epoch_loss.push_back(batches.empty() ? 0.0
                                                           : loss_sum / static_cast<double>(
                                                                            batches.size()));
        double const metric = validation_score(params, data, cfg, cache);
        result.report.validation_metric.push_back(metric);
        if (!best || metric > *best) {
            best = metric;
            result.report.best_epoch = epoch;
            result.params = params;
        }
        log::info("epoch " + std::to_string(epoch) + ": loss " +
                  std::to_string(result.report.epoch_loss.back()) + ", validation " +
                  to_string(cfg.validation_metric) + " " + std::to_string(metric));
    }
    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

namespace detail {

/// Runs `fn(i)` for i in [0, n) with at most `jobs` concurrent tasks and
/// returns the results in index order.
template <typename Fn>
auto run_parallel(std::size_t n, std::size_t jobs, Fn fn)
{
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out;
    out.reserve(n);
    jobs = std::max<std::size_t>(1, jobs);
    for (std::size_t start = 0; start < n; start += jobs) {
        auto const end = std::min(n, start + jobs);
        if (jobs == 1) {
            out.push_back(fn(start));
            continue;
        }
        std::vector<std::future<R>> pending;
        for (std::size_t i = start; i < end; ++i) {
            pending.push_back(std::async(std::launch::async, fn, i));
        }
        for (auto& f : pending) out.push_back(f.get());
    }
    return out;
}

} // namespace detail

/// Independent runs with seeds seed, seed + 1, ...; each run also seeds the
/// encoder initialization.
inline std::vector<TrainResult> train_seeds(TrainingSet const& ts, TrainingData const& data,
                                            TrainConfig const& cfg, std::size_t n_seeds = 5,
                                            std::size_t jobs = 1)
{
    return detail::run_parallel(n_seeds, jobs, [&](std::size_t i) {
        TrainConfig c = cfg;
        c.seed = cfg.seed + i;
        c.encoder.init_seed = cfg.encoder.init_seed + i;
        return train(ts, data, c);
    });
}

struct GridCell {
    double tau = 0.0;
    double lambda = 0.0;
    double metric = 0.0;
    std::size_t best_epoch = 0;
};

struct GridResult {
    std::vector<GridCell> cells;
    GridCell best;
};

inline std::vector<double> default_tau_grid() { return {0.1, 0.4, 1.0}; }
inline std::vector<double> default_lambda_grid() { return {0.0, 0.2, 0.5, 0.8}; }

/// One model per (tau, lambda) cell; the best validation metric wins, ties go
/// to the smaller lambda, then the smaller tau.
inline GridResult grid_search(std::span<double const> taus, std::span<double const> lambdas,
                              TrainingSet const& ts, TrainingData const& data,
                              TrainConfig const& cfg, std::size_t jobs = 1)
{
    if (taus.empty() || lambdas.empty()) {
        throw ConfigError("grid search needs at least one tau and one lambda");
    }
    std::vector<std::pair<double, double>> grid;
    for (double l : lambdas) {
        for (double t : taus) grid.emplace_back(t, l);
    }
    GridResult out;
    out.cells = detail::run_parallel(grid.size(), jobs, [&](std::size_t i) {
        TrainConfig c = cfg;
        c.loss.tau = grid[i].first;
        c.loss.lambda = grid[i].second;
        auto r = train(ts, data, c);
        return GridCell{grid[i].first, grid[i].second, r.report.best_metric(),
                        r.report.best_epoch};
    });
    out.best = out.cells.front();
    for (auto const& c : out.cells) {
        bool const better =
            c.metric > out.best.metric ||
            (c.metric == out.best.metric &&
             (c.lambda < out.best.lambda || (c.lambda == out.best.lambda && c.tau < out.best.tau)));
        if (better) out.best = c;
    }
    return out;
}

inline nlohmann::json to_json(GridResult const& g, Metric metric)
{
    nlohmann::json cells = nlohmann::json::array();
    for (auto const& c : g.cells) {
        cells.push_back({{"tau", c.tau},
                         {"lambda", c.lambda},
                         {to_string(metric), c.metric},
                         {"best_epoch", c.best_epoch}});
    }
    return {{"metric", to_string(metric)},
            {"best", {{"tau", g.best.tau}, {"lambda", g.best.lambda}, {"value", g.best.metric}}},
            {"cells", cells}};
}

} // namespace sclrank
