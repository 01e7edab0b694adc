#pragma once

// In-memory synthetic collections for trainer and pipeline tests.

#include <cstddef>
#include <memory>
#include <optional>

#include "sclrank/batching.hpp"
#include "sclrank/selector.hpp"
#include "sclrank/synth.hpp"
#include "sclrank/trainer.hpp"

namespace fixture {

struct World {
    sclrank::synth::Dataset ds;
    sclrank::Corpus corpus;
    sclrank::IdfTable idf;
    sclrank::EmbeddingTable embeddings;
    sclrank::Run train_run;
    sclrank::Run valid_run;
    sclrank::Run test_run;
    sclrank::TrainingSet ts;

    [[nodiscard]] sclrank::TrainingData data() const
    {
        sclrank::TrainingData d;
        d.corpus = &corpus;
        d.queries = &ds.queries;
        d.qrels = &ds.qrels;
        d.idf = &idf;
        d.embeddings = &embeddings;
        d.validation_run = &valid_run;
        d.validation_qrels = &ds.qrels;
        return d;
    }
};

inline sclrank::synth::SynthConfig small_synth(std::uint64_t seed = 1)
{
    sclrank::synth::SynthConfig sc;
    sc.train_queries = 30;
    sc.validation_queries = 10;
    sc.test_queries = 10;
    sc.corpus_size = 400;
    sc.top_k = 30;
    sc.background_vocab = 400;
    sc.seed = seed;
    return sc;
}

inline sclrank::EncoderConfig small_encoder()
{
    sclrank::EncoderConfig e;
    e.hashed_dim = 1 << 12;
    e.hidden = 16;
    e.rep_dim = 8;
    return e;
}

inline std::unique_ptr<World> make_world(sclrank::synth::SynthConfig const& sc)
{
    auto w = std::make_unique<World>();
    w->ds = sclrank::synth::generate(sc);
    for (auto const& d : w->ds.documents) w->corpus.add(d);
    w->idf = sclrank::build_idf(w->corpus);
    w->embeddings = sclrank::EmbeddingTable(sc.embedding_dim);
    for (auto const& [tok, vec] : w->ds.embeddings) w->embeddings.add(tok, vec);
    w->train_run = sclrank::filter_run(w->ds.run, w->ds.train_ids);
    w->valid_run = sclrank::filter_run(w->ds.run, w->ds.validation_ids);
    w->test_run = sclrank::filter_run(w->ds.run, w->ds.test_ids);
    sclrank::NegativePool pool(w->corpus, w->ds.qrels);
    w->ts = sclrank::build_training_set(w->train_run, w->ds.qrels, sc.top_k, sc.seed, &w->corpus,
                                        &pool);
    return w;
}

} // namespace fixture
