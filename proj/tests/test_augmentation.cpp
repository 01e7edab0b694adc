#include <set>

#include <gtest/gtest.h>

#include "sclrank/augmentation.hpp"

using namespace sclrank;

namespace {

std::string sentences(std::size_t n, std::string const& stem)
{
    std::string text;
    for (std::size_t i = 0; i < n; ++i) text += stem + " number " + std::to_string(i) + ". ";
    return text;
}

struct Fixture {
    Corpus corpus;
    QuerySet queries;
    Qrels qrels;
    std::vector<TrainingTriple> batch;

    explicit Fixture(std::size_t n_triples)
    {
        for (std::size_t i = 0; i < n_triples; ++i) {
            auto const qid = "q" + std::to_string(i % 4);
            queries.emplace(qid, make_query(qid, "topic " + qid));
            auto const pos = "pos" + std::to_string(i);
            auto const neg = "neg" + std::to_string(i);
            corpus.add(make_document(pos, sentences(30, "topic " + qid)));
            corpus.add(make_document(neg, sentences(10, "filler")));
            qrels.set(qid, pos, 1);
            qrels.set(qid, neg, 0);
            batch.push_back({qid, pos, neg, false});
        }
    }
};

} // namespace

TEST(AugmentPositive, SummaryCardinality)
{
    auto const idf = build_idf([] {
        Corpus c;
        c.add(make_document("d", sentences(30, "topic")));
        return c;
    }());
    Selector sel(SelectorConfig{}, &idf, nullptr);
    Rng rng(0);
    auto q = make_query("q", "topic 7");
    auto long_doc = make_document("d", sentences(30, "topic"));
    auto out = augment_positive(q, long_doc, sel, rng);
    ASSERT_TRUE(out);
    EXPECT_EQ(out->sentences.size(), 20u);

    auto short_doc = make_document("s", sentences(5, "topic"));
    auto clamp = augment_positive(q, short_doc, sel, rng);
    ASSERT_TRUE(clamp);
    ASSERT_EQ(clamp->sentences.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(clamp->sentences[i].text, short_doc.sentences[i].text);
}

TEST(AugmentPositive, SamplingReproducible)
{
    SelectorConfig cfg;
    cfg.strategy = SelectorStrategy::sampling;
    Selector sel(cfg, nullptr, nullptr);
    auto q = make_query("q", "x");
    auto d = make_document("d", sentences(40, "x"));
    Rng a(5), b(5);
    EXPECT_EQ(augment_positive(q, d, sel, a), augment_positive(q, d, sel, b));
}

TEST(AugmentPositive, EmptyDocumentGivesNothing)
{
    Selector sel(SelectorConfig{.strategy = SelectorStrategy::sampling}, nullptr, nullptr);
    Rng rng(0);
    log::Capture cap;
    EXPECT_FALSE(augment_positive(make_query("q", "x"), make_document("d", ""), sel, rng));
    EXPECT_EQ(cap.messages.size(), 1u);
}

TEST(SampleNegative, SingletonPool)
{
    Corpus c;
    c.add(make_document("rel", "a."));
    c.add(make_document("only", "b."));
    Qrels qrels;
    qrels.set("q", "rel", 2);
    NegativePool pool(c, qrels);
    Rng rng(1);
    auto q = make_query("q", "a");
    for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_negative(q, pool, rng), "only");
}

TEST(SampleNegative, RelevantNeverDrawn)
{
    Corpus c;
    for (int i = 0; i < 10; ++i) c.add(make_document("d" + std::to_string(i), "t."));
    Qrels qrels;
    qrels.set("q", "d3", 1);
    qrels.set("q", "d7", 2);
    qrels.set("q", "d8", 0); // judged irrelevant stays in the pool
    NegativePool pool(c, qrels);
    EXPECT_EQ(pool.size("q"), 8u);
    Rng rng(2);
    auto q = make_query("q", "t");
    std::set<std::string> seen;
    for (int i = 0; i < 10000; ++i) {
        auto const& id = sample_negative(q, pool, rng);
        EXPECT_NE(id, "d3");
        EXPECT_NE(id, "d7");
        seen.insert(id);
    }
    EXPECT_EQ(seen.size(), 8u);
}

TEST(SampleNegative, EmptyPoolSignalsSkip)
{
    Corpus c;
    c.add(make_document("a", "t."));
    Qrels qrels;
    qrels.set("q", "a", 1);
    NegativePool pool(c, qrels);
    Rng rng(0);
    EXPECT_THROW(sample_negative(make_query("q", "t"), pool, rng), SkipAugmentation);
}

TEST(AugmentBatch, SingleTripleDoubles)
{
    Fixture f(1);
    NegativePool pool(f.corpus, f.qrels);
    auto idf = build_idf(f.corpus);
    Selector sel({}, &idf, nullptr);
    Rng rng(0);
    auto out = augment_batch(f.batch, f.corpus, f.queries, pool, sel, rng);
    ASSERT_EQ(out.triples.size(), 2u);
    EXPECT_EQ(out.triples[0], f.batch[0]);
    EXPECT_TRUE(out.triples[1].augmented);
    EXPECT_EQ(out.triples[1].positive_doc_id, "pos0#aug");
    EXPECT_FALSE(out.summaries[0]);
    ASSERT_TRUE(out.summaries[1]);
    EXPECT_EQ(&out.positive(0, f.corpus), &f.corpus.at("pos0"));
    EXPECT_EQ(out.positive(1, f.corpus).doc_id, "pos0#aug");
}

TEST(AugmentBatch, SixteenBecomeThirtyTwoWithInvariants)
{
    Fixture f(16);
    NegativePool pool(f.corpus, f.qrels);
    auto idf = build_idf(f.corpus);
    for (auto strategy : {SelectorStrategy::term_matching, SelectorStrategy::sampling}) {
        SelectorConfig cfg;
        cfg.strategy = strategy;
        Selector sel(cfg, &idf, nullptr);
        Rng rng(3);
        auto out = augment_batch(f.batch, f.corpus, f.queries, pool, sel, rng);
        ASSERT_EQ(out.triples.size(), 32u);
        std::vector<TrainingTriple> originals;
        for (std::size_t i = 0; i < out.triples.size(); ++i) {
            auto const& t = out.triples[i];
            EXPECT_EQ(t.augmented, i % 2 == 1);
            if (!t.augmented) {
                originals.push_back(t);
                continue;
            }
            auto const& source = f.corpus.at(out.triples[i - 1].positive_doc_id);
            EXPECT_EQ(t.query_id, out.triples[i - 1].query_id);
            EXPECT_EQ(f.qrels.grade(t.query_id, t.negative_doc_id), 0);
            for (auto const& s : out.summaries[i]->sentences) {
                EXPECT_EQ(s.text, source.sentences.at(s.source_index).text);
            }
        }
        EXPECT_EQ(originals, f.batch);
    }
}

TEST(AugmentBatch, EmptyPositiveDropsPair)
{
    Fixture f(4);
    f.corpus.add(make_document("blank", ""));
    f.qrels.set("q1", "blank", 1);
    f.batch[1].positive_doc_id = "blank";
    NegativePool pool(f.corpus, f.qrels);
    auto idf = build_idf(f.corpus);
    Selector sel({}, &idf, nullptr);
    Rng rng(0);
    log::Capture cap;
    auto out = augment_batch(f.batch, f.corpus, f.queries, pool, sel, rng);
    EXPECT_EQ(out.triples.size(), 2 * f.batch.size() - 2);
    EXPECT_EQ(out.skipped_triples, 1u);
    for (auto const& t : out.triples) EXPECT_NE(t.positive_doc_id, "blank");
}

TEST(AugmentBatch, UnresolvableDocumentIsError)
{
    Fixture f(2);
    f.batch[1].negative_doc_id = "ghost";
    NegativePool pool(f.corpus, f.qrels);
    Selector sel({.strategy = SelectorStrategy::sampling}, nullptr, nullptr);
    Rng rng(0);
    try {
        (void)augment_batch(f.batch, f.corpus, f.queries, pool, sel, rng);
        FAIL() << "expected ValidationError";
    } catch (ValidationError const& e) {
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    }
}

TEST(AugmentBatch, DeterministicAndCounted)
{
    Fixture f(8);
    NegativePool pool(f.corpus, f.qrels);
    Selector sel({.strategy = SelectorStrategy::sampling}, nullptr, nullptr);
    auto const before = augmentation::call_count().load();
    Rng a(17), b(17);
    auto x = augment_batch(f.batch, f.corpus, f.queries, pool, sel, a);
    auto y = augment_batch(f.batch, f.corpus, f.queries, pool, sel, b);
    EXPECT_EQ(x.triples, y.triples);
    EXPECT_EQ(x.summaries, y.summaries);
    EXPECT_EQ(augmentation::call_count().load(), before + 2);
}
