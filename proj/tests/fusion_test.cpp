#include "clir/fusion.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "clir/rng.hpp"

namespace clir {
namespace {

std::vector<std::pair<LangId, const std::vector<std::string>*>> tuple_of(
    const std::vector<std::pair<LangId, std::vector<std::string>>>& docs) {
    std::vector<std::pair<LangId, const std::vector<std::string>*>> out;
    for (const auto& [lang, tokens] : docs) {
        out.emplace_back(lang, &tokens);
    }
    return out;
}

std::string render(const std::vector<TaggedToken>& tokens) {
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty()) s += ' ';
        s += to_string(t);
    }
    return s;
}

TEST(Interleave, TwoFiveWorkedExample) {
    std::vector<std::pair<LangId, std::vector<std::string>>> docs{
        {"en", {"t1", "t2"}},
        {"hi", {"w1", "w2", "w3", "w4", "w5"}},
    };
    EXPECT_EQ(render(interleave(tuple_of(docs))),
              "en:t1 hi:w1 hi:w2 hi:w3 en:t2 hi:w4 hi:w5");
}

TEST(Interleave, EqualLengthsAlternate) {
    std::vector<std::pair<LangId, std::vector<std::string>>> docs{
        {"en", {"a1", "a2"}},
        {"hi", {"b1", "b2"}},
    };
    EXPECT_EQ(render(interleave(tuple_of(docs))), "en:a1 hi:b1 en:a2 hi:b2");
}

TEST(Interleave, LastGroupExhaustsLongerDocument) {
    std::vector<std::pair<LangId, std::vector<std::string>>> docs{
        {"en", {"a1", "a2", "a3"}},
        {"hi", {"b1", "b2", "b3", "b4", "b5", "b6", "b7"}},
    };
    EXPECT_EQ(render(interleave(tuple_of(docs))),
              "en:a1 hi:b1 hi:b2 hi:b3 en:a2 hi:b4 hi:b5 hi:b6 en:a3 hi:b7");
}

TEST(Interleave, PacerMayBeAnyPosition) {
    std::vector<std::pair<LangId, std::vector<std::string>>> docs{
        {"en", {"e1", "e2", "e3", "e4", "e5"}},
        {"hi", {"h1", "h2"}},
    };
    // hi has fewer terms, so it paces even though en is listed first.
    EXPECT_EQ(render(interleave(tuple_of(docs))),
              "hi:h1 en:e1 en:e2 en:e3 hi:h2 en:e4 en:e5");
}

TEST(Interleave, ThreeLanguagesByHand) {
    std::vector<std::pair<LangId, std::vector<std::string>>> docs{
        {"en", {"x1", "x2"}},
        {"hi", {"y1", "y2", "y3"}},
        {"bn", {"z1", "z2", "z3", "z4", "z5"}},
    };
    // t_min=2; hi group size ceil(3/2)=2, bn group size ceil(5/2)=3.
    EXPECT_EQ(render(interleave(tuple_of(docs))),
              "en:x1 hi:y1 hi:y2 bn:z1 bn:z2 bn:z3 en:x2 hi:y3 bn:z4 bn:z5");
}

TEST(Interleave, RejectsDegenerateInput) {
    std::vector<std::pair<LangId, std::vector<std::string>>> one{
        {"en", {"a"}}};
    EXPECT_THROW(interleave(tuple_of(one)), std::invalid_argument);
    std::vector<std::pair<LangId, std::vector<std::string>>> with_empty{
        {"en", {"a"}}, {"hi", {}}};
    EXPECT_THROW(interleave(tuple_of(with_empty)), std::invalid_argument);
}

// Invariant checkers shared by the randomized cases.

void check_interleave_invariants(
    const std::vector<std::pair<LangId, std::vector<std::string>>>& docs,
    const std::vector<TaggedToken>& fused) {
    std::size_t total = 0;
    std::size_t t_min = docs[0].second.size();
    for (const auto& [lang, tokens] : docs) {
        total += tokens.size();
        t_min = std::min(t_min, tokens.size());
    }
    ASSERT_EQ(fused.size(), total);
    // Order preservation and multiset conservation per language.
    std::map<LangId, std::vector<std::string>> by_lang;
    for (const auto& t : fused) {
        by_lang[t.lang].push_back(t.term);
    }
    for (const auto& [lang, tokens] : docs) {
        EXPECT_EQ(by_lang[lang], tokens) << "language " << lang;
    }
    // Group-size bound: between consecutive pacer tokens each other
    // language contributes at most ceil(t_k / t_min) tokens.
    const LangId pacer = fused[0].lang;
    std::map<LangId, std::size_t> bound;
    for (const auto& [lang, tokens] : docs) {
        bound[lang] = (tokens.size() + t_min - 1) / t_min;
    }
    std::map<LangId, std::size_t> in_group;
    for (const auto& t : fused) {
        if (t.lang == pacer) {
            in_group.clear();
        } else {
            ++in_group[t.lang];
            EXPECT_LE(in_group[t.lang], bound[t.lang]);
        }
    }
}

TEST(Interleave, RandomizedInvariants) {
    SplitMix64 rng(314159);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n_langs = 2 + rng.bounded(3);
        std::vector<std::pair<LangId, std::vector<std::string>>> docs;
        for (std::size_t l = 0; l < n_langs; ++l) {
            LangId lang = "l" + std::to_string(l);
            std::vector<std::string> tokens;
            std::size_t len = 1 + rng.bounded(30);
            for (std::size_t k = 0; k < len; ++k) {
                tokens.push_back(lang + "t" + std::to_string(k));
            }
            docs.emplace_back(lang, std::move(tokens));
        }
        auto fused = interleave(tuple_of(docs));
        check_interleave_invariants(docs, fused);
    }
}

TEST(SelectMinLanguage, MinimumAndTieBreak) {
    std::vector<std::pair<LangId, std::vector<std::string>>> sets{
        {"en", {"a", "b", "c"}},
        {"hi", {"a", "b", "c", "d", "e"}},
        {"bn", {"a", "b", "c", "d"}},
    };
    EXPECT_EQ(select_min_language(sets), "en");
    std::vector<std::pair<LangId, std::vector<std::string>>> tied{
        {"en", {"a", "b"}},
        {"hi", {"c", "d"}},
    };
    EXPECT_EQ(select_min_language(tied), "en");
    std::vector<std::pair<LangId, std::vector<std::string>>> with_empty{
        {"en", {}},
        {"hi", {"a"}},
    };
    EXPECT_EQ(select_min_language(with_empty), std::nullopt);
    EXPECT_THROW(select_min_language({}), std::invalid_argument);
}

// Fixture collections for fusion over judged-relevant documents.

TestCollection english() {
    std::vector<Document> docs;
    docs.push_back({"e1", "en", {"cats", "chase", "mice"}});
    docs.push_back({"e2", "en", {"dogs", "bark"}});
    docs.push_back({"e3", "en", {"birds", "sing", "loud", "songs"}});
    Qrels qrels;
    qrels.add(1, "e1", 1);
    qrels.add(1, "e2", 1);
    qrels.add(2, "e3", 1);
    std::vector<Query> queries{{1, "en", {"animals"}}, {2, "en", {"birds"}}};
    return make_test_collection("en", docs, queries, qrels);
}

TestCollection hindi() {
    std::vector<Document> docs;
    docs.push_back({"h1", "hi", {"ha", "hb"}});
    docs.push_back({"h2", "hi", {"hc", "hd", "he"}});
    docs.push_back({"h3", "hi", {"hf"}});
    docs.push_back({"h4", "hi", {"hg", "hh"}});
    docs.push_back({"h5", "hi", {"hi1", "hi2"}});
    Qrels qrels;
    for (const char* d : {"h1", "h2", "h3", "h4", "h5"}) {
        qrels.add(1, d, 1);
    }
    // Query 2 has no relevant hindi documents.
    std::vector<Query> queries{{1, "hi", {"janvar"}}, {2, "hi", {"pakshi"}}};
    return make_test_collection("hi", docs, queries, qrels);
}

TEST(TrainingFusion, CountsPartnersAndDeterminism) {
    TestCollection en = english();
    TestCollection hi = hindi();
    std::vector<const TestCollection*> cols{&en, &hi};

    FusionResult r = build_training_fusion(cols, {1}, 42);
    ASSERT_EQ(r.docs.size(), 2u);  // |relevant_en| = 2 is the minimum
    EXPECT_TRUE(r.skipped_query_ids.empty());
    // The two hindi partners are distinct (drawn without replacement).
    EXPECT_NE(r.docs[0].source_doc_ids.at("hi"),
              r.docs[1].source_doc_ids.at("hi"));
    // Min-language docs iterate in sorted order.
    EXPECT_EQ(r.docs[0].source_doc_ids.at("en"), "e1");
    EXPECT_EQ(r.docs[1].source_doc_ids.at("en"), "e2");
    for (const auto& fd : r.docs) {
        EXPECT_EQ(fd.query_id, 1);
        std::vector<std::pair<LangId, std::vector<std::string>>> sources;
        sources.emplace_back(
            "en", en.find_document(fd.source_doc_ids.at("en"))->tokens);
        sources.emplace_back(
            "hi", hi.find_document(fd.source_doc_ids.at("hi"))->tokens);
        check_interleave_invariants(sources, fd.tokens);
    }

    FusionResult again = build_training_fusion(cols, {1}, 42);
    ASSERT_EQ(again.docs.size(), r.docs.size());
    for (std::size_t i = 0; i < r.docs.size(); ++i) {
        EXPECT_EQ(again.docs[i].tokens, r.docs[i].tokens);
        EXPECT_EQ(again.docs[i].source_doc_ids, r.docs[i].source_doc_ids);
    }

    // Across many seeds every hindi partner pair shows up: the draw is
    // random, not positional.
    std::set<std::string> seen_pairs;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        FusionResult rr = build_training_fusion(cols, {1}, seed);
        seen_pairs.insert(rr.docs[0].source_doc_ids.at("hi") + "|" +
                          rr.docs[1].source_doc_ids.at("hi"));
    }
    EXPECT_GT(seen_pairs.size(), 5u);
}

TEST(TrainingFusion, SkipsQueriesWithEmptyRelevantSets) {
    TestCollection en = english();
    TestCollection hi = hindi();
    std::vector<const TestCollection*> cols{&en, &hi};
    FusionResult r = build_training_fusion(cols, {1, 2}, 7);
    EXPECT_EQ(r.skipped_query_ids, (std::vector<int>{2}));
    for (const auto& fd : r.docs) {
        EXPECT_EQ(fd.query_id, 1);
    }
}

TEST(TrainingFusion, SingleRelevantEachSide) {
    std::vector<Document> en_docs{{"e1", "en", {"one", "two"}}};
    std::vector<Document> hi_docs{{"h1", "hi", {"ek", "do", "teen"}}};
    Qrels en_q, hi_q;
    en_q.add(9, "e1", 1);
    hi_q.add(9, "h1", 1);
    TestCollection en = make_test_collection("en", en_docs, {}, en_q);
    TestCollection hi = make_test_collection("hi", hi_docs, {}, hi_q);
    FusionResult r = build_training_fusion({&en, &hi}, {9}, 0);
    ASSERT_EQ(r.docs.size(), 1u);
    EXPECT_EQ(r.docs[0].tokens.size(), 5u);
    EXPECT_EQ(render(r.docs[0].tokens), "en:one hi:ek hi:do en:two hi:teen");
}

// Pseudo-relevance fusion fixture: retrieval feeds the candidate sets.

TestCollection searchable(const LangId& lang, const std::string& prefix,
                          std::size_t docs_with_term, std::size_t extra_docs,
                          const std::string& term) {
    std::vector<Document> docs;
    for (std::size_t i = 0; i < docs_with_term; ++i) {
        std::vector<std::string> tokens{term};
        for (std::size_t k = 0; k <= i; ++k) {
            tokens.push_back(prefix + "filler" + std::to_string(k));
        }
        docs.push_back({prefix + std::to_string(i), lang, tokens});
    }
    for (std::size_t i = 0; i < extra_docs; ++i) {
        docs.push_back({prefix + "x" + std::to_string(i),
                        lang,
                        {prefix + "unrelated" + std::to_string(i)}});
    }
    std::vector<Query> queries{{1, lang, {term}}};
    return make_test_collection(lang, docs, queries, {});
}

TEST(TestFusion, KappaControlsFusedCount) {
    TestCollection en = searchable("en", "e", 6, 2, "alpha");
    TestCollection hi = searchable("hi", "h", 6, 2, "alef");
    auto en_index = build_index(en.documents);
    auto hi_index = build_index(hi.documents);
    std::vector<const TestCollection*> cols{&en, &hi};
    std::vector<const InvertedIndex*> indexes{&en_index, &hi_index};

    FusionResult one = build_test_fusion(cols, indexes, {1}, 1, 2500.0, 3);
    EXPECT_EQ(one.docs.size(), 1u);

    FusionResult five = build_test_fusion(cols, indexes, {1}, 5, 2500.0, 3);
    EXPECT_EQ(five.docs.size(), 5u);
    for (const auto& fd : five.docs) {
        EXPECT_EQ(fd.query_id, 1);
        EXPECT_EQ(fd.source_doc_ids.size(), 2u);
    }
    // Partners distinct across draws (without replacement).
    std::set<std::string> hi_partners;
    for (const auto& fd : five.docs) {
        hi_partners.insert(fd.source_doc_ids.at("hi"));
    }
    EXPECT_EQ(hi_partners.size(), 5u);
}

TEST(TestFusion, ShortSetShrinksFusedCount) {
    TestCollection en = searchable("en", "e", 5, 0, "alpha");
    TestCollection hi = searchable("hi", "h", 3, 4, "alef");
    auto en_index = build_index(en.documents);
    auto hi_index = build_index(hi.documents);
    // hi retrieval can only return 3 docs for kappa=5.
    FusionResult r = build_test_fusion({&en, &hi}, {&en_index, &hi_index},
                                       {1}, 5, 2500.0, 11);
    EXPECT_EQ(r.docs.size(), 3u);
}

TEST(TestFusion, QueryMatchingNothingIsSkipped) {
    TestCollection en = searchable("en", "e", 3, 0, "alpha");
    // Hindi version of query 1 uses a term absent from the hindi corpus.
    std::vector<Document> hi_docs{{"h0", "hi", {"something"}}};
    std::vector<Query> hi_queries{{1, "hi", {"absent"}}};
    TestCollection hi = make_test_collection("hi", hi_docs, hi_queries, {});
    auto en_index = build_index(en.documents);
    auto hi_index = build_index(hi.documents);
    FusionResult r = build_test_fusion({&en, &hi}, {&en_index, &hi_index},
                                       {1}, 5, 2500.0, 11);
    EXPECT_TRUE(r.docs.empty());
    EXPECT_EQ(r.skipped_query_ids, (std::vector<int>{1}));
}

TEST(FusedCorpusIO, RoundTripAndErrors) {
    FusedCorpus corpus;
    FusedDocument a;
    a.query_id = 1;
    a.tokens = {{"en", "cat"}, {"hi", "billi"}};
    FusedDocument b;
    b.query_id = 2;
    b.tokens = {{"bn", "beral"}, {"en", "cat"}};
    corpus.training.push_back(a);
    corpus.test.push_back(b);

    std::ostringstream out;
    write_fused_corpus(out, corpus);
    EXPECT_EQ(out.str(), "en:cat hi:billi\nbn:beral en:cat\n");

    std::istringstream in(out.str());
    auto sentences = read_fused_corpus(in);
    ASSERT_EQ(sentences.size(), 2u);
    EXPECT_EQ(sentences[0], a.tokens);
    EXPECT_EQ(sentences[1], b.tokens);

    std::istringstream bad("en:cat notag\n");
    EXPECT_THROW(read_fused_corpus(bad), ParseError);
    std::istringstream empty_side(":term en:ok\n");
    EXPECT_THROW(read_fused_corpus(empty_side), ParseError);
}

}  // namespace
}  // namespace clir
