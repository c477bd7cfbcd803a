#pragma once

// Cross-lingual query generation: translate a source-language query into
// target-language terms through the shared embedding, then retrieve.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/embedding.hpp"
#include "clir/index.hpp"
#include "clir/timing.hpp"

namespace clir {

enum class QueryAggregation {
    per_term,   // top-tau neighbors per source term, concatenated
    centroid,   // one top-tau fetch for the mean source vector
};

struct TermProvenance {
    std::string source_term;  // "<centroid>" under centroid aggregation
    std::string generated_term;
    double similarity = 0.0;
};

struct GeneratedQuery {
    int query_id = 0;
    LangId source_lang;
    LangId target_lang;
    std::vector<std::string> terms;  // target-language surface forms
    std::vector<TermProvenance> provenance;
    std::vector<std::string> oov_source_terms;

    bool failed() const { return terms.empty(); }

    Query as_query() const { return {query_id, target_lang, terms}; }
};

/// For each source title token found in the vocabulary, takes the top-tau
/// target-language neighbors; the generated query is their concatenation in
/// source-token order then similarity order, duplicates retained (they act
/// as term weighting downstream). Out-of-vocabulary source tokens are
/// skipped and listed. A query with no in-vocabulary tokens comes back
/// empty, flagged via failed().
inline GeneratedQuery generate_query(
    const EmbeddingModel& model, const Query& source, const LangId& target,
    std::size_t tau, QueryAggregation aggregation = QueryAggregation::per_term) {
    if (tau < 1) {
        throw std::invalid_argument("tau must be >= 1");
    }
    if (target == source.lang) {
        throw std::invalid_argument(
            "generate_query: source and target language are both '" + target +
            "'");
    }
    GeneratedQuery out;
    out.query_id = source.query_id;
    out.source_lang = source.lang;
    out.target_lang = target;
    if (aggregation == QueryAggregation::per_term) {
        for (const auto& term : source.title_tokens) {
            auto idx = model.find({source.lang, term});
            if (!idx) {
                out.oov_source_terms.push_back(term);
                continue;
            }
            for (const auto& n :
                 model.nearest_in_language(model.vector_at(*idx), target,
                                           tau)) {
                out.terms.push_back(n.token.term);
                out.provenance.push_back({term, n.token.term, n.similarity});
            }
        }
        return out;
    }
    // Centroid aggregation: mean of the in-vocabulary source vectors.
    std::vector<double> centroid(model.dim(), 0.0);
    std::size_t found = 0;
    for (const auto& term : source.title_tokens) {
        auto idx = model.find({source.lang, term});
        if (!idx) {
            out.oov_source_terms.push_back(term);
            continue;
        }
        auto v = model.vector_at(*idx);
        for (std::size_t i = 0; i < v.size(); ++i) {
            centroid[i] += double(v[i]);
        }
        ++found;
    }
    if (found == 0) {
        return out;
    }
    std::vector<float> query_vec(model.dim());
    for (std::size_t i = 0; i < query_vec.size(); ++i) {
        query_vec[i] = float(centroid[i] / double(found));
    }
    for (const auto& n : model.nearest_in_language(query_vec, target, tau)) {
        out.terms.push_back(n.token.term);
        out.provenance.push_back({"<centroid>", n.token.term, n.similarity});
    }
    return out;
}

/// One retrieval direction over a set of test queries. `tag` follows the
/// "source->target" convention. A query whose generation failed appears
/// with an empty ranking (it scores zero downstream). When source and
/// target coincide the real queries are used directly — the monolingual
/// upper-bound baseline — and no generation time accrues.
struct DirectionResult {
    LangId source_lang;
    LangId target_lang;
    std::string tag;
    std::map<int, RankedList> rankings;
    std::vector<GeneratedQuery> generated;  // empty for monolingual runs
};

inline DirectionResult crosslingual_run(
    const TestCollection& source_collection, const EmbeddingModel* model,
    const TestCollection& target_collection,
    const InvertedIndex& target_index, const std::vector<int>& query_ids,
    std::size_t tau, double mu, std::size_t cutoff,
    QueryAggregation aggregation = QueryAggregation::per_term,
    TimingAccumulator* generation_timing = nullptr,
    TimingAccumulator* retrieval_timing = nullptr) {
    DirectionResult result;
    result.source_lang = source_collection.lang;
    result.target_lang = target_collection.lang;
    result.tag = result.source_lang + "->" + result.target_lang;
    const bool monolingual = source_collection.lang == target_collection.lang;
    if (!monolingual && model == nullptr) {
        throw std::invalid_argument(
            "crosslingual_run: cross-lingual direction requires a model");
    }
    for (int qid : query_ids) {
        const Query* q = source_collection.find_query(qid);
        if (q == nullptr) {
            throw std::invalid_argument("query " + std::to_string(qid) +
                                        " missing from collection '" +
                                        source_collection.lang + "'");
        }
        std::vector<std::string> tokens;
        if (monolingual) {
            tokens = q->title_tokens;
        } else {
            GeneratedQuery gq = timed(generation_timing, [&] {
                return generate_query(*model, *q, target_collection.lang, tau,
                                      aggregation);
            });
            tokens = gq.terms;
            result.generated.push_back(std::move(gq));
        }
        if (tokens.empty()) {
            result.rankings[qid] = {};
            continue;
        }
        result.rankings[qid] =
            retrieve(target_index, tokens, mu, cutoff, retrieval_timing);
    }
    return result;
}

inline void write_run(std::ostream& out, const DirectionResult& result) {
    for (const auto& [qid, ranked] : result.rankings) {
        write_run(out, qid, ranked, result.tag);
    }
}

/// Generated queries exported as a TREC topics file (num + title), so
/// external engines can replay them.
inline void write_generated_topics(std::ostream& out,
                                   const std::vector<GeneratedQuery>& queries) {
    std::vector<Query> as_queries;
    for (const auto& gq : queries) {
        if (!gq.failed()) {
            as_queries.push_back(gq.as_query());
        }
    }
    write_topics(out, as_queries);
}

}  // namespace clir
