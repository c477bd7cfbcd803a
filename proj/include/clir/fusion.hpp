#pragma once

// Multilingual fused documents: for each query, one relevant (or
// pseudo-relevant) document per language is interleaved into a single
// pseudo-document so that embedding training sees terms of all languages
// inside one context window.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/index.hpp"
#include "clir/rng.hpp"

namespace clir {

struct TaggedToken {
    LangId lang;
    std::string term;

    bool operator==(const TaggedToken&) const = default;
};

inline std::string to_string(const TaggedToken& t) {
    return t.lang + ":" + t.term;
}

struct FusedDocument {
    int query_id = 0;
    std::vector<TaggedToken> tokens;
    std::map<LangId, std::string> source_doc_ids;
};

struct FusionResult {
    std::vector<FusedDocument> docs;
    std::vector<int> skipped_query_ids;
};

/// The final training corpus: training-query fusions plus test-query
/// (pseudo-relevance) fusions, concatenated without deduplication.
struct FusedCorpus {
    std::vector<FusedDocument> training;
    std::vector<FusedDocument> test;

    std::vector<const FusedDocument*> all() const {
        std::vector<const FusedDocument*> out;
        out.reserve(training.size() + test.size());
        for (const auto& d : training) out.push_back(&d);
        for (const auto& d : test) out.push_back(&d);
        return out;
    }
};

/// Interleaves one document per language into a single tagged-token
/// sequence. The document with the fewest terms paces the output: each of
/// its terms is emitted, then every other language contributes its next
/// ceil(t_k / t_min) unconsumed terms, in the given language order. Every
/// input token appears exactly once and each language's internal order is
/// preserved.
inline std::vector<TaggedToken> interleave(
    const std::vector<std::pair<LangId, const std::vector<std::string>*>>&
        docs) {
    if (docs.size() < 2) {
        throw std::invalid_argument(
            "interleave requires at least two languages");
    }
    std::size_t min_idx = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].second == nullptr || docs[i].second->empty()) {
            throw std::invalid_argument("interleave: empty document for '" +
                                        docs[i].first + "'");
        }
        if (docs[i].second->size() < docs[min_idx].second->size()) {
            min_idx = i;
        }
    }
    const std::vector<std::string>& pacer = *docs[min_idx].second;
    const std::size_t t_min = pacer.size();
    std::size_t total = 0;
    std::vector<std::size_t> group_size(docs.size(), 0);
    std::vector<std::size_t> consumed(docs.size(), 0);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const std::size_t t_k = docs[i].second->size();
        total += t_k;
        group_size[i] = (t_k + t_min - 1) / t_min;  // ceil(t_k / t_min)
    }
    std::vector<TaggedToken> out;
    out.reserve(total);
    for (std::size_t step = 0; step < t_min; ++step) {
        out.push_back({docs[min_idx].first, pacer[step]});
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (i == min_idx) continue;
            const std::vector<std::string>& other = *docs[i].second;
            for (std::size_t k = 0;
                 k < group_size[i] && consumed[i] < other.size(); ++k) {
                out.push_back({docs[i].first, other[consumed[i]++]});
            }
        }
    }
    return out;
}

/// The language whose candidate set is smallest; ties go to the earliest
/// entry. An empty set means the query cannot be fused (signaled by
/// nullopt, caller skips).
inline std::optional<LangId> select_min_language(
    const std::vector<std::pair<LangId, std::vector<std::string>>>& sets) {
    if (sets.empty()) {
        throw std::invalid_argument("select_min_language: no languages");
    }
    std::size_t min_idx = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].second.empty()) {
            return std::nullopt;
        }
        if (sets[i].second.size() < sets[min_idx].second.size()) {
            min_idx = i;
        }
    }
    return sets[min_idx].first;
}

namespace detail {

/// Pairs one candidate doc per language for every doc of the min-size
/// language and interleaves each tuple. `sets` holds per-language candidate
/// doc ids in a deterministic order; partner languages are sampled without
/// replacement. Returns nothing when some set is empty (caller records the
/// skip).
inline std::optional<std::vector<FusedDocument>> fuse_query(
    const std::vector<const TestCollection*>& collections, int query_id,
    const std::vector<std::pair<LangId, std::vector<std::string>>>& sets,
    SplitMix64& rng) {
    auto min_lang = select_min_language(sets);
    if (!min_lang) {
        return std::nullopt;
    }
    std::size_t min_idx = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].first == *min_lang) min_idx = i;
    }
    const std::size_t n_fused = sets[min_idx].second.size();
    // Partner order per language: a seeded shuffle consumed front to back
    // realizes sampling without replacement.
    std::vector<std::vector<std::string>> partners(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (i == min_idx) continue;
        partners[i] = sets[i].second;
        rng.shuffle(partners[i]);
    }
    std::vector<FusedDocument> fused;
    fused.reserve(n_fused);
    for (std::size_t draw = 0; draw < n_fused; ++draw) {
        std::vector<std::pair<LangId, const std::vector<std::string>*>> tuple;
        std::map<LangId, std::string> sources;
        bool pool_exhausted = false;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            std::string doc_id;
            if (i == min_idx) {
                doc_id = sets[i].second[draw];
            } else if (draw < partners[i].size()) {
                doc_id = partners[i][draw];
            } else {
                // Unreachable under min-language selection; kept so a
                // malformed candidate set degrades to fewer fusions
                // instead of sampling with replacement.
                pool_exhausted = true;
                break;
            }
            const Document* doc = collections[i]->find_document(doc_id);
            if (doc == nullptr) {
                throw std::runtime_error("fusion: document '" + doc_id +
                                         "' missing from collection '" +
                                         collections[i]->lang + "'");
            }
            tuple.emplace_back(collections[i]->lang, &doc->tokens);
            sources[collections[i]->lang] = doc_id;
        }
        if (pool_exhausted) {
            break;
        }
        FusedDocument fd;
        fd.query_id = query_id;
        fd.tokens = interleave(tuple);
        fd.source_doc_ids = std::move(sources);
        fused.push_back(std::move(fd));
    }
    return fused;
}

/// Candidate docs must be non-empty token-wise or interleave would reject
/// the tuple; stopword removal can empty a judged-relevant document.
inline std::vector<std::string> drop_empty_docs(
    const TestCollection& col, const std::vector<std::string>& doc_ids) {
    std::vector<std::string> kept;
    for (const auto& id : doc_ids) {
        const Document* d = col.find_document(id);
        if (d != nullptr && !d->tokens.empty()) {
            kept.push_back(id);
        }
    }
    return kept;
}

}  // namespace detail

/// Fuses training queries from judged-relevant documents. One fused
/// document per relevant doc of the smallest relevant set; partner docs are
/// drawn randomly without replacement. A query with an empty relevant set
/// in any language is skipped and reported. Deterministic in `seed`; the
/// per-query generator is derived from (seed, query_id) so queries are
/// independent.
inline FusionResult build_training_fusion(
    const std::vector<const TestCollection*>& collections,
    const std::vector<int>& training_query_ids, std::uint64_t seed) {
    if (collections.size() < 2) {
        throw std::invalid_argument("fusion requires at least two languages");
    }
    FusionResult result;
    std::vector<int> ids = training_query_ids;
    std::sort(ids.begin(), ids.end());
    for (int qid : ids) {
        std::vector<std::pair<LangId, std::vector<std::string>>> sets;
        for (const auto* col : collections) {
            sets.emplace_back(
                col->lang,
                detail::drop_empty_docs(*col, col->relevant_present(qid)));
        }
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(qid)));
        auto fused = detail::fuse_query(collections, qid, sets, rng);
        if (!fused) {
            result.skipped_query_ids.push_back(qid);
            continue;
        }
        for (auto& fd : *fused) {
            result.docs.push_back(std::move(fd));
        }
    }
    return result;
}

/// Fuses test queries from pseudo-relevant documents: each language's
/// candidate set is the top-kappa of a monolingual retrieval for that
/// language's version of the query. The pairing procedure is identical to
/// training fusion. Queries retrieving nothing in some language are
/// skipped and reported.
inline FusionResult build_test_fusion(
    const std::vector<const TestCollection*>& collections,
    const std::vector<const InvertedIndex*>& indexes,
    const std::vector<int>& test_query_ids, std::size_t kappa, double mu,
    std::uint64_t seed) {
    if (collections.size() < 2) {
        throw std::invalid_argument("fusion requires at least two languages");
    }
    if (collections.size() != indexes.size()) {
        throw std::invalid_argument(
            "fusion: one index per collection required");
    }
    if (kappa < 1) {
        throw std::invalid_argument("kappa must be at least 1");
    }
    FusionResult result;
    std::vector<int> ids = test_query_ids;
    std::sort(ids.begin(), ids.end());
    for (int qid : ids) {
        std::vector<std::pair<LangId, std::vector<std::string>>> sets;
        bool missing_query = false;
        for (std::size_t i = 0; i < collections.size(); ++i) {
            const Query* q = collections[i]->find_query(qid);
            if (q == nullptr) {
                missing_query = true;
                break;
            }
            RankedList top =
                retrieve(*indexes[i], q->title_tokens, mu, kappa);
            std::vector<std::string> doc_ids;
            doc_ids.reserve(top.size());
            for (const auto& sd : top) doc_ids.push_back(sd.doc_id);
            std::sort(doc_ids.begin(), doc_ids.end());
            sets.emplace_back(collections[i]->lang,
                              detail::drop_empty_docs(*collections[i],
                                                      doc_ids));
        }
        if (missing_query) {
            result.skipped_query_ids.push_back(qid);
            continue;
        }
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(qid)));
        auto fused = detail::fuse_query(collections, qid, sets, rng);
        if (!fused) {
            result.skipped_query_ids.push_back(qid);
            continue;
        }
        for (auto& fd : *fused) {
            result.docs.push_back(std::move(fd));
        }
    }
    return result;
}

/// One fused document per line, space-separated "lang:term" tokens.
inline void write_fused_corpus(std::ostream& out,
                               const std::vector<const FusedDocument*>& docs) {
    for (const auto* d : docs) {
        for (std::size_t i = 0; i < d->tokens.size(); ++i) {
            if (i) out << ' ';
            out << d->tokens[i].lang << ':' << d->tokens[i].term;
        }
        out << '\n';
    }
}

inline void write_fused_corpus(std::ostream& out, const FusedCorpus& corpus) {
    write_fused_corpus(out, corpus.all());
}

/// Reads fused-corpus lines back as tagged-token sentences. Terms never
/// contain ':' (the tokenizer splits on it), so the first ':' is the
/// separator.
inline std::vector<std::vector<TaggedToken>> read_fused_corpus(
    std::istream& in) {
    std::vector<std::vector<TaggedToken>> sentences;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<TaggedToken> sentence;
        std::size_t pos = 0;
        while (pos < line.size()) {
            std::size_t end = line.find(' ', pos);
            if (end == std::string::npos) end = line.size();
            if (end > pos) {
                std::string_view tok(line.data() + pos, end - pos);
                std::size_t colon = tok.find(':');
                if (colon == std::string_view::npos || colon == 0 ||
                    colon + 1 == tok.size()) {
                    throw ParseError("fused corpus line " +
                                     std::to_string(line_no) +
                                     ": token '" + std::string(tok) +
                                     "' is not lang:term");
                }
                sentence.push_back({std::string(tok.substr(0, colon)),
                                    std::string(tok.substr(colon + 1))});
            }
            pos = end + 1;
        }
        if (!sentence.empty()) {
            sentences.push_back(std::move(sentence));
        }
    }
    return sentences;
}

}  // namespace clir
