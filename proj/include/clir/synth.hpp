#pragma once

// Synthetic topically-aligned multilingual test collections. Each topic
// owns a disjoint per-language vocabulary with a known translation pairing
// (same topic/slot across languages), so cross-lingual quality is
// measurable against ground truth at desk scale.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/rng.hpp"

namespace clir {

struct SyntheticSpec {
    std::size_t languages = 2;
    std::size_t topics = 20;
    std::size_t vocab_per_topic = 30;
    std::size_t docs_per_topic_per_lang = 50;
    std::size_t doc_len_min = 40;
    std::size_t doc_len_max = 80;
    std::size_t background_vocab = 200;
    double noise_prob = 0.25;
    std::size_t query_terms = 3;
    // Optional per-language document-length multiplier (default 1.0 each);
    // lets fixtures plant asymmetric lengths.
    std::vector<double> length_scale;

    void validate() const {
        if (languages < 1 || languages > 26) {
            throw std::invalid_argument("languages must be in [1, 26]");
        }
        if (topics < 1) throw std::invalid_argument("topics must be >= 1");
        if (vocab_per_topic < 1) {
            throw std::invalid_argument("vocab_per_topic must be >= 1");
        }
        if (docs_per_topic_per_lang < 1) {
            throw std::invalid_argument(
                "docs_per_topic_per_lang must be >= 1");
        }
        if (doc_len_min < 1 || doc_len_max < doc_len_min) {
            throw std::invalid_argument("document length range invalid");
        }
        if (!(noise_prob >= 0.0 && noise_prob < 1.0)) {
            throw std::invalid_argument("noise_prob must be in [0, 1)");
        }
        if (query_terms < 1 || query_terms > vocab_per_topic) {
            throw std::invalid_argument(
                "query_terms must be in [1, vocab_per_topic]");
        }
        if (!length_scale.empty() && length_scale.size() != languages) {
            throw std::invalid_argument(
                "length_scale must have one entry per language");
        }
        for (double s : length_scale) {
            if (!(s > 0.0)) {
                throw std::invalid_argument("length_scale must be positive");
            }
        }
    }
};

struct SyntheticResult {
    std::vector<TestCollection> collections;  // one per language
    // One group per (topic, slot): the same concept's surface form in every
    // language — the planted translation table.
    std::vector<std::map<LangId, std::string>> translations;
    std::uint64_t emitted_tokens = 0;
};

namespace synth_detail {

inline LangId lang_name(std::size_t index) {
    return std::string("l") + char('a' + index);
}

inline std::string topic_term(const LangId& lang, std::size_t topic,
                              std::size_t slot) {
    return lang + "t" + std::to_string(topic) + "w" + std::to_string(slot);
}

inline std::string background_term(const LangId& lang, std::size_t k) {
    return lang + "bg" + std::to_string(k);
}

}  // namespace synth_detail

/// Deterministic in `seed`. Documents of topic t sample topical terms of t
/// (plus background noise); queries are the first query_terms topical slots
/// of their topic, identically slotted across languages, so query ids align
/// and the translation table is exact. Qrels: same-topic documents are
/// relevant; next-topic documents are judged nonrelevant (so preference
/// metrics see judged negatives); everything else is unjudged.
inline SyntheticResult generate_synthetic(const SyntheticSpec& spec,
                                          std::uint64_t seed) {
    spec.validate();
    SyntheticResult result;
    for (std::size_t t = 0; t < spec.topics; ++t) {
        for (std::size_t s = 0; s < spec.vocab_per_topic; ++s) {
            std::map<LangId, std::string> group;
            for (std::size_t l = 0; l < spec.languages; ++l) {
                LangId lang = synth_detail::lang_name(l);
                group[lang] = synth_detail::topic_term(lang, t, s);
            }
            result.translations.push_back(std::move(group));
        }
    }
    for (std::size_t l = 0; l < spec.languages; ++l) {
        const LangId lang = synth_detail::lang_name(l);
        const double scale =
            spec.length_scale.empty() ? 1.0 : spec.length_scale[l];
        SplitMix64 rng(mix_seed(seed, l + 1));
        std::vector<Document> docs;
        Qrels qrels;
        for (std::size_t t = 0; t < spec.topics; ++t) {
            for (std::size_t d = 0; d < spec.docs_per_topic_per_lang; ++d) {
                Document doc;
                doc.doc_id = lang + "-t" + std::to_string(t) + "-d" +
                             std::to_string(d);
                doc.lang = lang;
                std::size_t base_len =
                    spec.doc_len_min +
                    rng.bounded(spec.doc_len_max - spec.doc_len_min + 1);
                std::size_t len = std::size_t(
                    std::llround(double(base_len) * scale));
                if (len < 1) len = 1;
                doc.tokens.reserve(len);
                for (std::size_t k = 0; k < len; ++k) {
                    if (spec.background_vocab > 0 &&
                        rng.real() < spec.noise_prob) {
                        doc.tokens.push_back(synth_detail::background_term(
                            lang, rng.bounded(spec.background_vocab)));
                    } else {
                        doc.tokens.push_back(synth_detail::topic_term(
                            lang, t, rng.bounded(spec.vocab_per_topic)));
                    }
                }
                result.emitted_tokens += doc.tokens.size();
                int query_id = int(t) + 1;
                qrels.add(query_id, doc.doc_id, 1);
                if (spec.topics > 1) {
                    int prev_query = int((t + spec.topics - 1) % spec.topics) + 1;
                    qrels.add(prev_query, doc.doc_id, 0);
                }
                docs.push_back(std::move(doc));
            }
        }
        std::vector<Query> queries;
        for (std::size_t t = 0; t < spec.topics; ++t) {
            Query q;
            q.query_id = int(t) + 1;
            q.lang = lang;
            for (std::size_t s = 0; s < spec.query_terms; ++s) {
                q.title_tokens.push_back(
                    synth_detail::topic_term(lang, t, s));
            }
            queries.push_back(std::move(q));
        }
        result.collections.push_back(
            make_test_collection(lang, std::move(docs), std::move(queries),
                                 std::move(qrels)));
    }
    return result;
}

struct SyntheticPaths {
    std::vector<std::string> docs;
    std::vector<std::string> topics;
    std::vector<std::string> qrels;
    std::string stopwords;
    std::string translations;
};

/// Writes the generated collections as TREC-format files under `dir`:
/// per-language docs/topics/qrels, one shared (empty) stopword list, and
/// the translation table as TSV (topic slot, then one column per language).
inline SyntheticPaths write_synthetic(const SyntheticResult& result,
                                      const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    SyntheticPaths paths;
    auto open = [](const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write file: " + path);
        }
        return out;
    };
    for (const auto& col : result.collections) {
        std::string base = dir + "/" + col.lang;
        paths.docs.push_back(base + ".docs.trec");
        paths.topics.push_back(base + ".topics.trec");
        paths.qrels.push_back(base + ".qrels.txt");
        {
            auto out = open(paths.docs.back());
            write_trec_documents(out, col.documents);
        }
        {
            auto out = open(paths.topics.back());
            write_topics(out, col.queries);
        }
        {
            auto out = open(paths.qrels.back());
            for (const auto& [qid, docs] : col.qrels.by_query()) {
                for (const auto& [doc_id, rel] : docs) {
                    out << qid << " 0 " << doc_id << ' ' << rel << '\n';
                }
            }
        }
    }
    paths.stopwords = dir + "/stopwords.txt";
    open(paths.stopwords);  // empty list: no stopword removal
    paths.translations = dir + "/translations.tsv";
    {
        auto out = open(paths.translations);
        for (std::size_t g = 0; g < result.translations.size(); ++g) {
            out << g;
            for (const auto& [lang, term] : result.translations[g]) {
                out << '\t' << lang << ':' << term;
            }
            out << '\n';
        }
    }
    return paths;
}

}  // namespace clir
