#pragma once

// Inverted index with Dirichlet-smoothed query-likelihood scoring and
// TREC run-file I/O.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/timing.hpp"

namespace clir {

struct Posting {
    std::uint32_t doc = 0;  // internal id: rank of doc_id in sorted order
    std::uint32_t tf = 0;
};

struct TermPostings {
    std::uint64_t collection_freq = 0;
    std::vector<Posting> postings;  // ascending by doc
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
};

using RankedList = std::vector<ScoredDoc>;

/// Immutable after construction; concurrent retrieval reads are safe.
class InvertedIndex {
  public:
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    std::uint32_t doc_length(std::uint32_t doc) const { return lengths_[doc]; }
    std::uint64_t total_tokens() const { return total_tokens_; }
    std::size_t num_documents() const { return doc_ids_.size(); }

    const TermPostings* find_term(const std::string& term) const {
        auto it = terms_.find(term);
        return it == terms_.end() ? nullptr : &it->second;
    }

    std::uint64_t collection_freq(const std::string& term) const {
        const TermPostings* tp = find_term(term);
        return tp == nullptr ? 0 : tp->collection_freq;
    }

    std::uint32_t term_freq(const std::string& term, std::uint32_t doc) const {
        const TermPostings* tp = find_term(term);
        if (tp == nullptr) return 0;
        auto it = std::lower_bound(
            tp->postings.begin(), tp->postings.end(), doc,
            [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        return it != tp->postings.end() && it->doc == doc ? it->tf : 0;
    }

    /// Internal id for a doc_id, or -1 if absent.
    std::int64_t doc_rank(const std::string& doc_id) const {
        auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), doc_id);
        if (it == doc_ids_.end() || *it != doc_id) return -1;
        return it - doc_ids_.begin();
    }

    friend InvertedIndex build_index(const std::vector<Document>& documents);

  private:
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> lengths_;
    std::map<std::string, TermPostings> terms_;
    std::uint64_t total_tokens_ = 0;
};

/// Internal ids are assigned by lexicographic doc_id order so that index
/// contents are independent of input file order.
inline InvertedIndex build_index(const std::vector<Document>& documents) {
    if (documents.empty()) {
        throw std::invalid_argument("cannot index an empty document set");
    }
    std::vector<const Document*> sorted;
    sorted.reserve(documents.size());
    for (const auto& d : documents) sorted.push_back(&d);
    std::sort(sorted.begin(), sorted.end(),
              [](const Document* a, const Document* b) {
                  return a->doc_id < b->doc_id;
              });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i]->doc_id == sorted[i - 1]->doc_id) {
            throw std::invalid_argument("duplicate doc id: " +
                                        sorted[i]->doc_id);
        }
    }
    InvertedIndex index;
    index.doc_ids_.reserve(sorted.size());
    index.lengths_.reserve(sorted.size());
    for (std::uint32_t rank = 0; rank < sorted.size(); ++rank) {
        const Document& d = *sorted[rank];
        index.doc_ids_.push_back(d.doc_id);
        index.lengths_.push_back(static_cast<std::uint32_t>(d.tokens.size()));
        index.total_tokens_ += d.tokens.size();
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : d.tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            TermPostings& tp = index.terms_[term];
            tp.collection_freq += count;
            tp.postings.push_back({rank, count});
        }
    }
    return index;
}

namespace detail {

/// Query tokens grouped by first occurrence, keeping only in-collection
/// terms. Both the single-document scorer and retrieval share this grouping
/// and the same left-to-right summation order, so they produce bit-identical
/// doubles for the same document.
struct QueryTermGroup {
    const TermPostings* postings;
    double qtf;
};

inline std::vector<QueryTermGroup> group_query_terms(
    const InvertedIndex& index, const std::vector<std::string>& query_tokens) {
    std::vector<std::string> order;
    std::map<std::string, double> counts;
    for (const auto& t : query_tokens) {
        auto [it, inserted] = counts.emplace(t, 0.0);
        if (inserted) order.push_back(t);
        it->second += 1.0;
    }
    std::vector<QueryTermGroup> groups;
    for (const auto& t : order) {
        const TermPostings* tp = index.find_term(t);
        if (tp != nullptr && tp->collection_freq > 0) {
            groups.push_back({tp, counts[t]});
        }
    }
    return groups;
}

inline double dirichlet_score(const std::vector<QueryTermGroup>& groups,
                              const std::vector<std::uint32_t>& tfs,
                              std::uint32_t doc_length, double mu,
                              std::uint64_t total_tokens) {
    double score = 0.0;
    const double denom = static_cast<double>(doc_length) + mu;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double cf = static_cast<double>(groups[i].postings->collection_freq);
        const double p_bg = cf / static_cast<double>(total_tokens);
        const double num = static_cast<double>(tfs[i]) + mu * p_bg;
        score += groups[i].qtf * std::log(num / denom);
    }
    return score;
}

}  // namespace detail

/// Log-likelihood of the query under the document's Dirichlet-smoothed
/// language model. Query terms with zero collection frequency contribute
/// exactly zero.
inline double score_dirichlet(const InvertedIndex& index,
                              const std::vector<std::string>& query_tokens,
                              const std::string& doc_id, double mu) {
    if (!(mu > 0.0)) {
        throw std::invalid_argument("mu must be positive");
    }
    std::int64_t rank = index.doc_rank(doc_id);
    if (rank < 0) {
        throw std::invalid_argument("unknown doc id: " + doc_id);
    }
    auto groups = detail::group_query_terms(index, query_tokens);
    std::vector<std::uint32_t> tfs(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& postings = groups[i].postings->postings;
        auto it = std::lower_bound(
            postings.begin(), postings.end(), static_cast<std::uint32_t>(rank),
            [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        tfs[i] = it != postings.end() &&
                         it->doc == static_cast<std::uint32_t>(rank)
                     ? it->tf
                     : 0;
    }
    return detail::dirichlet_score(groups, tfs,
                                   index.doc_length(static_cast<std::uint32_t>(rank)),
                                   mu, index.total_tokens());
}

/// Scores every document containing at least one query term and returns the
/// top `cutoff` ordered by (score descending, doc_id ascending). A query
/// with no in-collection terms yields an empty list.
inline RankedList retrieve(const InvertedIndex& index,
                           const std::vector<std::string>& query_tokens,
                           double mu, std::size_t cutoff,
                           TimingAccumulator* timing = nullptr) {
    if (!(mu > 0.0)) {
        throw std::invalid_argument("mu must be positive");
    }
    if (cutoff < 1) {
        throw std::invalid_argument("cutoff must be at least 1");
    }
    return timed(timing, [&] {
        auto groups = detail::group_query_terms(index, query_tokens);
        if (groups.empty()) {
            return RankedList{};
        }
        // Candidates: union of the groups' postings, with per-group tf
        // aligned by candidate. Docs are numbered 0..N-1 so a flat table
        // gathers tfs in O(candidates · terms).
        std::vector<std::uint8_t> touched(index.num_documents(), 0);
        std::vector<std::uint32_t> candidates;
        for (const auto& g : groups) {
            for (const auto& p : g.postings->postings) {
                if (!touched[p.doc]) {
                    touched[p.doc] = 1;
                    candidates.push_back(p.doc);
                }
            }
        }
        std::sort(candidates.begin(), candidates.end());
        std::vector<std::uint32_t> position(index.num_documents(), 0);
        for (std::uint32_t i = 0; i < candidates.size(); ++i) {
            position[candidates[i]] = i;
        }
        std::vector<std::uint32_t> tfs(candidates.size() * groups.size(), 0);
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            for (const auto& p : groups[gi].postings->postings) {
                tfs[position[p.doc] * groups.size() + gi] = p.tf;
            }
        }
        std::vector<std::pair<double, std::uint32_t>> scored;
        scored.reserve(candidates.size());
        std::vector<std::uint32_t> row(groups.size());
        for (std::uint32_t i = 0; i < candidates.size(); ++i) {
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                row[gi] = tfs[i * groups.size() + gi];
            }
            scored.emplace_back(
                detail::dirichlet_score(groups, row,
                                        index.doc_length(candidates[i]), mu,
                                        index.total_tokens()),
                candidates[i]);
        }
        // Score descending; equal scores break ties by ascending doc_id,
        // which is ascending internal id by construction.
        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                  });
        if (scored.size() > cutoff) {
            scored.resize(cutoff);
        }
        RankedList out;
        out.reserve(scored.size());
        for (const auto& [score, doc] : scored) {
            out.push_back({index.doc_ids()[doc], score});
        }
        return out;
    });
}

/// Appends one query's ranking in TREC run format:
/// "qid Q0 docno rank score tag", ranks starting at 1.
inline void write_run(std::ostream& out, int query_id, const RankedList& ranked,
                      const std::string& tag) {
    char buf[64];
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f", ranked[i].score);
        out << query_id << " Q0 " << ranked[i].doc_id << ' ' << (i + 1) << ' '
            << buf << ' ' << tag << '\n';
    }
}

/// Parses a TREC run file back into per-query rankings ordered by the rank
/// column. Used by evaluation, so only doc order is retained.
inline std::map<int, std::vector<std::string>> parse_run(std::istream& in) {
    std::map<int, std::vector<std::pair<long, std::string>>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string qid_s, q0, docno, rank_s, score_s, tag;
        if (!(ss >> qid_s)) continue;  // blank line
        if (!(ss >> q0 >> docno >> rank_s >> score_s >> tag)) {
            throw ParseError("run line " + std::to_string(line_no) +
                             ": expected 6 columns");
        }
        int qid = 0;
        auto [p1, e1] =
            std::from_chars(qid_s.data(), qid_s.data() + qid_s.size(), qid);
        long rank = 0;
        auto [p2, e2] = std::from_chars(rank_s.data(),
                                        rank_s.data() + rank_s.size(), rank);
        if (e1 != std::errc() || p1 != qid_s.data() + qid_s.size() ||
            e2 != std::errc() || p2 != rank_s.data() + rank_s.size()) {
            throw ParseError("run line " + std::to_string(line_no) +
                             ": bad query id or rank");
        }
        rows[qid].emplace_back(rank, docno);
    }
    std::map<int, std::vector<std::string>> out;
    for (auto& [qid, docs] : rows) {
        std::stable_sort(docs.begin(), docs.end(),
                         [](const auto& a, const auto& b) {
                             return a.first < b.first;
                         });
        auto& list = out[qid];
        list.reserve(docs.size());
        for (auto& [rank, doc] : docs) {
            list.push_back(std::move(doc));
        }
    }
    return out;
}

}  // namespace clir
