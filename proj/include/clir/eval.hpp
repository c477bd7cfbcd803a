#pragma once

// Rank-based retrieval metrics (AP, R-Precision, BPref) and the Wilcoxon
// signed-rank test for paired system comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "clir/corpus.hpp"

namespace clir {

/// Mean of (1/|relevant|) Σ precision@rank over ranks holding a relevant
/// document. Ranks are 1-based; docs outside the ranking contribute zero.
inline double average_precision(const std::vector<std::string>& ranked,
                                const std::set<std::string>& relevant) {
    if (relevant.empty()) {
        throw std::invalid_argument("average_precision: empty relevant set");
    }
    double hits = 0.0;
    double sum = 0.0;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        if (relevant.count(ranked[r])) {
            hits += 1.0;
            sum += hits / static_cast<double>(r + 1);
        }
    }
    return sum / static_cast<double>(relevant.size());
}

/// Fraction of the top-R ranked docs that are relevant, R = |relevant|.
inline double r_precision(const std::vector<std::string>& ranked,
                          const std::set<std::string>& relevant) {
    if (relevant.empty()) {
        throw std::invalid_argument("r_precision: empty relevant set");
    }
    const std::size_t R = relevant.size();
    std::size_t hits = 0;
    for (std::size_t r = 0; r < ranked.size() && r < R; ++r) {
        if (relevant.count(ranked[r])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(R);
}

/// Binary preference over judged documents only. For each retrieved
/// judged-relevant doc, the penalty is the number of judged-nonrelevant
/// docs ranked above it, capped at and normalized by min(R, N). With no
/// judged nonrelevant docs every retrieved relevant doc contributes 1.
/// Unjudged retrieved docs are invisible to the counts.
inline double bpref(const std::vector<std::string>& ranked,
                    const std::set<std::string>& relevant,
                    const std::set<std::string>& judged_nonrelevant) {
    if (relevant.empty()) {
        throw std::invalid_argument("bpref: empty relevant set");
    }
    const double R = static_cast<double>(relevant.size());
    const double N = static_cast<double>(judged_nonrelevant.size());
    const double cap = std::min(R, N);
    double sum = 0.0;
    double nonrel_above = 0.0;
    for (const auto& doc : ranked) {
        if (relevant.count(doc)) {
            if (N == 0.0) {
                sum += 1.0;
            } else {
                sum += 1.0 - std::min(nonrel_above, cap) / cap;
            }
        } else if (judged_nonrelevant.count(doc)) {
            nonrel_above += 1.0;
        }
    }
    return sum / R;
}

struct QueryMetrics {
    double ap = 0.0;
    double r_prec = 0.0;
    double bpref = 0.0;
};

struct EvalReport {
    std::map<int, QueryMetrics> per_query;
    double map = 0.0;
    double mean_r_prec = 0.0;
    double mean_bpref = 0.0;
    std::size_t num_queries_evaluated = 0;
};

/// Scores a run against qrels. The evaluated universe is every query with
/// at least one judged-relevant document — restricted to `universe` when
/// given — and a query missing from the run scores zero on all metrics
/// rather than being dropped. Queries with no judged-relevant documents are
/// excluded from the means.
inline EvalReport evaluate_run(
    const std::map<int, std::vector<std::string>>& run, const Qrels& qrels,
    const std::optional<std::set<int>>& universe = std::nullopt) {
    EvalReport report;
    static const std::vector<std::string> kEmpty;
    for (const auto& [qid, judgments] : qrels.by_query()) {
        if (universe && !universe->count(qid)) continue;
        std::set<std::string> relevant = qrels.relevant_docs(qid);
        if (relevant.empty()) continue;
        std::set<std::string> nonrelevant = qrels.nonrelevant_docs(qid);
        auto it = run.find(qid);
        const std::vector<std::string>& ranked =
            it == run.end() ? kEmpty : it->second;
        QueryMetrics m;
        m.ap = average_precision(ranked, relevant);
        m.r_prec = r_precision(ranked, relevant);
        m.bpref = bpref(ranked, relevant, nonrelevant);
        report.per_query[qid] = m;
        report.map += m.ap;
        report.mean_r_prec += m.r_prec;
        report.mean_bpref += m.bpref;
        ++report.num_queries_evaluated;
    }
    if (report.num_queries_evaluated > 0) {
        const double n = static_cast<double>(report.num_queries_evaluated);
        report.map /= n;
        report.mean_r_prec /= n;
        report.mean_bpref /= n;
    }
    return report;
}

inline void write_eval_text(std::ostream& out, const EvalReport& report) {
    char buf[128];
    out << "query\tAP\tR-Prec\tBPref\n";
    for (const auto& [qid, m] : report.per_query) {
        std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\t%.6f\n", qid, m.ap,
                      m.r_prec, m.bpref);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "mean\t%.6f\t%.6f\t%.6f\n", report.map,
                  report.mean_r_prec, report.mean_bpref);
    out << buf;
    out << "queries_evaluated\t" << report.num_queries_evaluated << '\n';
}

enum class WilcoxonMethod {
    automatic,      // exact for n <= 12, normal approximation above
    exact,          // enumeration; refuses n > 20
    normal_approx,  // tie-corrected normal with continuity correction
};

struct SignificanceResult {
    double statistic = 0.0;  // W = min(W+, W-)
    double p_value = 1.0;
    std::size_t n_pairs_nonzero = 0;
};

namespace detail {

/// Midranks of |values| (ascending), plus the tie-group sizes.
inline std::pair<std::vector<double>, std::vector<std::size_t>> midranks(
    const std::vector<double>& magnitudes) {
    const std::size_t n = magnitudes.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return magnitudes[a] < magnitudes[b];
    });
    std::vector<double> ranks(n, 0.0);
    std::vector<std::size_t> tie_sizes;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n &&
               magnitudes[order[j + 1]] == magnitudes[order[i]]) {
            ++j;
        }
        const double mid = (static_cast<double>(i + 1) +
                            static_cast<double>(j + 1)) /
                           2.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = mid;
        }
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    return {ranks, tie_sizes};
}

inline double exact_two_sided_p(const std::vector<double>& ranks, double w) {
    const std::size_t n = ranks.size();
    const std::uint64_t assignments = 1ULL << n;
    std::uint64_t at_or_below = 0;
    for (std::uint64_t mask = 0; mask < assignments; ++mask) {
        double w_plus = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1ULL << i)) w_plus += ranks[i];
        }
        if (w_plus <= w + 1e-9) ++at_or_below;
    }
    const double tail =
        static_cast<double>(at_or_below) / static_cast<double>(assignments);
    return std::min(1.0, 2.0 * tail);
}

inline double approx_two_sided_p(const std::vector<double>& ranks,
                                 const std::vector<std::size_t>& tie_sizes,
                                 double w) {
    const double n = static_cast<double>(ranks.size());
    const double mean = n * (n + 1.0) / 4.0;
    double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    for (std::size_t t : tie_sizes) {
        const double td = static_cast<double>(t);
        var -= (td * td * td - td) / 48.0;
    }
    if (var <= 0.0) {
        // Every difference tied at one magnitude and n tiny; no evidence.
        return 1.0;
    }
    // W = min(W+, W-) never exceeds the mean; the continuity correction
    // moves the statistic half a step toward it but must not cross it,
    // otherwise a dead-center statistic would look less than fully null.
    const double z = std::min(0.0, w - mean + 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(std::fabs(z) / std::sqrt(2.0)));
}

}  // namespace detail

/// Paired two-sided Wilcoxon signed-rank test. Zero differences are
/// dropped; ties in |difference| receive midranks. The statistic is
/// min(W+, W-). Throws if inputs differ in length or no nonzero pairs
/// remain.
inline SignificanceResult wilcoxon_signed_rank(
    const std::vector<double>& a, const std::vector<double>& b,
    WilcoxonMethod method = WilcoxonMethod::automatic) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(
            "wilcoxon_signed_rank: unequal sample sizes");
    }
    std::vector<double> magnitudes;
    std::vector<int> signs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) {
            magnitudes.push_back(std::fabs(d));
            signs.push_back(d > 0.0 ? 1 : -1);
        }
    }
    const std::size_t n = magnitudes.size();
    if (n == 0) {
        throw std::domain_error(
            "wilcoxon_signed_rank: all paired differences are zero");
    }
    auto [ranks, tie_sizes] = detail::midranks(magnitudes);
    double w_plus = 0.0;
    double w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        (signs[i] > 0 ? w_plus : w_minus) += ranks[i];
    }
    SignificanceResult result;
    result.statistic = std::min(w_plus, w_minus);
    result.n_pairs_nonzero = n;
    bool use_exact = false;
    switch (method) {
        case WilcoxonMethod::automatic:
            use_exact = n <= 12;
            break;
        case WilcoxonMethod::exact:
            if (n > 20) {
                throw std::invalid_argument(
                    "wilcoxon_signed_rank: exact enumeration limited to 20 "
                    "pairs");
            }
            use_exact = true;
            break;
        case WilcoxonMethod::normal_approx:
            use_exact = false;
            break;
    }
    result.p_value =
        use_exact ? detail::exact_two_sided_p(ranks, result.statistic)
                  : detail::approx_two_sided_p(ranks, tie_sizes,
                                               result.statistic);
    return result;
}

}  // namespace clir
