#pragma once

// Wall-clock accounting for pipeline stages. Accumulators are race-free so
// concurrent retrieval calls can contribute to the same total.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <type_traits>

namespace clir {

class TimingAccumulator {
  public:
    void add(double seconds) {
        seconds_.fetch_add(seconds, std::memory_order_relaxed);
    }

    double seconds() const { return seconds_.load(std::memory_order_relaxed); }

  private:
    std::atomic<double> seconds_{0.0};
};

/// Runs `fn` and adds its wall time to `acc` (which may be null).
template <typename Fn>
auto timed(TimingAccumulator* acc, Fn&& fn) {
    if (acc == nullptr) {
        return fn();
    }
    auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        std::chrono::duration<double> dt =
            std::chrono::steady_clock::now() - start;
        acc->add(dt.count());
    } else {
        auto result = fn();
        std::chrono::duration<double> dt =
            std::chrono::steady_clock::now() - start;
        acc->add(dt.count());
        return result;
    }
}

/// Stage totals for one experiment. Pre-retrieval covers everything needed
/// before queries can be answered: indexing, fused-corpus construction,
/// embedding training and cross-lingual query generation.
struct TimingReport {
    double indexing_seconds = 0.0;
    double fusion_seconds = 0.0;
    double training_seconds = 0.0;
    double query_generation_seconds = 0.0;
    double retrieval_seconds = 0.0;

    double pre_retrieval_seconds() const {
        return indexing_seconds + fusion_seconds + training_seconds +
               query_generation_seconds;
    }

    double total_seconds() const {
        return pre_retrieval_seconds() + retrieval_seconds;
    }
};

inline void write_timing(std::ostream& out, const TimingReport& t) {
    out << "stage\tseconds\n";
    char buf[64];
    auto row = [&](const char* stage, double s) {
        std::snprintf(buf, sizeof(buf), "%.6f", s);
        out << stage << '\t' << buf << '\n';
    };
    row("indexing", t.indexing_seconds);
    row("fusion", t.fusion_seconds);
    row("training", t.training_seconds);
    row("query_generation", t.query_generation_seconds);
    row("pre_retrieval", t.pre_retrieval_seconds());
    row("retrieval", t.retrieval_seconds);
    row("total", t.total_seconds());
}

}  // namespace clir
