#pragma once

// Experiment orchestration: deterministic query splits, cross-validated
// parameter sweeps, and the end-to-end pipeline (ingest -> index -> fuse ->
// train -> generate -> retrieve -> evaluate) with two-phase timing and
// report files under a run directory.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "clir/corpus.hpp"
#include "clir/embedding.hpp"
#include "clir/eval.hpp"
#include "clir/fusion.hpp"
#include "clir/index.hpp"
#include "clir/rng.hpp"
#include "clir/timing.hpp"
#include "clir/xquery.hpp"

namespace clir {

struct ExperimentConfig {
    std::vector<LangId> languages;  // ordered; order is load-bearing for ties
    std::vector<std::string> docs_paths;
    std::vector<std::string> topics_paths;
    std::vector<std::string> qrels_paths;
    std::vector<std::string> stopword_paths;  // entries may be "" (no list)

    TrainConfig train;  // train.seed is ignored here: stage seeds derive
                        // from `seed` below
    std::size_t kappa = 10;
    std::size_t tau = 10;
    double mu = 2500.0;
    std::size_t cutoff = 1000;
    std::size_t test_query_count = 10;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    QueryAggregation aggregation = QueryAggregation::per_term;
    std::string run_dir;  // empty: keep results in memory only

    std::vector<std::size_t> window_grid = {5, 10, 15, 20, 25,
                                            30, 35, 40, 45, 50};
    std::vector<std::size_t> kappa_grid = {5, 10, 15, 20};
    std::vector<std::size_t> tau_grid = {5, 10, 15};

    void validate() const {
        if (languages.size() < 2) {
            throw std::invalid_argument(
                "experiment requires at least two languages");
        }
        for (std::size_t i = 0; i < languages.size(); ++i) {
            validate_lang_id(languages[i]);
            for (std::size_t j = i + 1; j < languages.size(); ++j) {
                if (languages[i] == languages[j]) {
                    throw std::invalid_argument("duplicate language: " +
                                                languages[i]);
                }
            }
        }
        if (folds < 2) throw std::invalid_argument("folds must be >= 2");
        if (test_query_count < 1) {
            throw std::invalid_argument("test_query_count must be >= 1");
        }
        if (kappa < 1) throw std::invalid_argument("kappa must be >= 1");
        if (tau < 1) throw std::invalid_argument("tau must be >= 1");
        if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
        if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
        train.validate();
    }

    void validate_paths() const {
        if (docs_paths.size() != languages.size() ||
            topics_paths.size() != languages.size() ||
            qrels_paths.size() != languages.size()) {
            throw std::invalid_argument(
                "docs/topics/qrels paths must match the language list");
        }
        if (!stopword_paths.empty() &&
            stopword_paths.size() != languages.size()) {
            throw std::invalid_argument(
                "stopword paths must be empty or match the language list");
        }
    }

    void validate_grids() const {
        for (const auto* grid : {&window_grid, &kappa_grid, &tau_grid}) {
            if (grid->empty()) {
                throw std::invalid_argument("sweep grids must be non-empty");
            }
            for (std::size_t v : *grid) {
                if (v < 1) {
                    throw std::invalid_argument(
                        "sweep grid values must be >= 1");
                }
            }
        }
    }
};

namespace harness_detail {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error("pipeline stage '" + name +
                                 "' failed: " + e.what());
    }
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

inline std::vector<std::size_t> sorted_grid(std::vector<std::size_t> grid) {
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

}  // namespace harness_detail

/// Loads every language's collection from the configured paths.
inline std::vector<TestCollection> load_experiment(
    const ExperimentConfig& cfg) {
    cfg.validate();
    cfg.validate_paths();
    std::vector<TestCollection> collections;
    for (std::size_t i = 0; i < cfg.languages.size(); ++i) {
        std::string stop =
            cfg.stopword_paths.empty() ? std::string() : cfg.stopword_paths[i];
        collections.push_back(load_test_collection(
            cfg.languages[i], cfg.docs_paths[i], cfg.topics_paths[i],
            cfg.qrels_paths[i], stop));
    }
    return collections;
}

struct QuerySplit {
    std::vector<int> train_ids;  // sorted
    std::vector<int> test_ids;   // sorted
};

/// Uniform random split of query ids into train/test, deterministic in
/// `seed`. Ids are shared across languages, so one split serves them all.
inline QuerySplit split_queries(const std::vector<int>& all_ids,
                                std::size_t test_count, std::uint64_t seed) {
    std::vector<int> ids = all_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (test_count >= ids.size()) {
        throw std::invalid_argument(
            "test_count must be smaller than the number of query ids");
    }
    SplitMix64 rng(mix_seed(seed, 0x53504c4954ull));  // "SPLIT"
    rng.shuffle(ids);
    QuerySplit split;
    split.test_ids.assign(ids.begin(), ids.begin() + test_count);
    split.train_ids.assign(ids.begin() + test_count, ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    std::sort(split.train_ids.begin(), split.train_ids.end());
    return split;
}

/// Round-robin fold assignment over shuffled ids; every fold is non-empty
/// and sorted, folds are disjoint, and their union is the input set.
inline std::vector<std::vector<int>> make_folds(const std::vector<int>& ids,
                                                std::size_t folds,
                                                std::uint64_t seed) {
    if (folds < 1) throw std::invalid_argument("folds must be >= 1");
    std::vector<int> shuffled = ids;
    std::sort(shuffled.begin(), shuffled.end());
    shuffled.erase(std::unique(shuffled.begin(), shuffled.end()),
                   shuffled.end());
    if (shuffled.size() < folds) {
        throw std::invalid_argument(
            "cannot make more folds than there are query ids");
    }
    SplitMix64 rng(mix_seed(seed, 0x464f4c4453ull));  // "FOLDS"
    rng.shuffle(shuffled);
    std::vector<std::vector<int>> out(folds);
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
        out[i % folds].push_back(shuffled[i]);
    }
    for (auto& fold : out) std::sort(fold.begin(), fold.end());
    return out;
}

inline std::map<int, std::vector<std::string>> run_from_rankings(
    const std::map<int, RankedList>& rankings) {
    std::map<int, std::vector<std::string>> run;
    for (const auto& [qid, ranked] : rankings) {
        auto& docs = run[qid];
        docs.reserve(ranked.size());
        for (const auto& sd : ranked) docs.push_back(sd.doc_id);
    }
    return run;
}

/// Chance baseline: each query gets an independent random permutation of
/// the whole collection, truncated to `cutoff`. Deterministic in `seed`.
inline std::map<int, std::vector<std::string>> random_ranking_run(
    const TestCollection& collection, const std::vector<int>& query_ids,
    std::size_t cutoff, std::uint64_t seed) {
    std::vector<std::string> all_docs;
    all_docs.reserve(collection.documents.size());
    for (const auto& d : collection.documents) all_docs.push_back(d.doc_id);
    std::sort(all_docs.begin(), all_docs.end());
    std::map<int, std::vector<std::string>> run;
    for (int qid : query_ids) {
        std::vector<std::string> docs = all_docs;
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(qid)));
        rng.shuffle(docs);
        if (docs.size() > cutoff) docs.resize(cutoff);
        run[qid] = std::move(docs);
    }
    return run;
}

struct SweepPoint {
    std::size_t window = 0;
    std::size_t kappa = 0;
    std::size_t tau = 0;
    double mean_map = 0.0;
    // One entry per fold; nullopt for folds skipped as unevaluable.
    std::vector<std::optional<double>> per_fold_map;
};

struct DirectionSignificance {
    LangId source_lang;
    LangId target_lang;
    std::string tag;
    // Held-out cross-lingual AP vs the target's monolingual AP, paired per
    // query. nullopt where the test is undefined (no nonzero differences).
    std::vector<std::optional<SignificanceResult>> per_fold;
    std::optional<SignificanceResult> pooled;
};

struct SweepResult {
    std::size_t window = 0;
    std::size_t kappa = 0;
    std::size_t tau = 0;
    double mean_map = 0.0;
    std::vector<SweepPoint> points;        // full grid, lexicographic order
    std::vector<std::vector<int>> folds;   // the fold assignment used
    std::vector<std::size_t> skipped_folds;  // folds with no evaluable query
    // Significance at the selected grid point, per direction: per-fold and
    // pooled results reported separately.
    std::vector<DirectionSignificance> significance;
};

/// Cross-validated sweep over (window, kappa, tau). The final test queries
/// are split off first (same split as run_pipeline for the same seed) and
/// never touched. For each grid point and fold, the corpus is fused from
/// the non-held-out training queries (judged-relevant fusion) plus the
/// held-out queries fused exactly the way test queries are at run time —
/// pseudo-relevance with the grid point's kappa — so kappa reaches the
/// objective and held-out query terms are represented; an embedding is
/// trained at the grid point's window, held-out queries are generated in
/// every cross-lingual direction and scored against TRUE qrels with MAP.
/// Highest mean MAP across evaluable folds wins; ties break toward the
/// smaller (window, kappa, tau).
inline SweepResult cross_validate(
    const std::vector<TestCollection>& collections,
    const ExperimentConfig& cfg) {
    cfg.validate();
    cfg.validate_grids();
    if (collections.size() != cfg.languages.size()) {
        throw std::invalid_argument(
            "collection list must match the configured languages");
    }
    for (std::size_t i = 0; i < collections.size(); ++i) {
        if (collections[i].lang != cfg.languages[i]) {
            throw std::invalid_argument(
                "collection order must match the configured languages");
        }
    }
    std::vector<const TestCollection*> cols;
    for (const auto& c : collections) cols.push_back(&c);

    const std::vector<int> shared = validate_query_alignment(collections);
    const QuerySplit split =
        split_queries(shared, cfg.test_query_count, cfg.seed);

    std::vector<InvertedIndex> indexes;
    std::vector<const InvertedIndex*> idx;
    indexes.reserve(collections.size());
    for (const auto& c : collections) {
        indexes.push_back(build_index(c.documents));
    }
    for (const auto& ix : indexes) idx.push_back(&ix);

    SweepResult result;
    result.folds = make_folds(split.train_ids, cfg.folds, cfg.seed);

    // A fold is evaluable iff some held-out query has a judged-relevant
    // document in some language; this depends only on the qrels, not on the
    // grid point, so skipped folds are decided once.
    std::vector<bool> fold_evaluable(result.folds.size(), false);
    for (std::size_t f = 0; f < result.folds.size(); ++f) {
        for (int qid : result.folds[f]) {
            for (const auto& c : collections) {
                if (!c.qrels.relevant_docs(qid).empty()) {
                    fold_evaluable[f] = true;
                }
            }
        }
        if (!fold_evaluable[f]) result.skipped_folds.push_back(f);
    }
    if (result.skipped_folds.size() == result.folds.size()) {
        throw std::runtime_error(
            "cross-validation: every fold has zero evaluable queries");
    }

    const auto windows = harness_detail::sorted_grid(cfg.window_grid);
    const auto kappas = harness_detail::sorted_grid(cfg.kappa_grid);
    const auto taus = harness_detail::sorted_grid(cfg.tau_grid);

    // Ordered cross-lingual direction list, grouped by target language.
    std::vector<std::pair<std::size_t, std::size_t>> dirs;  // (source, target)
    for (std::size_t t = 0; t < collections.size(); ++t) {
        for (std::size_t s = 0; s < collections.size(); ++s) {
            if (s != t) dirs.emplace_back(s, t);
        }
    }

    // Monolingual per-query AP per (fold, language): the baseline side of
    // the significance report. Independent of the grid.
    std::vector<std::vector<std::map<int, double>>> mono_ap(
        result.folds.size(),
        std::vector<std::map<int, double>>(collections.size()));
    for (std::size_t f = 0; f < result.folds.size(); ++f) {
        if (!fold_evaluable[f]) continue;
        const std::set<int> universe(result.folds[f].begin(),
                                     result.folds[f].end());
        for (std::size_t t = 0; t < collections.size(); ++t) {
            DirectionResult mono = crosslingual_run(
                collections[t], nullptr, collections[t], indexes[t],
                result.folds[f], cfg.tau, cfg.mu, cfg.cutoff,
                cfg.aggregation);
            EvalReport rep = evaluate_run(run_from_rankings(mono.rankings),
                                          collections[t].qrels, universe);
            for (const auto& [qid, m] : rep.per_query) {
                mono_ap[f][t][qid] = m.ap;
            }
        }
    }

    const std::size_t n_points = windows.size() * kappas.size() * taus.size();
    result.points.assign(n_points, SweepPoint{});
    // Cross-lingual per-query AP per (point, fold, direction), kept so the
    // selected point's significance can be reported without re-running.
    std::vector<std::vector<std::vector<std::map<int, double>>>> cross_ap(
        n_points,
        std::vector<std::vector<std::map<int, double>>>(
            result.folds.size(),
            std::vector<std::map<int, double>>(dirs.size())));

    auto point_index = [&](std::size_t wi, std::size_t ki, std::size_t ti) {
        return (wi * kappas.size() + ki) * taus.size() + ti;
    };

    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        for (std::size_t ki = 0; ki < kappas.size(); ++ki) {
            for (std::size_t ti = 0; ti < taus.size(); ++ti) {
                SweepPoint& p = result.points[point_index(wi, ki, ti)];
                p.window = windows[wi];
                p.kappa = kappas[ki];
                p.tau = taus[ti];
                p.per_fold_map.assign(result.folds.size(), std::nullopt);
            }
        }
    }

    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        for (std::size_t ki = 0; ki < kappas.size(); ++ki) {
            for (std::size_t f = 0; f < result.folds.size(); ++f) {
                if (!fold_evaluable[f]) continue;
                const std::vector<int>& heldout = result.folds[f];
                std::vector<int> rest;
                std::set_difference(split.train_ids.begin(),
                                    split.train_ids.end(), heldout.begin(),
                                    heldout.end(), std::back_inserter(rest));
                const std::uint64_t fold_seed =
                    mix_seed(mix_seed(cfg.seed, 0xCF01), f);
                FusionResult training_fusion =
                    build_training_fusion(cols, rest, mix_seed(fold_seed, 1));
                FusionResult heldout_fusion = build_test_fusion(
                    cols, idx, heldout, kappas[ki], cfg.mu,
                    mix_seed(mix_seed(fold_seed, 2), kappas[ki]));
                std::vector<const FusedDocument*> corpus;
                corpus.reserve(training_fusion.docs.size() +
                               heldout_fusion.docs.size());
                for (const auto& d : training_fusion.docs) {
                    corpus.push_back(&d);
                }
                for (const auto& d : heldout_fusion.docs) {
                    corpus.push_back(&d);
                }
                TrainConfig tc = cfg.train;
                tc.window = windows[wi];
                tc.seed = mix_seed(
                    mix_seed(mix_seed(fold_seed, 3), windows[wi]),
                    kappas[ki]);
                EmbeddingModel model = train(corpus, tc);

                const std::set<int> universe(heldout.begin(), heldout.end());
                for (std::size_t ti = 0; ti < taus.size(); ++ti) {
                    double dir_sum = 0.0;
                    std::size_t dir_n = 0;
                    SweepPoint& point =
                        result.points[point_index(wi, ki, ti)];
                    for (std::size_t d = 0; d < dirs.size(); ++d) {
                        const auto [s, t] = dirs[d];
                        DirectionResult dr = crosslingual_run(
                            collections[s], &model, collections[t],
                            indexes[t], heldout, taus[ti], cfg.mu,
                            cfg.cutoff, cfg.aggregation);
                        EvalReport rep =
                            evaluate_run(run_from_rankings(dr.rankings),
                                         collections[t].qrels, universe);
                        if (rep.num_queries_evaluated == 0) continue;
                        dir_sum += rep.map;
                        ++dir_n;
                        auto& ap = cross_ap[point_index(wi, ki, ti)][f][d];
                        for (const auto& [qid, m] : rep.per_query) {
                            ap[qid] = m.ap;
                        }
                    }
                    if (dir_n > 0) {
                        point.per_fold_map[f] = dir_sum / double(dir_n);
                    }
                }
            }
        }
    }

    for (auto& p : result.points) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& v : p.per_fold_map) {
            if (v) {
                sum += *v;
                ++n;
            }
        }
        p.mean_map = n > 0 ? sum / double(n) : 0.0;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        if (result.points[i].mean_map > result.points[best].mean_map) {
            best = i;
        }
    }
    result.window = result.points[best].window;
    result.kappa = result.points[best].kappa;
    result.tau = result.points[best].tau;
    result.mean_map = result.points[best].mean_map;

    for (std::size_t d = 0; d < dirs.size(); ++d) {
        const auto [s, t] = dirs[d];
        DirectionSignificance ds;
        ds.source_lang = collections[s].lang;
        ds.target_lang = collections[t].lang;
        ds.tag = ds.source_lang + "->" + ds.target_lang;
        std::vector<double> pooled_a, pooled_b;
        for (std::size_t f = 0; f < result.folds.size(); ++f) {
            if (!fold_evaluable[f]) {
                ds.per_fold.push_back(std::nullopt);
                continue;
            }
            std::vector<double> a, b;
            for (const auto& [qid, ap] : cross_ap[best][f][d]) {
                auto it = mono_ap[f][t].find(qid);
                if (it == mono_ap[f][t].end()) continue;
                a.push_back(ap);
                b.push_back(it->second);
            }
            pooled_a.insert(pooled_a.end(), a.begin(), a.end());
            pooled_b.insert(pooled_b.end(), b.begin(), b.end());
            if (a.empty()) {
                ds.per_fold.push_back(std::nullopt);
                continue;
            }
            try {
                ds.per_fold.push_back(wilcoxon_signed_rank(a, b));
            } catch (const std::domain_error&) {
                ds.per_fold.push_back(std::nullopt);
            }
        }
        if (!pooled_a.empty()) {
            try {
                ds.pooled = wilcoxon_signed_rank(pooled_a, pooled_b);
            } catch (const std::domain_error&) {
                ds.pooled = std::nullopt;
            }
        }
        result.significance.push_back(std::move(ds));
    }
    return result;
}

struct PipelineDirection {
    DirectionResult run;
    bool monolingual = false;
    EvalReport eval;
    double generation_seconds = 0.0;
    double retrieval_seconds = 0.0;
    // Cross-lingual directions only: paired test against the target
    // language's monolingual baseline; nullopt when undefined.
    std::optional<SignificanceResult> vs_monolingual;
};

struct PipelineResult {
    std::vector<int> train_ids;
    std::vector<int> test_ids;
    std::vector<int> skipped_training_fusion;
    std::vector<int> skipped_test_fusion;
    std::size_t fused_training_docs = 0;
    std::size_t fused_test_docs = 0;
    std::size_t model_vocab = 0;
    TimingReport timing;
    std::vector<PipelineDirection> directions;  // grouped by target language
};

namespace harness_detail {

inline std::string direction_basename(const DirectionResult& dr) {
    return dr.source_lang + "-to-" + dr.target_lang;
}

inline nlohmann::json significance_json(const SignificanceResult& s) {
    return {{"statistic", s.statistic},
            {"p_value", s.p_value},
            {"n_pairs_nonzero", s.n_pairs_nonzero}};
}

inline nlohmann::json report_json(const ExperimentConfig& cfg,
                                  const PipelineResult& result) {
    nlohmann::json j;
    j["config"] = {
        {"languages", cfg.languages},
        {"dim", cfg.train.dim},
        {"learning_rate", cfg.train.learning_rate},
        {"min_count", cfg.train.min_count},
        {"window", cfg.train.window},
        {"negatives", cfg.train.negatives},
        {"epochs", cfg.train.epochs},
        {"kappa", cfg.kappa},
        {"tau", cfg.tau},
        {"mu", cfg.mu},
        {"cutoff", cfg.cutoff},
        {"test_query_count", cfg.test_query_count},
        {"folds", cfg.folds},
        {"seed", cfg.seed},
        {"aggregation", cfg.aggregation == QueryAggregation::per_term
                            ? "per_term"
                            : "centroid"},
    };
    j["split"] = {{"train_query_ids", result.train_ids},
                  {"test_query_ids", result.test_ids}};
    j["fusion"] = {
        {"training_docs", result.fused_training_docs},
        {"test_docs", result.fused_test_docs},
        {"skipped_training_query_ids", result.skipped_training_fusion},
        {"skipped_test_query_ids", result.skipped_test_fusion}};
    j["model"] = {{"vocab_size", result.model_vocab}};
    j["directions"] = nlohmann::json::array();
    for (const auto& dir : result.directions) {
        nlohmann::json d;
        d["source"] = dir.run.source_lang;
        d["target"] = dir.run.target_lang;
        d["tag"] = dir.run.tag;
        d["monolingual"] = dir.monolingual;
        d["map"] = dir.eval.map;
        d["r_prec"] = dir.eval.mean_r_prec;
        d["bpref"] = dir.eval.mean_bpref;
        d["queries_evaluated"] = dir.eval.num_queries_evaluated;
        nlohmann::json per_query;
        for (const auto& [qid, m] : dir.eval.per_query) {
            per_query[std::to_string(qid)] = {
                {"ap", m.ap}, {"r_prec", m.r_prec}, {"bpref", m.bpref}};
        }
        d["per_query"] = std::move(per_query);
        std::vector<int> failures;
        for (const auto& gq : dir.run.generated) {
            if (gq.failed()) failures.push_back(gq.query_id);
        }
        d["generated_query_failures"] = failures;
        if (dir.vs_monolingual) {
            d["wilcoxon_vs_monolingual"] =
                significance_json(*dir.vs_monolingual);
        } else {
            d["wilcoxon_vs_monolingual"] = nullptr;
        }
        j["directions"].push_back(std::move(d));
    }
    return j;
}

inline void write_report_text(std::ostream& out,
                              const PipelineResult& result) {
    out << "direction\tqueries\tMAP\tR-Prec\tBPref\tp_vs_monolingual\n";
    char buf[160];
    for (const auto& dir : result.directions) {
        std::string p = "-";
        if (dir.vs_monolingual) {
            std::snprintf(buf, sizeof(buf), "%.6g",
                          dir.vs_monolingual->p_value);
            p = buf;
        }
        std::snprintf(buf, sizeof(buf), "%s\t%zu\t%.6f\t%.6f\t%.6f\t%s\n",
                      dir.run.tag.c_str(), dir.eval.num_queries_evaluated,
                      dir.eval.map, dir.eval.mean_r_prec,
                      dir.eval.mean_bpref, p.c_str());
        out << buf;
    }
}

inline void write_pipeline_timing(std::ostream& out,
                                  const PipelineResult& result) {
    write_timing(out, result.timing);
    const double shared = result.timing.indexing_seconds +
                          result.timing.fusion_seconds +
                          result.timing.training_seconds;
    char buf[64];
    auto row = [&](const std::string& entry, double s) {
        std::snprintf(buf, sizeof(buf), "%.6f", s);
        out << entry << '\t' << buf << '\n';
    };
    for (const auto& dir : result.directions) {
        if (!dir.monolingual) {
            row(dir.run.tag + ":query_generation", dir.generation_seconds);
        }
        row(dir.run.tag + ":pre_retrieval",
            shared + dir.generation_seconds);
        row(dir.run.tag + ":retrieval", dir.retrieval_seconds);
    }
}

inline void write_pipeline_outputs(const ExperimentConfig& cfg,
                                   const PipelineResult& result,
                                   const EmbeddingModel& model,
                                   const FusedCorpus& corpus) {
    namespace fs = std::filesystem;
    const std::string dir = cfg.run_dir;
    fs::create_directories(dir + "/runs");
    fs::create_directories(dir + "/reports");
    fs::create_directories(dir + "/gentopics");
    {
        auto out = open_out(dir + "/fused.txt");
        write_fused_corpus(out, corpus);
    }
    {
        auto out = open_out(dir + "/model.bin");
        save_model(out, model);
    }
    {
        auto out = open_out(dir + "/model.txt");
        write_text_embeddings(out, model);
    }
    for (const auto& d : result.directions) {
        const std::string base = direction_basename(d.run);
        {
            auto out = open_out(dir + "/runs/" + base + ".run");
            write_run(out, d.run);
        }
        {
            auto out = open_out(dir + "/reports/" + base + ".eval.txt");
            write_eval_text(out, d.eval);
        }
        if (!d.monolingual) {
            auto out =
                open_out(dir + "/gentopics/" + base + ".topics.trec");
            write_generated_topics(out, d.run.generated);
        }
    }
    {
        auto out = open_out(dir + "/report.json");
        out << report_json(cfg, result).dump(2) << '\n';
    }
    {
        auto out = open_out(dir + "/report.txt");
        write_report_text(out, result);
    }
    {
        auto out = open_out(dir + "/timing.tsv");
        write_pipeline_timing(out, result);
    }
}

}  // namespace harness_detail

/// End-to-end experiment over pre-loaded collections: split queries, index
/// every language (timed), fuse training + test corpora (timed), train the
/// embedding (timed), then for every ordered (source, target) pair generate
/// queries (timed, pre-retrieval) and retrieve (timed, retrieval), plus one
/// monolingual baseline per language; evaluate everything against true
/// qrels over the test split. When cfg.run_dir is set, writes run files,
/// model (binary + text), fused corpus, reports (per-direction tables, a
/// summary table, JSON) and the two-phase timing table. All content output
/// is deterministic in (config, seed); only timing values vary.
inline PipelineResult run_pipeline(
    const std::vector<TestCollection>& collections,
    const ExperimentConfig& cfg) {
    using harness_detail::stage;
    cfg.validate();
    if (collections.size() != cfg.languages.size()) {
        throw std::invalid_argument(
            "collection list must match the configured languages");
    }
    for (std::size_t i = 0; i < collections.size(); ++i) {
        if (collections[i].lang != cfg.languages[i]) {
            throw std::invalid_argument(
                "collection order must match the configured languages");
        }
    }
    std::vector<const TestCollection*> cols;
    for (const auto& c : collections) cols.push_back(&c);

    PipelineResult result;
    const QuerySplit split = stage("split", [&] {
        const std::vector<int> shared = validate_query_alignment(collections);
        return split_queries(shared, cfg.test_query_count, cfg.seed);
    });
    result.train_ids = split.train_ids;
    result.test_ids = split.test_ids;

    TimingAccumulator index_acc;
    const std::vector<InvertedIndex> indexes = stage("indexing", [&] {
        return timed(&index_acc, [&] {
            std::vector<InvertedIndex> out;
            out.reserve(collections.size());
            for (const auto& c : collections) {
                out.push_back(build_index(c.documents));
            }
            return out;
        });
    });
    std::vector<const InvertedIndex*> idx;
    for (const auto& ix : indexes) idx.push_back(&ix);

    TimingAccumulator fusion_acc;
    const FusedCorpus corpus = stage("fusion", [&] {
        return timed(&fusion_acc, [&] {
            FusedCorpus fc;
            FusionResult training = build_training_fusion(
                cols, split.train_ids, mix_seed(cfg.seed, 0xA1));
            FusionResult test =
                build_test_fusion(cols, idx, split.test_ids, cfg.kappa,
                                  cfg.mu, mix_seed(cfg.seed, 0xA2));
            result.skipped_training_fusion =
                std::move(training.skipped_query_ids);
            result.skipped_test_fusion = std::move(test.skipped_query_ids);
            fc.training = std::move(training.docs);
            fc.test = std::move(test.docs);
            return fc;
        });
    });
    result.fused_training_docs = corpus.training.size();
    result.fused_test_docs = corpus.test.size();

    TimingAccumulator train_acc;
    const EmbeddingModel model = stage("training", [&] {
        return timed(&train_acc, [&] {
            TrainConfig tc = cfg.train;
            tc.seed = mix_seed(cfg.seed, 0xA3);
            return train(corpus.all(), tc);
        });
    });
    result.model_vocab = model.vocab_size();

    // Directions grouped by target: every cross-lingual source in language
    // order, then the target's own monolingual baseline.
    const std::set<int> universe(split.test_ids.begin(),
                                 split.test_ids.end());
    for (std::size_t t = 0; t < collections.size(); ++t) {
        std::vector<std::size_t> sources;
        for (std::size_t s = 0; s < collections.size(); ++s) {
            if (s != t) sources.push_back(s);
        }
        sources.push_back(t);  // monolingual last within the group
        for (std::size_t s : sources) {
            PipelineDirection dir;
            dir.monolingual = s == t;
            TimingAccumulator gen_acc, ret_acc;
            const std::string name = collections[s].lang + "->" +
                                     collections[t].lang;
            dir.run = stage("retrieval (" + name + ")", [&] {
                return crosslingual_run(collections[s], &model,
                                        collections[t], indexes[t],
                                        split.test_ids, cfg.tau, cfg.mu,
                                        cfg.cutoff, cfg.aggregation,
                                        &gen_acc, &ret_acc);
            });
            dir.generation_seconds = gen_acc.seconds();
            dir.retrieval_seconds = ret_acc.seconds();
            dir.eval = stage("evaluation", [&] {
                return evaluate_run(run_from_rankings(dir.run.rankings),
                                    collections[t].qrels, universe);
            });
            result.directions.push_back(std::move(dir));
        }
    }

    stage("evaluation", [&] {
        for (auto& dir : result.directions) {
            if (dir.monolingual) continue;
            const PipelineDirection* mono = nullptr;
            for (const auto& other : result.directions) {
                if (other.monolingual &&
                    other.run.target_lang == dir.run.target_lang) {
                    mono = &other;
                }
            }
            if (mono == nullptr) continue;
            std::vector<double> a, b;
            for (const auto& [qid, m] : dir.eval.per_query) {
                auto it = mono->eval.per_query.find(qid);
                if (it == mono->eval.per_query.end()) continue;
                a.push_back(m.ap);
                b.push_back(it->second.ap);
            }
            if (a.empty()) continue;
            try {
                dir.vs_monolingual = wilcoxon_signed_rank(a, b);
            } catch (const std::domain_error&) {
                dir.vs_monolingual = std::nullopt;
            }
        }
    });

    result.timing.indexing_seconds = index_acc.seconds();
    result.timing.fusion_seconds = fusion_acc.seconds();
    result.timing.training_seconds = train_acc.seconds();
    double gen = 0.0, ret = 0.0;
    for (const auto& dir : result.directions) {
        gen += dir.generation_seconds;
        ret += dir.retrieval_seconds;
    }
    result.timing.query_generation_seconds = gen;
    result.timing.retrieval_seconds = ret;

    if (!cfg.run_dir.empty()) {
        stage("report", [&] {
            harness_detail::write_pipeline_outputs(cfg, result, model,
                                                   corpus);
        });
    }
    return result;
}

/// Convenience overload: loads the collections from the configured paths
/// first (the ingest stage), then runs the pipeline.
inline PipelineResult run_pipeline(const ExperimentConfig& cfg) {
    const std::vector<TestCollection> collections =
        harness_detail::stage("ingest", [&] { return load_experiment(cfg); });
    return run_pipeline(collections, cfg);
}

inline nlohmann::json sweep_json(const SweepResult& result) {
    nlohmann::json j;
    j["best"] = {{"window", result.window},
                 {"kappa", result.kappa},
                 {"tau", result.tau},
                 {"mean_map", result.mean_map}};
    j["skipped_folds"] = result.skipped_folds;
    j["folds"] = result.folds;
    j["points"] = nlohmann::json::array();
    for (const auto& p : result.points) {
        nlohmann::json pj;
        pj["window"] = p.window;
        pj["kappa"] = p.kappa;
        pj["tau"] = p.tau;
        pj["mean_map"] = p.mean_map;
        pj["per_fold_map"] = nlohmann::json::array();
        for (const auto& v : p.per_fold_map) {
            if (v) {
                pj["per_fold_map"].push_back(*v);
            } else {
                pj["per_fold_map"].push_back(nullptr);
            }
        }
        j["points"].push_back(std::move(pj));
    }
    j["significance"] = nlohmann::json::array();
    for (const auto& ds : result.significance) {
        nlohmann::json dj;
        dj["tag"] = ds.tag;
        dj["per_fold"] = nlohmann::json::array();
        for (const auto& s : ds.per_fold) {
            if (s) {
                dj["per_fold"].push_back(
                    harness_detail::significance_json(*s));
            } else {
                dj["per_fold"].push_back(nullptr);
            }
        }
        if (ds.pooled) {
            dj["pooled"] = harness_detail::significance_json(*ds.pooled);
        } else {
            dj["pooled"] = nullptr;
        }
        j["significance"].push_back(std::move(dj));
    }
    return j;
}

inline void write_sweep_text(std::ostream& out, const SweepResult& result) {
    char buf[160];
    out << "window\tkappa\ttau\tmean_map\n";
    for (const auto& p : result.points) {
        std::snprintf(buf, sizeof(buf), "%zu\t%zu\t%zu\t%.6f\n", p.window,
                      p.kappa, p.tau, p.mean_map);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "best\t%zu\t%zu\t%zu\t%.6f\n",
                  result.window, result.kappa, result.tau, result.mean_map);
    out << buf;
}

}  // namespace clir
