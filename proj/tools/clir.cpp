// Command-line interface for the cross-lingual retrieval toolkit. Every
// subcommand reads its options from flags or from a config file given with
// --config (flags win); --seed is global.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clir/corpus.hpp"
#include "clir/embedding.hpp"
#include "clir/eval.hpp"
#include "clir/fusion.hpp"
#include "clir/harness.hpp"
#include "clir/index.hpp"
#include "clir/synth.hpp"
#include "clir/timing.hpp"
#include "clir/xquery.hpp"

namespace {

using namespace clir;

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

QueryAggregation parse_aggregation(const std::string& name) {
    if (name == "per_term") return QueryAggregation::per_term;
    if (name == "centroid") return QueryAggregation::centroid;
    throw std::runtime_error("unknown aggregation: " + name);
}

struct CollectionArgs {
    std::vector<std::string> langs;
    std::vector<std::string> docs;
    std::vector<std::string> topics;
    std::vector<std::string> qrels;
    std::vector<std::string> stopwords;
};

void add_collection_options(CLI::App* cmd, CollectionArgs& args) {
    cmd->add_option("--lang", args.langs, "Language ids, in order")
        ->required();
    cmd->add_option("--docs", args.docs, "TREC document file per language")
        ->required();
    cmd->add_option("--topics", args.topics, "TREC topics file per language")
        ->required();
    cmd->add_option("--qrels", args.qrels, "Qrels file per language")
        ->required();
    cmd->add_option("--stopwords", args.stopwords,
                    "Stopword list per language (optional)");
}

std::vector<TestCollection> load_collections(const CollectionArgs& args) {
    if (args.docs.size() != args.langs.size() ||
        args.topics.size() != args.langs.size() ||
        args.qrels.size() != args.langs.size()) {
        throw std::runtime_error(
            "--docs/--topics/--qrels must each have one value per --lang");
    }
    if (!args.stopwords.empty() &&
        args.stopwords.size() != args.langs.size()) {
        throw std::runtime_error(
            "--stopwords must be empty or have one value per --lang");
    }
    std::vector<TestCollection> out;
    for (std::size_t i = 0; i < args.langs.size(); ++i) {
        std::string stop =
            args.stopwords.empty() ? std::string() : args.stopwords[i];
        out.push_back(load_test_collection(args.langs[i], args.docs[i],
                                           args.topics[i], args.qrels[i],
                                           stop));
    }
    return out;
}

void add_train_options(CLI::App* cmd, TrainConfig& train) {
    cmd->add_option("--dim", train.dim, "Embedding dimensionality");
    cmd->add_option("--learning-rate", train.learning_rate,
                    "Initial learning rate");
    cmd->add_option("--min-count", train.min_count,
                    "Minimum token frequency kept in the vocabulary");
    cmd->add_option("--window", train.window, "Maximum context window");
    cmd->add_option("--negatives", train.negatives,
                    "Negative samples per context pair");
    cmd->add_option("--epochs", train.epochs, "Training epochs");
}

void add_experiment_options(CLI::App* cmd, ExperimentConfig& cfg,
                            CollectionArgs& paths, std::string& aggregation) {
    add_collection_options(cmd, paths);
    add_train_options(cmd, cfg.train);
    cmd->add_option("--kappa", cfg.kappa,
                    "Pseudo-relevant documents per test query");
    cmd->add_option("--tau", cfg.tau, "Generated terms per source term");
    cmd->add_option("--mu", cfg.mu, "Dirichlet smoothing parameter");
    cmd->add_option("--cutoff", cfg.cutoff, "Ranked-list depth");
    cmd->add_option("--test-count", cfg.test_query_count,
                    "Queries held out for testing");
    cmd->add_option("--folds", cfg.folds, "Cross-validation folds");
    cmd->add_option("--aggregation", aggregation,
                    "Query generation mode: per_term or centroid")
        ->check(CLI::IsMember({"per_term", "centroid"}));
}

void finalize_experiment(ExperimentConfig& cfg, const CollectionArgs& paths,
                         const std::string& aggregation, std::uint64_t seed) {
    cfg.languages = paths.langs;
    cfg.docs_paths = paths.docs;
    cfg.topics_paths = paths.topics;
    cfg.qrels_paths = paths.qrels;
    cfg.stopword_paths = paths.stopwords;
    cfg.aggregation = parse_aggregation(aggregation);
    cfg.seed = seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clir: multilingual fused-document retrieval toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "",
                   "Config file; sections name subcommands, flags override");
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Master random seed (global)");

    // ---- ingest ----------------------------------------------------------
    auto* ingest = app.add_subcommand(
        "ingest", "Parse and validate collections; print statistics");
    auto ingest_args = std::make_shared<CollectionArgs>();
    auto ingest_json = std::make_shared<std::string>();
    add_collection_options(ingest, *ingest_args);
    ingest->add_option("--json", *ingest_json,
                       "Also write the statistics as JSON");
    ingest->callback([ingest_args, ingest_json] {
        std::vector<TestCollection> cols = load_collections(*ingest_args);
        nlohmann::json j;
        for (const auto& col : cols) {
            std::size_t judged = col.qrels.size();
            std::cout << col.lang << ": " << col.documents.size()
                      << " documents, " << col.total_tokens << " tokens, "
                      << col.vocabulary.size() << " distinct terms, "
                      << col.queries.size() << " queries, " << judged
                      << " judgments\n";
            j["collections"][col.lang] = {
                {"documents", col.documents.size()},
                {"tokens", col.total_tokens},
                {"distinct_terms", col.vocabulary.size()},
                {"queries", col.queries.size()},
                {"judgments", judged}};
        }
        std::vector<int> shared = validate_query_alignment(cols);
        std::cout << "aligned query ids: " << shared.size() << "\n";
        j["aligned_query_ids"] = shared;
        if (!ingest_json->empty()) {
            auto out = open_out(*ingest_json);
            out << j.dump(2) << '\n';
        }
    });

    // ---- index -----------------------------------------------------------
    auto* index_cmd = app.add_subcommand(
        "index", "Build an inverted index and print statistics");
    auto index_docs = std::make_shared<std::string>();
    auto index_lang = std::make_shared<std::string>("xx");
    auto index_stop = std::make_shared<std::string>();
    index_cmd->add_option("--docs", *index_docs, "TREC document file")
        ->required();
    index_cmd->add_option("--lang", *index_lang, "Language id");
    index_cmd->add_option("--stopwords", *index_stop, "Stopword list");
    index_cmd->callback([index_docs, index_lang, index_stop] {
        StopwordSet stop = load_stopwords_file(*index_stop);
        auto in = open_in(*index_docs);
        std::vector<Document> docs =
            parse_trec_documents(in, *index_lang, stop);
        TimingAccumulator acc;
        InvertedIndex index =
            timed(&acc, [&] { return build_index(docs); });
        std::set<std::string> terms;
        for (const auto& d : docs) {
            terms.insert(d.tokens.begin(), d.tokens.end());
        }
        std::cout << "documents: " << index.num_documents() << "\n"
                  << "tokens: " << index.total_tokens() << "\n"
                  << "distinct terms: " << terms.size() << "\n"
                  << "indexing_seconds: " << acc.seconds() << "\n";
    });

    // ---- fuse ------------------------------------------------------------
    auto* fuse = app.add_subcommand(
        "fuse", "Build the interleaved multilingual fused corpus");
    auto fuse_args = std::make_shared<CollectionArgs>();
    auto fuse_out = std::make_shared<std::string>();
    auto fuse_train_ids = std::make_shared<std::vector<int>>();
    auto fuse_test_ids = std::make_shared<std::vector<int>>();
    auto fuse_kappa = std::make_shared<std::size_t>(10);
    auto fuse_mu = std::make_shared<double>(2500.0);
    add_collection_options(fuse, *fuse_args);
    fuse->add_option("--out", *fuse_out, "Fused corpus output file")
        ->required();
    fuse->add_option("--train-queries", *fuse_train_ids,
                     "Training query ids (default: all aligned ids)");
    fuse->add_option("--test-queries", *fuse_test_ids,
                     "Test query ids fused by pseudo-relevance");
    fuse->add_option("--kappa", *fuse_kappa,
                     "Pseudo-relevant documents per test query");
    fuse->add_option("--mu", *fuse_mu, "Dirichlet smoothing parameter");
    fuse->callback([fuse_args, fuse_out, fuse_train_ids, fuse_test_ids,
                    fuse_kappa, fuse_mu, &seed] {
        std::vector<TestCollection> cols = load_collections(*fuse_args);
        std::vector<const TestCollection*> ptrs;
        for (const auto& c : cols) ptrs.push_back(&c);
        std::vector<int> train_ids = *fuse_train_ids;
        if (train_ids.empty() && fuse_test_ids->empty()) {
            train_ids = validate_query_alignment(cols);
        }
        FusedCorpus corpus;
        FusionResult training = build_training_fusion(
            ptrs, train_ids, mix_seed(seed, 0xA1));
        corpus.training = std::move(training.docs);
        FusionResult test;
        if (!fuse_test_ids->empty()) {
            std::vector<InvertedIndex> indexes;
            std::vector<const InvertedIndex*> idx;
            indexes.reserve(cols.size());
            for (const auto& c : cols) {
                indexes.push_back(build_index(c.documents));
            }
            for (const auto& ix : indexes) idx.push_back(&ix);
            test = build_test_fusion(ptrs, idx, *fuse_test_ids, *fuse_kappa,
                                     *fuse_mu, mix_seed(seed, 0xA2));
            corpus.test = std::move(test.docs);
        }
        auto out = open_out(*fuse_out);
        write_fused_corpus(out, corpus);
        std::cout << "fused training documents: " << corpus.training.size()
                  << "\nfused test documents: " << corpus.test.size() << "\n";
        auto print_skipped = [](const char* what,
                                const std::vector<int>& ids) {
            if (ids.empty()) return;
            std::cout << "skipped " << what << " queries:";
            for (int id : ids) std::cout << ' ' << id;
            std::cout << "\n";
        };
        print_skipped("training", training.skipped_query_ids);
        print_skipped("test", test.skipped_query_ids);
    });

    // ---- train -----------------------------------------------------------
    auto* train_cmd = app.add_subcommand(
        "train", "Train embeddings on a fused corpus");
    auto train_corpus = std::make_shared<std::string>();
    auto train_out = std::make_shared<std::string>();
    auto train_text = std::make_shared<std::string>();
    auto train_cfg = std::make_shared<TrainConfig>();
    train_cmd->add_option("--corpus", *train_corpus, "Fused corpus file")
        ->required();
    train_cmd->add_option("--out", *train_out, "Binary model output")
        ->required();
    train_cmd->add_option("--text-out", *train_text,
                          "Optional text embeddings output");
    add_train_options(train_cmd, *train_cfg);
    train_cmd->callback([train_corpus, train_out, train_text, train_cfg,
                         &seed] {
        auto in = open_in(*train_corpus);
        std::vector<std::vector<TaggedToken>> sentences =
            read_fused_corpus(in);
        TrainConfig cfg = *train_cfg;
        cfg.seed = seed;
        TimingAccumulator acc;
        EmbeddingModel model =
            timed(&acc, [&] { return train(sentences, cfg); });
        {
            auto out = open_out(*train_out);
            save_model(out, model);
        }
        if (!train_text->empty()) {
            auto out = open_out(*train_text);
            write_text_embeddings(out, model);
        }
        std::cout << "sentences: " << sentences.size() << "\n"
                  << "vocabulary: " << model.vocab_size() << "\n"
                  << "training_seconds: " << acc.seconds() << "\n";
    });

    // ---- genquery --------------------------------------------------------
    auto* genquery = app.add_subcommand(
        "genquery", "Generate target-language queries through the model");
    auto gen_model = std::make_shared<std::string>();
    auto gen_topics = std::make_shared<std::string>();
    auto gen_source = std::make_shared<std::string>();
    auto gen_target = std::make_shared<std::string>();
    auto gen_stop = std::make_shared<std::string>();
    auto gen_out = std::make_shared<std::string>();
    auto gen_prov = std::make_shared<std::string>();
    auto gen_tau = std::make_shared<std::size_t>(10);
    auto gen_agg = std::make_shared<std::string>("per_term");
    genquery->add_option("--model", *gen_model, "Binary model file")
        ->required();
    genquery->add_option("--topics", *gen_topics,
                         "Source-language TREC topics file")
        ->required();
    genquery->add_option("--source-lang", *gen_source, "Source language id")
        ->required();
    genquery->add_option("--target-lang", *gen_target, "Target language id")
        ->required();
    genquery->add_option("--stopwords", *gen_stop,
                         "Source-language stopword list");
    genquery->add_option("--out", *gen_out, "Generated topics output file")
        ->required();
    genquery->add_option("--provenance", *gen_prov,
                         "Optional TSV of term-level provenance");
    genquery->add_option("--tau", *gen_tau,
                         "Generated terms per source term");
    genquery->add_option("--aggregation", *gen_agg,
                         "per_term or centroid")
        ->check(CLI::IsMember({"per_term", "centroid"}));
    genquery->callback([gen_model, gen_topics, gen_source, gen_target,
                        gen_stop, gen_out, gen_prov, gen_tau, gen_agg] {
        EmbeddingModel model = [&] {
            auto in = open_in(*gen_model);
            return load_model(in);
        }();
        StopwordSet stop = load_stopwords_file(*gen_stop);
        auto topics_in = open_in(*gen_topics);
        std::vector<Query> queries =
            parse_topics(topics_in, *gen_source, stop);
        QueryAggregation agg = parse_aggregation(*gen_agg);
        TimingAccumulator acc;
        std::vector<GeneratedQuery> generated;
        for (const auto& q : queries) {
            generated.push_back(timed(&acc, [&] {
                return generate_query(model, q, *gen_target, *gen_tau, agg);
            }));
        }
        {
            auto out = open_out(*gen_out);
            write_generated_topics(out, generated);
        }
        if (!gen_prov->empty()) {
            auto out = open_out(*gen_prov);
            out << "query_id\tsource_term\tgenerated_term\tsimilarity\n";
            char buf[64];
            for (const auto& gq : generated) {
                for (const auto& p : gq.provenance) {
                    std::snprintf(buf, sizeof(buf), "%.6f", p.similarity);
                    out << gq.query_id << '\t' << p.source_term << '\t'
                        << p.generated_term << '\t' << buf << '\n';
                }
            }
        }
        std::size_t failed = 0;
        for (const auto& gq : generated) {
            if (gq.failed()) ++failed;
        }
        std::cout << "queries: " << generated.size() << "\n"
                  << "failed (all terms out of vocabulary): " << failed
                  << "\n"
                  << "generation_seconds: " << acc.seconds() << "\n";
    });

    // ---- retrieve --------------------------------------------------------
    auto* retrieve_cmd = app.add_subcommand(
        "retrieve", "Rank documents for topics with Dirichlet-smoothed QL");
    auto ret_docs = std::make_shared<std::string>();
    auto ret_lang = std::make_shared<std::string>();
    auto ret_topics = std::make_shared<std::string>();
    auto ret_stop = std::make_shared<std::string>();
    auto ret_out = std::make_shared<std::string>();
    auto ret_tag = std::make_shared<std::string>("clir");
    auto ret_mu = std::make_shared<double>(2500.0);
    auto ret_cutoff = std::make_shared<std::size_t>(1000);
    auto ret_queries = std::make_shared<std::vector<int>>();
    retrieve_cmd->add_option("--docs", *ret_docs, "TREC document file")
        ->required();
    retrieve_cmd->add_option("--lang", *ret_lang, "Language id")->required();
    retrieve_cmd->add_option("--topics", *ret_topics, "TREC topics file")
        ->required();
    retrieve_cmd->add_option("--stopwords", *ret_stop, "Stopword list");
    retrieve_cmd->add_option("--out", *ret_out, "Run file output")
        ->required();
    retrieve_cmd->add_option("--tag", *ret_tag, "Run tag column");
    retrieve_cmd->add_option("--mu", *ret_mu, "Dirichlet smoothing");
    retrieve_cmd->add_option("--cutoff", *ret_cutoff, "Ranked-list depth");
    retrieve_cmd->add_option("--queries", *ret_queries,
                             "Restrict to these query ids");
    retrieve_cmd->callback([ret_docs, ret_lang, ret_topics, ret_stop,
                            ret_out, ret_tag, ret_mu, ret_cutoff,
                            ret_queries] {
        StopwordSet stop = load_stopwords_file(*ret_stop);
        auto docs_in = open_in(*ret_docs);
        std::vector<Document> docs =
            parse_trec_documents(docs_in, *ret_lang, stop);
        InvertedIndex index = build_index(docs);
        auto topics_in = open_in(*ret_topics);
        std::vector<Query> queries =
            parse_topics(topics_in, *ret_lang, stop);
        std::set<int> wanted(ret_queries->begin(), ret_queries->end());
        TimingAccumulator acc;
        auto out = open_out(*ret_out);
        std::size_t n = 0;
        for (const auto& q : queries) {
            if (!wanted.empty() && !wanted.count(q.query_id)) continue;
            RankedList ranked =
                retrieve(index, q.title_tokens, *ret_mu, *ret_cutoff, &acc);
            write_run(out, q.query_id, ranked, *ret_tag);
            ++n;
        }
        std::cout << "queries run: " << n << "\n"
                  << "retrieval_seconds: " << acc.seconds() << "\n";
    });

    // ---- evaluate --------------------------------------------------------
    auto* evaluate_cmd = app.add_subcommand(
        "evaluate", "Score a run against qrels (MAP, R-Prec, BPref)");
    auto eval_run = std::make_shared<std::string>();
    auto eval_qrels = std::make_shared<std::string>();
    auto eval_out = std::make_shared<std::string>();
    auto eval_json = std::make_shared<std::string>();
    auto eval_baseline = std::make_shared<std::string>();
    evaluate_cmd->add_option("--run", *eval_run, "Run file")->required();
    evaluate_cmd->add_option("--qrels", *eval_qrels, "Qrels file")
        ->required();
    evaluate_cmd->add_option("--out", *eval_out,
                             "Text report output (default: stdout)");
    evaluate_cmd->add_option("--json", *eval_json, "JSON report output");
    evaluate_cmd->add_option(
        "--baseline-run", *eval_baseline,
        "Second run; adds a Wilcoxon signed-rank test on per-query AP");
    evaluate_cmd->callback([eval_run, eval_qrels, eval_out, eval_json,
                            eval_baseline] {
        auto run_in = open_in(*eval_run);
        auto run = parse_run(run_in);
        auto qrels_in = open_in(*eval_qrels);
        Qrels qrels = parse_qrels(qrels_in);
        EvalReport report = evaluate_run(run, qrels);
        std::optional<SignificanceResult> sig;
        bool sig_degenerate = false;
        if (!eval_baseline->empty()) {
            auto base_in = open_in(*eval_baseline);
            EvalReport base = evaluate_run(parse_run(base_in), qrels);
            std::vector<double> a, b;
            for (const auto& [qid, m] : report.per_query) {
                auto it = base.per_query.find(qid);
                if (it == base.per_query.end()) continue;
                a.push_back(m.ap);
                b.push_back(it->second.ap);
            }
            try {
                sig = wilcoxon_signed_rank(a, b);
            } catch (const std::domain_error&) {
                sig_degenerate = true;
            }
        }
        auto emit_text = [&](std::ostream& out) {
            write_eval_text(out, report);
            if (sig) {
                char buf[128];
                std::snprintf(buf, sizeof(buf),
                              "wilcoxon_vs_baseline\tW=%.6g\tp=%.6g\tn=%zu\n",
                              sig->statistic, sig->p_value,
                              sig->n_pairs_nonzero);
                out << buf;
            } else if (sig_degenerate) {
                out << "wilcoxon_vs_baseline\tundefined (all differences "
                       "zero)\n";
            }
        };
        if (eval_out->empty()) {
            emit_text(std::cout);
        } else {
            auto out = open_out(*eval_out);
            emit_text(out);
        }
        if (!eval_json->empty()) {
            nlohmann::json j;
            j["map"] = report.map;
            j["r_prec"] = report.mean_r_prec;
            j["bpref"] = report.mean_bpref;
            j["queries_evaluated"] = report.num_queries_evaluated;
            for (const auto& [qid, m] : report.per_query) {
                j["per_query"][std::to_string(qid)] = {
                    {"ap", m.ap},
                    {"r_prec", m.r_prec},
                    {"bpref", m.bpref}};
            }
            if (sig) {
                j["wilcoxon_vs_baseline"] = {
                    {"statistic", sig->statistic},
                    {"p_value", sig->p_value},
                    {"n_pairs_nonzero", sig->n_pairs_nonzero}};
            } else if (sig_degenerate) {
                j["wilcoxon_vs_baseline"] = nullptr;
            }
            auto out = open_out(*eval_json);
            out << j.dump(2) << '\n';
        }
    });

    // ---- sweep -----------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Cross-validated sweep over (window, kappa, tau)");
    auto sweep_cfg = std::make_shared<ExperimentConfig>();
    auto sweep_paths = std::make_shared<CollectionArgs>();
    auto sweep_agg = std::make_shared<std::string>("per_term");
    auto sweep_dir = std::make_shared<std::string>();
    add_experiment_options(sweep_cmd, *sweep_cfg, *sweep_paths, *sweep_agg);
    sweep_cmd->add_option("--window-grid", sweep_cfg->window_grid,
                          "Window sizes to sweep");
    sweep_cmd->add_option("--kappa-grid", sweep_cfg->kappa_grid,
                          "Kappa values to sweep");
    sweep_cmd->add_option("--tau-grid", sweep_cfg->tau_grid,
                          "Tau values to sweep");
    sweep_cmd->add_option("--run-dir", *sweep_dir,
                          "Directory for sweep.json and sweep.txt");
    sweep_cmd->callback([sweep_cfg, sweep_paths, sweep_agg, sweep_dir,
                         &seed] {
        ExperimentConfig cfg = *sweep_cfg;
        finalize_experiment(cfg, *sweep_paths, *sweep_agg, seed);
        std::vector<TestCollection> cols = load_experiment(cfg);
        SweepResult sweep = cross_validate(cols, cfg);
        write_sweep_text(std::cout, sweep);
        if (!sweep_dir->empty()) {
            std::filesystem::create_directories(*sweep_dir);
            {
                auto out = open_out(*sweep_dir + "/sweep.json");
                out << sweep_json(sweep).dump(2) << '\n';
            }
            {
                auto out = open_out(*sweep_dir + "/sweep.txt");
                write_sweep_text(out, sweep);
            }
        }
    });

    // ---- pipeline --------------------------------------------------------
    auto* pipeline_cmd = app.add_subcommand(
        "pipeline", "Run the full experiment end to end");
    auto pipe_cfg = std::make_shared<ExperimentConfig>();
    auto pipe_paths = std::make_shared<CollectionArgs>();
    auto pipe_agg = std::make_shared<std::string>("per_term");
    add_experiment_options(pipeline_cmd, *pipe_cfg, *pipe_paths, *pipe_agg);
    pipeline_cmd
        ->add_option("--run-dir", pipe_cfg->run_dir,
                     "Output directory (runs, model, reports, timing)")
        ->required();
    pipeline_cmd->callback([pipe_cfg, pipe_paths, pipe_agg, &seed] {
        ExperimentConfig cfg = *pipe_cfg;
        finalize_experiment(cfg, *pipe_paths, *pipe_agg, seed);
        PipelineResult result = run_pipeline(cfg);
        harness_detail::write_report_text(std::cout, result);
        std::cout << "outputs in: " << cfg.run_dir << "\n";
    });

    // ---- synth -----------------------------------------------------------
    auto* synth_cmd = app.add_subcommand(
        "synth", "Generate a synthetic aligned multilingual collection");
    auto synth_spec = std::make_shared<SyntheticSpec>();
    auto synth_dir = std::make_shared<std::string>();
    synth_cmd->add_option("--out", *synth_dir, "Output directory")
        ->required();
    synth_cmd->add_option("--languages", synth_spec->languages,
                          "Number of languages");
    synth_cmd->add_option("--topics", synth_spec->topics, "Number of topics");
    synth_cmd->add_option("--vocab-per-topic", synth_spec->vocab_per_topic,
                          "Topical vocabulary size per topic");
    synth_cmd->add_option("--docs-per-topic",
                          synth_spec->docs_per_topic_per_lang,
                          "Documents per topic per language");
    synth_cmd->add_option("--len-min", synth_spec->doc_len_min,
                          "Minimum document length");
    synth_cmd->add_option("--len-max", synth_spec->doc_len_max,
                          "Maximum document length");
    synth_cmd->add_option("--background-vocab",
                          synth_spec->background_vocab,
                          "Background (noise) vocabulary size");
    synth_cmd->add_option("--noise", synth_spec->noise_prob,
                          "Probability a token is background noise");
    synth_cmd->add_option("--query-terms", synth_spec->query_terms,
                          "Title terms per query");
    synth_cmd->add_option("--length-scale", synth_spec->length_scale,
                          "Per-language document length multiplier");
    synth_cmd->callback([synth_spec, synth_dir, &seed] {
        SyntheticResult result = generate_synthetic(*synth_spec, seed);
        SyntheticPaths paths = write_synthetic(result, *synth_dir);
        std::cout << "languages: " << result.collections.size() << "\n"
                  << "documents per language: "
                  << result.collections[0].documents.size() << "\n"
                  << "queries per language: "
                  << result.collections[0].queries.size() << "\n"
                  << "emitted tokens: " << result.emitted_tokens << "\n"
                  << "translation groups: " << result.translations.size()
                  << "\n";
        for (std::size_t i = 0; i < paths.docs.size(); ++i) {
            std::cout << "docs: " << paths.docs[i]
                      << "\ntopics: " << paths.topics[i]
                      << "\nqrels: " << paths.qrels[i] << "\n";
        }
        std::cout << "stopwords: " << paths.stopwords
                  << "\ntranslations: " << paths.translations << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
