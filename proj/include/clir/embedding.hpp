#pragma once

// Skip-gram negative-sampling embeddings over the fused corpus, plus
// language-restricted cosine nearest-neighbor lookup.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "clir/fusion.hpp"
#include "clir/rng.hpp"

namespace clir {

struct TrainConfig {
    std::size_t dim = 100;
    double learning_rate = 0.01;
    std::size_t min_count = 1;
    std::size_t window = 25;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    std::uint64_t seed = 0;

    void validate() const {
        if (dim < 1) throw std::invalid_argument("dim must be >= 1");
        if (!(learning_rate > 0.0)) {
            throw std::invalid_argument("learning_rate must be positive");
        }
        if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
        if (window < 1) throw std::invalid_argument("window must be >= 1");
        if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
        if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    }
};

namespace sgns {

/// One stochastic step for a (context, center) pair: the context's input
/// vector `x` is trained against the center's output vector (label 1) and
/// the sampled negatives' output vectors (label 0). All gradients are taken
/// at the pre-update values, so (post - pre) / lr is the exact analytic
/// gradient of
///   Σ_t  label_t · log σ(x·y_t) + (1 − label_t) · log σ(−x·y_t),
/// which is what the finite-difference check exercises.
template <typename Real>
void train_pair(Real* x, const std::vector<Real*>& ys,
                const std::vector<int>& labels, std::size_t dim, Real lr,
                std::vector<Real>& x_accum) {
    x_accum.assign(dim, Real(0));
    for (std::size_t t = 0; t < ys.size(); ++t) {
        Real* y = ys[t];
        Real f = Real(0);
        for (std::size_t i = 0; i < dim; ++i) f += x[i] * y[i];
        const Real sigma = Real(1) / (Real(1) + std::exp(-f));
        const Real g = (Real(labels[t]) - sigma) * lr;
        for (std::size_t i = 0; i < dim; ++i) x_accum[i] += g * y[i];
        for (std::size_t i = 0; i < dim; ++i) y[i] += g * x[i];
    }
    for (std::size_t i = 0; i < dim; ++i) x[i] += x_accum[i];
}

}  // namespace sgns

inline double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine: dimension mismatch");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += double(u[i]) * double(v[i]);
        nu += double(u[i]) * double(u[i]);
        nv += double(v[i]) * double(v[i]);
    }
    if (nu == 0.0 || nv == 0.0) {
        throw std::invalid_argument("cosine: zero vector");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

inline double cosine(const std::vector<double>& u,
                     const std::vector<double>& v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine: dimension mismatch");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw std::invalid_argument("cosine: zero vector");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

struct Neighbor {
    TaggedToken token;
    double similarity = 0.0;
};

class EmbeddingModel {
  public:
    std::size_t dim() const { return config_.dim; }
    std::size_t vocab_size() const { return vocab_.size(); }
    const TrainConfig& config() const { return config_; }
    const std::vector<TaggedToken>& vocab() const { return vocab_; }
    std::uint64_t count(std::uint32_t idx) const { return counts_[idx]; }

    std::optional<std::uint32_t> find(const TaggedToken& token) const {
        auto it = lookup_.find(to_string(token));
        return it == lookup_.end() ? std::nullopt
                                   : std::optional<std::uint32_t>(it->second);
    }

    std::span<const float> vector_at(std::uint32_t idx) const {
        return {vectors_.data() + std::size_t(idx) * config_.dim, config_.dim};
    }

    const std::map<LangId, std::vector<std::uint32_t>>& by_language() const {
        return by_lang_;
    }

    /// The tau highest-cosine vocabulary entries of the target language,
    /// sorted by similarity descending, ties by term ascending.
    std::vector<Neighbor> nearest_in_language(std::span<const float> query,
                                              const LangId& target,
                                              std::size_t tau) const {
        if (tau < 1) {
            throw std::invalid_argument("tau must be >= 1");
        }
        auto lang_it = by_lang_.find(target);
        if (lang_it == by_lang_.end() || lang_it->second.empty()) {
            throw std::invalid_argument(
                "no vocabulary entries for language '" + target + "'");
        }
        double qnorm = 0.0;
        for (float v : query) qnorm += double(v) * double(v);
        if (query.size() != config_.dim || qnorm == 0.0) {
            throw std::invalid_argument("query vector invalid for this model");
        }
        qnorm = std::sqrt(qnorm);
        std::vector<std::pair<double, std::uint32_t>> scored;
        scored.reserve(lang_it->second.size());
        for (std::uint32_t idx : lang_it->second) {
            if (norms_[idx] == 0.0) continue;  // untrained degenerate row
            std::span<const float> v = vector_at(idx);
            double dot = 0.0;
            for (std::size_t i = 0; i < config_.dim; ++i) {
                dot += double(query[i]) * double(v[i]);
            }
            scored.emplace_back(dot / (qnorm * norms_[idx]), idx);
        }
        std::sort(scored.begin(), scored.end(),
                  [&](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return vocab_[a.second].term < vocab_[b.second].term;
                  });
        if (scored.size() > tau) scored.resize(tau);
        std::vector<Neighbor> out;
        out.reserve(scored.size());
        for (const auto& [sim, idx] : scored) {
            out.push_back({vocab_[idx], sim});
        }
        return out;
    }

    friend EmbeddingModel train(
        const std::vector<std::vector<TaggedToken>>& sentences,
        const TrainConfig& cfg);
    friend EmbeddingModel load_model(std::istream& in);

  private:
    void finalize() {
        lookup_.clear();
        by_lang_.clear();
        norms_.assign(vocab_.size(), 0.0);
        for (std::uint32_t i = 0; i < vocab_.size(); ++i) {
            lookup_[to_string(vocab_[i])] = i;
            by_lang_[vocab_[i].lang].push_back(i);
            double n = 0.0;
            for (float v : vector_at(i)) n += double(v) * double(v);
            norms_[i] = std::sqrt(n);
        }
    }

    TrainConfig config_;
    std::vector<TaggedToken> vocab_;
    std::vector<std::uint64_t> counts_;
    std::vector<float> vectors_;  // row-major, vocab_size x dim
    std::map<std::string, std::uint32_t> lookup_;
    std::map<LangId, std::vector<std::uint32_t>> by_lang_;
    std::vector<double> norms_;
};

/// Single-worker skip-gram training with negative sampling. Deterministic
/// for a fixed config: vocabulary order, initialization, window draws and
/// negative draws are all derived from cfg.seed.
inline EmbeddingModel train(const std::vector<std::vector<TaggedToken>>& sentences,
                            const TrainConfig& cfg) {
    cfg.validate();
    if (sentences.empty()) {
        throw std::invalid_argument("train: empty corpus");
    }
    // Vocabulary: count tagged tokens, filter by min_count, order by
    // (count desc, serialized token asc) so the layout is reproducible.
    std::map<std::string, std::uint64_t> freq;
    for (const auto& sentence : sentences) {
        for (const auto& t : sentence) {
            ++freq[to_string(t)];
        }
    }
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    for (const auto& [key, count] : freq) {
        if (count >= cfg.min_count) {
            entries.emplace_back(key, count);
        }
    }
    if (entries.empty()) {
        throw std::invalid_argument(
            "train: vocabulary empty after min_count filtering");
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    EmbeddingModel model;
    model.config_ = cfg;
    std::map<std::string, std::uint32_t> lookup;
    for (std::uint32_t i = 0; i < entries.size(); ++i) {
        const std::string& key = entries[i].first;
        std::size_t colon = key.find(':');
        model.vocab_.push_back(
            {key.substr(0, colon), key.substr(colon + 1)});
        model.counts_.push_back(entries[i].second);
        lookup[key] = i;
    }
    const std::size_t vocab_size = model.vocab_.size();
    const std::size_t dim = cfg.dim;

    // Sentences as vocabulary indexes; sub-min_count tokens drop out.
    std::vector<std::vector<std::uint32_t>> encoded;
    encoded.reserve(sentences.size());
    std::uint64_t total_tokens = 0;
    for (const auto& sentence : sentences) {
        std::vector<std::uint32_t> row;
        row.reserve(sentence.size());
        for (const auto& t : sentence) {
            auto it = lookup.find(to_string(t));
            if (it != lookup.end()) {
                row.push_back(it->second);
            }
        }
        total_tokens += row.size();
        encoded.push_back(std::move(row));
    }

    // Negative-sampling distribution: unigram counts to the 0.75 power,
    // drawn by binary search over the cumulative mass.
    std::vector<double> cumulative(vocab_size);
    double mass = 0.0;
    for (std::size_t i = 0; i < vocab_size; ++i) {
        mass += std::pow(double(model.counts_[i]), 0.75);
        cumulative[i] = mass;
    }

    model.vectors_.assign(vocab_size * dim, 0.0f);
    std::vector<float> syn1(vocab_size * dim, 0.0f);
    SplitMix64 init_rng(mix_seed(cfg.seed, 1));
    for (auto& v : model.vectors_) {
        v = float((init_rng.real() - 0.5) / double(dim));
    }

    SplitMix64 rng(mix_seed(cfg.seed, 2));
    const double lr0 = cfg.learning_rate;
    const double lr_floor = lr0 * 1e-4;
    const double schedule_total =
        double(cfg.epochs) * double(total_tokens) + 1.0;
    std::uint64_t processed = 0;
    double lr = lr0;
    std::vector<float> x_accum(dim);
    std::vector<float*> ys;
    std::vector<int> labels;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& sentence : encoded) {
            // Learning rate decays linearly over all tokens of all epochs,
            // re-evaluated per sentence, never below the floor.
            lr = std::max(lr_floor,
                          lr0 * (1.0 - double(processed) / schedule_total));
            const std::size_t len = sentence.size();
            for (std::size_t pos = 0; pos < len; ++pos) {
                const std::uint32_t center = sentence[pos];
                const std::size_t halfwin = 1 + rng.bounded(cfg.window);
                const std::size_t lo = pos >= halfwin ? pos - halfwin : 0;
                const std::size_t hi = std::min(len - 1, pos + halfwin);
                for (std::size_t cpos = lo; cpos <= hi; ++cpos) {
                    if (cpos == pos) continue;
                    const std::uint32_t context = sentence[cpos];
                    ys.clear();
                    labels.clear();
                    ys.push_back(syn1.data() + std::size_t(center) * dim);
                    labels.push_back(1);
                    for (std::size_t k = 0; k < cfg.negatives; ++k) {
                        const double r = rng.real() * mass;
                        const std::size_t neg =
                            std::lower_bound(cumulative.begin(),
                                             cumulative.end(), r) -
                            cumulative.begin();
                        if (std::uint32_t(neg) == center) {
                            continue;  // never use the center as its own noise
                        }
                        ys.push_back(syn1.data() + neg * dim);
                        labels.push_back(0);
                    }
                    sgns::train_pair(
                        model.vectors_.data() + std::size_t(context) * dim,
                        ys, labels, dim, float(lr), x_accum);
                }
            }
            processed += len;
        }
    }
    model.finalize();
    return model;
}

inline EmbeddingModel train(const std::vector<const FusedDocument*>& corpus,
                            const TrainConfig& cfg) {
    std::vector<std::vector<TaggedToken>> sentences;
    sentences.reserve(corpus.size());
    for (const auto* doc : corpus) {
        sentences.push_back(doc->tokens);
    }
    return train(sentences, cfg);
}

namespace detail {

constexpr char kModelMagic[8] = {'C', 'L', 'I', 'R', 'E', 'M', 'B', '1'};

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        throw std::runtime_error("model file truncated");
    }
    return value;
}

}  // namespace detail

/// Binary model format: magic, dim, vocab size, config echo, then one
/// record per token (length-prefixed "lang:term", count, dim float32).
/// Host byte order (little-endian on every supported target).
inline void save_model(std::ostream& out, const EmbeddingModel& model) {
    out.write(detail::kModelMagic, sizeof(detail::kModelMagic));
    detail::put<std::uint32_t>(out, std::uint32_t(model.dim()));
    detail::put<std::uint64_t>(out, model.vocab_size());
    const TrainConfig& cfg = model.config();
    detail::put<double>(out, cfg.learning_rate);
    detail::put<std::uint32_t>(out, std::uint32_t(cfg.min_count));
    detail::put<std::uint32_t>(out, std::uint32_t(cfg.window));
    detail::put<std::uint32_t>(out, std::uint32_t(cfg.negatives));
    detail::put<std::uint32_t>(out, std::uint32_t(cfg.epochs));
    detail::put<std::uint64_t>(out, cfg.seed);
    for (std::uint32_t i = 0; i < model.vocab_size(); ++i) {
        const std::string key = to_string(model.vocab()[i]);
        detail::put<std::uint32_t>(out, std::uint32_t(key.size()));
        out.write(key.data(), std::streamsize(key.size()));
        detail::put<std::uint64_t>(out, model.count(i));
        std::span<const float> v = model.vector_at(i);
        out.write(reinterpret_cast<const char*>(v.data()),
                  std::streamsize(v.size() * sizeof(float)));
    }
}

inline EmbeddingModel load_model(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, detail::kModelMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not a model file (bad magic)");
    }
    EmbeddingModel model;
    const auto dim = detail::get<std::uint32_t>(in);
    const auto vocab_size = detail::get<std::uint64_t>(in);
    model.config_.dim = dim;
    model.config_.learning_rate = detail::get<double>(in);
    model.config_.min_count = detail::get<std::uint32_t>(in);
    model.config_.window = detail::get<std::uint32_t>(in);
    model.config_.negatives = detail::get<std::uint32_t>(in);
    model.config_.epochs = detail::get<std::uint32_t>(in);
    model.config_.seed = detail::get<std::uint64_t>(in);
    model.vectors_.resize(std::size_t(vocab_size) * dim);
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        const auto key_len = detail::get<std::uint32_t>(in);
        std::string key(key_len, '\0');
        in.read(key.data(), key_len);
        const auto count = detail::get<std::uint64_t>(in);
        if (!in) {
            throw std::runtime_error("model file truncated");
        }
        std::size_t colon = key.find(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("model file corrupt: token '" + key +
                                     "'");
        }
        model.vocab_.push_back({key.substr(0, colon), key.substr(colon + 1)});
        model.counts_.push_back(count);
        in.read(reinterpret_cast<char*>(model.vectors_.data() +
                                        std::size_t(i) * dim),
                std::streamsize(std::size_t(dim) * sizeof(float)));
        if (!in) {
            throw std::runtime_error("model file truncated");
        }
    }
    model.finalize();
    return model;
}

/// Plain-text export in the common word2vec text layout: "count dim" on the
/// first line, then one "lang:term v1 .. vdim" line per token.
inline void write_text_embeddings(std::ostream& out,
                                  const EmbeddingModel& model) {
    out << model.vocab_size() << ' ' << model.dim() << '\n';
    char buf[32];
    for (std::uint32_t i = 0; i < model.vocab_size(); ++i) {
        out << to_string(model.vocab()[i]);
        for (float v : model.vector_at(i)) {
            std::snprintf(buf, sizeof(buf), " %.8g", double(v));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace clir
