#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hce/corpus.hpp"
#include "hce/embedding.hpp"
#include "hce/hierarchy.hpp"
#include "hce/random.hpp"
#include "hce/sampler.hpp"
#include "hce/types.hpp"

namespace hce {

struct TrainConfig {
    std::size_t dim = 100;
    std::size_t epochs = 5;
    double lr0 = 0.025;
    double lr_min = 0.025e-4;
    std::size_t negatives = 10;
    std::size_t chunk = 500;
    double noise_exponent = 0.75;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    Mode mode = Mode::HCE;
    bool shuffle = true;
    /// Frequent-context subsampling threshold; 0 disables it.
    double subsample = 0.0;
    /// Checkpoint callback period in chunks; 0 disables it.
    std::size_t checkpoint_every = 0;

    void validate() const {
        if (dim < 1) throw Error("config: dim must be >= 1");
        if (epochs < 1) throw Error("config: epochs must be >= 1");
        if (negatives < 1) throw Error("config: negatives must be >= 1");
        if (chunk < 1) throw Error("config: chunk must be >= 1");
        if (workers < 1) throw Error("config: workers must be >= 1");
        if (!(lr_min > 0.0) || !(lr_min <= lr0)) throw Error("config: need 0 < lr_min <= lr0");
        if (!(noise_exponent >= 0.0)) throw Error("config: noise exponent must be non-negative");
        if (!(subsample >= 0.0)) throw Error("config: subsample must be non-negative");
    }
};

inline std::string to_string(Mode m) { return m == Mode::CE ? "ce" : "hce"; }

inline Mode parse_mode(std::string_view s) {
    if (s == "ce" || s == "CE") return Mode::CE;
    if (s == "hce" || s == "HCE") return Mode::HCE;
    throw Error("invalid mode '" + std::string(s) + "' (expected ce or hce)");
}

inline constexpr double kSigmoidClamp = 30.0;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// log(sigmoid(x)) without overflow for large |x|.
inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Exact softmax probability of `context` given a predictor's input
/// vector, over all entity output vectors. Only practical for small
/// vocabularies.
inline double softmax_prob(const EmbeddingTable& t, NodeId predictor, EntityId context) {
    RowRef pred{predictor.kind == NodeKind::Entity ? Table::EntityInput : Table::CategoryInput, predictor.index};
    auto v = t.row(pred);
    std::vector<double> scores(t.entity_count());
    for (std::uint32_t e = 0; e < scores.size(); ++e) scores[e] = dot(v, t.row({Table::EntityOutput, e}));
    double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    return std::exp(scores.at(context.value) - m) / z;
}

/// Sparse gradient of the per-pair loss: one delta per touched row.
class PairGradient {
public:
    double loss = 0.0;

    void reset(std::size_t dim) {
        dim_ = dim;
        loss = 0.0;
        rows_.clear();
        deltas_.clear();
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return rows_.size(); }
    std::span<const RowRef> rows() const { return rows_; }
    std::span<const double> delta(std::size_t i) const { return {deltas_.data() + i * dim_, dim_}; }

    /// Delta slot for a row, created zeroed on first use.
    std::span<double> slot(RowRef r) {
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (rows_[i] == r) return {deltas_.data() + i * dim_, dim_};
        rows_.push_back(r);
        deltas_.resize(deltas_.size() + dim_, 0.0);
        return {deltas_.data() + (rows_.size() - 1) * dim_, dim_};
    }

    std::span<const double> find(RowRef r) const {
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (rows_[i] == r) return delta(i);
        return {};
    }

private:
    std::size_t dim_ = 0;
    std::vector<RowRef> rows_;
    std::vector<double> deltas_;
};

namespace detail {

/// Row snapshots reused across pairs to keep the hot loop allocation-free.
struct PairScratch {
    std::vector<RowRef> predictors;
    std::vector<double> predictor_weights;
    std::vector<double> predictor_values;
    std::vector<RowRef> outputs;
    std::vector<double> output_values;
};

}  // namespace detail

/// Negative-sampling loss for one pair and its exact gradient.
///
///   loss = -[log s(u_c.v_t) + sum_i w_i log s(u_c.v_i)]
///          - sum_n [log s(-u_n.v_t) + sum_i w_i log s(-u_n.v_i)]
///
/// v_t is the target's input row, v_i the category input rows, u_c / u_n
/// the output rows of the context and the negatives. Dot products are
/// clamped to +-30 before the sigmoid (zero gradient beyond it). Rows are read with relaxed atomics
/// so this may run against a table other workers are updating.
inline void pair_loss_and_grad(const EmbeddingTable& table, TrainingPair pair,
                               std::span<const WeightedCategory> weights, std::span<const EntityId> negatives,
                               PairGradient& grad, detail::PairScratch& s) {
    const std::size_t d = table.dim();
    grad.reset(d);

    s.predictors.clear();
    s.predictor_weights.clear();
    s.predictors.push_back({Table::EntityInput, pair.target.value});
    s.predictor_weights.push_back(1.0);
    for (const auto& w : weights) {
        s.predictors.push_back({Table::CategoryInput, w.category.value});
        s.predictor_weights.push_back(w.weight);
    }
    s.outputs.clear();
    s.outputs.push_back({Table::EntityOutput, pair.context.value});
    for (auto n : negatives) s.outputs.push_back({Table::EntityOutput, n.value});

    s.predictor_values.resize(s.predictors.size() * d);
    s.output_values.resize(s.outputs.size() * d);
    for (std::size_t p = 0; p < s.predictors.size(); ++p)
        table.load(s.predictors[p], {s.predictor_values.data() + p * d, d});
    for (std::size_t o = 0; o < s.outputs.size(); ++o) table.load(s.outputs[o], {s.output_values.data() + o * d, d});

    // Register every touched row, even ones whose delta ends up zero.
    for (auto r : s.predictors) grad.slot(r);
    for (auto r : s.outputs) grad.slot(r);

    double loss = 0.0;
    for (std::size_t o = 0; o < s.outputs.size(); ++o) {
        const bool positive = o == 0;
        std::span<const double> u{s.output_values.data() + o * d, d};
        auto du = grad.slot(s.outputs[o]);
        for (std::size_t p = 0; p < s.predictors.size(); ++p) {
            const double w = s.predictor_weights[p];
            std::span<const double> v{s.predictor_values.data() + p * d, d};
            const double raw = dot(u, v);
            const double x = std::clamp(raw, -kSigmoidClamp, kSigmoidClamp);
            loss -= w * (positive ? log_sigmoid(x) : log_sigmoid(-x));
            // The clamped loss is flat outside the clamp, so its gradient is zero there.
            if (raw != x) continue;
            double g = w * (sigmoid(x) - (positive ? 1.0 : 0.0));
            if (g == 0.0) continue;
            auto dv = grad.slot(s.predictors[p]);
            for (std::size_t i = 0; i < d; ++i) {
                dv[i] += g * u[i];
                du[i] += g * v[i];
            }
        }
    }
    grad.loss = loss;
}

inline PairGradient pair_loss_and_grad(const EmbeddingTable& table, TrainingPair pair,
                                       std::span<const WeightedCategory> weights,
                                       std::span<const EntityId> negatives) {
    PairGradient g;
    detail::PairScratch s;
    pair_loss_and_grad(table, pair, weights, negatives, g, s);
    return g;
}

/// row <- row - lr * delta for every touched row.
inline void apply_gradient(EmbeddingTable& table, const PairGradient& grad, double lr) {
    auto rows = grad.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) table.add_scaled(rows[i], grad.delta(i), -lr);
}

struct TrainProgress {
    std::size_t epoch = 0;
    std::size_t chunk = 0;
    std::size_t pairs_done = 0;
    std::size_t pairs_total = 0;
    double learning_rate = 0.0;
    double chunk_loss = 0.0;
    double smoothed_loss = 0.0;
};

struct TrainHooks {
    std::function<void(const TrainProgress&)> on_chunk;
    std::function<void(const EmbeddingTable&, std::size_t chunk)> on_checkpoint;
};

struct TrainResult {
    EmbeddingTable table;
    /// Mean per-pair loss of each completed chunk, in completion order.
    std::vector<double> chunk_losses;
    /// Mean per-pair loss of each epoch.
    std::vector<double> epoch_losses;
    std::size_t pairs_processed = 0;
};

namespace detail {

inline double scheduled_lr(const TrainConfig& c, std::size_t done, std::size_t total) {
    double frac = total == 0 ? 1.0 : std::min(1.0, static_cast<double>(done) / static_cast<double>(total));
    return std::max(c.lr_min, c.lr0 - (c.lr0 - c.lr_min) * frac);
}

}  // namespace detail

/// Optimises the CE or HCE objective with per-pair SGD over `epochs`
/// passes. The learning rate decays linearly from lr0 to lr_min over all
/// scheduled pairs and is refreshed once per chunk. With several workers
/// the table is updated lock-free; only workers == 1 is reproducible.
inline TrainResult train(const Corpus& corpus, const Vocabulary& vocab, const CategoryGraph& graph,
                         const TrainConfig& config, const TrainHooks& hooks = {}) {
    config.validate();
    if (corpus.documents.empty()) throw Error("train: corpus is empty");
    if (vocab.entity_size() < 2) throw Error("train: need at least two entities for negative sampling");

    TrainResult result;
    result.table = init_embeddings(config.dim, vocab.entity_size(), vocab.category_size(), config.seed);
    EmbeddingTable& table = result.table;
    const WeightCache weights(graph, vocab.entity_size(), config.mode);
    const NoiseTable noise = build_noise_table(vocab, config.noise_exponent);

    std::vector<double> keep_prob;
    if (config.subsample > 0.0) {
        double total = 0.0;
        for (auto c : vocab.entity_counts()) total += static_cast<double>(c);
        for (auto c : vocab.entity_counts()) {
            double f = static_cast<double>(c) / total;
            keep_prob.push_back(f > 0 ? std::min(1.0, std::sqrt(config.subsample / f)) : 1.0);
        }
    }

    const std::size_t per_epoch = corpus.pair_count();
    const std::size_t total = per_epoch * config.epochs;
    const std::size_t workers = std::min(config.workers, corpus.documents.size());

    std::atomic<std::size_t> pairs_done{0};
    std::atomic<std::size_t> chunks_done{0};
    std::mutex log_mutex;
    double smoothed = 0.0;
    bool smoothed_init = false;

    std::vector<Rng> worker_rngs;
    for (std::size_t w = 0; w < workers; ++w) worker_rngs.emplace_back(config.seed, 1000 + w);

    std::vector<std::size_t> order(corpus.documents.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) {
            Rng shuffler(config.seed, 2000 + epoch);
            shuffler.shuffle(order.begin(), order.end());
        }
        std::vector<double> epoch_loss(workers, 0.0);
        std::vector<std::size_t> epoch_pairs(workers, 0);
        std::exception_ptr failure;
        std::mutex failure_mutex;

        auto run_worker = [&](std::size_t w) {
            try {
                Rng& rng = worker_rngs[w];
                PairGradient grad;
                detail::PairScratch scratch;
                std::vector<EntityId> negs;
                negs.reserve(config.negatives);
                std::size_t begin = w * order.size() / workers;
                std::size_t end = (w + 1) * order.size() / workers;
                double lr = detail::scheduled_lr(config, pairs_done.load(std::memory_order_relaxed), total);
                double chunk_sum = 0.0;
                std::size_t in_chunk = 0;

                auto close_chunk = [&] {
                    std::size_t done = pairs_done.fetch_add(in_chunk, std::memory_order_relaxed) + in_chunk;
                    std::size_t chunk_id = chunks_done.fetch_add(1, std::memory_order_relaxed) + 1;
                    double mean = chunk_sum / static_cast<double>(in_chunk);
                    {
                        std::lock_guard lock(log_mutex);
                        result.chunk_losses.push_back(mean);
                        smoothed = smoothed_init ? 0.9 * smoothed + 0.1 * mean : mean;
                        smoothed_init = true;
                        if (hooks.on_chunk)
                            hooks.on_chunk({epoch, chunk_id, done, total, lr, mean, smoothed});
                        if (hooks.on_checkpoint && config.checkpoint_every > 0 &&
                            chunk_id % config.checkpoint_every == 0)
                            hooks.on_checkpoint(table.snapshot(), chunk_id);
                    }
                    lr = detail::scheduled_lr(config, done, total);
                    chunk_sum = 0.0;
                    in_chunk = 0;
                };

                for (std::size_t i = begin; i < end; ++i) {
                    const Document& doc = corpus.documents[order[i]];
                    auto cats = weights[doc.target];
                    for (auto ctx : doc.contexts) {
                        if (!keep_prob.empty() && rng.uniform() >= keep_prob[ctx.value]) continue;
                        negs.clear();
                        draw_negatives_into(noise, config.negatives, ctx, rng, negs);
                        pair_loss_and_grad(table, {doc.target, ctx}, cats, negs, grad, scratch);
                        if (!std::isfinite(grad.loss))
                            throw Error("train: non-finite loss at epoch " + std::to_string(epoch + 1));
                        apply_gradient(table, grad, lr);
                        chunk_sum += grad.loss;
                        epoch_loss[w] += grad.loss;
                        ++epoch_pairs[w];
                        if (++in_chunk == config.chunk) close_chunk();
                    }
                }
                if (in_chunk > 0) close_chunk();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        };

        if (workers == 1) {
            run_worker(0);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_worker, w);
        }
        if (failure) std::rethrow_exception(failure);

        double sum = std::accumulate(epoch_loss.begin(), epoch_loss.end(), 0.0);
        std::size_t n = std::accumulate(epoch_pairs.begin(), epoch_pairs.end(), std::size_t{0});
        result.epoch_losses.push_back(n ? sum / static_cast<double>(n) : 0.0);
        result.pairs_processed += n;
    }
    if (!table.all_finite()) throw Error("train: embedding table contains non-finite values");
    return result;
}

}  // namespace hce
