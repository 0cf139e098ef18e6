#include "pcr/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <spdlog/spdlog.h>

#include "pcr/index.hpp"
#include "pcr/objective.hpp"
#include "pcr/pipeline.hpp"
#include "pcr/random.hpp"
#include "pcr/text.hpp"

namespace pcr {
namespace {

// Token bags for every distinct text in the quadruplet set. Pooled vectors
// are cached while E is frozen since they cannot change.
class InputCache {
 public:
  InputCache(const TrainingCorpus& corpus, const std::vector<Quadruplet>& quadruplets,
             const EncoderParams& params)
      : cache_pooled_(params.is_frozen(ParamId::kE)) {
    for (const auto& quad : quadruplets) {
      add_query(corpus, quad.paragraph_id, params);
      add_article(corpus, quad.pos1, params);
      add_article(corpus, quad.pos2, params);
      add_article(corpus, quad.neg, params);
    }
  }

  struct Entry {
    TokenBag bag;
    std::vector<double> pooled;
  };

  const Entry& query(const std::string& paragraph_id) const { return queries_.at(paragraph_id); }
  const Entry& article(const ArticleId& id) const { return articles_.at(id); }
  bool cached() const { return cache_pooled_; }

 private:
  void fill(Entry& entry, const std::string& text, const EncoderParams& params) {
    entry.bag = bag_of_tokens(text, params.config.hash_buckets);
    if (cache_pooled_) entry.pooled = pool_tokens(params, entry.bag);
  }

  void add_query(const TrainingCorpus& corpus, const std::string& id, const EncoderParams& params) {
    if (queries_.contains(id)) return;
    const auto it = corpus.query_texts.find(id);
    if (it == corpus.query_texts.end()) {
      throw TrainingError("quadruplet references unknown training paragraph " + id);
    }
    fill(queries_[id], it->second, params);
  }

  void add_article(const TrainingCorpus& corpus, const ArticleId& id, const EncoderParams& params) {
    if (articles_.contains(id)) return;
    const auto it = corpus.article_texts.find(id);
    if (it == corpus.article_texts.end()) {
      throw TrainingError("quadruplet references unknown article " + id);
    }
    fill(articles_[id], it->second, params);
  }

  bool cache_pooled_;
  std::unordered_map<std::string, Entry> queries_;
  std::unordered_map<ArticleId, Entry> articles_;
};

Activations forward(const EncoderParams& params, const InputCache& cache,
                    const InputCache::Entry& entry) {
  return forward_head(params, cache.cached() ? entry.pooled : pool_tokens(params, entry.bag));
}

std::vector<double> scaled(const std::vector<double>& v, double factor) {
  std::vector<double> out(v);
  for (double& x : out) x *= factor;
  return out;
}

MetricReport validate_params(const TrainingCorpus& corpus, const EncoderParams& params) {
  const auto index = VectorIndex::build(corpus.pool, params);
  return evaluate_queries(index, params, corpus.validation);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw TrainingError("epochs must be non-negative");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw TrainingError("lr must be finite and non-negative");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw TrainingError("beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw TrainingError("beta2 must lie in (0, 1)");
  if (!(adam_epsilon > 0.0)) throw TrainingError("adam epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw TrainingError("weight decay must be non-negative");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw TrainingError("warmup fraction must lie in [0, 1]");
  }
  if (batch_size < 1) throw TrainingError("batch size must be at least 1");
  if (!(margin >= 0.0)) throw TrainingError("margin must be non-negative");
}

std::size_t warmup_steps(std::size_t total_steps, const TrainConfig& cfg) {
  return static_cast<std::size_t>(std::ceil(cfg.warmup_fraction * static_cast<double>(total_steps)));
}

double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
  const auto warmup = warmup_steps(total_steps, cfg);
  if (warmup == 0 || step >= warmup) return cfg.lr;
  return cfg.lr * static_cast<double>(step) / static_cast<double>(warmup);
}

OptState OptState::for_params(const EncoderParams& params) {
  OptState opt;
  for (const auto id : kAllParams) {
    if (params.is_frozen(id)) continue;
    const auto n = params.get(id).size();
    opt.first_moment[static_cast<std::size_t>(id)].assign(n, 0.0);
    opt.second_moment[static_cast<std::size_t>(id)].assign(n, 0.0);
  }
  return opt;
}

void adamw_step(EncoderParams& params, OptState& opt, const EncoderGrads& grads, double lr_now,
                const TrainConfig& cfg) {
  for (const auto id : kAllParams) {
    if (params.is_frozen(id)) continue;
    const auto& g = grads.get(id).data;
    if (g.size() != params.get(id).size()) {
      throw TrainingError("gradient for " + std::string(param_name(id)) + " has the wrong size");
    }
    for (const double v : g) {
      if (!std::isfinite(v)) {
        throw TrainingError("non-finite gradient for " + std::string(param_name(id)));
      }
    }
  }

  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (const auto id : kAllParams) {
    if (params.is_frozen(id)) continue;
    const auto slot = static_cast<std::size_t>(id);
    auto& p = params.get(id).data;
    auto& m = opt.first_moment[slot];
    auto& v = opt.second_moment[slot];
    if (m.size() != p.size()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    const auto& g = grads.get(id).data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      const double value = p[i];
      const double update = m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon) + cfg.weight_decay * value;
      p[i] = static_cast<float>(value - lr_now * update);
    }
  }
}

TrainingCorpus TrainingCorpus::from(const std::vector<Article>& articles,
                                    const std::vector<Query>& train_queries,
                                    const std::vector<Query>& validation_queries) {
  TrainingCorpus corpus;
  for (const auto& query : train_queries) corpus.query_texts.emplace(query.id(), query.text);
  for (const auto& article : articles) {
    corpus.article_texts.emplace(article.id, compose_article_text(article.title, article.abstract));
  }
  corpus.validation = validation_queries;
  corpus.pool = build_candidate_pool(articles);
  return corpus;
}

TrainResult train(const TrainingCorpus& corpus, const std::vector<Quadruplet>& quadruplets,
                  const EncoderParams& initial, const TrainConfig& cfg) {
  cfg.validate();
  initial.validate();
  TrainResult result{initial, 0, {}};
  if (cfg.epochs == 0) {
    spdlog::warn("epochs = 0: returning the initial parameters");
    return result;
  }
  if (quadruplets.empty()) throw TrainingError("no quadruplets to train on");
  if (corpus.validation.empty()) throw TrainingError("no validation queries");

  EncoderParams params = initial;
  OptState opt = OptState::for_params(params);
  const InputCache cache(corpus, quadruplets, params);
  const LossConfig loss_cfg{cfg.margin, 1e-12};
  loss_cfg.validate();

  const std::size_t n = quadruplets.size();
  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = batches * static_cast<std::size_t>(cfg.epochs);
  const Rng root(cfg.seed);

  double best_rp = -std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffler = root.split(static_cast<std::uint64_t>(epoch));
    shuffler.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      EncoderGrads grads = EncoderGrads::zeros_like(params);
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const auto& quad = quadruplets[order[k]];
        const auto& q_in = cache.query(quad.paragraph_id);
        const auto& p1_in = cache.article(quad.pos1);
        const auto& p2_in = cache.article(quad.pos2);
        const auto& n_in = cache.article(quad.neg);
        const auto q = forward(params, cache, q_in);
        const auto p1 = forward(params, cache, p1_in);
        const auto neg = forward(params, cache, n_in);

        double loss = 0.0;
        if (cfg.loss == LossKind::kQuadruplet) {
          const auto p2 = forward(params, cache, p2_in);
          loss = quadruplet_loss(q.output, p1.output, p2.output, neg.output, loss_cfg);
          const auto g = quadruplet_grad(q.output, p1.output, p2.output, neg.output, loss_cfg);
          backward(params, q, q_in.bag, scaled(g.query, inv), grads);
          backward(params, p1, p1_in.bag, scaled(g.positive1, inv), grads);
          backward(params, p2, p2_in.bag, scaled(g.positive2, inv), grads);
          backward(params, neg, n_in.bag, scaled(g.negative, inv), grads);
        } else {
          loss = triplet_loss(q.output, p1.output, neg.output, loss_cfg);
          const auto g = triplet_grad(q.output, p1.output, neg.output, loss_cfg);
          backward(params, q, q_in.bag, scaled(g.query, inv), grads);
          backward(params, p1, p1_in.bag, scaled(g.positive, inv), grads);
          backward(params, neg, n_in.bag, scaled(g.negative, inv), grads);
        }
        if (!std::isfinite(loss)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(b) + ", paragraph " + quad.paragraph_id + " (pos " +
                              quad.pos1 + ", " + quad.pos2 + ", neg " + quad.neg + ")");
        }
        batch_loss += loss;
      }
      epoch_loss += batch_loss;
      const std::size_t step = (static_cast<std::size_t>(epoch) - 1) * batches + b + 1;
      adamw_step(params, opt, grads, lr_at(step, total_steps, cfg), cfg);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.mean_train_loss = epoch_loss / static_cast<double>(n);
    entry.validation = validate_params(corpus, params);
    spdlog::info("epoch {}: loss {:.6f}, val R-prec {:.4f}", epoch, entry.mean_train_loss,
                 entry.validation.r_precision);
    if (entry.validation.r_precision > best_rp) {
      best_rp = entry.validation.r_precision;
      result.best = params;
      result.best_epoch = epoch;
    }
    result.log.push_back(entry);
  }
  return result;
}

std::string format_epoch_log(const EpochLog& entry) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f", entry.epoch,
                entry.mean_train_loss, entry.validation.r_precision, entry.validation.r_at_5,
                entry.validation.r_at_10, entry.validation.mrr);
  return buf;
}

}  // namespace pcr
