#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcr/corpus.hpp"
#include "pcr/encoder.hpp"
#include "pcr/evaluate.hpp"
#include "pcr/sampling.hpp"

namespace pcr {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LossKind {
  kQuadruplet,
  kTriplet,  // (query, pos1, neg) of each quadruplet
};

struct TrainConfig {
  int epochs = 5;
  double lr = 1e-5;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double weight_decay = 0.01;
  double warmup_fraction = 0.10;
  std::size_t batch_size = 32;
  double margin = 0.5;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kQuadruplet;

  void validate() const;
};

std::size_t warmup_steps(std::size_t total_steps, const TrainConfig& cfg);

// Linear warmup from 0 to cfg.lr over the first ceil(warmup_fraction * total)
// steps, constant afterwards.
double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

// AdamW moments for the trainable tensors; frozen slots stay empty.
struct OptState {
  std::array<std::vector<double>, kParamCount> first_moment;
  std::array<std::vector<double>, kParamCount> second_moment;
  std::uint64_t step = 0;

  static OptState for_params(const EncoderParams& params);
};

// Bias-corrected Adam update plus decoupled weight decay, both scaled by
// lr_now. Frozen tensors are left untouched. Throws TrainingError naming the
// tensor if a gradient is not finite.
void adamw_step(EncoderParams& params, OptState& opt, const EncoderGrads& grads, double lr_now,
                const TrainConfig& cfg);

// Texts and validation data needed to train on a quadruplet file.
struct TrainingCorpus {
  std::unordered_map<std::string, std::string> query_texts;  // paragraph id -> query text
  std::unordered_map<ArticleId, std::string> article_texts;  // id -> title + abstract
  std::vector<Query> validation;
  CandidatePool pool;

  static TrainingCorpus from(const std::vector<Article>& articles,
                             const std::vector<Query>& train_queries,
                             const std::vector<Query>& validation_queries);
};

struct EpochLog {
  int epoch = 0;
  double mean_train_loss = 0.0;
  MetricReport validation;
};

struct TrainResult {
  EncoderParams best;
  int best_epoch = 0;  // 0 when no epoch ran
  std::vector<EpochLog> log;
};

TrainResult train(const TrainingCorpus& corpus, const std::vector<Quadruplet>& quadruplets,
                  const EncoderParams& initial, const TrainConfig& cfg);

// epoch, mean_train_loss, val_r_precision, val_r_at_5, val_r_at_10, val_mrr
// separated by tabs.
std::string format_epoch_log(const EpochLog& entry);

}  // namespace pcr
