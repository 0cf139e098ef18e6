#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "experiment.hpp"
#include "pcr/trainer.hpp"
#include "test_support.hpp"

using namespace pcr;
using pcr::testing::small_params;

namespace {

EncoderGrads zero_grads(const EncoderParams& p) { return EncoderGrads::zeros_like(p); }

}  // namespace

TEST(LrSchedule, WarmupThenConstant) {
  TrainConfig cfg;
  cfg.lr = 2e-5;
  EXPECT_EQ(warmup_steps(1000, cfg), 100u);
  EXPECT_EQ(lr_at(0, 1000, cfg), 0.0);
  EXPECT_DOUBLE_EQ(lr_at(50, 1000, cfg), 0.5 * cfg.lr);
  EXPECT_EQ(lr_at(100, 1000, cfg), cfg.lr);
  EXPECT_EQ(lr_at(101, 1000, cfg), cfg.lr);
  EXPECT_EQ(lr_at(1000, 1000, cfg), cfg.lr);
}

TEST(LrSchedule, WarmupRoundsUp) {
  TrainConfig cfg;
  EXPECT_EQ(warmup_steps(15, cfg), 2u);
  EXPECT_EQ(warmup_steps(1, cfg), 1u);
  cfg.warmup_fraction = 0.0;
  EXPECT_EQ(warmup_steps(15, cfg), 0u);
  EXPECT_EQ(lr_at(0, 15, cfg), cfg.lr);
}

TEST(LrSchedule, MatchesInterpolationOracle) {
  TrainConfig cfg;
  cfg.lr = 1e-3;
  for (std::size_t total : {1u, 7u, 64u, 333u}) {
    const auto w = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(total)));
    for (std::size_t s = 0; s <= total; ++s) {
      double expected = s >= w ? cfg.lr : cfg.lr * static_cast<double>(s) / static_cast<double>(w);
      EXPECT_NEAR(lr_at(s, total, cfg), expected, 1e-18) << total << " " << s;
    }
  }
}

TEST(AdamW, ZeroGradsNoDecayLeavesParams) {
  EncoderParams p = small_params();
  EncoderParams before = p;
  OptState opt = OptState::for_params(p);
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  adamw_step(p, opt, zero_grads(p), 1e-3, cfg);
  EXPECT_EQ(p, before);
  EXPECT_EQ(opt.step, 1u);
}

TEST(AdamW, ZeroGradsDecayClosedForm) {
  EncoderParams p = small_params();
  p.get(ParamId::kB1).data.assign(p.get(ParamId::kB1).size(), 0.75f);
  EncoderParams before = p;
  OptState opt = OptState::for_params(p);
  TrainConfig cfg;
  adamw_step(p, opt, zero_grads(p), 1e-5, cfg);
  for (ParamId id : kAllParams) {
    const Matrix& a = before.get(id);
    const Matrix& b = p.get(id);
    for (std::size_t i = 0; i < a.size(); ++i) {
      float expected = p.is_frozen(id) ? a.data[i]
                                       : static_cast<float>(static_cast<double>(a.data[i]) *
                                                            (1.0 - 1e-7));
      EXPECT_EQ(b.data[i], expected) << param_name(id) << "[" << i << "]";
    }
  }
}

TEST(AdamW, FrozenTensorUntouched) {
  EncoderParams p = small_params();
  EncoderParams before = p;
  OptState opt = OptState::for_params(p);
  EncoderGrads g = zero_grads(p);
  for (double& v : g.get(ParamId::kE).data) v = 1.0;
  for (double& v : g.get(ParamId::kW1).data) v = 1.0;
  adamw_step(p, opt, g, 1e-2, TrainConfig{});
  EXPECT_EQ(p.get(ParamId::kE), before.get(ParamId::kE));
  EXPECT_NE(p.get(ParamId::kW1), before.get(ParamId::kW1));
}

TEST(AdamW, FirstStepMovesByLr) {
  // With bias correction the first update is lr * g / (|g| + eps) per entry.
  EncoderParams p = small_params();
  EncoderParams before = p;
  OptState opt = OptState::for_params(p);
  EncoderGrads g = zero_grads(p);
  g.get(ParamId::kB2).data = {2.0, -3.0, 0.5, -0.25};
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  adamw_step(p, opt, g, 0.1, cfg);
  const double signs[4] = {1, -1, 1, -1};
  for (std::size_t i = 0; i < 4; ++i) {
    double moved = static_cast<double>(before.get(ParamId::kB2).data[i]) - p.get(ParamId::kB2).data[i];
    EXPECT_NEAR(moved, 0.1 * signs[i], 1e-6);
  }
}

TEST(AdamW, NonFiniteGradientNamesTensor) {
  EncoderParams p = small_params();
  OptState opt = OptState::for_params(p);
  EncoderGrads g = zero_grads(p);
  g.get(ParamId::kW2).data[3] = NAN;
  try {
    adamw_step(p, opt, g, 1e-3, TrainConfig{});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("W2"), std::string::npos) << e.what();
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), TrainingError);
  cfg = TrainConfig{};
  cfg.lr = -1e-3;
  EXPECT_THROW(cfg.validate(), TrainingError);
  cfg = TrainConfig{};
  cfg.warmup_fraction = 1.5;
  EXPECT_THROW(cfg.validate(), TrainingError);
}

class TrainerFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { data_ = new pcr::testing::ExperimentData(pcr::testing::make_experiment(3)); }
  static void TearDownTestSuite() {
    delete data_;
    data_ = nullptr;
  }
  static EncoderParams small_init(std::uint64_t seed) {
    EncoderConfig cfg = pcr::testing::experiment_encoder(seed);
    cfg.embed_dim = 32;
    cfg.hidden_dim = 16;
    cfg.out_dim = 16;
    return EncoderParams::initialize(cfg);
  }
  static TrainConfig quick(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.lr = 1e-3;
    cfg.seed = seed;
    return cfg;
  }
  static pcr::testing::ExperimentData* data_;
};

pcr::testing::ExperimentData* TrainerFixture::data_ = nullptr;

TEST_F(TrainerFixture, ZeroEpochsReturnsInitialParams) {
  EncoderParams init = small_init(1);
  TrainConfig cfg = quick(1);
  cfg.epochs = 0;
  TrainResult r = train(data_->corpus, data_->quadruplets.quadruplets, init, cfg);
  EXPECT_EQ(r.best, init);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.best_epoch, 0);
}

TEST_F(TrainerFixture, EmptyQuadrupletsRejected) {
  EXPECT_THROW(train(data_->corpus, {}, small_init(1), quick(1)), TrainingError);
}

TEST_F(TrainerFixture, DeterministicAcrossRuns) {
  TrainResult a = train(data_->corpus, data_->quadruplets.quadruplets, small_init(4), quick(4));
  TrainResult b = train(data_->corpus, data_->quadruplets.quadruplets, small_init(4), quick(4));
  EXPECT_EQ(a.best, b.best);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(format_epoch_log(a.log[i]), format_epoch_log(b.log[i]));
  }
  std::stringstream sa, sb;
  save_checkpoint(a.best, sa);
  save_checkpoint(b.best, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(TrainerFixture, LogAndInvariants) {
  EncoderParams init = small_init(5);
  TrainConfig cfg = quick(5);
  cfg.epochs = 3;
  TrainResult r = train(data_->corpus, data_->quadruplets.quadruplets, init, cfg);
  ASSERT_EQ(r.log.size(), 3u);
  double best = -1;
  int best_epoch = 0;
  for (const auto& e : r.log) {
    EXPECT_TRUE(std::isfinite(e.mean_train_loss));
    EXPECT_GE(e.mean_train_loss, 0.0);
    if (e.validation.r_precision > best) {
      best = e.validation.r_precision;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.best_epoch, best_epoch);
  EXPECT_EQ(r.log[static_cast<std::size_t>(r.best_epoch - 1)].validation.r_precision, best);
  // the returned checkpoint reproduces the logged validation score
  EXPECT_EQ(pcr::testing::validation_metrics(*data_, r.best).r_precision, best);
  // frozen E bytes unchanged
  EXPECT_EQ(r.best.get(ParamId::kE), init.get(ParamId::kE));
}

TEST_F(TrainerFixture, ZeroLearningRateKeepsParamsBitIdentical) {
  EncoderParams init = small_init(6);
  TrainConfig cfg = quick(6);
  cfg.lr = 0.0;
  TrainResult r = train(data_->corpus, data_->quadruplets.quadruplets, init, cfg);
  EXPECT_EQ(r.best, init);
  ASSERT_EQ(r.log.size(), 2u);
}

TEST_F(TrainerFixture, TrainableEmbeddingsMove) {
  EncoderParams init = small_init(7);
  init.set_frozen(ParamId::kE, false);
  TrainConfig cfg = quick(7);
  cfg.epochs = 1;
  TrainResult r = train(data_->corpus, data_->quadruplets.quadruplets, init, cfg);
  EXPECT_NE(r.best.get(ParamId::kE), init.get(ParamId::kE));
}

TEST(TrainerExperiment, FinalValidationBeatsUntrainedInMostSeeds) {
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto data = pcr::testing::make_experiment(seed);
    double before = pcr::testing::validation_metrics(
                        data, EncoderParams::initialize(pcr::testing::experiment_encoder(seed)))
                        .r_precision;
    TrainResult r = pcr::testing::run_training(data, seed, LossKind::kQuadruplet);
    double after = r.log.back().validation.r_precision;
    if (after > before) ++improved;
  }
  EXPECT_GE(improved, 4);
}
