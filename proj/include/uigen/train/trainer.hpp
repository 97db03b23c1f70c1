#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uigen/model/transformer.hpp"
#include "uigen/reward/reward.hpp"
#include "uigen/train/dataset.hpp"

namespace uigen::train {

struct TrainConfig {
    int epochs = 30;
    int batch_size = 16;
    double learning_rate = 3e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip_norm = 1.0;
    std::uint64_t seed = 0;
    /// Stop after this many optimizer steps (0 = no limit).
    long max_steps = 0;

    /// Throws ConfigError.
    void check() const;
};

/// Gradient buffers keyed like the parameters they belong to.
using GradMap = nk::ParamMap;

/// Scales `grads` in place so their global L2 norm is at most `max_norm`. Returns the norm
/// before clipping.
double clip_gradients(GradMap& grads, double max_norm);

/// Adam with bias correction.
class Adam {
public:
    Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

    void step(nk::ParamMap& params, const GradMap& grads);
    long steps() const noexcept { return t_; }

private:
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    nk::ParamMap m_, v_;
};

/// Token loss of a batch: every non-pad target position weighs the same, so the result is the
/// mean cross-entropy over all target tokens in the batch. Gradients are written to `grads`
/// when it is non-null. Examples run on separate tapes, in parallel when OpenMP is enabled;
/// their gradients are summed in example order, so results do not depend on the thread count.
double batch_loss(const model::Model& m, const Dataset& batch, GradMap* grads);

/// Token-weighted mean loss over a whole dataset, without gradients.
double dataset_loss(const model::Model& m, const Dataset& data);

struct EpochRecord {
    int epoch = 0;  // 0 is the untrained model
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    model::Model best;  // parameters with the lowest validation loss seen
    int best_epoch = 0;
    long steps = 0;
    std::vector<EpochRecord> curve;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam on the mean cross-entropy with teacher forcing. The curve's first entry is
/// the loss before any update; train loss of later epochs is the mean over that epoch's
/// batches. Throws EmptyDatasetError for an empty train set and DivergenceError (naming the
/// epoch and batch) when the loss or a gradient becomes non-finite.
TrainResult train(const Dataset& train_set, const Dataset& val_set, const model::Model& init, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

nlohmann::json curve_json(const std::vector<EpochRecord>& curve);

/// Teacher-forced next-token accuracy: correct argmax predictions over all non-pad target
/// positions of the dataset. Ties go to the lowest token id.
double token_accuracy(const model::Model& m, const Dataset& data);

struct EvalReport {
    double token_accuracy = 0.0;
    double mean_gen_time_s = 0.0;
    double mean_similarity = 0.0;
    double mean_reward = 0.0;
    std::size_t n_samples = 0;
};

/// Greedy generation for every test spec, timed around `generate` alone, compared against the
/// reference tree by tree similarity and scored by the reward.
EvalReport evaluate(const model::Model& m, const Dataset& test_set, const reward::RewardConfig& reward_cfg,
                    const model::DecodeConfig& decode = {});

nlohmann::json to_json(const EvalReport& r);

}  // namespace uigen::train
