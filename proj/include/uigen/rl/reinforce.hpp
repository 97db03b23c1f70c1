#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"
#include "uigen/core/rng.hpp"
#include "uigen/model/transformer.hpp"
#include "uigen/reward/reward.hpp"
#include "uigen/train/trainer.hpp"

namespace uigen::rl {

struct Episode {
    codec::DesignSpec spec;
    std::vector<int> tokens;
    ui::UITree tree;
    double logprob_sum = 0.0;
    double reward = 0.0;
};

struct RLConfig {
    int steps = 200;
    int episodes_per_step = 16;
    double learning_rate = 3e-5;
    double baseline_momentum = 0.9;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    enum class Optimizer { sgd, adam } optimizer = Optimizer::adam;
    double grad_clip_norm = 1.0;

    /// Throws ConfigError.
    void check() const;
};

/// Grammar-masked sample at `temperature`, scored by the reward. The decode seed is drawn
/// from `rng`.
Episode sample_episode(const model::Model& m, const codec::DesignSpec& spec, double temperature, Rng& rng,
                       const reward::RewardConfig& reward_cfg = {});

/// Optimizer state carried across steps (Adam moments); unused for SGD.
struct PolicyOptimizer {
    explicit PolicyOptimizer(const RLConfig& cfg)
        : kind(cfg.optimizer), lr(cfg.learning_rate), clip(cfg.grad_clip_norm), adam(cfg.learning_rate) {}

    RLConfig::Optimizer kind;
    double lr;
    double clip;  // <= 0 disables clipping
    train::Adam adam;
};

struct StepResult {
    double baseline = 0.0;
    double mean_reward = 0.0;
    bool updated = false;
};

/// One policy-gradient step ascending (1/N) sum_i (R_i - baseline) * log p(tokens_i | spec_i)
/// at `temperature`, followed by baseline' = momentum * baseline + (1 - momentum) * mean R.
/// When every advantage is exactly zero the parameters are left untouched. Throws
/// EmptyDatasetError on an empty batch and DivergenceError on a non-finite gradient.
StepResult reinforce_step(model::Model& m, const std::vector<Episode>& batch, double baseline, double momentum,
                          double temperature, PolicyOptimizer& opt);

/// Gradient of the policy loss -(1/N) sum_i (R_i - baseline) * logprob_i with respect to every
/// parameter; descending it ascends the expected reward.
train::GradMap policy_gradient(const model::Model& m, const std::vector<Episode>& batch, double baseline,
                               double temperature);

struct FinetuneResult {
    model::Model model;
    std::vector<double> reward_curve;  // mean sampled reward per step
    double baseline = 0.0;
};

using StepCallback = std::function<void(int step, double mean_reward, double baseline)>;

/// `steps` rounds of: draw episodes_per_step specs (with replacement), sample one episode per
/// spec, apply reinforce_step. The baseline starts at the first batch's mean reward.
FinetuneResult finetune(const model::Model& init, const std::vector<codec::DesignSpec>& specs,
                        const reward::RewardConfig& reward_cfg, const RLConfig& cfg, const StepCallback& on_step = {});

/// Mean reward of `samples_per_spec` seeded samples for each spec.
double mean_policy_reward(const model::Model& m, const std::vector<codec::DesignSpec>& specs,
                          const reward::RewardConfig& reward_cfg, double temperature, std::uint64_t seed,
                          int samples_per_spec = 1);

nlohmann::json curve_json(const std::vector<double>& curve);

}  // namespace uigen::rl
