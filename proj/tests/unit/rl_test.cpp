#include <gtest/gtest.h>

#include <cmath>

#include "model_probe.hpp"
#include "test_util.hpp"
#include "uigen/core/error.hpp"
#include "uigen/rl/reinforce.hpp"

using namespace uigen;
using namespace uigen::rl;

namespace {

model::Model small_model(std::uint64_t seed) { return model::init_model(uigen::testing::tiny_config(16), seed); }

double replay_logprob(const model::Model& m, const Episode& e, double temperature = 1.0) {
    nk::Tape tape(false);
    model::BoundParams p(tape, m, false);
    return model::sequence_log_prob(tape, p, m.config, codec::encode_spec(e.spec), e.tokens, temperature).value()[0];
}

}  // namespace

TEST(Episode, ValidAndDeterministic) {
    const model::Model m = small_model(60);
    Rng specs(61);
    for (int i = 0; i < 20; ++i) {
        const auto spec = uigen::testing::random_spec(specs);
        Rng a(100 + static_cast<std::uint64_t>(i)), b(100 + static_cast<std::uint64_t>(i));
        const Episode x = sample_episode(m, spec, 1.0, a), y = sample_episode(m, spec, 1.0, b);
        EXPECT_EQ(x.tokens, y.tokens);
        EXPECT_EQ(x.reward, y.reward);
        EXPECT_LE(x.logprob_sum, 0.0);
        EXPECT_TRUE(std::isfinite(x.logprob_sum));
        EXPECT_EQ(codec::decode_tokens(x.tokens, spec.device), x.tree);
        EXPECT_NEAR(replay_logprob(m, x), x.logprob_sum, 1e-8);
    }
}

TEST(Episode, RewardsBoundedFromRandomParameters) {
    Rng rng(62);
    for (int i = 0; i < 500; ++i) {
        const model::Model m = model::init_model(uigen::testing::tiny_config(8), static_cast<std::uint64_t>(i % 5));
        const Episode e = sample_episode(m, uigen::testing::random_spec(rng), 1.0, rng);
        ASSERT_GE(e.reward, 0.0);
        ASSERT_LE(e.reward, 1.0);
    }
}

TEST(ReinforceStep, ZeroAdvantageLeavesParametersUntouched) {
    model::Model m = small_model(63);
    Rng rng(64);
    std::vector<Episode> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(sample_episode(m, uigen::testing::random_spec(rng), 1.0, rng));
    for (auto& e : batch) e.reward = 0.625;
    for (auto kind : {RLConfig::Optimizer::sgd, RLConfig::Optimizer::adam}) {
        RLConfig cfg;
        cfg.optimizer = kind;
        cfg.learning_rate = 0.1;
        PolicyOptimizer opt(cfg);
        const std::string before = model::save_model(m);
        const StepResult r = reinforce_step(m, batch, 0.625, 0.9, 1.0, opt);
        EXPECT_FALSE(r.updated);
        EXPECT_EQ(model::save_model(m), before);
        EXPECT_EQ(r.baseline, 0.625);
    }
}

TEST(ReinforceStep, AdvantageSignSetsTheDirection) {
    Rng rng(65);
    for (int trial = 0; trial < 6; ++trial) {
        const model::Model m0 = small_model(66 + static_cast<std::uint64_t>(trial));
        Episode e = sample_episode(m0, uigen::testing::random_spec(rng), 1.0, rng);
        const double lp0 = replay_logprob(m0, e);
        for (double advantage : {0.3, -0.3}) {
            model::Model m = m0;
            RLConfig cfg;
            cfg.optimizer = RLConfig::Optimizer::sgd;
            cfg.learning_rate = 1e-6;
            cfg.grad_clip_norm = 0;
            PolicyOptimizer opt(cfg);
            e.reward = 0.5 + advantage;
            ASSERT_TRUE(reinforce_step(m, {e}, 0.5, 0.9, 1.0, opt).updated);
            const double lp1 = replay_logprob(m, e);
            if (advantage > 0) {
                EXPECT_GT(lp1, lp0) << trial;
            } else {
                EXPECT_LT(lp1, lp0) << trial;
            }
        }
    }
}

TEST(ReinforceStep, GradientMatchesFiniteDifferences) {
    const model::Model m = model::init_model(uigen::testing::tiny_config(8), 67);
    Rng rng(68);
    std::vector<Episode> batch;
    for (int i = 0; i < 3; ++i) {
        batch.push_back(sample_episode(m, uigen::testing::random_spec(rng), 0.8, rng));
        batch.back().reward = 0.2 * i;
    }
    const double baseline = 0.25, temp = 0.8;
    const train::GradMap g = policy_gradient(m, batch, baseline, temp);
    auto objective = [&](const model::Model& mm) {
        double s = 0;
        for (const auto& e : batch) s += (e.reward - baseline) * replay_logprob(mm, e, temp);
        return -s / static_cast<double>(batch.size());
    };
    // Directional derivative of the loss along the gradient equals its squared norm.
    model::Model up = m, down = m;
    double dot = 0;
    const double eps = 1e-6;
    for (auto& [name, t] : up.params)
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double d = g.at(name)[i];
            t[i] += eps * d;
            down.params.at(name)[i] -= eps * d;
            dot += d * d;
        }
    EXPECT_NEAR((objective(up) - objective(down)) / (2 * eps), dot, 1e-5 * std::max(1.0, dot));
}

TEST(Baseline, MatchesClosedFormMovingAverage) {
    model::Model m = small_model(69);
    Rng rng(70);
    RLConfig cfg;
    cfg.optimizer = RLConfig::Optimizer::sgd;
    cfg.learning_rate = 1e-12;
    PolicyOptimizer opt(cfg);
    const double mu = 0.9, b0 = 0.4;
    double b = b0;
    std::vector<double> means;
    for (int step = 0; step < 8; ++step) {
        std::vector<Episode> batch;
        for (int i = 0; i < 2; ++i) batch.push_back(sample_episode(m, uigen::testing::random_spec(rng), 1.0, rng));
        const StepResult r = reinforce_step(m, batch, b, mu, 1.0, opt);
        means.push_back(r.mean_reward);
        b = r.baseline;
        // b_n = mu^n b_0 + (1 - mu) sum_k mu^(n-1-k) m_k
        double closed = std::pow(mu, static_cast<double>(means.size())) * b0;
        for (std::size_t k = 0; k < means.size(); ++k)
            closed += (1 - mu) * std::pow(mu, static_cast<double>(means.size() - 1 - k)) * means[k];
        EXPECT_NEAR(b, closed, 1e-12);
    }
    EXPECT_THROW(reinforce_step(m, {}, 0.0, mu, 1.0, opt), EmptyDatasetError);
}

TEST(Finetune, ZeroStepsIsANoOp) {
    const model::Model m = small_model(71);
    RLConfig cfg;
    cfg.steps = 0;
    Rng rng(72);
    const FinetuneResult r = finetune(m, {uigen::testing::random_spec(rng)}, {}, cfg);
    EXPECT_TRUE(r.reward_curve.empty());
    EXPECT_EQ(model::save_model(r.model), model::save_model(m));
}

TEST(Finetune, FixedSeedsReproduceAndEpisodesStayValid) {
    const model::Model m = small_model(73);
    Rng rng(74);
    std::vector<codec::DesignSpec> specs;
    for (int i = 0; i < 6; ++i) specs.push_back(uigen::testing::random_spec(rng));
    RLConfig cfg;
    cfg.steps = 3;
    cfg.episodes_per_step = 4;
    cfg.learning_rate = 1e-3;
    cfg.seed = 5;
    const FinetuneResult a = finetune(m, specs, {}, cfg), b = finetune(m, specs, {}, cfg);
    ASSERT_EQ(a.reward_curve.size(), 3u);
    EXPECT_EQ(a.reward_curve, b.reward_curve);
    EXPECT_EQ(model::save_model(a.model), model::save_model(b.model));
    EXPECT_NE(model::save_model(a.model), model::save_model(m));
    Rng check(75);
    for (const auto& s : specs) {
        const Episode e = sample_episode(a.model, s, 1.0, check);
        EXPECT_EQ(codec::decode_tokens(e.tokens, s.device), e.tree);
    }
}

TEST(RLConfig, Validation) {
    RLConfig c;
    EXPECT_NO_THROW(c.check());
    c.baseline_momentum = 1.0;
    EXPECT_THROW(c.check(), ConfigError);
    c = RLConfig{};
    c.temperature = 0;
    EXPECT_THROW(c.check(), ConfigError);
    c = RLConfig{};
    c.episodes_per_step = 0;
    EXPECT_THROW(c.check(), ConfigError);
    EXPECT_EQ(RLConfig{}.learning_rate, 3e-5);
    EXPECT_EQ(RLConfig{}.episodes_per_step, 16);
}
