#include "uigen/rl/reinforce.hpp"

#include <cmath>

#include "uigen/core/error.hpp"

namespace uigen::rl {

using model::Model;
using nk::Tensor;

void RLConfig::check() const {
    if (steps < 0) throw ConfigError("RL steps must be nonnegative");
    if (episodes_per_step <= 0) throw ConfigError("episodes per step must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("RL learning rate must be positive");
    if (!(baseline_momentum >= 0.0 && baseline_momentum < 1.0)) throw ConfigError("baseline momentum must lie in [0, 1)");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
}

Episode sample_episode(const Model& m, const codec::DesignSpec& spec, double temperature, Rng& rng,
                       const reward::RewardConfig& reward_cfg) {
    model::DecodeConfig dc;
    dc.mode = model::DecodeConfig::Mode::sample;
    dc.temperature = temperature;
    dc.seed = rng.next();
    auto gen = model::generate(spec, m, dc);
    Episode e;
    e.spec = spec;
    e.logprob_sum = gen.logprob_sum();
    e.reward = reward::reward(gen.tree, reward_cfg).r;
    e.tokens = std::move(gen.tokens);
    e.tree = std::move(gen.tree);
    return e;
}

train::GradMap policy_gradient(const Model& m, const std::vector<Episode>& batch, double baseline, double temperature) {
    if (batch.empty()) throw EmptyDatasetError("empty episode batch");
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
    std::vector<train::GradMap> per(batch.size());
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double adv = batch[k].reward - baseline;
        if (adv == 0.0) continue;
        nk::Tape tape;
        model::BoundParams p(tape, m);
        nk::Var lp = model::sequence_log_prob(tape, p, m.config, codec::encode_spec(batch[k].spec), batch[k].tokens,
                                              temperature);
        // Minimising -adv * logp / N ascends the objective.
        tape.backward(nk::scale(lp, -adv / static_cast<double>(n)));
        for (const auto& [name, v] : p.all()) {
            const Tensor& g = tape.grad(v);
            if (!g.empty()) per[k].emplace(name, g);
        }
    }
    train::GradMap out;
    for (const auto& g : per) {
        for (const auto& [name, t] : g) {
            auto [it, fresh] = out.try_emplace(name, t);
            if (fresh) continue;
            for (std::size_t j = 0; j < t.size(); ++j) it->second[j] += t[j];
        }
    }
    return out;
}

StepResult reinforce_step(Model& m, const std::vector<Episode>& batch, double baseline, double momentum,
                          double temperature, PolicyOptimizer& opt) {
    if (batch.empty()) throw EmptyDatasetError("empty episode batch");
    StepResult r;
    for (const auto& e : batch) r.mean_reward += e.reward;
    r.mean_reward /= static_cast<double>(batch.size());

    bool any = false;
    for (const auto& e : batch) any = any || e.reward != baseline;
    if (any) {
        train::GradMap grads = policy_gradient(m, batch, baseline, temperature);
        const double norm = opt.clip > 0.0 ? train::clip_gradients(grads, opt.clip) : 0.0;
        bool finite = std::isfinite(norm);
        for (const auto& [_, g] : grads) finite = finite && g.all_finite();
        if (!finite) throw DivergenceError("non-finite policy gradient");
        if (opt.kind == RLConfig::Optimizer::adam) {
            opt.adam.step(m.params, grads);
        } else {
            for (auto& [name, p] : m.params) {
                const auto it = grads.find(name);
                if (it == grads.end()) continue;
                for (std::size_t j = 0; j < p.size(); ++j) p[j] -= opt.lr * it->second[j];
            }
        }
        r.updated = true;
    }
    r.baseline = momentum * baseline + (1.0 - momentum) * r.mean_reward;
    return r;
}

FinetuneResult finetune(const Model& init, const std::vector<codec::DesignSpec>& specs,
                        const reward::RewardConfig& reward_cfg, const RLConfig& cfg, const StepCallback& on_step) {
    cfg.check();
    FinetuneResult out{init, {}, 0.0};
    if (cfg.steps == 0) return out;
    if (specs.empty()) throw EmptyDatasetError("no specs to fine-tune on");
    PolicyOptimizer opt(cfg);
    const Rng root(cfg.seed);
    bool have_baseline = false;
    for (int step = 0; step < cfg.steps; ++step) {
        Rng pick = root.split(2 * static_cast<std::uint64_t>(step));
        const Rng sample_root = root.split(2 * static_cast<std::uint64_t>(step) + 1);
        std::vector<codec::DesignSpec> chosen;
        for (int i = 0; i < cfg.episodes_per_step; ++i) chosen.push_back(specs[pick.below(specs.size())]);
        std::vector<Episode> batch(chosen.size());
        const auto n = static_cast<std::ptrdiff_t>(chosen.size());
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            Rng rng = sample_root.split(static_cast<std::uint64_t>(i));
            batch[static_cast<std::size_t>(i)] =
                sample_episode(out.model, chosen[static_cast<std::size_t>(i)], cfg.temperature, rng, reward_cfg);
        }
        if (!have_baseline) {
            double mean = 0.0;
            for (const auto& e : batch) mean += e.reward;
            out.baseline = mean / static_cast<double>(batch.size());
            have_baseline = true;
        }
        const StepResult r = reinforce_step(out.model, batch, out.baseline, cfg.baseline_momentum, cfg.temperature, opt);
        out.baseline = r.baseline;
        out.reward_curve.push_back(r.mean_reward);
        if (on_step) on_step(step, r.mean_reward, r.baseline);
    }
    return out;
}

double mean_policy_reward(const Model& m, const std::vector<codec::DesignSpec>& specs,
                          const reward::RewardConfig& reward_cfg, double temperature, std::uint64_t seed,
                          int samples_per_spec) {
    if (specs.empty()) throw EmptyDatasetError("no specs to evaluate");
    const Rng root(seed);
    const auto n = static_cast<std::ptrdiff_t>(specs.size());
    std::vector<double> sums(specs.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        Rng rng = root.split(static_cast<std::uint64_t>(i));
        for (int s = 0; s < samples_per_spec; ++s)
            sums[static_cast<std::size_t>(i)] +=
                sample_episode(m, specs[static_cast<std::size_t>(i)], temperature, rng, reward_cfg).reward;
    }
    double total = 0.0;
    for (double v : sums) total += v;
    return total / (static_cast<double>(specs.size()) * samples_per_spec);
}

nlohmann::json curve_json(const std::vector<double>& curve) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < curve.size(); ++i) out.push_back({{"step", i}, {"mean_reward", curve[i]}});
    return out;
}

}  // namespace uigen::rl
