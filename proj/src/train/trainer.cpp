#include "uigen/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "uigen/core/error.hpp"
#include "uigen/core/rng.hpp"
#include "uigen/ui/similarity.hpp"

namespace uigen::train {

using model::Model;
using nk::Tensor;

void TrainConfig::check() const {
    if (epochs <= 0 || batch_size <= 0) throw ConfigError("epochs and batch size must be positive");
    if (!(learning_rate > 0.0) || !(adam_eps > 0.0) || !(grad_clip_norm > 0.0)) {
        throw ConfigError("learning rate, adam eps and clip norm must be positive");
    }
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
        throw ConfigError("adam betas must lie in (0, 1)");
    }
    if (max_steps < 0) throw ConfigError("max_steps must be nonnegative");
}

double clip_gradients(GradMap& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& [_, g] : grads)
        for (double v : g.values()) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double s = max_norm / norm;
        for (auto& [_, g] : grads)
            for (double& v : g.values()) v *= s;
    }
    return norm;
}

void Adam::step(nk::ParamMap& params, const GradMap& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (auto& [name, p] : params) {
        const auto git = grads.find(name);
        if (git == grads.end()) continue;
        const Tensor& g = git->second;
        auto [mit, m_new] = m_.try_emplace(name, p.shape(), 0.0);
        auto [vit, v_new] = v_.try_emplace(name, p.shape(), 0.0);
        double* m = mit->second.data();
        double* v = vit->second.data();
        double* w = p.data();
        const double* gd = g.data();
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = b1_ * m[i] + (1.0 - b1_) * gd[i];
            v[i] = b2_ * v[i] + (1.0 - b2_) * gd[i] * gd[i];
            w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
    }
}

namespace {

struct Encoded {
    std::vector<int> src;
    std::vector<int> tgt;
};

Encoded encode_example(const Example& ex) { return {codec::encode_spec(ex.spec), codec::encode_tree(ex.tree)}; }

std::size_t target_count(const Encoded& e) { return e.tgt.size() - 1; }

void add_into(GradMap& acc, const GradMap& g) {
    for (const auto& [name, t] : g) {
        auto [it, fresh] = acc.try_emplace(name, t);
        if (fresh) continue;
        double* a = it->second.data();
        const double* b = t.data();
        for (std::size_t i = 0; i < t.size(); ++i) a[i] += b[i];
    }
}

}  // namespace

double batch_loss(const Model& m, const Dataset& batch, GradMap* grads) {
    if (batch.empty()) throw EmptyDatasetError("empty batch");
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
    std::vector<Encoded> enc(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) enc[i] = encode_example(batch[i]);
    std::size_t total = 0;
    for (const auto& e : enc) total += target_count(e);
    const bool want_grad = grads != nullptr;

    std::vector<double> losses(batch.size());
    std::vector<GradMap> per(want_grad ? batch.size() : 0);
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        nk::Tape tape(want_grad);
        model::BoundParams p(tape, m, want_grad);
        const auto b = model::make_batch(enc[k].src, enc[k].tgt);
        const double w = static_cast<double>(target_count(enc[k])) / static_cast<double>(total);
        nk::Var loss = nk::scale(model::cross_entropy_loss(model::forward(tape, p, b, m.config), b), w);
        losses[k] = loss.value()[0];
        if (want_grad) {
            tape.backward(loss);
            for (const auto& [name, v] : p.all()) {
                const Tensor& g = tape.grad(v);
                per[k].emplace(name, g.empty() ? Tensor(v.value().shape(), 0.0) : g);
            }
        }
    }
    double loss = 0.0;
    for (double l : losses) loss += l;
    if (want_grad) {
        grads->clear();
        for (const auto& g : per) add_into(*grads, g);
    }
    return loss;
}

double dataset_loss(const Model& m, const Dataset& data) {
    if (data.empty()) throw EmptyDatasetError("empty dataset");
    double sum = 0.0;
    std::size_t tokens = 0;
    constexpr std::size_t kChunk = 64;
    for (std::size_t lo = 0; lo < data.size(); lo += kChunk) {
        const std::size_t hi = std::min(data.size(), lo + kChunk);
        const Dataset chunk(data.begin() + static_cast<std::ptrdiff_t>(lo), data.begin() + static_cast<std::ptrdiff_t>(hi));
        std::size_t n = 0;
        for (const auto& ex : chunk) n += codec::encode_tree(ex.tree).size() - 1;
        sum += batch_loss(m, chunk, nullptr) * static_cast<double>(n);
        tokens += n;
    }
    return sum / static_cast<double>(tokens);
}

TrainResult train(const Dataset& train_set, const Dataset& val_set, const Model& init, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.check();
    init.config.check();
    if (train_set.empty()) throw EmptyDatasetError("training set is empty");
    const Dataset& select_set = val_set.empty() ? train_set : val_set;

    TrainResult result;
    Model model = init;
    Adam adam(cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    const Rng shuffle_root(cfg.seed);

    EpochRecord first{0, dataset_loss(model, train_set), dataset_loss(model, select_set)};
    result.curve.push_back(first);
    if (on_epoch) on_epoch(first);
    double best_val = first.val_loss;
    result.best = model;

    std::vector<std::size_t> order(train_set.size());
    GradMap grads;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = shuffle_root.split(static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        double loss_sum = 0.0;
        int batches = 0;
        for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(cfg.batch_size)) {
            if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) break;
            const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg.batch_size));
            Dataset batch;
            for (std::size_t i = lo; i < hi; ++i) batch.push_back(train_set[order[i]]);
            const double loss = batch_loss(model, batch, &grads);
            const double norm = clip_gradients(grads, cfg.grad_clip_norm);
            if (!std::isfinite(loss) || !std::isfinite(norm)) {
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batches));
            }
            adam.step(model.params, grads);
            ++result.steps;
            loss_sum += loss;
            ++batches;
        }
        if (batches == 0) break;
        EpochRecord rec{epoch, loss_sum / batches, dataset_loss(model, select_set)};
        if (!std::isfinite(rec.val_loss)) {
            throw DivergenceError("non-finite validation loss after epoch " + std::to_string(epoch));
        }
        result.curve.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (rec.val_loss < best_val) {
            best_val = rec.val_loss;
            result.best = model;
            result.best_epoch = epoch;
        }
    }
    return result;
}

nlohmann::json curve_json(const std::vector<EpochRecord>& curve) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : curve) out.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_loss", r.val_loss}});
    return out;
}

double token_accuracy(const Model& m, const Dataset& data) {
    if (data.empty()) throw EmptyDatasetError("empty dataset");
    const auto n = static_cast<std::ptrdiff_t>(data.size());
    std::vector<std::size_t> correct(data.size()), total(data.size());
#pragma omp parallel for schedule(dynamic, 4) if (n > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const Encoded e = encode_example(data[k]);
        const auto b = model::make_batch(e.src, e.tgt);
        const Tensor logits = model::forward(b, m);
        for (int t = 0; t < logits.rows(); ++t) {
            const int target = b.targets[static_cast<std::size_t>(t)];
            if (target == codec::tok::kPad) continue;
            int best = 0;
            for (int j = 1; j < logits.cols(); ++j)
                if (logits.at(t, j) > logits.at(t, best)) best = j;
            ++total[k];
            if (best == target) ++correct[k];
        }
    }
    const auto c = std::accumulate(correct.begin(), correct.end(), std::size_t{0});
    const auto t = std::accumulate(total.begin(), total.end(), std::size_t{0});
    return t == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(t);
}

EvalReport evaluate(const Model& m, const Dataset& test_set, const reward::RewardConfig& reward_cfg,
                    const model::DecodeConfig& decode) {
    if (test_set.empty()) throw EmptyDatasetError("test set is empty");
    EvalReport r;
    r.n_samples = test_set.size();
    r.token_accuracy = token_accuracy(m, test_set);
    double time = 0.0, sim = 0.0, rew = 0.0;
    for (const auto& ex : test_set) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto gen = model::generate(ex.spec, m, decode);
        const auto t1 = std::chrono::steady_clock::now();
        time += std::chrono::duration<double>(t1 - t0).count();
        sim += ui::tree_similarity(gen.tree, ex.tree);
        rew += reward::reward(gen.tree, reward_cfg).r;
    }
    const auto n = static_cast<double>(test_set.size());
    r.mean_gen_time_s = time / n;
    r.mean_similarity = sim / n;
    r.mean_reward = rew / n;
    return r;
}

nlohmann::json to_json(const EvalReport& r) {
    return {{"token_accuracy", r.token_accuracy},
            {"mean_gen_time_s", r.mean_gen_time_s},
            {"mean_similarity", r.mean_similarity},
            {"mean_reward", r.mean_reward},
            {"n_samples", r.n_samples}};
}

}  // namespace uigen::train
