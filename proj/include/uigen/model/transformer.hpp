#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "uigen/codec/codec.hpp"
#include "uigen/nk/checkpoint.hpp"
#include "uigen/nk/ops.hpp"

namespace uigen::model {

struct ModelConfig {
    int d_model = 64;
    int n_heads = 4;
    int d_ff = 128;
    int n_enc_layers = 2;
    int n_dec_layers = 2;
    int max_len = codec::kMaxSeqLen;
    int vocab_size = codec::tok::kVocabSize;
    /// Base of the sinusoidal position code. 1000 follows the formula as published; the
    /// common choice elsewhere is 10000.
    double pe_base = 1000.0;

    int d_k() const noexcept { return d_model / n_heads; }
    /// Throws ConfigError.
    void check() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

struct Model {
    ModelConfig config;
    nk::ParamMap params;
};

/// Seeded initialisation: projections N(0, 1/fan_in), residual output projections further
/// scaled by 1/sqrt(2 * layers), output head N(0, 0.02^2), layer-norm gains 1, biases 0.
Model init_model(const ModelConfig& config, std::uint64_t seed);
/// Every parameter zero (uniform output distribution).
Model zero_model(const ModelConfig& config);

/// {"format": "uigen-model", "version": 1, "config": {...}, "params": {...}}; bit-exact.
std::string save_model(const Model& m);
Model load_model(const std::string& text);

/// sin(pos / base^(2i/d)) at entry 2i, cos(...) at entry 2i+1.
std::vector<double> positional_encoding(int pos, const ModelConfig& config);

/// Single-head scaled dot-product attention softmax(Q K^T / sqrt(d_k)) V, with optional
/// boolean mask (false = forbidden). `weights_out` receives the [m, n] weight matrix.
nk::Var attention(nk::Var q, nk::Var k, nk::Var v, const nk::AttnMask* mask = nullptr,
                  nk::Tensor* weights_out = nullptr);

/// One padded training pair. `dec_in` is the target sequence without its last token and
/// `targets` the sequence shifted left by one (teacher forcing); PAD positions are ignored.
struct TrainingBatch {
    std::vector<int> src;
    std::vector<int> dec_in;
    std::vector<int> targets;

    std::vector<std::uint8_t> src_pad() const;
    std::vector<std::uint8_t> target_mask() const;
};

/// Builds a pair from spec tokens and tree tokens, padding each to the given lengths (0 = no padding).
TrainingBatch make_batch(const std::vector<int>& spec_tokens, const std::vector<int>& tree_tokens,
                         std::size_t src_len = 0, std::size_t tgt_len = 0);

/// Model parameters bound as leaves of a tape.
class BoundParams {
public:
    BoundParams(nk::Tape& tape, const Model& model, bool requires_grad = true);
    nk::Var operator[](const std::string& name) const;
    const std::map<std::string, nk::Var>& all() const noexcept { return vars_; }

private:
    std::map<std::string, nk::Var> vars_;
};

/// Encoder output [src_len, d_model].
nk::Var encode(nk::Tape& tape, const BoundParams& p, const ModelConfig& cfg, const std::vector<int>& src);

/// Decoder logits [dec_in.size(), vocab_size] given the encoder output.
nk::Var decode(nk::Tape& tape, const BoundParams& p, const ModelConfig& cfg, nk::Var enc,
               const std::vector<std::uint8_t>& src_pad, const std::vector<int>& dec_in);

/// Teacher-forced logits [T, vocab_size] on the caller's tape.
nk::Var forward(nk::Tape& tape, const BoundParams& p, const TrainingBatch& batch, const ModelConfig& cfg);
/// Convenience inference wrapper.
nk::Tensor forward(const TrainingBatch& batch, const Model& model);

/// Mean cross-entropy over non-pad targets.
nk::Var cross_entropy_loss(nk::Var logits, const TrainingBatch& batch);

/// Autoregressive decoder that caches per-layer keys and values, so each step costs one
/// position. Produces the same logits as `forward` on the growing prefix.
class IncrementalDecoder {
public:
    IncrementalDecoder(const Model& model, const std::vector<int>& src);
    /// Appends `token` at the next position and returns the logits for the position after it.
    std::vector<double> step(int token);
    int position() const noexcept { return pos_; }

private:
    const Model& model_;
    std::vector<std::uint8_t> src_pad_;
    std::vector<nk::Tensor> cross_k_, cross_v_, self_k_, self_v_;
    int pos_ = 0;
};

struct DecodeConfig {
    enum class Mode { greedy, sample } mode = Mode::greedy;
    double temperature = 1.0;
    std::uint64_t seed = 0;
};

struct Generation {
    ui::UITree tree;
    std::vector<int> tokens;         // BOS ... EOS
    std::vector<double> step_logprobs;  // one per generated token, post-mask, at the decode temperature
    double logprob_sum() const noexcept;
};

/// Grammar-masked autoregressive generation. Forbidden tokens get -inf before the softmax,
/// so the result always decodes. Greedy picks the lowest-id argmax.
Generation generate(const codec::DesignSpec& spec, const Model& model, const DecodeConfig& decode);

/// Log-probability of a complete token sequence under the masked, temperature-scaled policy,
/// recorded on `tape` so it can be differentiated.
nk::Var sequence_log_prob(nk::Tape& tape, const BoundParams& p, const ModelConfig& cfg,
                          const std::vector<int>& spec_tokens, const std::vector<int>& tree_tokens,
                          double temperature = 1.0);

}  // namespace uigen::model
