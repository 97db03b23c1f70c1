#include "uigen/model/transformer.hpp"

#include <cmath>
#include <limits>

#include "uigen/core/error.hpp"
#include "uigen/core/rng.hpp"

namespace uigen::model {

using nk::Tape;
using nk::Tensor;
using nk::Var;

// ---- configuration -------------------------------------------------------------------------

void ModelConfig::check() const {
    if (d_model <= 0 || n_heads <= 0 || d_ff <= 0 || n_enc_layers < 0 || n_dec_layers < 0 || max_len <= 1 ||
        vocab_size <= 0) {
        throw ConfigError("model sizes must be positive");
    }
    if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by n_heads");
    if (d_model % 2 != 0) throw ConfigError("d_model must be even for the position code");
    if (vocab_size != codec::tok::kVocabSize) throw ConfigError("vocab_size must match the token table (311)");
    if (!(pe_base > 1.0)) throw ConfigError("pe_base must exceed 1");
}

nlohmann::json to_json(const ModelConfig& c) {
    return {{"d_model", c.d_model},       {"n_heads", c.n_heads},       {"d_ff", c.d_ff},
            {"n_enc_layers", c.n_enc_layers}, {"n_dec_layers", c.n_dec_layers}, {"max_len", c.max_len},
            {"vocab_size", c.vocab_size}, {"pe_base", c.pe_base}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        c.d_model = j.value("d_model", c.d_model);
        c.n_heads = j.value("n_heads", c.n_heads);
        c.d_ff = j.value("d_ff", c.d_ff);
        c.n_enc_layers = j.value("n_enc_layers", c.n_enc_layers);
        c.n_dec_layers = j.value("n_dec_layers", c.n_dec_layers);
        c.max_len = j.value("max_len", c.max_len);
        c.vocab_size = j.value("vocab_size", c.vocab_size);
        c.pe_base = j.value("pe_base", c.pe_base);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad model config: ") + e.what());
    }
    c.check();
    return c;
}

// ---- parameters ----------------------------------------------------------------------------

namespace {

struct ParamSpec {
    std::vector<int> shape;
    enum Init { normal, residual_out, head, ones, zeros } init;
};

std::map<std::string, ParamSpec> param_specs(const ModelConfig& c) {
    std::map<std::string, ParamSpec> s;
    const int d = c.d_model, f = c.d_ff, V = c.vocab_size;
    auto ln = [&](const std::string& p) {
        s[p + ".g"] = {{d}, ParamSpec::ones};
        s[p + ".b"] = {{d}, ParamSpec::zeros};
    };
    auto attn = [&](const std::string& p) {
        for (const char* w : {".wq", ".wk", ".wv"}) s[p + w] = {{d, d}, ParamSpec::normal};
        s[p + ".wo"] = {{d, d}, ParamSpec::residual_out};
    };
    auto ff = [&](const std::string& p) {
        s[p + ".w1"] = {{d, f}, ParamSpec::normal};
        s[p + ".b1"] = {{f}, ParamSpec::zeros};
        s[p + ".w2"] = {{f, d}, ParamSpec::residual_out};
        s[p + ".b2"] = {{d}, ParamSpec::zeros};
    };
    s["tok_emb"] = {{V, d}, ParamSpec::normal};
    for (int l = 0; l < c.n_enc_layers; ++l) {
        const std::string p = "enc." + std::to_string(l);
        ln(p + ".ln1");
        attn(p + ".attn");
        ln(p + ".ln2");
        ff(p + ".ff");
    }
    ln("enc.ln_f");
    for (int l = 0; l < c.n_dec_layers; ++l) {
        const std::string p = "dec." + std::to_string(l);
        ln(p + ".ln1");
        attn(p + ".self");
        ln(p + ".ln2");
        attn(p + ".cross");
        ln(p + ".ln3");
        ff(p + ".ff");
    }
    ln("dec.ln_f");
    s["out.w"] = {{d, V}, ParamSpec::head};
    s["out.b"] = {{V}, ParamSpec::zeros};
    return s;
}

}  // namespace

Model init_model(const ModelConfig& config, std::uint64_t seed) {
    config.check();
    Model m{config, {}};
    const Rng root(seed);
    const int layers = std::max(1, config.n_enc_layers + config.n_dec_layers);
    std::uint64_t stream = 0;
    for (const auto& [name, spec] : param_specs(config)) {
        Rng rng = root.split(stream++);
        Tensor t(spec.shape, 0.0);
        const int fan_in = spec.shape[0];
        double std_dev = 0.0;
        switch (spec.init) {
            case ParamSpec::normal: std_dev = 1.0 / std::sqrt(static_cast<double>(fan_in)); break;
            case ParamSpec::residual_out:
                std_dev = 1.0 / std::sqrt(static_cast<double>(fan_in)) / std::sqrt(2.0 * layers);
                break;
            case ParamSpec::head: std_dev = 0.02; break;
            case ParamSpec::ones: t.fill(1.0); break;
            case ParamSpec::zeros: break;
        }
        if (name == "tok_emb") std_dev = 1.0 / std::sqrt(static_cast<double>(config.d_model));
        if (std_dev > 0.0)
            for (auto& v : t.values()) v = std_dev * rng.normal();
        m.params.emplace(name, std::move(t));
    }
    return m;
}

Model zero_model(const ModelConfig& config) {
    config.check();
    Model m{config, {}};
    for (const auto& [name, spec] : param_specs(config)) m.params.emplace(name, Tensor(spec.shape, 0.0));
    return m;
}

std::string save_model(const Model& m) {
    nlohmann::json j;
    j["format"] = "uigen-model";
    j["version"] = nk::kCheckpointVersion;
    j["config"] = to_json(m.config);
    j["params"] = nk::params_to_json(m.params);
    return j.dump();
}

Model load_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed model checkpoint: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "uigen-model") throw ParseError("not a uigen model checkpoint");
    if (j.value("version", 0) != nk::kCheckpointVersion) throw ParseError("unsupported checkpoint version");
    Model m;
    m.config = config_from_json(j.at("config"));
    m.params = nk::params_from_json(j.at("params"));
    for (const auto& [name, spec] : param_specs(m.config)) {
        const auto it = m.params.find(name);
        if (it == m.params.end()) throw ParseError("checkpoint lacks parameter '" + name + "'");
        if (it->second.shape() != spec.shape) throw ParseError("parameter '" + name + "' has the wrong shape");
    }
    return m;
}

// ---- building blocks -----------------------------------------------------------------------

std::vector<double> positional_encoding(int pos, const ModelConfig& config) {
    const int d = config.d_model;
    std::vector<double> pe(static_cast<std::size_t>(d));
    for (int i = 0; 2 * i < d; ++i) {
        const double angle = pos / std::pow(config.pe_base, 2.0 * i / d);
        pe[static_cast<std::size_t>(2 * i)] = std::sin(angle);
        if (2 * i + 1 < d) pe[static_cast<std::size_t>(2 * i + 1)] = std::cos(angle);
    }
    return pe;
}

Var attention(Var q, Var k, Var v, const nk::AttnMask* mask, Tensor* weights_out) {
    return nk::attention(q, k, v, mask, 1, weights_out);
}

std::vector<std::uint8_t> TrainingBatch::src_pad() const {
    std::vector<std::uint8_t> m(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) m[i] = src[i] == codec::tok::kPad;
    return m;
}

std::vector<std::uint8_t> TrainingBatch::target_mask() const {
    std::vector<std::uint8_t> m(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) m[i] = targets[i] != codec::tok::kPad;
    return m;
}

TrainingBatch make_batch(const std::vector<int>& spec_tokens, const std::vector<int>& tree_tokens, std::size_t src_len,
                         std::size_t tgt_len) {
    if (tree_tokens.size() < 2) throw ShapeError("target sequence needs at least two tokens");
    TrainingBatch b;
    b.src = spec_tokens;
    if (b.src.size() < src_len) b.src.resize(src_len, codec::tok::kPad);
    std::vector<int> y = tree_tokens;
    if (y.size() < tgt_len) y.resize(tgt_len, codec::tok::kPad);
    b.dec_in.assign(y.begin(), y.end() - 1);
    b.targets.assign(y.begin() + 1, y.end());
    return b;
}

BoundParams::BoundParams(Tape& tape, const Model& model, bool requires_grad) {
    for (const auto& [name, t] : model.params) vars_.emplace(name, tape.leaf(t, requires_grad));
}

Var BoundParams::operator[](const std::string& name) const {
    const auto it = vars_.find(name);
    if (it == vars_.end()) throw ConfigError("model has no parameter '" + name + "'");
    return it->second;
}

namespace {

Var norm(const BoundParams& p, const std::string& prefix, Var x) {
    return nk::layer_norm(x, p[prefix + ".g"], p[prefix + ".b"]);
}

Var feed_forward(const BoundParams& p, const std::string& prefix, Var x) {
    Var h = nk::gelu(nk::add_row(nk::matmul(x, p[prefix + ".w1"]), p[prefix + ".b1"]));
    return nk::add_row(nk::matmul(h, p[prefix + ".w2"]), p[prefix + ".b2"]);
}

// Token embeddings scaled by sqrt(d) plus the position code for positions start.. .
Var embed(Tape& tape, const BoundParams& p, const ModelConfig& cfg, std::span<const int> ids, int start) {
    const int n = static_cast<int>(ids.size());
    if (start + n > cfg.max_len) throw ShapeError("sequence longer than max_len");
    Var e = nk::scale(nk::embedding(p["tok_emb"], ids), std::sqrt(static_cast<double>(cfg.d_model)));
    Tensor pe({n, cfg.d_model});
    for (int i = 0; i < n; ++i) {
        const auto row = positional_encoding(start + i, cfg);
        for (int c = 0; c < cfg.d_model; ++c) pe.at(i, c) = row[static_cast<std::size_t>(c)];
    }
    return nk::add(e, tape.constant(std::move(pe)));
}

nk::AttnMask key_mask(int rows, const std::vector<std::uint8_t>& key_pad) {
    nk::AttnMask m = nk::AttnMask::all(rows, static_cast<int>(key_pad.size()));
    m.mask_keys(key_pad);
    return m;
}

Tensor append_row(const Tensor& cache, const Tensor& row) {
    if (cache.empty()) return row;
    std::vector<double> d(cache.values().begin(), cache.values().end());
    d.insert(d.end(), row.values().begin(), row.values().end());
    return Tensor({cache.rows() + 1, cache.cols()}, std::move(d));
}

}  // namespace

Var encode(Tape& tape, const BoundParams& p, const ModelConfig& cfg, const std::vector<int>& src) {
    std::vector<std::uint8_t> pad(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) pad[i] = src[i] == codec::tok::kPad;
    const nk::AttnMask mask = key_mask(static_cast<int>(src.size()), pad);
    Var h = embed(tape, p, cfg, src, 0);
    for (int l = 0; l < cfg.n_enc_layers; ++l) {
        const std::string pre = "enc." + std::to_string(l);
        Var a = norm(p, pre + ".ln1", h);
        Var att = nk::attention(nk::matmul(a, p[pre + ".attn.wq"]), nk::matmul(a, p[pre + ".attn.wk"]),
                                nk::matmul(a, p[pre + ".attn.wv"]), &mask, cfg.n_heads);
        h = nk::add(h, nk::matmul(att, p[pre + ".attn.wo"]));
        h = nk::add(h, feed_forward(p, pre + ".ff", norm(p, pre + ".ln2", h)));
    }
    return norm(p, "enc.ln_f", h);
}

Var decode(Tape& tape, const BoundParams& p, const ModelConfig& cfg, Var enc, const std::vector<std::uint8_t>& src_pad,
           const std::vector<int>& dec_in) {
    const int T = static_cast<int>(dec_in.size());
    std::vector<std::uint8_t> dec_pad(dec_in.size());
    for (std::size_t i = 0; i < dec_in.size(); ++i) dec_pad[i] = dec_in[i] == codec::tok::kPad;
    nk::AttnMask self_mask = nk::AttnMask::causal(T);
    self_mask.mask_keys(dec_pad);
    // A padded query may have lost every key; let it see itself (its output is never scored).
    for (int i = 0; i < T; ++i) self_mask.allowed[static_cast<std::size_t>(i) * T + i] = 1;
    const nk::AttnMask cross_mask = key_mask(T, src_pad);

    Var g = embed(tape, p, cfg, dec_in, 0);
    for (int l = 0; l < cfg.n_dec_layers; ++l) {
        const std::string pre = "dec." + std::to_string(l);
        Var a = norm(p, pre + ".ln1", g);
        Var sa = nk::attention(nk::matmul(a, p[pre + ".self.wq"]), nk::matmul(a, p[pre + ".self.wk"]),
                               nk::matmul(a, p[pre + ".self.wv"]), &self_mask, cfg.n_heads);
        g = nk::add(g, nk::matmul(sa, p[pre + ".self.wo"]));
        Var b = norm(p, pre + ".ln2", g);
        Var ca = nk::attention(nk::matmul(b, p[pre + ".cross.wq"]), nk::matmul(enc, p[pre + ".cross.wk"]),
                               nk::matmul(enc, p[pre + ".cross.wv"]), &cross_mask, cfg.n_heads);
        g = nk::add(g, nk::matmul(ca, p[pre + ".cross.wo"]));
        g = nk::add(g, feed_forward(p, pre + ".ff", norm(p, pre + ".ln3", g)));
    }
    return nk::add_row(nk::matmul(norm(p, "dec.ln_f", g), p["out.w"]), p["out.b"]);
}

Var forward(Tape& tape, const BoundParams& p, const TrainingBatch& batch, const ModelConfig& cfg) {
    if (batch.src.empty() || batch.dec_in.empty()) throw ShapeError("empty source or target sequence");
    if (batch.dec_in.size() != batch.targets.size()) throw ShapeError("dec_in and targets differ in length");
    Var enc = encode(tape, p, cfg, batch.src);
    return decode(tape, p, cfg, enc, batch.src_pad(), batch.dec_in);
}

Tensor forward(const TrainingBatch& batch, const Model& model) {
    Tape tape(false);
    BoundParams p(tape, model, false);
    return forward(tape, p, batch, model.config).value();
}

Var cross_entropy_loss(Var logits, const TrainingBatch& batch) {
    const auto mask = batch.target_mask();
    return nk::cross_entropy(logits, batch.targets, mask);
}

// ---- incremental decoding ------------------------------------------------------------------

IncrementalDecoder::IncrementalDecoder(const Model& model, const std::vector<int>& src) : model_(model) {
    const ModelConfig& cfg = model.config;
    src_pad_.resize(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) src_pad_[i] = src[i] == codec::tok::kPad;
    Tape tape(false);
    BoundParams p(tape, model, false);
    Var enc = encode(tape, p, cfg, src);
    for (int l = 0; l < cfg.n_dec_layers; ++l) {
        const std::string pre = "dec." + std::to_string(l);
        cross_k_.push_back(nk::matmul(enc, p[pre + ".cross.wk"]).value());
        cross_v_.push_back(nk::matmul(enc, p[pre + ".cross.wv"]).value());
    }
    self_k_.resize(static_cast<std::size_t>(cfg.n_dec_layers));
    self_v_.resize(static_cast<std::size_t>(cfg.n_dec_layers));
}

std::vector<double> IncrementalDecoder::step(int token) {
    const ModelConfig& cfg = model_.config;
    Tape tape(false);
    BoundParams p(tape, model_, false);
    const nk::AttnMask cross_mask = key_mask(1, src_pad_);
    const int ids[1] = {token};
    Var g = embed(tape, p, cfg, ids, pos_);
    for (int l = 0; l < cfg.n_dec_layers; ++l) {
        const std::string pre = "dec." + std::to_string(l);
        const auto li = static_cast<std::size_t>(l);
        Var a = norm(p, pre + ".ln1", g);
        self_k_[li] = append_row(self_k_[li], nk::matmul(a, p[pre + ".self.wk"]).value());
        self_v_[li] = append_row(self_v_[li], nk::matmul(a, p[pre + ".self.wv"]).value());
        Var sa = nk::attention(nk::matmul(a, p[pre + ".self.wq"]), tape.leaf(self_k_[li], false),
                               tape.leaf(self_v_[li], false), nullptr, cfg.n_heads);
        g = nk::add(g, nk::matmul(sa, p[pre + ".self.wo"]));
        Var b = norm(p, pre + ".ln2", g);
        Var ca = nk::attention(nk::matmul(b, p[pre + ".cross.wq"]), tape.leaf(cross_k_[li], false),
                               tape.leaf(cross_v_[li], false), &cross_mask, cfg.n_heads);
        g = nk::add(g, nk::matmul(ca, p[pre + ".cross.wo"]));
        g = nk::add(g, feed_forward(p, pre + ".ff", norm(p, pre + ".ln3", g)));
    }
    Var logits = nk::add_row(nk::matmul(norm(p, "dec.ln_f", g), p["out.w"]), p["out.b"]);
    ++pos_;
    const Tensor& v = logits.value();
    return {v.values().begin(), v.values().end()};
}

// ---- generation ----------------------------------------------------------------------------

double Generation::logprob_sum() const noexcept {
    double s = 0.0;
    for (double v : step_logprobs) s += v;
    return s;
}

Generation generate(const codec::DesignSpec& spec, const Model& model, const DecodeConfig& decode_cfg) {
    if (!(decode_cfg.temperature > 0.0)) throw RangeError("decode temperature must be positive");
    const auto src = codec::encode_spec(spec);
    IncrementalDecoder dec(model, src);
    Rng rng(decode_cfg.seed);
    Generation out;
    codec::GrammarState state = codec::GrammarState::after_bos();
    out.tokens.push_back(codec::tok::kBos);
    const double inv_t = 1.0 / decode_cfg.temperature;
    std::vector<double> probs;
    while (!state.terminal()) {
        const std::vector<double> logits = dec.step(out.tokens.back());
        const codec::TokenMask mask = codec::grammar_mask(state);
        double mx = -std::numeric_limits<double>::infinity();
        int argmax = -1;
        for (std::size_t j = 0; j < logits.size(); ++j) {
            if (!mask[j]) continue;
            const double z = logits[j] * inv_t;
            if (z > mx) {
                mx = z;
                argmax = static_cast<int>(j);
            }
        }
        probs.assign(logits.size(), 0.0);
        double s = 0.0;
        for (std::size_t j = 0; j < logits.size(); ++j)
            if (mask[j]) s += (probs[j] = std::exp(logits[j] * inv_t - mx));
        int chosen = argmax;
        if (decode_cfg.mode == DecodeConfig::Mode::sample) {
            double r = rng.uniform() * s;
            for (std::size_t j = 0; j < logits.size(); ++j) {
                if (!mask[j]) continue;
                chosen = static_cast<int>(j);
                if (r < probs[j]) break;
                r -= probs[j];
            }
        }
        out.step_logprobs.push_back(logits[static_cast<std::size_t>(chosen)] * inv_t - mx - std::log(s));
        out.tokens.push_back(chosen);
        state = *codec::advance(state, chosen);
    }
    out.tree = codec::decode_tokens(out.tokens, spec.device);
    return out;
}

Var sequence_log_prob(Tape& tape, const BoundParams& p, const ModelConfig& cfg, const std::vector<int>& spec_tokens,
                      const std::vector<int>& tree_tokens, double temperature) {
    const TrainingBatch b = make_batch(spec_tokens, tree_tokens);
    std::vector<codec::TokenMask> masks;
    masks.reserve(b.targets.size());
    codec::GrammarState state = codec::GrammarState::after_bos();
    for (int t : b.targets) {
        masks.push_back(codec::grammar_mask(state));
        const auto next = codec::advance(state, t);
        if (!next) throw DecodeError(masks.size(), "token sequence violates the grammar");
        state = *next;
    }
    Var logits = forward(tape, p, b, cfg);
    return nk::masked_log_prob(logits, b.targets, masks, temperature);
}

}  // namespace uigen::model
