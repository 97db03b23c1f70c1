#include "uigen/codec/codec.hpp"

namespace uigen::codec {

namespace {

using Phase = GrammarState::Phase;

// Tokens still needed to finish from a state: remaining attributes of the open node, one
// CLOSE per open frame, then EOS.
int tokens_to_finish(const GrammarState& s) {
    switch (s.phase) {
        case Phase::expect_bos: return 9;
        case Phase::expect_root: return 8;
        case Phase::expect_eos: return 1;
        case Phase::done: return 0;
        case Phase::in_node: break;
    }
    const int stage = s.stack.back().stage;
    return (stage < 5 ? 5 - stage : 0) + static_cast<int>(s.stack.size()) + 1;
}

bool allowed(const GrammarState& s, TokenId t) {
    if (t <= tok::kPad || t >= tok::kVocabSize) return false;
    switch (s.phase) {
        case Phase::expect_bos: return t == tok::kBos;
        case Phase::expect_root: return t == tok::open(ui::ComponentKind::container);
        case Phase::expect_eos: return t == tok::kEos;
        case Phase::done: return false;
        case Phase::in_node: break;
    }
    const auto& top = s.stack.back();
    const bool root = s.stack.size() == 1;
    const int depth = static_cast<int>(s.stack.size());
    switch (top.stage) {
        case 0: return tok::is_x(t) && (!root || t == tok::x(0));
        case 1: return tok::is_y(t) && (!root || t == tok::y(0));
        case 2: return tok::is_w(t) && (root ? t == tok::w(ui::kGrid) : t <= tok::w(ui::kGrid - top.x));
        case 3: return tok::is_h(t) && (root ? t == tok::h(ui::kGrid) : t <= tok::h(ui::kGrid - top.y));
        case 4: return tok::is_color(t);
        default: break;
    }
    if (t == tok::kClose) return true;
    if (tok::is_text(t)) return top.stage == 5 && s.tokens_emitted + 1 + depth + 1 <= kMaxSeqLen;
    if (tok::is_open(t)) {
        return ui::is_container(top.kind) && depth < ui::kMaxDepth && s.nodes < ui::kMaxNodes &&
               s.tokens_emitted + 1 + 5 + 1 + depth + 1 <= kMaxSeqLen;
    }
    return false;
}

void apply(GrammarState& s, TokenId t) {
    ++s.tokens_emitted;
    switch (s.phase) {
        case Phase::expect_bos: s.phase = Phase::expect_root; return;
        case Phase::expect_eos: s.phase = Phase::done; return;
        case Phase::done: return;
        case Phase::expect_root:
            s.stack.push_back({ui::ComponentKind::container, 0, 0, 0, 0});
            s.nodes = 1;
            s.phase = Phase::in_node;
            return;
        case Phase::in_node: break;
    }
    auto& top = s.stack.back();
    if (top.stage < 5) {
        if (top.stage == 0) top.x = static_cast<std::int8_t>(t - tok::kXBase);
        if (top.stage == 1) top.y = static_cast<std::int8_t>(t - tok::kYBase);
        ++top.stage;
        return;
    }
    if (tok::is_text(t)) {
        top.stage = 6;
        return;
    }
    if (t == tok::kClose) {
        s.stack.pop_back();
        if (s.stack.empty()) s.phase = Phase::expect_eos;
        return;
    }
    ++top.children;
    top.stage = 6;
    s.stack.push_back({static_cast<ui::ComponentKind>(t - tok::kOpenBase), 0, 0, 0, 0});
    ++s.nodes;
}

}  // namespace

GrammarState GrammarState::after_bos() {
    GrammarState s;
    s.phase = Phase::expect_root;
    s.tokens_emitted = 1;
    return s;
}

TokenMask grammar_mask(const GrammarState& state, const Vocab& vocab) {
    TokenMask m(static_cast<std::size_t>(vocab.size()), 0);
    for (TokenId t = 0; t < vocab.size(); ++t) m[static_cast<std::size_t>(t)] = allowed(state, t) ? 1 : 0;
    return m;
}

std::optional<GrammarState> advance(const GrammarState& state, TokenId token) {
    if (!allowed(state, token)) return std::nullopt;
    GrammarState next = state;
    apply(next, token);
    // Budget invariant; holds for every state reachable through the mask.
    if (next.tokens_emitted + tokens_to_finish(next) > kMaxSeqLen) return std::nullopt;
    return next;
}

}  // namespace uigen::codec
