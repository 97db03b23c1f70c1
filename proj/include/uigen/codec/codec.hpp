#pragma once

#include <bitset>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "uigen/codec/vocab.hpp"
#include "uigen/ui/tree.hpp"

namespace uigen::codec {

enum class Goal : std::uint8_t { responsive, accessible };

/// Encoder-side description of the wanted interface.
struct DesignSpec {
    ui::Device device = ui::Device::phone;
    /// (kind, count) pairs; count in 1..8, at most 8 entries.
    std::vector<std::pair<ui::ComponentKind, int>> required;
    bool responsive = false;
    bool accessible = false;

    /// Merges duplicate kinds (counts capped at 8), sorts by kind order and truncates to 8
    /// entries. Two specs describing the same multiset compare equal after this.
    DesignSpec canonical() const;
    friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

/// Checks the DesignSpec invariants. Throws RangeError.
void check_spec(const DesignSpec& spec);

/// BOS, then per node (depth-first) OPEN_kind X Y W H C [TXT] children CLOSE, then EOS.
/// Throws CapacityError above 256 tokens.
std::vector<TokenId> encode_tree(const ui::UITree& tree, const Vocab& vocab = Vocab::standard());

/// Inverse of encode_tree. The device is not part of the token stream and is supplied by the
/// caller. Trailing PAD after EOS is accepted. Throws DecodeError{position, reason}.
ui::UITree decode_tokens(const std::vector<TokenId>& tokens, ui::Device device = ui::Device::phone,
                         const Vocab& vocab = Vocab::standard());

/// [BOS, DEV_*, (REQ_kind, CNT_n)*, GOAL_responsive?, GOAL_accessible?, EOS] on the canonical spec.
std::vector<TokenId> encode_spec(const DesignSpec& spec, const Vocab& vocab = Vocab::standard());

/// Inverse of encode_spec (used when reading specs back from files and the CLI).
DesignSpec decode_spec(const std::vector<TokenId>& tokens);

// ---- grammar automaton --------------------------------------------------------------------

/// Pushdown state after some prefix of a tree encoding. Advanced by value.
struct GrammarState {
    enum class Phase : std::uint8_t { expect_bos, expect_root, in_node, expect_eos, done };

    struct Frame {
        ui::ComponentKind kind;
        std::uint8_t stage;  // 0 x, 1 y, 2 w, 3 h, 4 color, 5 text/children, 6 children
        std::int8_t x;
        std::int8_t y;
        std::uint8_t children;
        friend bool operator==(const Frame&, const Frame&) = default;
    };

    Phase phase = Phase::expect_bos;
    std::vector<Frame> stack;
    int tokens_emitted = 0;
    int nodes = 0;

    /// State right after BOS.
    static GrammarState after_bos();

    bool terminal() const noexcept { return phase == Phase::done; }
    friend bool operator==(const GrammarState&, const GrammarState&) = default;
};

using TokenMask = std::vector<std::uint8_t>;

/// mask[t] == 1 iff appending t keeps the sequence a prefix of some valid tree encoding
/// (root at full canvas, nodes inside the canvas, depth <= 6, <= 48 nodes, <= 256 tokens).
/// PAD is never allowed. Every non-terminal reachable state allows at least one token.
TokenMask grammar_mask(const GrammarState& state, const Vocab& vocab = Vocab::standard());

/// The state after appending `token`, or nullopt if the mask forbids it.
std::optional<GrammarState> advance(const GrammarState& state, TokenId token);

}  // namespace uigen::codec
