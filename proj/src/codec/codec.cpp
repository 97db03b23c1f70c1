#include "uigen/codec/codec.hpp"

#include <algorithm>
#include <map>

#include "uigen/core/error.hpp"

namespace uigen::codec {

namespace {

using ui::ComponentKind;
using ui::UINode;

void encode_node(const UINode& n, std::vector<TokenId>& out) {
    out.push_back(tok::open(n.kind));
    out.push_back(tok::x(n.x));
    out.push_back(tok::y(n.y));
    out.push_back(tok::w(n.w));
    out.push_back(tok::h(n.h));
    out.push_back(tok::color(n.color));
    if (n.text == ui::TextClass::short_text) out.push_back(tok::kTxtShort);
    if (n.text == ui::TextClass::long_text) out.push_back(tok::kTxtLong);
    for (const auto& c : n.children) encode_node(c, out);
    out.push_back(tok::kClose);
}

class TokenDecoder {
public:
    TokenDecoder(const std::vector<TokenId>& t, const Vocab& v) : t_(t), vocab_(v) {}

    ui::UITree run(ui::Device device) {
        ui::UITree tree;
        tree.device = device;
        if (t_.empty() || t_[0] != tok::kBos) fail(0, "expected BOS");
        pos_ = 1;
        if (at_end()) fail(pos_, "unexpected end of sequence");
        if (cur() == tok::kClose) fail(pos_, "close without open");
        if (!tok::is_open(cur())) fail(pos_, "expected OPEN_*");
        node(tree.root, 1, true);
        if (at_end()) fail(pos_, "expected EOS");
        if (cur() != tok::kEos) fail(pos_, cur() == tok::kClose ? "close without open" : "expected EOS");
        ++pos_;
        for (; pos_ < t_.size(); ++pos_) {
            if (t_[pos_] != tok::kPad) fail(pos_, "unexpected token after EOS");
        }
        return tree;
    }

private:
    [[noreturn]] static void fail(std::size_t p, std::string reason) { throw DecodeError(p, std::move(reason)); }

    bool at_end() const { return pos_ >= t_.size(); }

    TokenId cur() const {
        const TokenId id = t_[pos_];
        if (id < 0 || id >= vocab_.size()) fail(pos_, "token id out of range");
        return id;
    }

    TokenId take(bool (*pred)(TokenId) noexcept, const char* what) {
        if (at_end()) fail(pos_, std::string("expected ") + what);
        const TokenId id = cur();
        if (!pred(id)) fail(pos_, std::string("expected ") + what);
        bump();
        return id;
    }

    void bump() {
        ++pos_;
        if (pos_ > static_cast<std::size_t>(kMaxSeqLen)) fail(pos_ - 1, "length cap exceeded");
    }

    void node(UINode& n, int depth, bool is_root) {
        const std::size_t open_pos = pos_;
        if (depth > ui::kMaxDepth) fail(open_pos, "depth cap exceeded");
        if (++nodes_ > ui::kMaxNodes) fail(open_pos, "node cap exceeded");
        n.kind = static_cast<ComponentKind>(cur() - tok::kOpenBase);
        bump();
        n.x = take(tok::is_x, "X_*") - tok::kXBase;
        n.y = take(tok::is_y, "Y_*") - tok::kYBase;
        const std::size_t w_pos = pos_;
        n.w = take(tok::is_w, "W_*") - tok::kWBase + 1;
        if (n.x + n.w > ui::kGrid) fail(w_pos, "node extends past the canvas");
        const std::size_t h_pos = pos_;
        n.h = take(tok::is_h, "H_*") - tok::kHBase + 1;
        if (n.y + n.h > ui::kGrid) fail(h_pos, "node extends past the canvas");
        if (is_root && (n.kind != ComponentKind::container || n.x != 0 || n.y != 0 || n.w != ui::kGrid ||
                        n.h != ui::kGrid)) {
            fail(h_pos, "root must be a container at (0,0) sized 64x64");
        }
        n.color = take(tok::is_color, "C_*") - tok::kCBase;
        if (!at_end() && tok::is_text(cur())) {
            n.text = cur() == tok::kTxtShort ? ui::TextClass::short_text : ui::TextClass::long_text;
            bump();
        }
        for (;;) {
            if (at_end()) fail(pos_, "unexpected end of sequence");
            const TokenId id = cur();
            if (id == tok::kClose) {
                bump();
                return;
            }
            if (id == tok::kEos) fail(pos_, "EOS with unclosed nodes");
            if (!tok::is_open(id)) fail(pos_, "expected OPEN_* or CLOSE");
            if (!ui::is_container(n.kind)) fail(pos_, "child under leaf kind");
            UINode child;
            node(child, depth + 1, false);
            n.children.push_back(std::move(child));
        }
    }

    const std::vector<TokenId>& t_;
    const Vocab& vocab_;
    std::size_t pos_ = 0;
    int nodes_ = 0;
};

}  // namespace

DesignSpec DesignSpec::canonical() const {
    std::map<int, int> counts;
    for (const auto& [k, c] : required) counts[static_cast<int>(k)] += c;
    DesignSpec out;
    out.device = device;
    out.responsive = responsive;
    out.accessible = accessible;
    for (const auto& [k, c] : counts) {
        if (c <= 0) continue;
        if (out.required.size() == 8) break;
        out.required.emplace_back(static_cast<ComponentKind>(k), std::min(c, 8));
    }
    return out;
}

void check_spec(const DesignSpec& spec) {
    if (spec.required.size() > 8) throw RangeError("design spec has more than 8 required entries");
    for (const auto& [k, c] : spec.required) {
        if (c < 1 || c > 8) {
            throw RangeError("required count for " + std::string(ui::kind_name(k)) + " must be in 1..8");
        }
    }
}

std::vector<TokenId> encode_tree(const ui::UITree& tree, const Vocab&) {
    std::vector<TokenId> out;
    out.reserve(64);
    out.push_back(tok::kBos);
    encode_node(tree.root, out);
    out.push_back(tok::kEos);
    if (out.size() > static_cast<std::size_t>(kMaxSeqLen)) {
        throw CapacityError("tree encodes to " + std::to_string(out.size()) + " tokens, limit is 256");
    }
    return out;
}

ui::UITree decode_tokens(const std::vector<TokenId>& tokens, ui::Device device, const Vocab& vocab) {
    return TokenDecoder(tokens, vocab).run(device);
}

std::vector<TokenId> encode_spec(const DesignSpec& spec, const Vocab&) {
    check_spec(spec);
    const DesignSpec c = spec.canonical();
    std::vector<TokenId> out;
    out.push_back(tok::kBos);
    out.push_back(tok::device(c.device));
    for (const auto& [k, n] : c.required) {
        out.push_back(tok::req(k));
        out.push_back(tok::count(n));
    }
    if (c.responsive) out.push_back(tok::kGoalResponsive);
    if (c.accessible) out.push_back(tok::kGoalAccessible);
    out.push_back(tok::kEos);
    return out;
}

DesignSpec decode_spec(const std::vector<TokenId>& t) {
    DesignSpec s;
    std::size_t i = 0;
    auto fail = [&](const char* why) { throw DecodeError(i, why); };
    if (t.size() < 3 || t[0] != tok::kBos) fail("expected BOS");
    i = 1;
    if (t[i] < tok::kDevBase || t[i] >= tok::kDevBase + 3) fail("expected DEV_*");
    s.device = static_cast<ui::Device>(t[i] - tok::kDevBase);
    ++i;
    while (i < t.size() && t[i] >= tok::kReqBase && t[i] < tok::kReqBase + ui::kNumKinds) {
        const auto k = static_cast<ComponentKind>(t[i] - tok::kReqBase);
        ++i;
        if (i >= t.size() || t[i] < tok::kCntBase || t[i] >= tok::kCntBase + 8) fail("expected CNT_*");
        s.required.emplace_back(k, t[i] - tok::kCntBase + 1);
        ++i;
    }
    if (i < t.size() && t[i] == tok::kGoalResponsive) {
        s.responsive = true;
        ++i;
    }
    if (i < t.size() && t[i] == tok::kGoalAccessible) {
        s.accessible = true;
        ++i;
    }
    if (i >= t.size() || t[i] != tok::kEos) fail("expected EOS");
    ++i;
    for (; i < t.size(); ++i)
        if (t[i] != tok::kPad) fail("unexpected token after EOS");
    return s;
}

}  // namespace uigen::codec
