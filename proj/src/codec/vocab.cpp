#include "uigen/codec/vocab.hpp"

#include "uigen/core/error.hpp"

namespace uigen::codec {

Vocab::Vocab() {
    auto add = [this](std::string s) {
        index_.emplace(s, static_cast<TokenId>(surfaces_.size()));
        surfaces_.push_back(std::move(s));
    };
    add("PAD");
    add("BOS");
    add("EOS");
    add("CLOSE");
    for (auto k : ui::kAllKinds) add("OPEN_" + std::string(ui::kind_name(k)));
    for (int v = 0; v < ui::kGrid; ++v) add("X_" + std::to_string(v));
    for (int v = 0; v < ui::kGrid; ++v) add("Y_" + std::to_string(v));
    for (int v = 1; v <= ui::kGrid; ++v) add("W_" + std::to_string(v));
    for (int v = 1; v <= ui::kGrid; ++v) add("H_" + std::to_string(v));
    for (int v = 0; v < ui::kPaletteSize; ++v) add("C_" + std::to_string(v));
    add("TXT_short");
    add("TXT_long");
    for (auto d : ui::kAllDevices) add("DEV_" + std::string(ui::device_name(d)));
    for (auto k : ui::kAllKinds) add("REQ_" + std::string(ui::kind_name(k)));
    for (int n = 1; n <= 8; ++n) add("CNT_" + std::to_string(n));
    add("GOAL_responsive");
    add("GOAL_accessible");
}

const Vocab& Vocab::standard() {
    static const Vocab v;
    return v;
}

const std::string& Vocab::surface(TokenId id) const {
    if (id < 0 || id >= size()) throw RangeError("token id " + std::to_string(id) + " outside vocabulary");
    return surfaces_[static_cast<std::size_t>(id)];
}

TokenId Vocab::id(std::string_view surface) const {
    const auto it = index_.find(std::string(surface));
    if (it == index_.end()) throw RangeError("unknown token '" + std::string(surface) + "'");
    return it->second;
}

std::string Vocab::dump() const {
    std::string out;
    for (const auto& s : surfaces_) {
        out += s;
        out += '\n';
    }
    return out;
}

}  // namespace uigen::codec
