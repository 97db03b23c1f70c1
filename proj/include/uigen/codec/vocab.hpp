#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uigen/ui/tree.hpp"

namespace uigen::codec {

using TokenId = int;

/// Fixed token table, version 1. Ids are contiguous blocks in this order:
///
///   PAD BOS EOS CLOSE | OPEN_<kind> x10 | X_0..X_63 | Y_0..Y_63 | W_1..W_64 | H_1..H_64 |
///   C_0..C_15 | TXT_short TXT_long | DEV_phone DEV_tablet DEV_desktop | REQ_<kind> x10 |
///   CNT_1..CNT_8 | GOAL_responsive GOAL_accessible
///
/// 311 entries. The order is frozen; `vocab.txt` dumps it one surface per line.
namespace tok {
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kClose = 3;
inline constexpr TokenId kOpenBase = 4;
inline constexpr TokenId kXBase = kOpenBase + ui::kNumKinds;  // X_0
inline constexpr TokenId kYBase = kXBase + ui::kGrid;         // Y_0
inline constexpr TokenId kWBase = kYBase + ui::kGrid;         // W_1
inline constexpr TokenId kHBase = kWBase + ui::kGrid;         // H_1
inline constexpr TokenId kCBase = kHBase + ui::kGrid;         // C_0
inline constexpr TokenId kTxtShort = kCBase + ui::kPaletteSize;
inline constexpr TokenId kTxtLong = kTxtShort + 1;
inline constexpr TokenId kDevBase = kTxtLong + 1;
inline constexpr TokenId kReqBase = kDevBase + 3;
inline constexpr TokenId kCntBase = kReqBase + ui::kNumKinds;  // CNT_1
inline constexpr TokenId kGoalResponsive = kCntBase + 8;
inline constexpr TokenId kGoalAccessible = kGoalResponsive + 1;
inline constexpr int kVocabSize = kGoalAccessible + 1;

constexpr TokenId open(ui::ComponentKind k) noexcept { return kOpenBase + static_cast<int>(k); }
constexpr TokenId x(int v) noexcept { return kXBase + v; }
constexpr TokenId y(int v) noexcept { return kYBase + v; }
constexpr TokenId w(int v) noexcept { return kWBase + v - 1; }
constexpr TokenId h(int v) noexcept { return kHBase + v - 1; }
constexpr TokenId color(int v) noexcept { return kCBase + v; }
constexpr TokenId device(ui::Device d) noexcept { return kDevBase + static_cast<int>(d); }
constexpr TokenId req(ui::ComponentKind k) noexcept { return kReqBase + static_cast<int>(k); }
constexpr TokenId count(int n) noexcept { return kCntBase + n - 1; }

constexpr bool is_open(TokenId t) noexcept { return t >= kOpenBase && t < kXBase; }
constexpr bool is_x(TokenId t) noexcept { return t >= kXBase && t < kYBase; }
constexpr bool is_y(TokenId t) noexcept { return t >= kYBase && t < kWBase; }
constexpr bool is_w(TokenId t) noexcept { return t >= kWBase && t < kHBase; }
constexpr bool is_h(TokenId t) noexcept { return t >= kHBase && t < kCBase; }
constexpr bool is_color(TokenId t) noexcept { return t >= kCBase && t < kTxtShort; }
constexpr bool is_text(TokenId t) noexcept { return t == kTxtShort || t == kTxtLong; }
}  // namespace tok

inline constexpr int kVocabVersion = 1;
inline constexpr int kMaxSeqLen = 256;

class Vocab {
public:
    /// The frozen version-1 table.
    static const Vocab& standard();

    int size() const noexcept { return static_cast<int>(surfaces_.size()); }
    const std::string& surface(TokenId id) const;
    /// Throws RangeError for an unknown surface.
    TokenId id(std::string_view surface) const;

    /// One surface per line in id order, newline-terminated.
    std::string dump() const;

private:
    Vocab();
    std::vector<std::string> surfaces_;
    std::unordered_map<std::string, TokenId> index_;
};

}  // namespace uigen::codec
