#include "uigen/ui/tree.hpp"

#include <algorithm>
#include <cstdio>

namespace uigen::ui {

namespace {

constexpr std::array<std::string_view, kNumKinds> kKindNames = {
    "container", "form", "navbar", "button", "textbox", "dropdown", "checkbox", "label", "image", "chart",
};
constexpr std::array<std::string_view, 3> kDeviceNames = {"phone", "tablet", "desktop"};

int hex_digit(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

const std::array<Rgb, kPaletteSize> kPalette = {{
    {255, 255, 255},
    {0, 0, 0},
    {128, 128, 128},
    {192, 192, 192},
    {255, 0, 0},
    {255, 128, 0},
    {255, 255, 0},
    {128, 255, 0},
    {0, 255, 0},
    {0, 255, 128},
    {0, 255, 255},
    {0, 128, 255},
    {0, 0, 255},
    {128, 0, 255},
    {255, 0, 255},
    {255, 0, 128},
}};

std::string_view kind_name(ComponentKind k) noexcept { return kKindNames[static_cast<int>(k)]; }

std::optional<ComponentKind> kind_from_name(std::string_view name) noexcept {
    for (int i = 0; i < kNumKinds; ++i)
        if (kKindNames[i] == name) return static_cast<ComponentKind>(i);
    return std::nullopt;
}

std::string_view device_name(Device d) noexcept { return kDeviceNames[static_cast<int>(d)]; }

std::optional<Device> device_from_name(std::string_view name) noexcept {
    for (int i = 0; i < 3; ++i)
        if (kDeviceNames[i] == name) return static_cast<Device>(i);
    return std::nullopt;
}

std::string_view text_class_name(TextClass t) noexcept {
    switch (t) {
        case TextClass::short_text: return "short";
        case TextClass::long_text: return "long";
        default: return "none";
    }
}

long intersection_area(const Rect& a, const Rect& b) noexcept {
    const int w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const int h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (w <= 0 || h <= 0) return 0;
    return static_cast<long>(w) * h;
}

UITree empty_tree(Device device) {
    UITree t;
    t.device = device;
    t.root.kind = ComponentKind::container;
    t.root.x = 0;
    t.root.y = 0;
    t.root.w = kGrid;
    t.root.h = kGrid;
    return t;
}

int node_count(const UINode& n) noexcept {
    int c = 1;
    for (const auto& ch : n.children) c += node_count(ch);
    return c;
}

int depth(const UINode& n) noexcept {
    int d = 0;
    for (const auto& ch : n.children) d = std::max(d, depth(ch));
    return d + 1;
}

const UINode* node_at(const UITree& t, const std::vector<int>& path) noexcept {
    const UINode* n = &t.root;
    for (int i : path) {
        if (i < 0 || static_cast<std::size_t>(i) >= n->children.size()) return nullptr;
        n = &n->children[static_cast<std::size_t>(i)];
    }
    return n;
}

UINode* node_at(UITree& t, const std::vector<int>& path) noexcept {
    return const_cast<UINode*>(node_at(static_cast<const UITree&>(t), path));
}

std::string palette_hex(int index) {
    const Rgb c = kPalette.at(static_cast<std::size_t>(index));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
    return buf;
}

int nearest_palette_index(Rgb c) noexcept {
    int best = 0;
    long best_d = -1;
    for (int i = 0; i < kPaletteSize; ++i) {
        const long dr = c.r - kPalette[i].r, dg = c.g - kPalette[i].g, db = c.b - kPalette[i].b;
        const long d = dr * dr + dg * dg + db * db;
        if (best_d < 0 || d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::optional<Rgb> parse_hex_color(std::string_view s) noexcept {
    if (s.size() != 7 || s[0] != '#') return std::nullopt;
    int v[6];
    for (int i = 0; i < 6; ++i) {
        v[i] = hex_digit(s[static_cast<std::size_t>(i) + 1]);
        if (v[i] < 0) return std::nullopt;
    }
    return Rgb{v[0] * 16 + v[1], v[2] * 16 + v[3], v[4] * 16 + v[5]};
}

}  // namespace uigen::ui
