#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uigen::ui {

/// Side of the square layout grid. Every coordinate is an integer grid unit.
inline constexpr int kGrid = 64;
inline constexpr int kMaxDepth = 6;
inline constexpr int kMaxNodes = 48;
inline constexpr int kPaletteSize = 16;

/// Closed set of component kinds. The enumeration order is part of the token table and of
/// the canonical design-spec ordering; do not reorder.
enum class ComponentKind : std::uint8_t {
    container,
    form,
    navbar,
    button,
    textbox,
    dropdown,
    checkbox,
    label,
    image,
    chart,
};
inline constexpr int kNumKinds = 10;

inline constexpr std::array<ComponentKind, kNumKinds> kAllKinds = {
    ComponentKind::container, ComponentKind::form,     ComponentKind::navbar, ComponentKind::button,
    ComponentKind::textbox,   ComponentKind::dropdown, ComponentKind::checkbox, ComponentKind::label,
    ComponentKind::image,     ComponentKind::chart,
};

enum class TextClass : std::uint8_t { none, short_text, long_text };

enum class Device : std::uint8_t { phone, tablet, desktop };
inline constexpr std::array<Device, 3> kAllDevices = {Device::phone, Device::tablet, Device::desktop};

/// container, form and navbar hold children; everything else is a leaf.
constexpr bool is_container(ComponentKind k) noexcept {
    return k == ComponentKind::container || k == ComponentKind::form || k == ComponentKind::navbar;
}

/// Leaves a user taps or types into; these are subject to the tap-target rule.
constexpr bool is_interactive(ComponentKind k) noexcept {
    return k == ComponentKind::button || k == ComponentKind::textbox || k == ComponentKind::dropdown ||
           k == ComponentKind::checkbox;
}

std::string_view kind_name(ComponentKind k) noexcept;
std::optional<ComponentKind> kind_from_name(std::string_view name) noexcept;
std::string_view device_name(Device d) noexcept;
std::optional<Device> device_from_name(std::string_view name) noexcept;
std::string_view text_class_name(TextClass t) noexcept;

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const noexcept { return x + w; }
    int bottom() const noexcept { return y + h; }
    long area() const noexcept { return static_cast<long>(w) * h; }
    bool contains(const Rect& o) const noexcept {
        return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Area of the intersection of two rectangles; 0 when they only touch.
long intersection_area(const Rect& a, const Rect& b) noexcept;

struct UINode {
    ComponentKind kind = ComponentKind::container;
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;
    int color = 0;
    TextClass text = TextClass::none;
    std::vector<UINode> children;

    Rect rect() const noexcept { return {x, y, w, h}; }
    friend bool operator==(const UINode&, const UINode&) = default;
};

struct UITree {
    UINode root;
    Device device = Device::phone;

    friend bool operator==(const UITree&, const UITree&) = default;
};

/// Root container covering the full canvas, no children.
UITree empty_tree(Device device);

int node_count(const UINode& n) noexcept;
inline int node_count(const UITree& t) noexcept { return node_count(t.root); }
/// Depth of the deepest node; a lone root has depth 1.
int depth(const UINode& n) noexcept;
inline int depth(const UITree& t) noexcept { return depth(t.root); }

/// Node reached by following child indices from the root.
const UINode* node_at(const UITree& t, const std::vector<int>& path) noexcept;
UINode* node_at(UITree& t, const std::vector<int>& path) noexcept;

/// Fixed 16-colour palette, version 1. Index 0 is white, index 1 is black, the rest are two greys
/// followed by twelve fully saturated hues at 30 degree steps starting from red.
struct Rgb {
    int r, g, b;
};
inline constexpr int kPaletteVersion = 1;
extern const std::array<Rgb, kPaletteSize> kPalette;

std::string palette_hex(int index);
/// Nearest palette entry by Euclidean RGB distance; ties go to the lower index.
int nearest_palette_index(Rgb c) noexcept;
std::optional<Rgb> parse_hex_color(std::string_view s) noexcept;

}  // namespace uigen::ui
