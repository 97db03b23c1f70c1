#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uigen/ui/tree.hpp"

namespace uigen::ui {

// Markup (.uit) grammar:
//
//   tree  := '(' 'container' 'device=' device attrs node* ')'
//   node  := '(' kind attrs node* ')'
//   attrs := 'x=' int 'y=' int 'w=' int 'h=' int ['color=' int] ['text=' ('short'|'long')]
//
// Whitespace is free between tokens. An attribute `key=value` is lexed as one token.

/// Throws ParseError (syntax, with 1-based line/column) or RangeError (value out of domain).
UITree parse_markup(std::string_view text);

/// Canonical form: one node per line, two spaces of indentation per level, attributes in the
/// order x y w h color text, color omitted when 0 and text omitted when none.
std::string print_markup(const UITree& tree);

/// JSON corpus schema: {"device", "canvas": {"w","h"}, "root": {"type","x","y","w","h",
/// "color": "#RRGGBB", "text", "children": [...]}} with pixel geometry. Pixels map to grid
/// units by floor(px * 64 / canvas); sizes are clamped to at least one unit and colours snap
/// to the nearest palette entry.
UITree load_json(std::string_view doc);

/// Accepts either a single design object or an array of them.
std::vector<UITree> load_json_designs(std::string_view doc);

/// Canvas in pixels used when exporting a tree of the given device class. Each dimension is a
/// whole multiple of 64 so exporting and re-loading is exact.
struct Canvas {
    int w;
    int h;
};
Canvas default_canvas(Device d) noexcept;

/// Exports to the JSON corpus schema on `default_canvas(tree.device)`.
std::string to_json(const UITree& tree, int indent = -1);

}  // namespace uigen::ui
