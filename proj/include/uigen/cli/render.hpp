#pragma once

#include <string>
#include <string_view>

#include "uigen/ui/tree.hpp"

namespace uigen::cli {

/// Pixels per grid unit in rendered wireframes.
inline constexpr int kPixelsPerUnit = 8;

/// Self-contained static HTML page with one absolutely positioned `div.box` per node. Child
/// boxes are nested in their parent's box with coordinates relative to it; backgrounds come
/// from the palette and each box is labelled with its kind.
std::string render_html(const ui::UITree& tree);

/// Escapes &, <, >, " and '.
std::string html_escape(std::string_view s);

}  // namespace uigen::cli
