#include "uigen/cli/render.hpp"

namespace uigen::cli {

using ui::UINode;

std::string html_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

// Dark text on light fills, light text on dark ones.
const char* ink_for(int color) {
    const auto rgb = ui::kPalette[static_cast<std::size_t>(color)];
    const int luma = 299 * rgb.r + 587 * rgb.g + 114 * rgb.b;
    return luma >= 128000 ? "#000000" : "#FFFFFF";
}

void box(const UINode& n, int parent_x, int parent_y, int indent, std::string& out) {
    const int color = n.color >= 0 && n.color < ui::kPaletteSize ? n.color : 0;
    const std::string pad(static_cast<std::size_t>(2 * indent), ' ');
    const std::string kind = html_escape(ui::kind_name(n.kind));
    out += pad + "<div class=\"box\" data-kind=\"" + kind + "\" style=\"left:" +
           std::to_string((n.x - parent_x) * kPixelsPerUnit) + "px;top:" +
           std::to_string((n.y - parent_y) * kPixelsPerUnit) + "px;width:" + std::to_string(n.w * kPixelsPerUnit) +
           "px;height:" + std::to_string(n.h * kPixelsPerUnit) + "px;background:" + ui::palette_hex(color) +
           ";color:" + ink_for(color) + "\">";
    out += "<span class=\"label\">" + kind;
    if (n.text != ui::TextClass::none) out += " (" + html_escape(ui::text_class_name(n.text)) + " text)";
    out += "</span>";
    if (n.children.empty()) {
        out += "</div>\n";
        return;
    }
    out += "\n";
    for (const auto& c : n.children) box(c, n.x, n.y, indent + 1, out);
    out += pad + "</div>\n";
}

}  // namespace

std::string render_html(const ui::UITree& tree) {
    std::string out;
    out += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
    out += "<title>" + html_escape(std::string(ui::device_name(tree.device)) + " design") + "</title>\n";
    out += "<style>\n"
           "body { margin: 0; background: #F4F4F4; }\n"
           ".box { position: absolute; box-sizing: border-box; border: 1px solid #555555; overflow: hidden; "
           "font: 10px sans-serif; }\n"
           ".label { position: absolute; left: 2px; top: 1px; white-space: nowrap; }\n"
           "</style>\n</head>\n<body>\n";
    box(tree.root, 0, 0, 0, out);
    out += "</body>\n</html>\n";
    return out;
}

}  // namespace uigen::cli
