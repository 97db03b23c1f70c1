#include "uigen/ui/validate.hpp"

namespace uigen::ui {

namespace {

void visit(const UINode& n, const UINode* parent, int index_in_parent, int depth, std::vector<int>& path,
           std::vector<Violation>& out) {
    if (parent != nullptr) {
        if (!parent->rect().contains(n.rect())) {
            out.push_back({path, Rule::child_escapes_parent, std::string(kind_name(n.kind)) + " escapes its " +
                                                                 std::string(kind_name(parent->kind))});
        }
        for (int j = 0; j < index_in_parent; ++j) {
            const auto& sib = parent->children[static_cast<std::size_t>(j)];
            if (intersection_area(sib.rect(), n.rect()) > 0) {
                out.push_back({path, Rule::sibling_overlap, "overlaps sibling " + std::to_string(j)});
            }
        }
    }
    const bool domain_ok = n.x >= 0 && n.x < kGrid && n.y >= 0 && n.y < kGrid && n.w >= 1 && n.w <= kGrid &&
                           n.h >= 1 && n.h <= kGrid && n.color >= 0 && n.color < kPaletteSize;
    if (!domain_ok) {
        out.push_back({path, Rule::bad_geometry, "attribute outside its domain"});
    } else if (parent == nullptr &&
               (n.kind != ComponentKind::container || n.rect() != Rect{0, 0, kGrid, kGrid})) {
        out.push_back({path, Rule::bad_geometry, "root must be a container covering the canvas"});
    }
    if (depth == kMaxDepth + 1) {
        out.push_back({path, Rule::depth_exceeded, "depth " + std::to_string(depth) + " exceeds 6"});
    }
    if (parent == nullptr) {
        const int count = node_count(n);
        if (count > kMaxNodes) {
            out.push_back({path, Rule::count_exceeded, std::to_string(count) + " nodes exceed 48"});
        }
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        path.push_back(static_cast<int>(i));
        visit(n.children[i], &n, static_cast<int>(i), depth + 1, path, out);
        path.pop_back();
    }
}

}  // namespace

std::string_view rule_name(Rule r) noexcept {
    switch (r) {
        case Rule::child_escapes_parent: return "child_escapes_parent";
        case Rule::sibling_overlap: return "sibling_overlap";
        case Rule::bad_geometry: return "bad_geometry";
        case Rule::depth_exceeded: return "depth_exceeded";
        case Rule::count_exceeded: return "count_exceeded";
    }
    return "unknown";
}

std::vector<Violation> validate(const UITree& tree) {
    std::vector<Violation> out;
    std::vector<int> path;
    visit(tree.root, nullptr, 0, 1, path, out);
    return out;
}

}  // namespace uigen::ui
