#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uigen/ui/tree.hpp"

namespace uigen::ui {

enum class Rule { child_escapes_parent, sibling_overlap, bad_geometry, depth_exceeded, count_exceeded };

std::string_view rule_name(Rule r) noexcept;

struct Violation {
    std::vector<int> path;  // child indices from the root
    Rule rule;
    std::string detail;
};

/// Structural check of a tree that may break the layout invariants.
///
/// Nodes are visited depth-first in pre-order; for each node the rules are checked in
/// enumeration order:
///   - child_escapes_parent: node not fully inside its parent's rectangle;
///   - sibling_overlap: positive-area intersection with an earlier sibling (one entry per pair);
///   - bad_geometry: an attribute outside its own domain (x,y in 0..63, w,h in 1..64,
///     color in 0..15) or, for the root, anything other than a container at (0,0,64,64);
///   - depth_exceeded: node sits at depth 7 (reported once per offending subtree);
///   - count_exceeded: total node count above 48 (reported once, on the root).
/// Canvas overflow of a non-root node always shows up as an escape from some ancestor.
std::vector<Violation> validate(const UITree& tree);

}  // namespace uigen::ui
