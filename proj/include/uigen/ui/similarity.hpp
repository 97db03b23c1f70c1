#pragma once

#include "uigen/ui/tree.hpp"

namespace uigen::ui {

/// Zhang-Shasha ordered tree edit distance over kind-labelled nodes; insert, delete and
/// relabel each cost 1. Geometry and colour are ignored.
int tree_edit_distance(const UINode& a, const UINode& b);

/// 1 - TED(a, b) / (|a| + |b|). Symmetric, 1 for identical structures, in [0, 1].
double tree_similarity(const UITree& a, const UITree& b);

}  // namespace uigen::ui
