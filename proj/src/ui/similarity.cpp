#include "uigen/ui/similarity.hpp"

#include <algorithm>
#include <vector>

namespace uigen::ui {

namespace {

struct PostOrder {
    std::vector<ComponentKind> label;
    std::vector<int> leftmost;  // leftmost leaf descendant, post-order index
    std::vector<int> keyroots;
};

int flatten(const UINode& n, PostOrder& po) {
    int lmd = -1;
    for (const auto& c : n.children) {
        const int child_lmd = flatten(c, po);
        if (lmd < 0) lmd = child_lmd;
    }
    const int self = static_cast<int>(po.label.size());
    po.label.push_back(n.kind);
    po.leftmost.push_back(lmd < 0 ? self : lmd);
    return po.leftmost.back();
}

PostOrder post_order(const UINode& root) {
    PostOrder po;
    flatten(root, po);
    const int n = static_cast<int>(po.label.size());
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int i = n - 1; i >= 0; --i) {
        const int l = po.leftmost[static_cast<std::size_t>(i)];
        if (!seen[static_cast<std::size_t>(l)]) {
            seen[static_cast<std::size_t>(l)] = true;
            po.keyroots.push_back(i);
        }
    }
    std::sort(po.keyroots.begin(), po.keyroots.end());
    return po;
}

}  // namespace

int tree_edit_distance(const UINode& a, const UINode& b) {
    const PostOrder ta = post_order(a);
    const PostOrder tb = post_order(b);
    const int na = static_cast<int>(ta.label.size());
    const int nb = static_cast<int>(tb.label.size());
    std::vector<int> treedist(static_cast<std::size_t>(na * nb), 0);
    std::vector<int> fd(static_cast<std::size_t>((na + 1) * (nb + 1)), 0);
    auto TD = [&](int i, int j) -> int& { return treedist[static_cast<std::size_t>(i * nb + j)]; };

    for (int i : ta.keyroots) {
        for (int j : tb.keyroots) {
            const int li = ta.leftmost[static_cast<std::size_t>(i)];
            const int lj = tb.leftmost[static_cast<std::size_t>(j)];
            const int rows = i - li + 2, cols = j - lj + 2;
            // fd(r, c): forest li..li+r-1 vs lj..lj+c-1
            auto FD = [&](int r, int c) -> int& { return fd[static_cast<std::size_t>(r * cols + c)]; };
            FD(0, 0) = 0;
            for (int r = 1; r < rows; ++r) FD(r, 0) = FD(r - 1, 0) + 1;
            for (int c = 1; c < cols; ++c) FD(0, c) = FD(0, c - 1) + 1;
            for (int r = 1; r < rows; ++r) {
                const int x = li + r - 1;
                for (int c = 1; c < cols; ++c) {
                    const int y = lj + c - 1;
                    const int del = FD(r - 1, c) + 1;
                    const int ins = FD(r, c - 1) + 1;
                    if (ta.leftmost[static_cast<std::size_t>(x)] == li && tb.leftmost[static_cast<std::size_t>(y)] == lj) {
                        const int rel = FD(r - 1, c - 1) +
                                        (ta.label[static_cast<std::size_t>(x)] == tb.label[static_cast<std::size_t>(y)] ? 0 : 1);
                        FD(r, c) = std::min({del, ins, rel});
                        TD(x, y) = FD(r, c);
                    } else {
                        const int pr = ta.leftmost[static_cast<std::size_t>(x)] - li;
                        const int pc = tb.leftmost[static_cast<std::size_t>(y)] - lj;
                        FD(r, c) = std::min({del, ins, FD(pr, pc) + TD(x, y)});
                    }
                }
            }
        }
    }
    return TD(na - 1, nb - 1);
}

double tree_similarity(const UITree& a, const UITree& b) {
    const int ted = tree_edit_distance(a.root, b.root);
    const int total = node_count(a) + node_count(b);
    return 1.0 - static_cast<double>(ted) / static_cast<double>(total);
}

}  // namespace uigen::ui
