#pragma once

#include <deque>
#include <set>
#include <string>
#include <vector>

#include "uigen/codec/codec.hpp"
#include "uigen/core/rng.hpp"

namespace uigen::testing {

inline std::string state_key(const codec::GrammarState& s) {
    std::string k;
    k += static_cast<char>(s.phase);
    k += std::to_string(s.tokens_emitted) + "/" + std::to_string(s.nodes) + ":";
    for (const auto& f : s.stack) {
        k += static_cast<char>('a' + static_cast<int>(f.kind));
        k += std::to_string(f.stage) + "," + std::to_string(f.x) + "," + std::to_string(f.y) + "," +
             std::to_string(f.children) + ";";
    }
    return k;
}

struct BfsReport {
    std::size_t states = 0;
    std::size_t dead_ends = 0;
};

/// Breadth-first walk over grammar states with nesting depth <= max_depth and <= max_children
/// children per node. Numeric attributes branch on their smallest and largest allowed values.
inline BfsReport dead_end_bfs(int max_depth, int max_children) {
    const auto& vocab = codec::Vocab::standard();
    BfsReport r;
    std::set<std::string> seen;
    std::deque<codec::GrammarState> queue{codec::GrammarState::after_bos()};
    seen.insert(state_key(queue.front()));
    while (!queue.empty()) {
        const codec::GrammarState s = queue.front();
        queue.pop_front();
        ++r.states;
        if (s.terminal()) continue;
        const auto mask = codec::grammar_mask(s, vocab);
        std::vector<int> allowed;
        for (int t = 0; t < vocab.size(); ++t)
            if (mask[static_cast<std::size_t>(t)]) allowed.push_back(t);
        if (allowed.empty()) {
            ++r.dead_ends;
            continue;
        }
        std::vector<int> branch;
        auto extremes = [&](auto pred) {
            int lo = -1, hi = -1;
            for (int t : allowed) {
                if (!pred(t)) continue;
                if (lo < 0) lo = t;
                hi = t;
            }
            if (lo >= 0) branch.push_back(lo);
            if (hi >= 0 && hi != lo) branch.push_back(hi);
        };
        extremes(codec::tok::is_x);
        extremes(codec::tok::is_y);
        extremes(codec::tok::is_w);
        extremes(codec::tok::is_h);
        extremes(codec::tok::is_color);
        for (int t : allowed) {
            if (codec::tok::is_text(t) || t == codec::tok::kClose || t == codec::tok::kEos) branch.push_back(t);
            if (codec::tok::is_open(t)) {
                const bool deep_ok = static_cast<int>(s.stack.size()) < max_depth;
                const bool wide_ok = s.stack.empty() || s.stack.back().children < max_children;
                if (deep_ok && wide_ok) branch.push_back(t);
            }
        }
        for (int t : branch) {
            const auto next = codec::advance(s, t);
            if (!next) {
                ++r.dead_ends;  // mask allowed a token that advance rejects
                continue;
            }
            if (seen.insert(state_key(*next)).second) queue.push_back(*next);
        }
    }
    return r;
}

/// A full sequence drawn uniformly among the allowed tokens at every step.
inline std::vector<int> uniform_rollout(Rng& rng) {
    std::vector<int> seq{codec::tok::kBos};
    codec::GrammarState s = codec::GrammarState::after_bos();
    while (!s.terminal()) {
        const auto mask = codec::grammar_mask(s);
        std::vector<int> allowed;
        for (std::size_t t = 0; t < mask.size(); ++t)
            if (mask[t]) allowed.push_back(static_cast<int>(t));
        if (allowed.empty()) return seq;
        const int t = allowed[rng.below(allowed.size())];
        seq.push_back(t);
        s = *codec::advance(s, t);
    }
    return seq;
}

}  // namespace uigen::testing
