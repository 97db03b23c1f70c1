#include "uigen/reward/reward.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>

#include "uigen/core/error.hpp"

namespace uigen::reward {

using ui::UINode;

namespace {

template <std::size_t N>
std::array<double, N> normalize_group(const std::array<double, N>& w, const char* name) {
    double total = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) throw ConfigError(std::string(name) + " weights must be nonnegative");
        total += v;
    }
    if (total <= 0.0) throw ConfigError(std::string(name) + " weights must not all be zero");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = w[i] / total;
    return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

template <class F>
void for_each_node(const UINode& n, F&& f) {
    f(n);
    for (const auto& c : n.children) for_each_node(c, f);
}

}  // namespace

RewardConfig RewardConfig::normalized() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("alpha and beta must be nonnegative");
    if (alpha + beta <= 0.0) throw ConfigError("alpha and beta must not both be zero");
    RewardConfig c;
    c.alpha = alpha / (alpha + beta);
    c.beta = beta / (alpha + beta);
    c.usability_weights = normalize_group(usability_weights, "usability");
    c.aesthetics_weights = normalize_group(aesthetics_weights, "aesthetics");
    return c;
}

double containment(const UINode& root) {
    long inside = 0, total = 0;
    for_each_node(root, [&](const UINode& p) {
        for (const auto& c : p.children) {
            ++total;
            if (p.rect().contains(c.rect())) ++inside;
        }
    });
    return total == 0 ? 1.0 : static_cast<double>(inside) / static_cast<double>(total);
}

double overlap(const UINode& root) {
    long inter = 0, area = 0;
    for_each_node(root, [&](const UINode& p) {
        if (p.children.size() < 2) return;
        for (std::size_t i = 0; i < p.children.size(); ++i) {
            area += p.children[i].rect().area();
            for (std::size_t j = i + 1; j < p.children.size(); ++j)
                inter += ui::intersection_area(p.children[i].rect(), p.children[j].rect());
        }
    });
    if (inter == 0 || area == 0) return 1.0;
    return clamp01(1.0 - 2.0 * static_cast<double>(inter) / static_cast<double>(area));
}

double tap_target(const UINode& root) {
    long ok = 0, total = 0;
    for_each_node(root, [&](const UINode& n) {
        if (!ui::is_interactive(n.kind)) return;
        ++total;
        if (n.w >= 6 && n.h >= 3) ++ok;
    });
    return total == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(total);
}

double alignment(const UINode& root) {
    long aligned = 0, pairs = 0;
    auto near = [](double a, double b) { return std::abs(a - b) <= 1.0; };
    for_each_node(root, [&](const UINode& p) {
        for (std::size_t i = 0; i < p.children.size(); ++i) {
            for (std::size_t j = i + 1; j < p.children.size(); ++j) {
                const UINode& a = p.children[i];
                const UINode& b = p.children[j];
                ++pairs;
                if (near(a.x, b.x) || near(a.y, b.y) || near(a.x + a.w / 2.0, b.x + b.w / 2.0) ||
                    near(a.y + a.h / 2.0, b.y + b.h / 2.0)) {
                    ++aligned;
                }
            }
        }
    });
    return pairs == 0 ? 1.0 : static_cast<double>(aligned) / static_cast<double>(pairs);
}

double balance(const UINode& root) {
    double mass = 0.0, moment = 0.0;
    for_each_node(root, [&](const UINode& p) {
        for (const auto& c : p.children) {
            const auto a = static_cast<double>(c.rect().area());
            mass += a;
            moment += a * (c.x + c.w / 2.0);
        }
    });
    if (mass == 0.0) return 1.0;
    const double half = ui::kGrid / 2.0;
    return clamp01(1.0 - std::abs(moment / mass - half) / half);
}

double spacing(const UINode& root) {
    double sum = 0.0;
    int columns = 0;
    for_each_node(root, [&](const UINode& p) {
        std::vector<const UINode*> kids;
        for (const auto& c : p.children) kids.push_back(&c);
        std::stable_sort(kids.begin(), kids.end(), [](const UINode* a, const UINode* b) {
            return a->x != b->x ? a->x < b->x : a->y < b->y;
        });
        for (std::size_t lo = 0; lo < kids.size();) {
            std::size_t hi = lo;
            while (hi < kids.size() && kids[hi]->x == kids[lo]->x) ++hi;
            if (hi - lo >= 3) {
                std::vector<double> gaps;
                for (std::size_t i = lo + 1; i < hi; ++i)
                    gaps.push_back(static_cast<double>(kids[i]->y - (kids[i - 1]->y + kids[i - 1]->h)));
                double mean = 0.0, mean_abs = 0.0;
                for (double g : gaps) {
                    mean += g;
                    mean_abs += std::abs(g);
                }
                mean /= static_cast<double>(gaps.size());
                mean_abs /= static_cast<double>(gaps.size());
                double var = 0.0;
                for (double g : gaps) var += (g - mean) * (g - mean);
                const double sd = std::sqrt(var / static_cast<double>(gaps.size()));
                sum += 1.0 - std::min(1.0, sd / std::max(1.0, mean_abs));
                ++columns;
            }
            lo = hi;
        }
    });
    return columns == 0 ? 1.0 : sum / columns;
}

double palette(const UINode& root) {
    std::bitset<64> used;
    for_each_node(root, [&](const UINode& n) {
        if (n.color >= 0 && n.color < 64) used.set(static_cast<std::size_t>(n.color));
    });
    const auto n = static_cast<double>(used.count());
    if (n <= 4.0) return 1.0;
    return clamp01((ui::kPaletteSize - n) / 12.0);
}

Score usability_score(const ui::UITree& tree, const RewardConfig& cfg) {
    const RewardConfig c = cfg.normalized();
    const std::array<double, 3> v = {containment(tree.root), overlap(tree.root), tap_target(tree.root)};
    Score s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s.value += c.usability_weights[i] * v[i];
        s.terms[kUsabilityTerms[i]] = v[i];
    }
    s.value = clamp01(s.value);
    return s;
}

Score aesthetics_score(const ui::UITree& tree, const RewardConfig& cfg) {
    const RewardConfig c = cfg.normalized();
    const std::array<double, 4> v = {alignment(tree.root), balance(tree.root), spacing(tree.root), palette(tree.root)};
    Score s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s.value += c.aesthetics_weights[i] * v[i];
        s.terms[kAestheticsTerms[i]] = v[i];
    }
    s.value = clamp01(s.value);
    return s;
}

RewardBreakdown reward(const ui::UITree& tree, const RewardConfig& cfg) {
    const RewardConfig c = cfg.normalized();
    const Score u = usability_score(tree, c);
    const Score a = aesthetics_score(tree, c);
    RewardBreakdown b;
    b.usability = u.value;
    b.aesthetics = a.value;
    b.r = c.alpha * u.value + c.beta * a.value;
    b.terms = u.terms;
    b.terms.insert(a.terms.begin(), a.terms.end());
    return b;
}

nlohmann::json to_json(const RewardBreakdown& b) {
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& [k, v] : b.terms) terms[k] = v;
    return {{"r", b.r}, {"usability", b.usability}, {"aesthetics", b.aesthetics}, {"terms", terms}};
}

}  // namespace uigen::reward
