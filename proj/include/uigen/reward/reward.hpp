#pragma once

#include <array>
#include <map>
#include <string>

#include "json.hpp"
#include "uigen/ui/tree.hpp"

namespace uigen::reward {

/// R = alpha * usability + beta * aesthetics.
///
/// Usability averages containment, overlap and tap_target; aesthetics averages alignment,
/// balance, spacing and palette; each with its own sub-weights. Weights are normalised to sum
/// to 1 per group by `normalized()`.
struct RewardConfig {
    double alpha = 0.5;
    double beta = 0.5;
    std::array<double, 3> usability_weights = {1.0, 1.0, 1.0};
    std::array<double, 4> aesthetics_weights = {1.0, 1.0, 1.0, 1.0};

    /// Throws ConfigError on negative weights or an all-zero group.
    RewardConfig normalized() const;
};

inline constexpr std::array<const char*, 3> kUsabilityTerms = {"containment", "overlap", "tap_target"};
inline constexpr std::array<const char*, 4> kAestheticsTerms = {"alignment", "balance", "spacing", "palette"};

struct Score {
    double value = 0.0;
    std::map<std::string, double> terms;
};

struct RewardBreakdown {
    double usability = 0.0;
    double aesthetics = 0.0;
    double r = 0.0;
    std::map<std::string, double> terms;
};

Score usability_score(const ui::UITree& tree, const RewardConfig& cfg = {});
Score aesthetics_score(const ui::UITree& tree, const RewardConfig& cfg = {});
RewardBreakdown reward(const ui::UITree& tree, const RewardConfig& cfg = {});

nlohmann::json to_json(const RewardBreakdown& b);

// Individual terms, each in [0, 1].

/// Fraction of non-root nodes lying fully inside their parent (1 when there are none).
double containment(const ui::UINode& root);
/// 1 - 2 * sum of pairwise sibling intersections / total area of nodes that have siblings,
/// clamped to [0, 1]. Two identical siblings score 0.
double overlap(const ui::UINode& root);
/// Fraction of interactive leaves at least 6 wide and 3 tall (1 when there are none).
double tap_target(const ui::UINode& root);
/// Fraction of sibling pairs sharing a left edge, top edge, horizontal centre or vertical
/// centre within one grid unit (1 when there are no pairs).
double alignment(const ui::UINode& root);
/// 1 - |area-weighted x centre of the non-root nodes - 32| / 32 (1 when there are none).
double balance(const ui::UINode& root);
/// Siblings sharing a left edge, sorted by y, form a column; each column of 3 or more
/// scores 1 - min(1, std(gaps) / max(1, mean |gap|)). Mean over columns, 1 if none.
double spacing(const ui::UINode& root);
/// 1 for at most 4 distinct colours, then (16 - n) / 12.
double palette(const ui::UINode& root);

}  // namespace uigen::reward
