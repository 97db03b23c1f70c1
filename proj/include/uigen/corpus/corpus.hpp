#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "uigen/core/rng.hpp"
#include "uigen/train/dataset.hpp"

namespace uigen::corpus {

/// Synthetic design generator settings.
///
/// A tree is a root container split into 1..3 equal horizontal bands ("sections"). A section
/// is a container or form stacking its leaves vertically, or a navbar laying them out in a
/// row. Section kinds and leaf kinds are drawn independently from `kind_weights`
/// (restricted to container kinds and leaf kinds respectively). Every coordinate is a
/// multiple of `grid_snap`.
struct CorpusConfig {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::array<double, ui::kNumKinds> kind_weights = {1.0, 1.0, 0.6, 2.0, 1.5, 1.0, 1.0, 1.5, 0.7, 0.5};
    int max_children_per_node = 6;
    int grid_snap = 4;
    std::array<double, 3> device_mix = {1.0, 1.0, 1.0};
    /// Probability that a design uses the left half of the canvas only.
    double half_width_prob = 0.2;
    /// Weights of the light, dark and multi-colour themes.
    std::array<double, 3> theme_mix = {0.4, 0.3, 0.3};
    double goal_prob = 0.5;

    /// Throws ConfigError.
    void check() const;
};

/// n (spec, tree) pairs; item i depends only on (seed, i).
train::Dataset generate_synthetic(const CorpusConfig& cfg);

/// One design from its own stream. Used by generate_synthetic.
train::Example generate_one(const CorpusConfig& cfg, Rng rng);

/// Spec read off a finished tree: leaf-kind multiset (counts capped at 8), the tree's device
/// and the given goals.
codec::DesignSpec spec_of(const ui::UITree& tree, bool responsive, bool accessible);

/// True when every (kind, count) of the spec is present in the tree.
bool satisfies(const ui::UITree& tree, const codec::DesignSpec& spec);

struct DatasetStats {
    std::size_t designs = 0;
    std::array<std::size_t, ui::kNumKinds> kind_counts{};
    std::map<int, std::size_t> node_count_hist;
    std::map<int, std::size_t> depth_hist;

    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats stats(const train::Dataset& data);
/// Aligned text histogram, one bar per kind, node count and depth.
std::string stats_text(const DatasetStats& s);
nlohmann::json stats_json(const DatasetStats& s);

nlohmann::json spec_to_json(const codec::DesignSpec& spec);
/// Throws ParseError / RangeError.
codec::DesignSpec spec_from_json(const nlohmann::json& j);

/// Corpus directory layout:
///   index.json          {"format": "uigen-corpus", "version": 1, "seed": s,
///                        "items": [{"id": "000000", "split": "train"}, ...]}
///   designs/<id>.json   design in the JSON schema of ui::load_json plus a "spec" field
void write_corpus(const std::filesystem::path& dir, const train::Dataset& data, const train::SplitConfig& split);

struct Corpus {
    train::Dataset items;
    std::vector<train::Part> parts;

    train::Dataset part(train::Part p) const;
};

/// Throws ParseError when the directory or a design file is missing or malformed.
Corpus read_corpus(const std::filesystem::path& dir);

}  // namespace uigen::corpus
