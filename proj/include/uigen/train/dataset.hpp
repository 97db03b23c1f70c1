#pragma once

#include <cstdint>
#include <vector>

#include "uigen/codec/codec.hpp"
#include "uigen/ui/tree.hpp"

namespace uigen::train {

/// One supervised pair: the encoder-side spec and the design it should produce.
struct Example {
    codec::DesignSpec spec;
    ui::UITree tree;

    friend bool operator==(const Example&, const Example&) = default;
};

using Dataset = std::vector<Example>;

struct SplitConfig {
    double train_frac = 0.70;
    double val_frac = 0.15;
    double test_frac = 0.15;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless the fractions are nonnegative and sum to 1.
    void check() const;
};

enum class Part : std::uint8_t { train, val, test };

/// Part of each item after a seeded shuffle. Sizes are floor(n * train_frac),
/// floor(n * val_frac) and the remainder. Throws EmptyDatasetError when n == 0.
std::vector<Part> split_assignment(std::size_t n, const SplitConfig& cfg);

struct Split {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Partitions `data` by `split_assignment`; every item lands in exactly one part, in the
/// shuffled order.
Split split(const Dataset& data, const SplitConfig& cfg);

}  // namespace uigen::train
