#include "uigen/train/dataset.hpp"

#include <cmath>
#include <numeric>

#include "uigen/core/error.hpp"
#include "uigen/core/rng.hpp"

namespace uigen::train {

void SplitConfig::check() const {
    if (train_frac < 0 || val_frac < 0 || test_frac < 0) throw ConfigError("split fractions must be nonnegative");
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

namespace {

// Fisher-Yates with the pinned generator.
std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
}

}  // namespace

std::vector<Part> split_assignment(std::size_t n, const SplitConfig& cfg) {
    cfg.check();
    if (n == 0) throw EmptyDatasetError("cannot split an empty dataset");
    // The small epsilon keeps exact products such as 100 * 0.7 from flooring to 69.
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.train_frac + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.val_frac + 1e-9));
    const auto order = shuffled(n, cfg.seed);
    std::vector<Part> parts(n, Part::test);
    for (std::size_t r = 0; r < n; ++r) {
        if (r < n_train) {
            parts[order[r]] = Part::train;
        } else if (r < n_train + n_val) {
            parts[order[r]] = Part::val;
        }
    }
    return parts;
}

Split split(const Dataset& data, const SplitConfig& cfg) {
    cfg.check();
    if (data.empty()) throw EmptyDatasetError("cannot split an empty dataset");
    const auto order = shuffled(data.size(), cfg.seed);
    const auto parts = split_assignment(data.size(), cfg);
    Split out;
    for (std::size_t i : order) {
        switch (parts[i]) {
            case Part::train: out.train.push_back(data[i]); break;
            case Part::val: out.val.push_back(data[i]); break;
            case Part::test: out.test.push_back(data[i]); break;
        }
    }
    return out;
}

}  // namespace uigen::train
