#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "wbc/error.hpp"
#include "wbc/forest.hpp"
#include "wbc/rng.hpp"

namespace wbc {

/// Index-based train/validation partition of a sample vector.
struct Split {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> validation_indices;
};

inline std::vector<Sample> subset(const std::vector<Sample>& samples,
                                  const std::vector<std::size_t>& indices) {
    std::vector<Sample> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(samples[i]);
    return out;
}

/// Per-class random split preserving class proportions: each stratum
/// contributes round(train_fraction * n) samples to the training pool
/// (clamped so both sides stay nonempty). Deterministic under seed.
inline Split stratified_split(const std::vector<Sample>& samples, double train_fraction,
                              std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ParameterError("stratified_split: train_fraction must be in (0, 1)");
    std::array<std::vector<std::size_t>, 2> strata;
    for (std::size_t i = 0; i < samples.size(); ++i)
        strata[samples[i].label == CellLabel::Malignant ? 1 : 0].push_back(i);

    Split split;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t>& stratum = strata[static_cast<std::size_t>(cls)];
        if (stratum.size() < 2)
            throw ParameterError(std::string("stratified_split: class '") +
                                 label_name(static_cast<CellLabel>(cls)) +
                                 "' needs at least 2 samples, got " +
                                 std::to_string(stratum.size()));
        Rng rng = make_stream(seed, 0, static_cast<std::uint64_t>(cls));
        shuffle_in_place(stratum, rng);
        const auto n = static_cast<long long>(stratum.size());
        const long long n_train = std::clamp<long long>(
            std::llround(train_fraction * static_cast<double>(n)), 1, n - 1);
        split.train_indices.insert(split.train_indices.end(), stratum.begin(),
                                   stratum.begin() + n_train);
        split.validation_indices.insert(split.validation_indices.end(),
                                        stratum.begin() + n_train, stratum.end());
    }
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.validation_indices.begin(), split.validation_indices.end());
    return split;
}

/// Grid-search outcome over the per-split feature count.
struct TuneResult {
    std::vector<int> grid;             ///< mtry values tried, ascending
    std::vector<double> cv_accuracy;   ///< mean held-out fold accuracy per grid value
    int chosen_mtry = 1;               ///< argmax, ties to the smallest value
    std::vector<std::size_t> pool;     ///< the pool indices that were folded
    std::vector<int> fold_of;          ///< fold id of pool[i]
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
}

}  // namespace detail

/// Stratified k-fold cross-validation grid search over mtry = 1..grid_max.
/// Folds are built per class by shuffled round-robin, so every fold holds
/// each class's count to within one. Accuracy per grid value is the
/// unweighted mean of held-out fold accuracies. A bookkeeping check refuses
/// to score any sample that appears in its own training fold.
inline TuneResult cross_validate(const std::vector<Sample>& samples,
                                 const std::vector<std::size_t>& pool, int folds, int grid_max,
                                 const ForestConfig& base, std::uint64_t seed) {
    if (folds < 2) throw ParameterError("cross_validate: needs at least 2 folds");
    if (grid_max < 1 || grid_max > static_cast<int>(kFeatureCount))
        throw ParameterError("cross_validate: grid_max must be in 1..24");

    std::array<std::vector<std::size_t>, 2> strata;  // positions within pool
    for (std::size_t p = 0; p < pool.size(); ++p)
        strata[samples[pool[p]].label == CellLabel::Malignant ? 1 : 0].push_back(p);
    for (int cls = 0; cls < 2; ++cls)
        if (strata[static_cast<std::size_t>(cls)].size() < static_cast<std::size_t>(folds))
            throw ParameterError(std::string("cross_validate: class '") +
                                 label_name(static_cast<CellLabel>(cls)) + "' has fewer than " +
                                 std::to_string(folds) + " samples");

    TuneResult result;
    result.pool = pool;
    result.fold_of.assign(pool.size(), -1);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t>& stratum = strata[static_cast<std::size_t>(cls)];
        Rng rng = make_stream(seed, 2, static_cast<std::uint64_t>(cls));
        shuffle_in_place(stratum, rng);
        for (std::size_t i = 0; i < stratum.size(); ++i)
            result.fold_of[stratum[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }

    for (int m = 1; m <= grid_max; ++m) {
        double mean_accuracy = 0.0;
        for (int f = 0; f < folds; ++f) {
            std::vector<std::size_t> train_idx, test_idx;
            for (std::size_t p = 0; p < pool.size(); ++p)
                (result.fold_of[p] == f ? test_idx : train_idx).push_back(pool[p]);

            std::vector<char> in_train(samples.size(), 0);
            for (std::size_t i : train_idx) in_train[i] = 1;
            for (std::size_t i : test_idx)
                if (in_train[i])
                    throw std::logic_error("cross_validate: fold leakage detected");

            ForestConfig cfg = base;
            cfg.mtry = m;
            cfg.seed = detail::mix_seed(seed, static_cast<std::uint64_t>(m * folds + f));
            const RandomForestModel model = train_forest(subset(samples, train_idx), cfg);

            std::int64_t correct = 0;
            for (std::size_t i : test_idx)
                correct += predict(model, samples[i].features).label == samples[i].label;
            mean_accuracy +=
                static_cast<double>(correct) / static_cast<double>(test_idx.size());
        }
        result.grid.push_back(m);
        result.cv_accuracy.push_back(mean_accuracy / folds);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.cv_accuracy.size(); ++i)
        if (result.cv_accuracy[i] > result.cv_accuracy[best]) best = i;
    result.chosen_mtry = result.grid[best];
    return result;
}

/// The full training protocol: stratified 80/20 split, k-fold CV grid
/// search on the training pool, final refit on the whole pool at the chosen
/// mtry.
struct ProtocolConfig {
    double train_fraction = 0.8;
    int folds = 5;
    int grid_max = 10;
    int n_trees = 500;
    std::size_t min_node_size = 1;
    std::uint64_t seed = 0;
};

struct TrainOutcome {
    Split split;
    TuneResult tune;
    RandomForestModel model;  ///< refit on the full training pool
};

inline TrainOutcome run_training_protocol(const std::vector<Sample>& samples,
                                          const ProtocolConfig& cfg) {
    TrainOutcome outcome;
    outcome.split = stratified_split(samples, cfg.train_fraction, cfg.seed);
    ForestConfig base;
    base.n_trees = cfg.n_trees;
    base.min_node_size = cfg.min_node_size;
    outcome.tune =
        cross_validate(samples, outcome.split.train_indices, cfg.folds, cfg.grid_max, base,
                       cfg.seed);
    ForestConfig final_cfg = base;
    final_cfg.mtry = outcome.tune.chosen_mtry;
    final_cfg.seed = cfg.seed;
    outcome.model = train_forest(subset(samples, outcome.split.train_indices), final_cfg);
    return outcome;
}

}  // namespace wbc
