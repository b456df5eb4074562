#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wbc/error.hpp"
#include "wbc/features.hpp"
#include "wbc/rng.hpp"

namespace wbc {

struct Sample {
    FeatureVector features{};
    CellLabel label = CellLabel::Healthy;
    std::string source_id;
};

/// One node of a CART tree. feature = -1 marks a leaf. class_counts holds
/// the training distribution [healthy, malignant] that reached the node.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<std::int64_t, 2> class_counts{0, 0};
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  ///< root at index 0
};

struct ForestConfig {
    int n_trees = 500;
    int mtry = 5;
    std::size_t min_node_size = 1;
    std::uint64_t seed = 0;
};

struct RandomForestModel {
    std::vector<DecisionTree> trees;
    int mtry = 0;
    std::size_t min_node_size = 1;
    std::uint64_t seed = 0;
    std::size_t n_train = 0;
    std::vector<std::vector<std::size_t>> oob_indices;  ///< per tree, ascending
};

struct Prediction {
    CellLabel label = CellLabel::Healthy;
    double vote_fraction = 0.0;  ///< malignant votes / trees
};

namespace detail {

inline double gini_impurity(std::int64_t c0, std::int64_t c1) {
    const double n = static_cast<double>(c0 + c1);
    if (n == 0.0) return 0.0;
    const double p0 = c0 / n, p1 = c1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

/// Draw `mtry` distinct feature indices, then sort them so the best-split
/// scan visits candidates in ascending (feature, threshold) order and ties
/// resolve deterministically to the lowest pair.
inline std::vector<int> draw_candidate_features(Rng& rng, int mtry) {
    std::array<int, kFeatureCount> all{};
    std::iota(all.begin(), all.end(), 0);
    const int m = std::clamp<int>(mtry, 1, static_cast<int>(kFeatureCount));
    for (int i = 0; i < m; ++i) {
        const std::size_t j = i + uniform_index(rng, kFeatureCount - i);
        std::swap(all[static_cast<std::size_t>(i)], all[j]);
    }
    std::vector<int> picked(all.begin(), all.begin() + m);
    std::sort(picked.begin(), picked.end());
    return picked;
}

struct NodeSplit {
    int feature = -1;
    double threshold = 0.0;
    double weighted_gini = std::numeric_limits<double>::infinity();
};

/// Exhaustive best-Gini split over the candidate features, thresholds at
/// midpoints of adjacent distinct sorted values. Requires strict improvement
/// over the parent impurity.
inline NodeSplit best_split(const std::vector<Sample>& samples,
                            const std::vector<std::size_t>& node_idx,
                            const std::vector<int>& candidates, double parent_gini) {
    NodeSplit best;
    const double n = static_cast<double>(node_idx.size());
    std::vector<std::pair<double, int>> column(node_idx.size());
    for (int f : candidates) {
        for (std::size_t i = 0; i < node_idx.size(); ++i) {
            const Sample& s = samples[node_idx[i]];
            column[i] = {s.features[static_cast<std::size_t>(f)],
                         s.label == CellLabel::Malignant ? 1 : 0};
        }
        std::sort(column.begin(), column.end());
        std::int64_t total1 = 0;
        for (const auto& [v, y] : column) total1 += y;
        const std::int64_t total0 = static_cast<std::int64_t>(column.size()) - total1;

        std::int64_t left0 = 0, left1 = 0;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            left0 += column[i].second == 0;
            left1 += column[i].second == 1;
            if (column[i].first == column[i + 1].first) continue;
            const double thr = (column[i].first + column[i + 1].first) / 2.0;
            if (!(thr > column[i].first)) continue;  // midpoint rounded onto the lower value
            const double nl = static_cast<double>(i + 1), nr = n - nl;
            const double g = (nl * gini_impurity(left0, left1) +
                              nr * gini_impurity(total0 - left0, total1 - left1)) /
                             n;
            if (g < best.weighted_gini) best = {f, thr, g};
        }
    }
    if (best.feature >= 0 && best.weighted_gini < parent_gini) return best;
    return {};
}

inline int grow_node(DecisionTree& tree, const std::vector<Sample>& samples,
                     std::vector<std::size_t>& node_idx, std::size_t min_node_size, int mtry,
                     Rng& rng) {
    std::int64_t c0 = 0, c1 = 0;
    for (std::size_t i : node_idx) (samples[i].label == CellLabel::Malignant ? c1 : c0)++;

    const int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, {c0, c1}});

    const bool pure = c0 == 0 || c1 == 0;
    if (pure || node_idx.size() <= min_node_size) return self;

    const std::vector<int> candidates = draw_candidate_features(rng, mtry);
    const NodeSplit split =
        best_split(samples, node_idx, candidates, gini_impurity(c0, c1));
    if (split.feature < 0) return self;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : node_idx)
        (samples[i].features[static_cast<std::size_t>(split.feature)] < split.threshold
             ? left_idx
             : right_idx)
            .push_back(i);
    node_idx.clear();
    node_idx.shrink_to_fit();

    const int left = grow_node(tree, samples, left_idx, min_node_size, mtry, rng);
    const int right = grow_node(tree, samples, right_idx, min_node_size, mtry, rng);
    tree.nodes[static_cast<std::size_t>(self)].feature = split.feature;
    tree.nodes[static_cast<std::size_t>(self)].threshold = split.threshold;
    tree.nodes[static_cast<std::size_t>(self)].left = left;
    tree.nodes[static_cast<std::size_t>(self)].right = right;
    return self;
}

inline void require_defined(const FeatureVector& f, const char* op) {
    for (double v : f)
        if (!std::isfinite(v)) throw ParameterError(std::string(op) + ": undefined feature value");
}

}  // namespace detail

/// Grow one CART tree on the given sample indices (repetitions allowed, as
/// in a bootstrap draw). Splits minimize weighted Gini impurity among mtry
/// uniformly drawn candidate features; growth stops at purity, at
/// min_node_size, or when no candidate strictly improves.
inline DecisionTree train_tree(const std::vector<Sample>& samples,
                               std::vector<std::size_t> indices, int mtry,
                               std::size_t min_node_size, Rng& rng) {
    if (indices.empty()) throw ParameterError("train_tree: empty sample set");
    DecisionTree tree;
    detail::grow_node(tree, samples, indices, min_node_size, mtry, rng);
    return tree;
}

inline CellLabel tree_predict(const DecisionTree& tree, const FeatureVector& features) {
    int node = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
        node = features[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    const auto& counts = tree.nodes[static_cast<std::size_t>(node)].class_counts;
    return counts[1] >= counts[0] ? CellLabel::Malignant : CellLabel::Healthy;
}

/// Train n_trees CART trees on independent size-n bootstrap resamples.
/// Each tree owns RNG stream (seed, tree index), so growing the forest
/// never reshuffles earlier trees. Out-of-bag indices are recorded.
inline RandomForestModel train_forest(const std::vector<Sample>& samples,
                                      const ForestConfig& cfg) {
    if (samples.empty()) throw ParameterError("train_forest: no samples");
    if (cfg.n_trees < 1) throw ParameterError("train_forest: n_trees must be >= 1");
    if (cfg.mtry < 1 || cfg.mtry > static_cast<int>(kFeatureCount))
        throw ParameterError("train_forest: mtry must be in 1..24");
    for (const Sample& s : samples) detail::require_defined(s.features, "train_forest");

    const std::size_t n = samples.size();
    RandomForestModel model;
    model.mtry = cfg.mtry;
    model.min_node_size = cfg.min_node_size;
    model.seed = cfg.seed;
    model.n_train = n;
    model.trees.reserve(static_cast<std::size_t>(cfg.n_trees));
    model.oob_indices.reserve(static_cast<std::size_t>(cfg.n_trees));

    for (int t = 0; t < cfg.n_trees; ++t) {
        Rng rng = make_stream(cfg.seed, 1, static_cast<std::uint64_t>(t));
        std::vector<std::size_t> boot(n);
        std::vector<char> drawn(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            boot[i] = uniform_index(rng, n);
            drawn[boot[i]] = 1;
        }
        std::vector<std::size_t> oob;
        for (std::size_t i = 0; i < n; ++i)
            if (!drawn[i]) oob.push_back(i);
        model.trees.push_back(
            train_tree(samples, std::move(boot), cfg.mtry, cfg.min_node_size, rng));
        model.oob_indices.push_back(std::move(oob));
    }
    return model;
}

/// Majority vote across trees; exact ties go to Malignant (the safer call).
inline Prediction predict(const RandomForestModel& model, const FeatureVector& features) {
    if (model.trees.empty()) throw ParameterError("predict: model has no trees");
    detail::require_defined(features, "predict");
    std::int64_t malignant = 0;
    for (const DecisionTree& tree : model.trees)
        malignant += tree_predict(tree, features) == CellLabel::Malignant;
    const std::int64_t total = static_cast<std::int64_t>(model.trees.size());
    Prediction p;
    p.vote_fraction = static_cast<double>(malignant) / static_cast<double>(total);
    p.label = 2 * malignant >= total ? CellLabel::Malignant : CellLabel::Healthy;
    return p;
}

/// Mean decrease in accuracy: per tree, out-of-bag accuracy minus accuracy
/// after permuting one feature column among the OOB samples (averaged over
/// `repeats` permutations), then averaged over trees. `samples` must be the
/// training set the model was fit on, in the same order.
inline std::array<double, kFeatureCount> permutation_importance(
    const RandomForestModel& model, const std::vector<Sample>& samples, std::uint64_t seed,
    int repeats = 5) {
    if (samples.size() != model.n_train)
        throw ParameterError("permutation_importance: sample count does not match the model");
    if (repeats < 1) throw ParameterError("permutation_importance: repeats must be >= 1");

    std::array<double, kFeatureCount> mda{};
    Rng rng = make_stream(seed, 3, 0);
    std::size_t trees_used = 0;

    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const std::vector<std::size_t>& oob = model.oob_indices[t];
        if (oob.empty()) continue;
        ++trees_used;
        const DecisionTree& tree = model.trees[t];
        const double n_oob = static_cast<double>(oob.size());

        std::vector<FeatureVector> rows(oob.size());
        std::vector<CellLabel> truth(oob.size());
        for (std::size_t i = 0; i < oob.size(); ++i) {
            rows[i] = samples[oob[i]].features;
            truth[i] = samples[oob[i]].label;
        }
        std::int64_t base_correct = 0;
        for (std::size_t i = 0; i < rows.size(); ++i)
            base_correct += tree_predict(tree, rows[i]) == truth[i];
        const double baseline = static_cast<double>(base_correct) / n_oob;

        std::vector<std::size_t> perm(oob.size());
        for (std::size_t q = 0; q < kFeatureCount; ++q) {
            double permuted_acc = 0.0;
            for (int r = 0; r < repeats; ++r) {
                std::iota(perm.begin(), perm.end(), std::size_t{0});
                shuffle_in_place(perm, rng);
                std::int64_t correct = 0;
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    FeatureVector probe = rows[i];
                    probe[q] = rows[perm[i]][q];
                    correct += tree_predict(tree, probe) == truth[i];
                }
                permuted_acc += static_cast<double>(correct) / n_oob;
            }
            mda[q] += baseline - permuted_acc / repeats;
        }
    }
    if (trees_used == 0)
        throw ParameterError("permutation_importance: every tree has an empty OOB set");
    for (double& v : mda) v /= static_cast<double>(trees_used);
    return mda;
}

// ---------------------------------------------------------------------------
// Serialization: versioned text format, round-trip stable

inline std::uint64_t feature_order_hash() {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
    for (const char* name : kFeatureNames) {
        for (const char* p = name; *p; ++p) {
            h ^= static_cast<unsigned char>(*p);
            h *= 1099511628211ULL;
        }
        h ^= static_cast<unsigned char>('\n');
        h *= 1099511628211ULL;
    }
    return h;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string serialize_model(const RandomForestModel& model) {
    std::ostringstream out;
    out << "wbcrf 1\n";
    out << "features " << std::hex << feature_order_hash() << std::dec << "\n";
    out << "mtry " << model.mtry << "\n";
    out << "min_node_size " << model.min_node_size << "\n";
    out << "seed " << model.seed << "\n";
    out << "n_train " << model.n_train << "\n";
    out << "trees " << model.trees.size() << "\n";
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const DecisionTree& tree = model.trees[t];
        out << "tree " << t << " " << tree.nodes.size() << "\n";
        for (const TreeNode& n : tree.nodes)
            out << "n " << n.feature << " " << detail::format_double(n.threshold) << " " << n.left
                << " " << n.right << " " << n.class_counts[0] << " " << n.class_counts[1] << "\n";
        out << "oob " << t << " " << model.oob_indices[t].size();
        for (std::size_t i : model.oob_indices[t]) out << " " << i;
        out << "\n";
    }
    out << "end\n";
    return out.str();
}

inline RandomForestModel parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "wbcrf" || version != 1)
        throw SchemaError("model parse: expected 'wbcrf 1' header");
    std::uint64_t hash = 0;
    if (!(in >> word >> std::hex >> hash >> std::dec) || word != "features")
        throw SchemaError("model parse: missing feature hash");
    if (hash != feature_order_hash())
        throw SchemaError("model parse: feature ordering hash mismatch");

    RandomForestModel model;
    std::size_t n_trees = 0;
    auto expect_kv = [&](const char* key, auto& value) {
        if (!(in >> word >> value) || word != key)
            throw SchemaError(std::string("model parse: expected '") + key + "'");
    };
    expect_kv("mtry", model.mtry);
    expect_kv("min_node_size", model.min_node_size);
    expect_kv("seed", model.seed);
    expect_kv("n_train", model.n_train);
    expect_kv("trees", n_trees);

    model.trees.resize(n_trees);
    model.oob_indices.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::size_t index = 0, n_nodes = 0;
        if (!(in >> word >> index >> n_nodes) || word != "tree" || index != t)
            throw SchemaError("model parse: malformed tree header");
        model.trees[t].nodes.resize(n_nodes);
        for (TreeNode& n : model.trees[t].nodes) {
            if (!(in >> word >> n.feature >> n.threshold >> n.left >> n.right >>
                  n.class_counts[0] >> n.class_counts[1]) ||
                word != "n")
                throw SchemaError("model parse: malformed node");
        }
        std::size_t oob_count = 0;
        if (!(in >> word >> index >> oob_count) || word != "oob" || index != t)
            throw SchemaError("model parse: malformed oob record");
        model.oob_indices[t].resize(oob_count);
        for (std::size_t& i : model.oob_indices[t])
            if (!(in >> i)) throw SchemaError("model parse: truncated oob record");
    }
    if (!(in >> word) || word != "end") throw SchemaError("model parse: missing end marker");
    return model;
}

inline void save_model(const RandomForestModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open model file for writing: " + path);
    out << serialize_model(model);
    if (!out) throw Error("failed writing model file: " + path);
}

inline RandomForestModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

/// Stable digest of the serialized model; equal digests mean equal models.
inline std::uint64_t model_digest(const RandomForestModel& model) {
    const std::string text = serialize_model(model);
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace wbc
