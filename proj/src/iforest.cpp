#include "rcafuse/iforest.hpp"

#include "rcafuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

namespace rcafuse {

using nlohmann::json;

namespace {

constexpr double kEulerMascheroni = 0.5772156649;

// Deterministic uniform helpers over mt19937_64 raw output, identical on
// every platform (distribution classes are implementation-defined).
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
    return lo + (hi - lo) * u;
}

// Linear interpolation between closest ranks on a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double average_path_length(std::int64_t n) {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    const double nd = static_cast<double>(n);
    const double harmonic = std::log(nd - 1.0) + kEulerMascheroni;
    return 2.0 * harmonic - 2.0 * (nd - 1.0) / nd;
}

ForestModel ForestModel::fit(const std::vector<std::vector<double>>& samples, ForestParams params) {
    if (params.n_trees < 1 || params.subsample_size < 1 || params.contamination <= 0.0 ||
        params.contamination > 0.5) {
        throw Error(ErrorCode::InvalidConfig, "bad forest params");
    }
    if (samples.size() < 8) {
        throw Error(ErrorCode::TooFewSamples,
                    "need at least 8 samples, got " + std::to_string(samples.size()));
    }
    const std::size_t dim = samples.front().size();
    if (dim == 0) {
        throw Error(ErrorCode::DimensionMismatch, "zero-dimensional samples");
    }
    for (const auto& s : samples) {
        if (s.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "inconsistent sample dimensions");
        }
        for (double v : s) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteInput, "non-finite training sample");
            }
        }
    }

    ForestModel model;
    model.params_ = params;

    model.train_mean_.assign(dim, 0.0);
    for (const auto& s : samples) {
        for (std::size_t d = 0; d < dim; ++d) model.train_mean_[d] += s[d];
    }
    for (auto& m : model.train_mean_) m /= static_cast<double>(samples.size());

    const std::size_t psi = std::min<std::size_t>(params.subsample_size, samples.size());
    const int height_limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));
    model.c_psi_ = average_path_length(static_cast<std::int64_t>(psi));

    std::mt19937_64 rng(params.rng_seed);
    std::vector<std::size_t> pool(samples.size());
    std::iota(pool.begin(), pool.end(), 0);

    model.trees_.reserve(params.n_trees);
    for (int t = 0; t < params.n_trees; ++t) {
        // partial Fisher-Yates draw of psi indices without replacement
        for (std::size_t i = 0; i < psi; ++i) {
            const std::size_t j = i + uniform_index(rng, pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::size_t> subset(pool.begin(), pool.begin() + psi);

        Tree tree;
        // recursive builder over index ranges; returns node id
        std::function<int(std::vector<std::size_t>&, int)> build =
            [&](std::vector<std::size_t>& idx, int depth) -> int {
            const int node_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(Node{});
            tree.nodes[node_id].size = static_cast<std::int64_t>(idx.size());
            if (depth >= height_limit || idx.size() <= 1) {
                return node_id;
            }
            // pick a split dimension uniformly among those with spread
            std::vector<std::size_t> spread_dims;
            for (std::size_t d = 0; d < dim; ++d) {
                double lo = samples[idx[0]][d], hi = lo;
                for (std::size_t i : idx) {
                    lo = std::min(lo, samples[i][d]);
                    hi = std::max(hi, samples[i][d]);
                }
                if (hi > lo) spread_dims.push_back(d);
            }
            if (spread_dims.empty()) {
                return node_id;  // zero spread everywhere: leaf
            }
            const std::size_t d = spread_dims[uniform_index(rng, spread_dims.size())];
            double lo = samples[idx[0]][d], hi = lo;
            for (std::size_t i : idx) {
                lo = std::min(lo, samples[i][d]);
                hi = std::max(hi, samples[i][d]);
            }
            const double split = uniform_real(rng, lo, hi);

            std::vector<std::size_t> left, right;
            for (std::size_t i : idx) {
                (samples[i][d] < split ? left : right).push_back(i);
            }
            idx.clear();
            idx.shrink_to_fit();

            const int left_id = build(left, depth + 1);
            const int right_id = build(right, depth + 1);
            tree.nodes[node_id].dim = static_cast<int>(d);
            tree.nodes[node_id].split = split;
            tree.nodes[node_id].left = left_id;
            tree.nodes[node_id].right = right_id;
            return node_id;
        };
        build(subset, 0);
        model.trees_.push_back(std::move(tree));
    }

    // threshold from the training-score quantile
    std::vector<double> train_scores;
    train_scores.reserve(samples.size());
    for (const auto& s : samples) {
        train_scores.push_back(model.score(std::span<const double>(s.data(), s.size())));
    }
    std::sort(train_scores.begin(), train_scores.end());
    model.score_threshold_ = quantile_sorted(train_scores, 1.0 - params.contamination);
    return model;
}

double ForestModel::path_length(const Tree& tree, std::span<const double> x) const {
    int node = 0;
    int depth = 0;
    while (tree.nodes[node].dim >= 0) {
        const auto& n = tree.nodes[node];
        node = x[static_cast<std::size_t>(n.dim)] < n.split ? n.left : n.right;
        ++depth;
    }
    return static_cast<double>(depth) + average_path_length(tree.nodes[node].size);
}

double ForestModel::score(std::span<const double> x) const {
    if (x.size() != dimension()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "probe has dimension " + std::to_string(x.size()) + ", model has " +
                        std::to_string(dimension()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteInput, "non-finite probe");
        }
    }
    double total = 0.0;
    for (const auto& tree : trees_) {
        total += path_length(tree, x);
    }
    const double mean_path = total / static_cast<double>(trees_.size());
    return std::pow(2.0, -mean_path / c_psi_);
}

int ForestModel::predict(std::span<const double> x) const {
    return score(x) > score_threshold_ ? -1 : +1;
}

json ForestModel::to_json() const {
    json j;
    j["params"] = {{"n_trees", params_.n_trees},
                   {"subsample_size", params_.subsample_size},
                   {"contamination", params_.contamination},
                   {"rng_seed", params_.rng_seed}};
    j["score_threshold"] = score_threshold_;
    j["c_psi"] = c_psi_;
    j["train_mean"] = train_mean_;
    json trees = json::array();
    for (const auto& tree : trees_) {
        json nodes = json::array();
        for (const auto& n : tree.nodes) {
            nodes.push_back({{"d", n.dim}, {"s", n.split}, {"l", n.left}, {"r", n.right}, {"n", n.size}});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

ForestModel ForestModel::from_json(const json& j) {
    try {
        ForestModel model;
        const auto& p = j.at("params");
        model.params_.n_trees = p.at("n_trees").get<int>();
        model.params_.subsample_size = p.at("subsample_size").get<int>();
        model.params_.contamination = p.at("contamination").get<double>();
        model.params_.rng_seed = p.at("rng_seed").get<std::uint64_t>();
        model.score_threshold_ = j.at("score_threshold").get<double>();
        model.c_psi_ = j.at("c_psi").get<double>();
        model.train_mean_ = j.at("train_mean").get<std::vector<double>>();
        for (const auto& tree_json : j.at("trees")) {
            Tree tree;
            for (const auto& n : tree_json) {
                Node node;
                node.dim = n.at("d").get<int>();
                node.split = n.at("s").get<double>();
                node.left = n.at("l").get<int>();
                node.right = n.at("r").get<int>();
                node.size = n.at("n").get<std::int64_t>();
                tree.nodes.push_back(node);
            }
            if (tree.nodes.empty()) {
                throw Error(ErrorCode::CorruptModelFile, "empty tree in forest model");
            }
            model.trees_.push_back(std::move(tree));
        }
        if (model.trees_.empty() || model.train_mean_.empty()) {
            throw Error(ErrorCode::CorruptModelFile, "forest model has no trees");
        }
        return model;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptModelFile, std::string("forest model: ") + e.what());
    }
}

}  // namespace rcafuse
