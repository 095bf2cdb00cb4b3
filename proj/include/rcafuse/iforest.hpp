#pragma once

#include "json.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rcafuse {

struct ForestParams {
    int n_trees = 100;
    int subsample_size = 256;  // capped at the training-set size
    double contamination = 0.01;
    std::uint64_t rng_seed = 42;
};

// Isolation Forest over small numeric vectors. Scores in (0,1]; higher is
// more anomalous. The anomaly threshold is fixed at fit time from the
// (1 - contamination) quantile of training scores; predict labels a point
// -1 iff its score is strictly above the threshold.
class ForestModel {
public:
    // A default-constructed model is an empty placeholder; use fit/from_json.
    ForestModel() = default;

    static ForestModel fit(const std::vector<std::vector<double>>& samples, ForestParams params);

    double score(std::span<const double> x) const;
    int predict(std::span<const double> x) const;  // -1 anomaly, +1 normal

    // 1-D convenience used by the trace pipeline.
    double score(double x) const { return score(std::span<const double>(&x, 1)); }
    int predict(double x) const { return predict(std::span<const double>(&x, 1)); }

    double score_threshold() const { return score_threshold_; }
    std::size_t dimension() const { return train_mean_.size(); }
    const ForestParams& params() const { return params_; }
    const std::vector<double>& train_mean() const { return train_mean_; }

    nlohmann::json to_json() const;
    static ForestModel from_json(const nlohmann::json& j);

private:
    // leaves have dim == -1 and carry the sample count for the path-length
    // adjustment; internal nodes split on x[dim] < split
    struct Node {
        int dim = -1;
        double split = 0.0;
        int left = -1;
        int right = -1;
        std::int64_t size = 0;
    };
    struct Tree {
        std::vector<Node> nodes;  // node 0 is the root
    };

    double path_length(const Tree& tree, std::span<const double> x) const;

    ForestParams params_;
    std::vector<Tree> trees_;
    double score_threshold_ = 1.0;
    double c_psi_ = 1.0;  // expected path length normalizer for the subsample size
    std::vector<double> train_mean_;
};

// Expected unsuccessful-search path length c(n) of a binary search tree,
// with H(i) ~ ln(i) + Euler-Mascheroni.
double average_path_length(std::int64_t n);

}  // namespace rcafuse
