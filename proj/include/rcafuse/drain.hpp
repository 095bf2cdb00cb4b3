#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace rcafuse {

// Masking rules run per whitespace token; a full-match replaces the token
// with the wildcard.
struct MaskRule {
    std::string pattern;
    std::string replacement = "<*>";
};

std::vector<MaskRule> default_mask_rules();

struct DrainParams {
    int tree_depth = 4;                  // includes the count level and the leaf level
    double similarity_threshold = 0.4;
    int max_children_per_node = 100;
    std::vector<MaskRule> masking_rules = default_mask_rules();
};

struct TemplateCluster {
    int template_id = 0;
    std::vector<std::string> tokens;  // "<*>" marks a wildcard position
    std::int64_t match_count = 0;

    std::string template_string() const;
};

struct TemplateMatch {
    int template_id = 0;
    std::string template_string;
};

std::vector<std::string> mask_message(const std::string& message, const std::vector<MaskRule>& rules);

// Fixed-depth parse-tree template miner. The first tree level keys on token
// count, inner levels on leading tokens, leaves hold cluster lists. Training
// is deterministic in corpus order; a trained model is immutable and safe to
// share across threads.
class DrainModel {
public:
    static DrainModel train(const std::vector<std::string>& corpus, DrainParams params);

    std::optional<TemplateMatch> match(const std::string& message) const;

    std::vector<std::string> mask(const std::string& message) const;

    const DrainParams& params() const { return params_; }
    const std::vector<TemplateCluster>& clusters() const { return clusters_; }

    void save(const std::filesystem::path& path) const;
    static DrainModel load(const std::filesystem::path& path);

private:
    struct Node {
        std::map<std::string, std::unique_ptr<Node>> children;
        std::vector<int> cluster_ids;  // populated at leaves only
    };

    explicit DrainModel(DrainParams params);

    Node* route_for_training(const std::vector<std::string>& tokens);
    const Node* route_for_matching(const std::vector<std::string>& tokens) const;
    void absorb(const std::vector<std::string>& tokens);

    static double similarity(const std::vector<std::string>& cluster_tokens,
                             const std::vector<std::string>& tokens);

    DrainParams params_;
    std::vector<std::regex> compiled_rules_;
    Node root_;
    std::vector<TemplateCluster> clusters_;  // ids dense from 0
};

}  // namespace rcafuse
